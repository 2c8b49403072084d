#include "superopt/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/SVD>

#include "superopt/error.hpp"
#include "superopt/weight_diagnostics.hpp"

namespace superopt {

using nlohmann::json;

namespace {

std::string format_double(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  // Keep a marker of floating type so readers do not narrow to integers.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void write_json(std::ostream& os, const json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << json(it.key()).dump() << ": ";
        write_json(os, it.value(), indent, depth + 1);
      }
      os << "\n" << close << "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) os << ",\n";
        os << pad;
        write_json(os, j[i], indent, depth + 1);
      }
      os << "\n" << close << "]";
      return;
    }
    case json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

json index_sums_json(const IndexSumReport& r) {
  json out = {{"ok", r.ok}, {"entries", json::array()}};
  for (const auto& e : r.entries) {
    out["entries"].push_back({{"a", e.a},
                              {"expected", e.expected},
                              {"dim", e.dim},
                              {"dim_refined", e.dim_refined},
                              {"stable", e.stable},
                              {"ill_separated", e.ill_separated},
                              {"match", e.match}});
  }
  return out;
}

json inequalities_json(const InequalityReport& r) {
  json out = {{"ok", r.ok}, {"entries", json::array()}};
  for (const auto& e : r.entries) {
    out["entries"].push_back({{"kind", e.kind},
                              {"level", e.level},
                              {"j", e.j},
                              {"lhs", e.lhs},
                              {"rhs", e.rhs},
                              {"floor", e.floor},
                              {"ok", e.ok}});
  }
  return out;
}

json constancy_json(const ConstancyReport& r) {
  json out = {{"ok", r.ok}, {"entries", json::array()}};
  for (const auto& e : r.entries) {
    out["entries"].push_back(
        {{"j", e.j}, {"min", e.min}, {"max", e.max}, {"flatness", e.flatness}, {"ok", e.ok}});
  }
  return out;
}

json config_json(const RunConfig& c) {
  const SolverConfig& s = c.solver;
  const char* tr = s.transpose == TransposeMode::automatic ? "auto"
                   : s.transpose == TransposeMode::on      ? "on"
                                                           : "off";
  return {{"grid_size", s.grid_size},       {"n_in", s.n_in},
          {"degree", s.degree_M},           {"tol_gap", s.tol_gap},
          {"zero_tol", s.zero_tol},         {"eq_tol", s.eq_tol},
          {"rank_tol", s.rank_tol},         {"seed", s.seed},
          {"transpose", tr},
          {"checks",
           {{"constancy", c.checks.constancy},
            {"index_sums", c.checks.index_sums},
            {"inequalities", c.checks.inequalities}}}};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

CheckSelection CheckSelection::parse(const std::string& spec) {
  if (spec == "all") return {};
  CheckSelection c{false, false, false};
  if (spec == "none") return c;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "constancy") {
      c.constancy = true;
    } else if (item == "index_sums") {
      c.index_sums = true;
    } else if (item == "inequalities") {
      c.inequalities = true;
    } else {
      throw Error("parse", "unknown check '" + item + "'");
    }
  }
  return c;
}

int exit_code_for(const std::string& code) {
  if (code == "parse" || code == "invalid_partition" || code == "shape_mismatch" ||
      code == "invalid_config") {
    return exit_parse;
  }
  if (code == "essential_norm_hypothesis" || code == "hypothesis_violated") {
    return exit_hypothesis;
  }
  return exit_convergence;
}

std::string singular_value_csv(const SuperoptimalResult& result) {
  std::ostringstream os;
  const int levels = static_cast<int>(result.t_seq.size());
  os << "theta";
  for (int j = 0; j < levels; ++j) os << ",s_" << j;
  os << "\n";
  const int grid = static_cast<int>(result.error_samples.size());
  for (int l = 0; l < grid; ++l) {
    Eigen::JacobiSVD<CMatrix> svd(result.error_samples[l]);
    const Eigen::VectorXd& s = svd.singularValues();
    os << format_double(2.0 * std::numbers::pi * l / grid);
    for (int j = 0; j < levels; ++j) os << "," << format_double(j < s.size() ? s(j) : 0.0);
    os << "\n";
  }
  return os.str();
}

RunOutcome solve_and_report(const MatrixSymbol& sym, const RunConfig& config) {
  RunOutcome out;
  json& rep = out.report;
  rep["schema"] = "superopt-report/1";
  const BlockPartition& p = sym.partition();
  rep["input"] = {{"partition", {{"m1", p.m1}, {"m2", p.m2}, {"n1", p.n1}, {"n2", p.n2}}},
                  {"degree", sym.degree()}};
  rep["config"] = config_json(config);
  json timings = json::object();
  const auto start = std::chrono::steady_clock::now();

  try {
    const SolverConfig& sc = config.solver;
    if (!(sc.tol_gap > 0 && sc.zero_tol > 0 && sc.eq_tol > 0 && sc.rank_tol > 0)) {
      throw Error("invalid_config", "tolerances must be positive");
    }
    if (sc.grid_size > 0 && sc.grid_size < 2 * sym.degree() + 2) {
      throw Error("invalid_config", "grid_size below 2*N_sym+2");
    }
    const SuperoptimalResult res = recurse_superoptimal(sym, sc);
    timings["solve_s"] = seconds_since(start);

    rep["t_seq"] = res.t_seq;
    rep["extended_t"] = res.indices.extended_t;
    rep["indices"] = {{"k", res.indices.k}};
    json nu = json::array();
    for (const auto& [a, v] : res.indices.nu) nu.push_back({{"a", a}, {"nu", v}});
    rep["nu"] = nu;
    rep["transposed"] = res.transposed;
    rep["grid_size"] = res.grid_size;
    rep["Q"] = symbol_to_json(res.Q.trimmed(1e-14 * std::max(1.0, res.t0)));
    rep["norms"] = {{"gamma", res.t0},
                    {"error_linf", linf_norm(res.error_samples)},
                    {"Q_linf", res.Q_samples.empty() ? 0.0 : linf_norm(res.Q_samples)}};
    rep["hypothesis_check"] = {{"essential_lower_bound", res.essential_lower_bound},
                               {"gamma_norm", res.t0},
                               {"holds", res.t0 == 0.0 || res.essential_lower_bound < res.t0}};
    json levels = json::array();
    for (const auto& s : res.steps) {
      levels.push_back({{"level", s.level},
                        {"t", s.t},
                        {"k", s.k},
                        {"kernel_dim", s.kernel_dim},
                        {"multiplicity", s.multiplicity},
                        {"base_case", s.base_case},
                        {"theta_degree", s.theta.degree()},
                        {"tau_degree", s.tau.degree()},
                        {"n_in", s.n_in},
                        {"essential_lower_bound", s.essential_lower_bound},
                        {"sandwich_residual", s.sandwich_residual},
                        {"interpolation_residual", s.interpolation_residual},
                        {"winding_residual", s.winding_residual},
                        {"coouter_margin_v", s.pair.v.coouter_margin},
                        {"coouter_margin_w", s.pair.w.coouter_margin}});
    }
    rep["levels"] = levels;
    rep["residuals"] = {{"factorization", res.factorization.residual},
                        {"Q_antianalytic", res.analytic_residual}};

    json diag = json::object();
    bool diag_ok = true;
    auto timed = [&](const char* name, auto&& fn) {
      const auto t0 = std::chrono::steady_clock::now();
      fn();
      timings[std::string(name) + "_s"] = seconds_since(t0);
    };
    if (config.checks.constancy) {
      timed("constancy", [&] {
        const ConstancyReport r = check_constancy(res);
        diag["constancy"] = constancy_json(r);
        diag_ok = diag_ok && r.ok;
      });
    }
    if (config.checks.index_sums && !res.steps.empty()) {
      timed("index_sums", [&] {
        const IndexSumReport r = check_index_sums(sym, res, sc.n_in);
        diag["index_sums"] = index_sums_json(r);
        diag_ok = diag_ok && r.ok;
      });
    }
    if (config.checks.inequalities && !res.steps.empty()) {
      timed("inequalities", [&] {
        const InequalityReport r = check_singular_inequalities(sym, res, sc.n_in);
        diag["inequalities"] = inequalities_json(r);
        diag_ok = diag_ok && r.ok;
      });
    }
    rep["diagnostics"] = diag;
    rep["diagnostics_ok"] = diag_ok;
    rep["status"] = "ok";
    out.csv = singular_value_csv(res);
  } catch (const Error& e) {
    rep["status"] = "error";
    rep["error"] = {{"code", e.code()},
                    {"message", e.detail()},
                    {"level", e.level()},
                    {"residual", std::isnan(e.residual()) ? json(nullptr) : json(e.residual())}};
    out.exit_code = exit_code_for(e.code());
  }
  timings["total_s"] = seconds_since(start);
  rep["timings"] = timings;
  return out;
}

int run(const RunConfig& config, std::ostream& log) {
  MatrixSymbol sym{BlockPartition{}};
  try {
    sym = symbol_from_json(read_json_file(config.input_path));
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return exit_parse;
  }
  const RunOutcome out = solve_and_report(sym, config);
  if (!config.out_report.empty()) {
    std::ofstream f(config.out_report, std::ios::binary);
    f << dump_report(out.report) << "\n";
  }
  if (!config.out_csv.empty() && out.exit_code == exit_ok) {
    std::ofstream f(config.out_csv, std::ios::binary);
    f << out.csv;
  }
  if (out.exit_code != exit_ok) {
    const json& err = out.report["error"];
    log << "error: " << err["code"].get<std::string>() << " at level " << err["level"].get<int>()
        << ": " << err["message"].get<std::string>() << "\n";
  }
  return out.exit_code;
}

std::vector<Violation> validate(const std::string& input_path) {
  try {
    return validate_symbol_json(read_json_file(input_path));
  } catch (const Error& e) {
    return {Violation{"", e.detail()}};
  }
}

json canonical_report(const json& report) {
  json out = report;
  out.erase("timings");
  return out;
}

std::string dump_report(const json& report) {
  std::ostringstream os;
  write_json(os, report, 2, 0);
  return os.str();
}

}  // namespace superopt
