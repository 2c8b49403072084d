#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "superopt/error.hpp"
#include "superopt/report.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Superoptimal four-block / Nehari solver"};
  app.require_subcommand(1);

  superopt::RunConfig config;
  std::string checks = "all";
  std::string transpose = "auto";

  CLI::App* solve = app.add_subcommand("solve", "Solve one symbol and write a report");
  solve->add_option("--input", config.input_path, "Symbol JSON file")->required();
  solve->add_option("--out-report", config.out_report, "Report JSON path");
  solve->add_option("--out-csv", config.out_csv, "Singular-value profile CSV path");
  solve->add_option("--grid-size", config.solver.grid_size, "Working grid size (0: automatic)");
  solve->add_option("--n-in", config.solver.n_in, "Truncation parameter (0: automatic)");
  solve->add_option("--degree", config.solver.degree_M, "Interpolant degree (0: automatic)");
  solve->add_option("--tol-gap", config.solver.tol_gap, "Relative optimality gap");
  solve->add_option("--zero-tol", config.solver.zero_tol, "Relative zero threshold for t_j");
  solve->add_option("--eq-tol", config.solver.eq_tol, "Relative tie threshold for t_j");
  solve->add_option("--rank-tol", config.solver.rank_tol, "Relative rank threshold");
  solve->add_option("--seed", config.solver.seed, "Seed for tie-breaking");
  solve->add_option("--checks", checks, "all, none or a list of constancy,index_sums,inequalities");
  solve->add_option("--transpose", transpose, "auto, on or off")
      ->check(CLI::IsMember({"auto", "on", "off"}));

  std::string validate_path;
  CLI::App* val = app.add_subcommand("validate", "Check a symbol file without solving");
  val->add_option("--input", validate_path, "Symbol JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : superopt::exit_parse;
  }

  if (*val) {
    const auto violations = superopt::validate(validate_path);
    for (const auto& v : violations) std::cerr << v.path << ": " << v.message << "\n";
    if (violations.empty()) std::cout << "ok\n";
    return violations.empty() ? superopt::exit_ok : superopt::exit_parse;
  }

  try {
    config.checks = superopt::CheckSelection::parse(checks);
  } catch (const superopt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return superopt::exit_parse;
  }
  config.solver.transpose = transpose == "on"    ? superopt::TransposeMode::on
                            : transpose == "off" ? superopt::TransposeMode::off
                                                 : superopt::TransposeMode::automatic;
  return superopt::run(config, std::cerr);
}
