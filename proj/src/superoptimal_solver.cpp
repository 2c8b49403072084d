#include "superopt/superoptimal_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "superopt/error.hpp"
#include "symbol_blocks.hpp"

namespace superopt {

using detail::embed_corner;
using detail::rows_of;
using detail::shifted;
using detail::taylor_entry;

namespace {

// Derived symbols keep coefficients above this fraction of the largest one.
constexpr double kDerivedTrim = 1e-12;

struct GridTooCoarse {};

int working_grid(const MatrixSymbol& sym, const SolverConfig& cfg) {
  if (cfg.grid_size > 0) return cfg.grid_size;
  return std::max(2048, default_grid_size(sym.degree()));
}

// Largest Fourier coefficient at |k| >= G/4 relative to the largest overall,
// or to `scale` when that is larger.
double tail_ratio(const MatrixGrid& s, double scale) {
  if (s.empty() || s[0].size() == 0) return 0.0;
  const int grid = static_cast<int>(s.size());
  double top = scale, tail = 0.0;
  for (int i = 0; i < s[0].rows(); ++i) {
    for (int j = 0; j < s[0].cols(); ++j) {
      const CVector c = coefficients_from_samples(grid_entry(s, i, j));
      for (int l = 0; l < grid; ++l) {
        const double a = std::abs(c(l));
        top = std::max(top, a);
        if (std::abs(frequency_of_slot(l, grid)) >= grid / 4) tail = std::max(tail, a);
      }
    }
  }
  return top > 0.0 ? tail / top : 0.0;
}

double essential_bound(const MatrixGrid& s, const BlockPartition& p) {
  double bound = 0.0;
  if (p.m2 > 0) bound = std::max(bound, linf_norm(detail::corner(s, p.m1, 0, p.m2, p.cols())));
  if (p.n2 > 0) bound = std::max(bound, linf_norm(detail::corner(s, 0, p.n1, p.rows(), p.n2)));
  return bound;
}

struct GammaSetup {
  TruncatedOperator op;
  int n_in = 0;
  bool converged = true;
  double change = 0.0;  // relative change of ||Gamma|| between the last two sizes
};

// Four-block truncations are checked at N_in and N_in + 8 and N_in doubles
// until ||Gamma|| settles; Nehari truncations are exact.
GammaSetup gamma_for(const MatrixSymbol& phi, int level, const SolverConfig& cfg) {
  const BlockPartition& p = phi.partition();
  const bool nehari = p.m2 == 0 && p.n2 == 0;
  // Only the anti-analytic part matters for a Hankel operator.
  const MatrixSymbol src = nehari ? riesz_project(phi, RieszPart::antianalytic) : phi;
  GammaSetup out;
  if (level == 0) {
    out.n_in = cfg.n_in > 0 ? cfg.n_in : default_n_in(phi);
  } else if (nehari) {
    out.n_in = std::max(src.negative_degree(), 1);
  } else {
    out.n_in = std::min(default_n_in(src), cfg.n_in_cap);
  }
  if (nehari) {
    out.op = build_operator(src, OperatorKind::four_block, out.n_in);
    return out;
  }
  const int cap = std::max(out.n_in, cfg.n_in_cap);
  int n = out.n_in;
  for (;;) {
    const double s0 = singular_values(build_operator(src, OperatorKind::four_block, n), 1)[0];
    TruncatedOperator op = build_operator(src, OperatorKind::four_block, n + 8);
    const double s1 = singular_values(op, 1)[0];
    out.change = s1 > 0.0 ? std::abs(s1 - s0) / s1 : 0.0;
    out.op = std::move(op);
    out.n_in = n + 8;
    if (out.change <= cfg.truncation_tol) return out;
    if (n >= cap) {
      out.converged = false;
      return out;
    }
    n = std::min(2 * n, cap);
  }
}

// Maximizing pair, or nullopt when the operator vanishes.
std::optional<MaximizingPair> top_pair(const TruncatedOperator& op, const SolverConfig& cfg) {
  MaximizingOptions opts;
  opts.seed = cfg.seed;
  opts.zero_tol = 1e-14;
  try {
    return norm_and_maximizing_vector(op, opts);
  } catch (const Error& e) {
    if (e.code() == "zero_operator") return std::nullopt;
    throw;
  }
}

MatrixGrid base_case_grid(const MatrixGrid& phi, const BlockPartition& p,
                          const MaximizingPair& pair, int grid, double essential,
                          double* division_floor) {
  if (p.n1 != 1) throw Error("invalid_argument", "base case needs n1 = 1");
  const MatrixGrid fs = sample_on_grid(pair.f.symbol, grid);
  MatrixGrid top(grid);
  double floor = std::numeric_limits<double>::infinity();
  for (int l = 0; l < grid; ++l) {
    top[l] = (phi[l] * fs[l]).topRows(p.m1);
    const double fn = fs[l].squaredNorm();
    floor = std::min(floor, fn > 0.0 ? std::norm(fs[l](0, 0)) / fn : 0.0);
  }
  if (division_floor) *division_floor = floor;
  const double t = pair.t;
  const double delta = (t * t - essential * essential) / (t * t);
  if (floor < 0.5 * delta) {
    std::ostringstream os;
    os << "min |f1|^2/||f||^2 = " << floor << " below half the guaranteed floor " << delta;
    throw Error("hypothesis_violated", os.str(), -1, floor);
  }
  const MatrixGrid r = grid_riesz_project(top, RieszPart::analytic);
  MatrixGrid q(grid);
  for (int l = 0; l < grid; ++l) q[l] = r[l] / fs[l](0, 0);
  return q;
}

ThematicStep reduce_grid(const MatrixGrid& phi, const BlockPartition& p, const MatrixGrid& q0,
                         const MaximizingPair& pair, int grid, const SolverConfig& cfg) {
  const int m = p.rows(), n = p.cols(), m1 = p.m1, n1 = p.n1;
  ThematicStep step;
  step.partition = p;
  step.t = pair.t;
  step.multiplicity = pair.multiplicity;
  step.q0_samples = q0;

  const MatrixGrid fs = sample_on_grid(pair.f.symbol, grid);
  const MatrixGrid gs = sample_on_grid(pair.g.symbol, grid);
  Eigen::VectorXd rho(grid);
  for (int l = 0; l < grid; ++l) rho(l) = fs[l].squaredNorm();
  step.h_samples = outer_factor_samples(rho);

  std::vector<CVector> f1_entries, b_entries;
  for (int i = 0; i < n1; ++i) f1_entries.push_back(taylor_entry(pair.f.symbol, i, 0));
  const MatrixSymbol beta = shifted(conj(rows_of(pair.g.symbol, 0, m1)), -1);
  for (int i = 0; i < m1; ++i) b_entries.push_back(taylor_entry(beta, i, 0));
  step.theta = gcd_inner_divisor(f1_entries);
  step.tau = gcd_inner_divisor(b_entries);
  const CVector th = step.theta.samples(grid);
  const CVector ta = step.tau.samples(grid);

  MatrixGrid v(grid), w(grid);
  step.u_samples.resize(grid);
  for (int l = 0; l < grid; ++l) {
    const Complex zbar = std::conj(grid_node(l, grid));
    const Complex h = step.h_samples(l);
    v[l] = std::conj(th(l)) * fs[l] / h;
    w[l] = zbar * std::conj(ta(l)) * gs[l].conjugate() / h;
    step.u_samples(l) = zbar * std::conj(th(l)) * std::conj(ta(l)) * std::conj(h) / h;
  }
  step.pair.v = build_thematic_function(v, n1);
  step.pair.w = build_thematic_function(w, m1);
  step.pair.V = step.pair.v.full;
  step.pair.W = grid_transpose(step.pair.w.full);

  double residual = 0.0;
  step.next_samples.resize(grid);
  for (int l = 0; l < grid; ++l) {
    CMatrix e = phi[l];
    e.topLeftCorner(m1, n1) -= q0[l];
    const CMatrix s = step.pair.W[l] * e * step.pair.V[l];
    residual = std::max(residual, std::abs(s(0, 0) - pair.t * step.u_samples(l)));
    if (n > 1) residual = std::max(residual, s.row(0).tail(n - 1).cwiseAbs().maxCoeff());
    if (m > 1) residual = std::max(residual, s.col(0).tail(m - 1).cwiseAbs().maxCoeff());
    step.next_samples[l] = s.bottomRightCorner(m - 1, n - 1);
  }
  step.sandwich_residual = residual;
  if (residual > cfg.sandwich_tol * std::max(1.0, pair.t)) {
    std::ostringstream os;
    os << "sandwich first row/column off by " << residual;
    throw Error("reduction_failed", os.str(), -1, residual);
  }
  const BlockPartition next{m1 - 1, p.m2, n1 - 1, p.n2};
  step.next_symbol = MatrixSymbol::from_grid(step.next_samples, next, kDerivedTrim);

  if (tail_ratio(scalar_grid(step.u_samples), 1.0) > kDerivedTrim) throw GridTooCoarse{};
  step.u.symbol = MatrixSymbol::from_grid(scalar_grid(step.u_samples), BlockPartition{}, kDerivedTrim);
  step.u.unimodular = true;
  const WindingNumber wn = winding_number(step.u_samples);
  step.k = -wn.value;
  step.winding_residual = wn.rounding_residual;
  if (cfg.check_indices) {
    const int n_in = std::min(512, std::max(32, 2 * step.u.symbol.degree() + 2 * std::abs(step.k)));
    step.kernel_dim = toeplitz_kernel_dim(step.u, n_in, cfg.rank_tol);
  }
  return step;
}

struct Run {
  const SolverConfig& cfg;
  int grid = 0;
  double t0 = 0.0;
  std::vector<ThematicStep> steps;
  MatrixGrid terminal;
};

int interpolation_start(const SolverConfig& cfg, const MatrixSymbol& phi) {
  return cfg.degree_M > 0 ? cfg.degree_M : std::min(phi.degree() + 4, 16);
}

MatrixGrid solve_level(const MatrixSymbol& phi, const MatrixGrid& phi_s, int level, Run& run) {
  const SolverConfig& cfg = run.cfg;
  const BlockPartition& p = phi.partition();
  const int grid = run.grid;

  const GammaSetup gamma = gamma_for(phi, level, cfg);
  std::optional<MaximizingPair> pair = top_pair(gamma.op, cfg);
  if (pair && level == 0) run.t0 = pair->t;
  if (pair && level > 0 && pair->t <= cfg.zero_tol * run.t0) pair.reset();
  if (!pair) {
    const MatrixGrid q =
        grid_riesz_project(detail::corner(phi_s, 0, 0, p.m1, p.n1), RieszPart::analytic);
    run.terminal = grid_difference(phi_s, embed_corner(q, p.rows(), p.cols()));
    return q;
  }

  const double essential = essential_bound(phi_s, p);
  if (essential >= pair->t - cfg.hypothesis_margin * std::max(1.0, run.t0)) {
    std::ostringstream os;
    os << "essential-norm lower bound " << essential << " not below ||Gamma|| = " << pair->t;
    throw Error("essential_norm_hypothesis", os.str(), level, essential);
  }
  if (!gamma.converged) {
    std::ostringstream os;
    os << "||Gamma|| still changes by " << gamma.change << " at N_in = " << gamma.n_in;
    throw Error("truncation_not_converged", os.str(), level, gamma.change);
  }

  const bool base = p.n1 == 1 || p.m1 == 1;
  MatrixGrid q0;
  double floor = 1.0;
  double interp = 0.0;
  if (p.n1 == 1) {
    q0 = base_case_grid(phi_s, p, *pair, grid, essential, &floor);
  } else if (p.m1 == 1) {
    const MatrixSymbol phit = transpose(phi);
    const std::optional<MaximizingPair> pt = top_pair(gamma_for(phit, level, cfg).op, cfg);
    if (!pt) throw Error("zero_operator", "transpose operator vanishes", level);
    q0 = grid_transpose(
        base_case_grid(grid_transpose(phi_s), phit.partition(), *pt, grid, essential, &floor));
  } else {
    MatrixSymbol best{BlockPartition::nehari(p.m1, p.n1)};
    for (int M = interpolation_start(cfg, phi);; M *= 2) {
      M = std::min(M, cfg.interpolation_degree_cap);
      auto [q, res] = aligned_interpolant(phi, *pair, M);
      best = std::move(q);
      interp = res;
      if (res <= 1e-11 || M >= cfg.interpolation_degree_cap) break;
    }
    q0 = sample_on_grid(best, grid);
  }

  if (base && tail_ratio(q0, run.t0) > kDerivedTrim) throw GridTooCoarse{};
  run.steps.push_back(reduce_grid(phi_s, p, q0, *pair, grid, cfg));
  const std::size_t idx = run.steps.size() - 1;
  {
    ThematicStep& step = run.steps[idx];
    step.level = level;
    step.base_case = base;
    step.essential_lower_bound = essential;
    step.division_floor = floor;
    step.interpolation_residual = interp;
    step.n_in = gamma.n_in;
    step.Q0 = MatrixSymbol::from_grid(q0, BlockPartition::nehari(p.m1, p.n1), kDerivedTrim);
  }
  if (base) {
    run.terminal = run.steps[idx].next_samples;
    return q0;
  }
  if (tail_ratio(run.steps[idx].next_samples, run.t0) > kDerivedTrim) throw GridTooCoarse{};

  MatrixGrid qn;
  try {
    qn = solve_level(run.steps[idx].next_symbol, run.steps[idx].next_samples, level + 1, run);
  } catch (const Error& e) {
    if (e.level() < 0) throw e.at_level(level + 1);
    throw;
  }
  const ThematicStep& step = run.steps[idx];
  MatrixGrid q(grid);
  for (int l = 0; l < grid; ++l) {
    q[l] = q0[l] + step.pair.w.xc[l] * qn[l] * step.pair.v.xc[l].transpose();
  }
  return q;
}

}  // namespace

// ---------------------------------------------------------------------------

MatrixGrid base_case(const MatrixSymbol& sym, const MaximizingPair& pair, int grid_size,
                     double essential_bound, double* division_floor) {
  return base_case_grid(sample_on_grid(sym, grid_size), sym.partition(), pair, grid_size,
                        essential_bound, division_floor);
}

MatrixSymbol base_case(const MatrixSymbol& sym, const SolverConfig& config) {
  const BlockPartition& p = sym.partition();
  p.validate();
  if (p.n1 != 1 && p.m1 != 1) throw Error("invalid_argument", "base case needs n1 = 1 or m1 = 1");
  const bool flip = p.n1 != 1;
  const MatrixSymbol s = flip ? transpose(sym) : sym;
  const int grid = working_grid(s, config);
  const std::optional<MaximizingPair> pair = top_pair(gamma_for(s, 0, config).op, config);
  if (!pair) throw Error("zero_operator", "operator vanishes");
  const MatrixGrid phi = sample_on_grid(s, grid);
  MatrixGrid q = base_case_grid(phi, s.partition(), *pair, grid,
                                essential_bound(phi, s.partition()), nullptr);
  if (flip) q = grid_transpose(q);
  return MatrixSymbol::from_grid(q, BlockPartition::nehari(p.m1, p.n1), 1e-14);
}

ThematicStep level_reduce(const MatrixSymbol& sym, const MatrixGrid& q0, const MaximizingPair& pair,
                          int grid_size, const SolverConfig& config) {
  return reduce_grid(sample_on_grid(sym, grid_size), sym.partition(), q0, pair, grid_size, config);
}

ThematicStep level_reduce(const MatrixSymbol& sym, const MatrixSymbol& q0,
                          const SolverConfig& config) {
  sym.partition().validate();
  const int grid = std::max(working_grid(sym, config), default_grid_size(q0.degree()));
  const std::optional<MaximizingPair> pair = top_pair(gamma_for(sym, 0, config).op, config);
  if (!pair) throw Error("zero_operator", "operator vanishes");
  return level_reduce(sym, sample_on_grid(q0, grid), *pair, grid, config);
}

SuperoptimalResult recurse_superoptimal(const MatrixSymbol& sym, const SolverConfig& config) {
  const BlockPartition& p0 = sym.partition();
  p0.validate();
  bool flip = false;
  switch (config.transpose) {
    case TransposeMode::automatic: flip = p0.m1 < p0.n1; break;
    case TransposeMode::on: flip = true; break;
    case TransposeMode::off: flip = false; break;
  }
  const MatrixSymbol phi = flip ? transpose(sym) : sym;
  const BlockPartition& p = phi.partition();

  int grid = working_grid(phi, config);
  for (;;) {
    Run run{config, grid, 0.0, {}, {}};
    const MatrixGrid phi_s = sample_on_grid(phi, grid);
    MatrixGrid q;
    try {
      q = solve_level(phi, phi_s, 0, run);
    } catch (const GridTooCoarse&) {
      if (2 * grid > config.max_grid_size) {
        throw Error("aliasing", "derived symbols still alias at the largest grid", -1, grid);
      }
      grid *= 2;
      continue;
    } catch (const Error& e) {
      if (e.level() < 0) throw e.at_level(0);
      throw;
    }

    SuperoptimalResult res;
    res.transposed = flip;
    res.grid_size = grid;
    res.t0 = run.t0;
    res.essential_lower_bound = essential_bound(phi_s, p);
    res.n_in = config.n_in > 0 ? config.n_in : default_n_in(phi);
    res.steps = std::move(run.steps);
    res.terminal = std::move(run.terminal);
    const int levels = std::min(p.m1, p.n1);
    for (const auto& s : res.steps) res.t_seq.push_back(s.t);
    while (static_cast<int>(res.t_seq.size()) < levels) res.t_seq.push_back(0.0);

    MatrixGrid err = grid_difference(phi_s, embed_corner(q, p.rows(), p.cols()));
    if (flip) {
      q = grid_transpose(q);
      err = grid_transpose(err);
    }
    res.Q_samples = q;
    res.error_samples = err;
    res.Q = MatrixSymbol::from_grid(q, BlockPartition::nehari(p0.m1, p0.n1), 1e-14);
    res.analytic_residual = grid_antianalytic_energy(q);
    res.factorization = assemble_factorization(res);
    std::vector<double> ts;
    std::vector<int> ks;
    for (const auto& s : res.steps) {
      ts.push_back(s.t);
      ks.push_back(s.k);
    }
    res.indices = indices_and_nu(ts, ks, config.eq_tol);
    return res;
  }
}

Factorization assemble_factorization(const SuperoptimalResult& result) {
  const MatrixGrid err = result.transposed ? grid_transpose(result.error_samples)
                                           : result.error_samples;
  Factorization out;
  const int grid = static_cast<int>(err.size());
  if (grid == 0) return out;
  const int m = static_cast<int>(err[0].rows());
  const int n = static_cast<int>(err[0].cols());
  const int d = static_cast<int>(result.steps.size());

  out.D.assign(grid, CMatrix::Zero(m, n));
  for (int l = 0; l < grid; ++l) {
    for (int j = 0; j < d; ++j) out.D[l](j, j) = result.steps[j].t * result.steps[j].u_samples(l);
    if (!result.terminal.empty() && result.terminal[l].size() > 0) {
      out.D[l].bottomRightCorner(m - d, n - d) = result.terminal[l];
    }
  }
  for (int j = 0; j < d; ++j) {
    MatrixGrid vj(grid, CMatrix::Identity(n, n)), wj(grid, CMatrix::Identity(m, m));
    for (int l = 0; l < grid; ++l) {
      vj[l].bottomRightCorner(n - j, n - j) = result.steps[j].pair.V[l];
      wj[l].bottomRightCorner(m - j, m - j) = result.steps[j].pair.W[l];
    }
    out.V.push_back(std::move(vj));
    out.W.push_back(std::move(wj));
  }
  for (int l = 0; l < grid; ++l) {
    CMatrix r = out.D[l];
    for (int j = d - 1; j >= 0; --j) r = out.W[j][l].adjoint() * r * out.V[j][l].adjoint();
    Eigen::JacobiSVD<CMatrix> svd(err[l] - r);
    out.residual = std::max(out.residual, svd.singularValues()(0));
  }
  if (out.residual > 1e-5) {
    std::ostringstream os;
    os << "reconstruction residual " << out.residual;
    throw Error("reconstruction_failed", os.str(), -1, out.residual);
  }
  return out;
}

IndexSummary indices_and_nu(const std::vector<double>& t, const std::vector<int>& k,
                            double eq_tol) {
  IndexSummary out;
  out.k = k;
  const double scale = t.empty() ? 1.0 : std::max(t.front(), 1e-300);
  for (std::size_t j = 0; j < t.size(); ++j) {
    const int kj = j < k.size() ? k[j] : 0;
    for (int r = 0; r < kj; ++r) out.extended_t.push_back(t[j]);
    if (!out.nu.empty() && std::abs(out.nu.back().first - t[j]) <= eq_tol * scale) {
      out.nu.back().second += kj;
    } else {
      out.nu.emplace_back(t[j], kj);
    }
  }
  return out;
}

}  // namespace superopt
