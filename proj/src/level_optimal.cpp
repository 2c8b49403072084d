#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "superopt/error.hpp"
#include "superopt/superoptimal_solver.hpp"
#include "symbol_blocks.hpp"

namespace superopt {

using detail::corner;
using detail::rows_of;
using detail::shifted;

namespace {

// Taylor vectors of a column symbol: out[k](i) = coefficient k of entry i.
std::vector<CVector> taylor_column(const MatrixSymbol& col) {
  const int deg = std::max(col.positive_degree(), 0);
  std::vector<CVector> out(deg + 1, CVector::Zero(col.rows()));
  for (const auto& [k, c] : col.coeffs()) {
    if (k >= 0) out[k] = c.col(0);
  }
  return out;
}

double column_norm(const std::vector<CVector>& c) {
  double s = 0.0;
  for (const auto& v : c) s += v.squaredNorm();
  return std::sqrt(s);
}

struct TopSingular {
  double sigma = 0.0;
  CVector u, v;
};

TopSingular top_singular(const CMatrix& e) {
  Eigen::JacobiSVD<CMatrix> svd(e, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.singularValues()(0), svd.matrixU().col(0), svd.matrixV().col(0)};
}

}  // namespace

std::pair<MatrixSymbol, double> aligned_interpolant(const MatrixSymbol& sym,
                                                    const MaximizingPair& pair, int degree_M) {
  const BlockPartition& p = sym.partition();
  const int m1 = p.m1, n1 = p.n1;
  const int M = std::max(degree_M, 0);
  const double t = pair.t;

  const MatrixSymbol& f = pair.f.symbol;
  const MatrixSymbol& g = pair.g.symbol;
  const MatrixSymbol f1 = rows_of(f, 0, n1);
  const MatrixSymbol g1 = rows_of(g, 0, m1);

  // Q0 f1 = P+(Phi11 f1 + Phi12 f2)
  MatrixSymbol rhs_a = corner(sym, 0, 0, m1, n1) * f1;
  if (p.n2 > 0) rhs_a = rhs_a + corner(sym, 0, n1, m1, p.n2) * rows_of(f, n1, p.n2);
  // Q0^t (zbar conj g1) = zbar (Phi11^t conj g1 + Phi21^t conj g2 - t conj f1)
  MatrixSymbol rhs_b = transpose(corner(sym, 0, 0, m1, n1)) * conj(g1);
  if (p.m2 > 0) rhs_b = rhs_b + transpose(corner(sym, m1, 0, p.m2, n1)) * conj(rows_of(g, m1, p.m2));
  rhs_b = shifted(rhs_b - Complex{t, 0.0} * conj(f1), -1);
  const double inconsistency = antianalytic_energy(rhs_b) + antianalytic_energy(rhs_a);

  const auto a = taylor_column(f1);
  const auto beta = taylor_column(shifted(conj(g1), -1));
  const auto r = taylor_column(riesz_project(rhs_a, RieszPart::analytic));
  const auto s = taylor_column(riesz_project(rhs_b, RieszPart::analytic));
  const int da = static_cast<int>(a.size()) - 1;
  const int db = static_cast<int>(beta.size()) - 1;
  const int ja = std::max(M + da, static_cast<int>(r.size()) - 1);
  const int jb = std::max(M + db, static_cast<int>(s.size()) - 1);

  const int unknowns = m1 * n1 * (M + 1);
  const int rows = m1 * (ja + 1) + n1 * (jb + 1);
  auto idx = [&](int k, int i, int c) { return (k * m1 + i) * n1 + c; };
  CMatrix A = CMatrix::Zero(rows, unknowns);
  CVector b = CVector::Zero(rows);
  int row = 0;
  for (int j = 0; j <= ja; ++j) {
    for (int i = 0; i < m1; ++i, ++row) {
      for (int k = std::max(0, j - da); k <= std::min(M, j); ++k) {
        for (int c = 0; c < n1; ++c) A(row, idx(k, i, c)) = a[j - k](c);
      }
      if (j < static_cast<int>(r.size())) b(row) = r[j](i);
    }
  }
  for (int j = 0; j <= jb; ++j) {
    for (int c = 0; c < n1; ++c, ++row) {
      for (int k = std::max(0, j - db); k <= std::min(M, j); ++k) {
        for (int i = 0; i < m1; ++i) A(row, idx(k, i, c)) = beta[j - k](i);
      }
      if (j < static_cast<int>(s.size())) b(row) = s[j](c);
    }
  }
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(A);
  cod.setThreshold(1e-13);
  const CVector x = cod.solve(b);
  const double miss = (A * x - b).norm();

  std::map<int, CMatrix> coeffs;
  for (int k = 0; k <= M; ++k) {
    CMatrix qk(m1, n1);
    for (int i = 0; i < m1; ++i) {
      for (int c = 0; c < n1; ++c) qk(i, c) = x(idx(k, i, c));
    }
    if (qk.cwiseAbs().maxCoeff() > 0.0) coeffs[k] = qk;
  }
  const double scale = std::max({b.norm(), t * column_norm(a), 1e-300});
  const double residual = std::hypot(miss, inconsistency) / scale;
  return {MatrixSymbol(BlockPartition::nehari(m1, n1), std::move(coeffs)), residual};
}

LevelOptimalResult level_optimal(const MatrixSymbol& sym, int degree_M, double tol_gap,
                                 int grid_size, int n_in) {
  const BlockPartition& p = sym.partition();
  p.validate();
  const int M = degree_M > 0 ? degree_M : sym.degree() + 4;
  if (grid_size <= 0) grid_size = std::max(2048, default_grid_size(std::max(sym.degree(), M)));
  if (n_in <= 0) n_in = default_n_in(sym);
  const bool nehari = p.m2 == 0 && p.n2 == 0;
  const MatrixSymbol gamma_sym = nehari ? riesz_project(sym, RieszPart::antianalytic) : sym;
  const TruncatedOperator op = build_operator(gamma_sym, OperatorKind::four_block, n_in);
  const MaximizingPair pair = norm_and_maximizing_vector(op);

  LevelOptimalResult out;
  out.lower_bound = pair.t;
  const double target = pair.t + tol_gap * pair.t;
  const MatrixGrid phi = sample_on_grid(sym, grid_size);
  const int m1 = p.m1, n1 = p.n1;

  auto error_norm = [&](const MatrixSymbol& q) {
    const MatrixGrid qs = sample_on_grid(q, grid_size);
    double worst = 0.0;
    for (int l = 0; l < grid_size; ++l) {
      CMatrix e = phi[l];
      e.topLeftCorner(m1, n1) -= qs[l];
      worst = std::max(worst, top_singular(e).sigma);
    }
    return worst;
  };

  out.Q0 = aligned_interpolant(sym, pair, M).first;
  out.norm = error_norm(out.Q0);
  out.gap = out.norm - pair.t;
  if (out.norm <= target) return out;

  // Smoothed minimax: log-sum-exp of the per-node sigma_max^2 with the
  // temperature halved between rounds, plain gradient steps with
  // backtracking inside a round.
  std::vector<CMatrix> q(M + 1, CMatrix::Zero(m1, n1));
  for (const auto& [k, c] : out.Q0.coeffs()) {
    if (k >= 0 && k <= M) q[k] = c;
  }
  std::vector<Complex> nodes(grid_size);
  for (int l = 0; l < grid_size; ++l) nodes[l] = grid_node(l, grid_size);

  struct Eval {
    double smooth = 0.0;
    double sup = 0.0;
    std::vector<CMatrix> grad;
  };
  auto evaluate = [&](const std::vector<CMatrix>& coef, double beta, bool with_grad) {
    Eval ev;
    std::vector<TopSingular> top(grid_size);
    for (int l = 0; l < grid_size; ++l) {
      CMatrix qv = CMatrix::Zero(m1, n1);
      Complex zk{1.0, 0.0};
      for (int k = 0; k <= M; ++k, zk *= nodes[l]) qv += coef[k] * zk;
      CMatrix e = phi[l];
      e.topLeftCorner(m1, n1) -= qv;
      top[l] = top_singular(e);
      ev.sup = std::max(ev.sup, top[l].sigma);
    }
    const double s2 = ev.sup * ev.sup;
    double total = 0.0;
    std::vector<double> w(grid_size);
    for (int l = 0; l < grid_size; ++l) {
      w[l] = std::exp(beta * (top[l].sigma * top[l].sigma - s2));
      total += w[l];
    }
    ev.smooth = s2 + std::log(total) / beta;
    if (with_grad) {
      ev.grad.assign(M + 1, CMatrix::Zero(m1, n1));
      for (int l = 0; l < grid_size; ++l) {
        const double pl = w[l] / total;
        const CMatrix outer =
            (-2.0 * pl * top[l].sigma) * top[l].u.head(m1) * top[l].v.head(n1).adjoint();
        const Complex zbar = std::conj(nodes[l]);
        Complex zk{1.0, 0.0};
        for (int k = 0; k <= M; ++k, zk *= zbar) ev.grad[k] += outer * zk;
      }
    }
    return ev;
  };

  double best = out.norm;
  std::vector<CMatrix> best_q = q;
  double beta = 10.0 / (pair.t * pair.t * tol_gap + 1e-300);
  beta = std::min(beta, 1e3 / (pair.t * pair.t));
  double step = 0.1;
  int iterations = 0;
  for (int round = 0; round < 40 && best > target; ++round, beta *= 2.0) {
    Eval cur = evaluate(q, beta, true);
    for (int it = 0; it < 200 && best > target; ++it, ++iterations) {
      double gnorm2 = 0.0;
      for (const auto& gk : cur.grad) gnorm2 += gk.squaredNorm();
      if (gnorm2 < 1e-30) break;
      bool accepted = false;
      for (int bt = 0; bt < 30; ++bt, step *= 0.5) {
        std::vector<CMatrix> trial = q;
        for (int k = 0; k <= M; ++k) trial[k] -= step * cur.grad[k];
        Eval next = evaluate(trial, beta, true);
        if (next.smooth <= cur.smooth - 0.25 * step * gnorm2) {
          q = std::move(trial);
          cur = std::move(next);
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      if (cur.sup < best) {
        best = cur.sup;
        best_q = q;
      }
      step *= 1.5;
    }
  }
  std::map<int, CMatrix> coeffs;
  for (int k = 0; k <= M; ++k) coeffs[k] = best_q[k];
  out.Q0 = MatrixSymbol(BlockPartition::nehari(m1, n1), std::move(coeffs));
  out.norm = best;
  out.gap = best - pair.t;
  out.iterations = iterations;
  if (best > target) {
    std::ostringstream os;
    os << "gap " << out.gap << " exceeds " << tol_gap * pair.t;
    throw Error("optimal_solve_not_converged", os.str(), -1, out.gap);
  }
  return out;
}

}  // namespace superopt
