#include "superopt/weight_diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "superopt/error.hpp"

namespace superopt {

namespace {

TruncatedOperator gamma_of(const MatrixSymbol& phi, int n_in) {
  const BlockPartition& p = phi.partition();
  const bool nehari = p.m2 == 0 && p.n2 == 0;
  const MatrixSymbol src = nehari ? riesz_project(phi, RieszPart::antianalytic) : phi;
  return build_operator(src, OperatorKind::four_block, n_in);
}

// Truncation for a derived level symbol.
int derived_n_in(const MatrixSymbol& phi) {
  const BlockPartition& p = phi.partition();
  if (p.m2 == 0 && p.n2 == 0) return std::max(phi.negative_degree(), 1) + 8;
  return std::min(default_n_in(phi), 256);
}

MatrixSymbol solved_symbol(const MatrixSymbol& sym, const SuperoptimalResult& r) {
  return r.transposed ? transpose(sym) : sym;
}

MatrixGrid solved_error(const SuperoptimalResult& r) {
  return r.transposed ? grid_transpose(r.error_samples) : r.error_samples;
}

}  // namespace

void MatrixWeight::validate() const {
  for (const auto& m : values) {
    const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-10) throw Error("not_a_weight", "sample is not Hermitian", -1, herm);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) {
      throw Error("not_a_weight", "negative eigenvalue", -1, es.eigenvalues().minCoeff());
    }
  }
}

MatrixWeight MatrixWeight::gram(const MatrixGrid& e) {
  MatrixWeight w;
  w.values.reserve(e.size());
  for (const auto& m : e) w.values.push_back(m.adjoint() * m);
  return w;
}

MatrixWeight clip_weight(const MatrixWeight& w, double a, ClipMode mode) {
  MatrixWeight out;
  out.values.reserve(w.values.size());
  for (const auto& m : w.values) {
    const CMatrix herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (ev(i) < a) ev(i) = mode == ClipMode::Lambda ? a : 0.0;
    }
    out.values.push_back(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint());
  }
  return out;
}

CMatrix weight_compression(const MatrixWeight& w, const BasisMap& basis) {
  const int grid = static_cast<int>(w.values.size());
  const int size = basis.input_size();
  if (grid == 0 || size == 0) return CMatrix::Zero(size, size);
  int kmax = 0;
  for (int i = 0; i < size; ++i) kmax = std::max(kmax, std::abs(basis.input(i).k));
  if (grid < 4 * kmax + 2) throw Error("aliasing", "weight grid too coarse for the basis");
  const int n = static_cast<int>(w.values[0].rows());
  std::vector<std::vector<CVector>> hat(n, std::vector<CVector>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) hat[i][j] = coefficients_from_samples(grid_entry(w.values, i, j));
  }
  CMatrix out(size, size);
  for (int r = 0; r < size; ++r) {
    const BasisIndex row = basis.input(r);
    for (int c = 0; c < size; ++c) {
      const BasisIndex col = basis.input(c);
      const int d = row.k - col.k;
      out(r, c) = hat[row.component][col.component]((d % grid + grid) % grid);
    }
  }
  return out;
}

namespace {

Eigen::VectorXd gap_eigenvalues(const MatrixWeight& w, const TruncatedOperator& gamma) {
  const CMatrix mw = weight_compression(w, gamma.basis);
  CMatrix d = mw - gamma.matrix.adjoint() * gamma.matrix;
  d = 0.5 * (d + d.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(d, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

Admissibility is_admissible(const MatrixWeight& w, const TruncatedOperator& gamma, double tol) {
  Admissibility out;
  const Eigen::VectorXd ev = gap_eigenvalues(w, gamma);
  out.min_eig = ev.size() > 0 ? ev.minCoeff() : 0.0;
  out.admissible = out.min_eig >= -tol;
  return out;
}

SubspaceDim maximizing_subspace_dim(const MatrixWeight& w, const TruncatedOperator& gamma,
                                    double rank_tol) {
  SubspaceDim out;
  const Eigen::VectorXd ev = gap_eigenvalues(w, gamma);
  if (ev.size() == 0) return out;
  const double top = ev.cwiseAbs().maxCoeff();
  out.threshold = rank_tol * top;
  out.smallest_nonnull = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) <= out.threshold) {
      ++out.dim;
      out.largest_null = std::max(out.largest_null, std::abs(ev(i)));
    } else {
      out.smallest_nonnull = std::min(out.smallest_nonnull, ev(i));
    }
  }
  out.ill_separated = out.largest_null > 0.1 * out.threshold ||
                      out.smallest_nonnull < 10.0 * out.threshold;
  return out;
}

IndexSumReport check_index_sums(const MatrixSymbol& sym, const SuperoptimalResult& result,
                                int n_in, double rank_tol) {
  IndexSumReport rep;
  const MatrixSymbol phi = solved_symbol(sym, result);
  if (n_in <= 0) n_in = default_n_in(phi);
  const TruncatedOperator g0 = gamma_of(phi, n_in);
  const TruncatedOperator g1 = gamma_of(phi, n_in + 8);
  const MatrixWeight gram = MatrixWeight::gram(solved_error(result));
  for (const auto& [a, nu] : result.indices.nu) {
    IndexSumEntry e;
    e.a = a;
    for (const auto& s : result.steps) {
      if (s.t >= a * (1.0 - 1e-6)) e.expected += s.k;
    }
    const MatrixWeight w = clip_weight(gram, a * a, ClipMode::Lambda);
    const SubspaceDim d0 = maximizing_subspace_dim(w, g0, rank_tol);
    const SubspaceDim d1 = maximizing_subspace_dim(w, g1, rank_tol);
    e.dim = d0.dim;
    e.dim_refined = d1.dim;
    e.stable = d0.dim == d1.dim;
    e.ill_separated = d0.ill_separated || d1.ill_separated;
    e.match = e.stable && e.dim == e.expected;
    rep.ok = rep.ok && e.match;
    rep.entries.push_back(e);
  }
  return rep;
}

InequalityReport check_singular_inequalities(const MatrixSymbol& sym,
                                             const SuperoptimalResult& result, int n_in,
                                             double tol) {
  InequalityReport rep;
  const MatrixSymbol phi = solved_symbol(sym, result);
  if (n_in <= 0) n_in = default_n_in(phi);
  const TruncatedOperator g0 = gamma_of(phi, n_in);
  const auto& ext = result.indices.extended_t;
  const int count0 = static_cast<int>(std::min(g0.matrix.rows(), g0.matrix.cols()));
  const std::vector<double> s0 = singular_values(g0, count0);
  // Truncated singular values bound the true ones from below, and every
  // singular number of Gamma is at least its essential norm.
  auto rhs_at = [](const std::vector<double>& s, int idx, double floor) {
    return std::max(idx < static_cast<int>(s.size()) ? s[idx] : 0.0, floor);
  };
  double floor = essential_norm_lower_bound(phi);
  for (int j = 0; j < static_cast<int>(ext.size()); ++j) {
    InequalityEntry e{"extended_t", 0, j, ext[j], rhs_at(s0, j, floor), floor, true};
    e.ok = e.lhs <= e.rhs + tol;
    rep.ok = rep.ok && e.ok;
    rep.entries.push_back(e);
  }

  std::vector<double> prev = s0;
  for (std::size_t l = 0; l < result.steps.size(); ++l) {
    const MatrixSymbol& next = result.steps[l].next_symbol;
    const BlockPartition& p = next.partition();
    std::vector<double> cur;
    if (p.rows() > 0 && p.cols() > 0 && (p.n1 > 0 || p.n2 > 0) && (p.m1 > 0 || p.m2 > 0)) {
      const TruncatedOperator g = gamma_of(next, derived_n_in(next));
      const int cnt = static_cast<int>(std::min(g.matrix.rows(), g.matrix.cols()));
      cur = singular_values(g, cnt);
    }
    const int k = result.steps[l].k;
    for (int j = 0; j < static_cast<int>(cur.size()); ++j) {
      // At or below the floor the inequality holds automatically.
      if (j > 0 && cur[j] <= floor) break;
      InequalityEntry e{"level", static_cast<int>(l), j, cur[j], rhs_at(prev, j + k, floor), floor,
                        true};
      e.ok = e.lhs <= e.rhs + tol;
      rep.ok = rep.ok && e.ok;
      rep.entries.push_back(e);
    }
    prev = std::move(cur);
    floor = p.rows() > 0 && p.cols() > 0 ? essential_norm_lower_bound(next) : 0.0;
  }
  return rep;
}

ConstancyReport check_constancy(const SuperoptimalResult& result, int nodes, double tol) {
  ConstancyReport rep;
  const int grid = static_cast<int>(result.error_samples.size());
  if (grid == 0) return rep;
  const int stride = (nodes > 0 && grid >= nodes && grid % nodes == 0) ? grid / nodes : 1;
  const int levels = static_cast<int>(result.t_seq.size());
  std::vector<ConstancyEntry> entries(levels);
  for (int j = 0; j < levels; ++j) {
    entries[j].j = j;
    entries[j].min = std::numeric_limits<double>::infinity();
    entries[j].max = 0.0;
  }
  for (int l = 0; l < grid; l += stride) {
    Eigen::JacobiSVD<CMatrix> svd(result.error_samples[l]);
    const Eigen::VectorXd& s = svd.singularValues();
    for (int j = 0; j < levels; ++j) {
      const double v = j < s.size() ? s(j) : 0.0;
      entries[j].min = std::min(entries[j].min, v);
      entries[j].max = std::max(entries[j].max, v);
    }
  }
  for (auto& e : entries) {
    e.flatness = e.max - e.min;
    e.ok = e.flatness <= tol;
    rep.ok = rep.ok && e.ok;
  }
  rep.entries = std::move(entries);
  return rep;
}

}  // namespace superopt
