#include "superopt/truncated_operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "superopt/error.hpp"

namespace superopt {

// ---------------------------------------------------------------------------
// BasisMap

void BasisMap::add_input(int component, int k_lo, int k_hi) {
  in_range_.push_back({k_lo, k_hi});
  in_offset_.push_back(input_size());
  for (int k = k_lo; k <= k_hi; ++k) input_.push_back({k, component});
  ++in_components_;
}

void BasisMap::add_output(int component, int k_lo, int k_hi) {
  out_range_.push_back({k_lo, k_hi});
  out_offset_.push_back(output_size());
  for (int k = k_lo; k <= k_hi; ++k) output_.push_back({k, component});
  ++out_components_;
}

BasisMap BasisMap::four_block(const BlockPartition& p, int n_in, int n_sym) {
  BasisMap b;
  for (int j = 0; j < p.cols(); ++j) {
    if (j < p.n1) {
      b.add_input(j, 0, n_in);
    } else {
      b.add_input(j, -n_in, n_in);
    }
  }
  const int reach = n_in + n_sym;
  for (int i = 0; i < p.rows(); ++i) {
    if (i < p.m1) {
      b.add_output(i, -reach, -1);
    } else {
      b.add_output(i, -reach, reach);
    }
  }
  return b;
}

BasisMap BasisMap::toeplitz(int components_in, int components_out, int n_in, int n_out) {
  BasisMap b;
  for (int j = 0; j < components_in; ++j) b.add_input(j, 0, n_in);
  for (int i = 0; i < components_out; ++i) b.add_output(i, 0, n_out);
  return b;
}

int BasisMap::input_index(int k, int component) const {
  if (component < 0 || component >= in_components_) return -1;
  const auto [lo, hi] = in_range_[component];
  if (k < lo || k > hi) return -1;
  return in_offset_[component] + (k - lo);
}

int BasisMap::output_index(int k, int component) const {
  if (component < 0 || component >= out_components_) return -1;
  const auto [lo, hi] = out_range_[component];
  if (k < lo || k > hi) return -1;
  return out_offset_[component] + (k - lo);
}

// ---------------------------------------------------------------------------

int default_n_in(const MatrixSymbol& sym) { return 4 * sym.degree() + 8; }

TruncatedOperator build_operator(const MatrixSymbol& sym, OperatorKind kind, int n_in) {
  if (n_in < 0) throw Error("invalid_argument", "negative truncation");
  TruncatedOperator op;
  op.kind = kind;
  op.source = sym;
  op.n_in = n_in;
  switch (kind) {
    case OperatorKind::four_block:
      op.basis = BasisMap::four_block(sym.partition(), n_in, sym.degree());
      break;
    case OperatorKind::hankel:
      op.basis = BasisMap::four_block(BlockPartition::nehari(sym.rows(), sym.cols()), n_in,
                                      sym.degree());
      break;
    case OperatorKind::toeplitz:
      op.basis = BasisMap::toeplitz(sym.cols(), sym.rows(), n_in, n_in + sym.positive_degree());
      break;
  }
  const BasisMap& b = op.basis;
  op.matrix = CMatrix::Zero(b.output_size(), b.input_size());
  for (int col = 0; col < b.input_size(); ++col) {
    const BasisIndex in = b.input(col);
    for (const auto& [q, c] : sym.coeffs()) {
      for (int i = 0; i < sym.rows(); ++i) {
        const int row = b.output_index(in.k + q, i);
        if (row >= 0) op.matrix(row, col) += c(i, in.component);
      }
    }
  }
  return op;
}

ColumnSymbol basis_vector_to_column(const BasisMap& basis, const CVector& x, bool input,
                                    int upper, int lower) {
  const int height = upper + lower;
  std::map<int, CMatrix> coeffs;
  const int n = input ? basis.input_size() : basis.output_size();
  for (int idx = 0; idx < n; ++idx) {
    if (x(idx) == Complex{0.0, 0.0}) continue;
    const BasisIndex bi = input ? basis.input(idx) : basis.output(idx);
    auto it = coeffs.find(bi.k);
    if (it == coeffs.end()) it = coeffs.emplace(bi.k, CMatrix::Zero(height, 1)).first;
    it->second(bi.component, 0) += x(idx);
  }
  return ColumnSymbol{MatrixSymbol(BlockPartition{upper, lower, 1, 0}, std::move(coeffs))};
}

namespace {

// Unit vector in span(cluster) chosen deterministically (seed == 0) or at
// random (seed != 0).
CVector pick_in_cluster(const CMatrix& cluster, std::uint64_t seed) {
  if (cluster.cols() == 1) return cluster.col(0);
  if (seed != 0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    CVector coeff(cluster.cols());
    for (int i = 0; i < coeff.size(); ++i) coeff(i) = {normal(rng), normal(rng)};
    CVector x = cluster * coeff;
    return x / x.norm();
  }
  // Lexicographically maximal |x_0|, |x_1|, ...: the normalized projection of
  // the first basis vector the cluster is not orthogonal to.
  for (int i = 0; i < cluster.rows(); ++i) {
    const CVector proj = cluster * cluster.row(i).adjoint();
    const double n = proj.norm();
    if (n > 1e-6) return proj / n;
  }
  return cluster.col(0);
}

void normalize_phase(CVector& x) {
  const double top = x.cwiseAbs().maxCoeff();
  for (int i = 0; i < x.size(); ++i) {
    if (std::abs(x(i)) >= top * (1.0 - 1e-12)) {
      x *= std::conj(x(i)) / std::abs(x(i));
      return;
    }
  }
}

}  // namespace

MaximizingPair norm_and_maximizing_vector(const TruncatedOperator& op,
                                          const MaximizingOptions& options) {
  if (op.matrix.size() == 0 || op.matrix.cwiseAbs().maxCoeff() <= options.zero_tol) {
    throw Error("zero_operator", "operator vanishes on the truncated basis");
  }
  Eigen::BDCSVD<CMatrix> svd(op.matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double t = s(0);
  if (t <= options.zero_tol) throw Error("zero_operator", "largest singular value vanishes");
  int cluster = 1;
  while (cluster < s.size() && t - s(cluster) < options.tie_tol * t) ++cluster;

  CVector f = pick_in_cluster(svd.matrixV().leftCols(cluster), options.seed);
  normalize_phase(f);
  const CVector g = op.matrix * f / t;

  int in_upper = 0;
  int in_lower = 0;
  int out_upper = 0;
  int out_lower = 0;
  const BlockPartition& p = op.source.partition();
  if (op.kind == OperatorKind::four_block) {
    in_upper = p.n1;
    in_lower = p.n2;
    out_upper = p.m1;
    out_lower = p.m2;
  } else {
    in_upper = p.cols();
    out_upper = p.rows();
  }
  MaximizingPair pair;
  pair.t = t;
  pair.multiplicity = cluster;
  pair.f_coeffs = f;
  pair.g_coeffs = g;
  pair.f = basis_vector_to_column(op.basis, f, true, in_upper, in_lower);
  pair.g = basis_vector_to_column(op.basis, g, false, out_upper, out_lower);
  return pair;
}

std::vector<double> singular_values(const TruncatedOperator& op, int count) {
  std::vector<double> out(std::max(count, 0), 0.0);
  if (op.matrix.size() == 0) return out;
  Eigen::BDCSVD<CMatrix> svd(op.matrix);
  const Eigen::VectorXd& s = svd.singularValues();
  for (int i = 0; i < count && i < s.size(); ++i) out[i] = s(i);
  return out;
}

// ---------------------------------------------------------------------------

WindingNumber winding_number(const CVector& samples) {
  const int grid = static_cast<int>(samples.size());
  if (grid < 3) throw Error("insufficient_grid", "need at least three nodes");
  double worst = 0.0;
  for (int l = 0; l < grid; ++l) worst = std::max(worst, std::abs(std::abs(samples(l)) - 1.0));
  if (worst > 1e-6) throw Error("not_unimodular", "symbol is not unimodular", -1, worst);
  double total = 0.0;
  for (int l = 0; l < grid; ++l) {
    const double step = std::arg(samples((l + 1) % grid) / samples(l));
    if (std::abs(step) >= 0.5 * std::numbers::pi) {
      std::ostringstream os;
      os << "phase step " << step << " between nodes " << l << " and " << (l + 1) % grid;
      throw Error("insufficient_grid", os.str(), -1, std::abs(step));
    }
    total += step;
  }
  const double raw = total / (2.0 * std::numbers::pi);
  WindingNumber w;
  w.value = static_cast<int>(std::lround(raw));
  w.rounding_residual = std::abs(raw - w.value);
  return w;
}

WindingNumber winding_number(const ScalarSymbol& u, int grid_size) {
  const MatrixGrid s = sample_on_grid(u.symbol, grid_size);
  CVector v(grid_size);
  for (int l = 0; l < grid_size; ++l) v(l) = s[l](0, 0);
  return winding_number(v);
}

int toeplitz_kernel_dim(const ScalarSymbol& u, int n_in, double rank_tol, int grid_size) {
  if (grid_size <= 0) grid_size = std::max(1024, default_grid_size(u.symbol.degree()));
  const WindingNumber w = winding_number(u, grid_size);
  const TruncatedOperator op = build_operator(u.symbol, OperatorKind::toeplitz, n_in);
  Eigen::BDCSVD<CMatrix> svd(op.matrix);
  const Eigen::VectorXd& s = svd.singularValues();
  const double top = s.size() > 0 ? s(0) : 0.0;
  int small = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) <= rank_tol * top) ++small;
  }
  // Columns beyond the row count are kernel directions too.
  small += std::max<int>(0, static_cast<int>(op.matrix.cols() - s.size()));
  const int expected = std::max(-w.value, 0);
  if (small != expected) {
    std::ostringstream os;
    os << "nullspace count " << small << " vs winding estimate " << expected;
    throw Error("index_mismatch", os.str());
  }
  return small;
}

double essential_norm_lower_bound(const MatrixSymbol& sym, int grid_size) {
  const BlockPartition& p = sym.partition();
  if (grid_size <= 0) grid_size = default_grid_size(sym.degree());
  const MatrixGrid s = sample_on_grid(sym, grid_size);
  double bound = 0.0;
  if (p.m2 > 0) {
    MatrixGrid bottom(s.size());
    for (std::size_t l = 0; l < s.size(); ++l) bottom[l] = s[l].bottomRows(p.m2);
    bound = std::max(bound, linf_norm(bottom));
  }
  if (p.n2 > 0) {
    MatrixGrid right(s.size());
    for (std::size_t l = 0; l < s.size(); ++l) right[l] = s[l].rightCols(p.n2);
    bound = std::max(bound, linf_norm(right));
  }
  return bound;
}

}  // namespace superopt
