#include "superopt/fourier_symbols.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "superopt/error.hpp"

namespace superopt {

namespace {

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void require_same_shape(const MatrixSymbol& a, const MatrixSymbol& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << what << ": " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x" << b.cols();
    throw Error("shape_mismatch", os.str());
  }
}

void require_same_shape(const MatrixGrid& a, const MatrixGrid& b) {
  if (a.size() != b.size()) throw Error("shape_mismatch", "grid sizes differ");
}

}  // namespace

void BlockPartition::validate(bool require_corrected_block) const {
  if (m1 < 0 || m2 < 0 || n1 < 0 || n2 < 0) {
    throw Error("invalid_partition", "negative block size");
  }
  if (rows() < 1 || cols() < 1) throw Error("invalid_partition", "empty symbol");
  if (require_corrected_block && (m1 < 1 || n1 < 1)) {
    throw Error("invalid_partition", "empty corrected block");
  }
}

// ---------------------------------------------------------------------------

MatrixSymbol::MatrixSymbol(BlockPartition partition) : partition_(partition) {}

MatrixSymbol::MatrixSymbol(BlockPartition partition, std::map<int, CMatrix> coeffs)
    : partition_(partition), coeffs_(std::move(coeffs)) {
  for (const auto& [k, c] : coeffs_) {
    if (c.rows() != rows() || c.cols() != cols()) {
      std::ostringstream os;
      os << "coefficient k=" << k << " is " << c.rows() << "x" << c.cols() << ", expected "
         << rows() << "x" << cols();
      throw Error("shape_mismatch", os.str());
    }
  }
}

MatrixSymbol MatrixSymbol::scalar(const std::map<int, Complex>& coeffs) {
  std::map<int, CMatrix> c;
  for (const auto& [k, v] : coeffs) c[k] = CMatrix::Constant(1, 1, v);
  return MatrixSymbol(BlockPartition{}, std::move(c));
}

MatrixSymbol MatrixSymbol::constant(const CMatrix& value, BlockPartition partition) {
  return monomial(0, value, partition);
}

MatrixSymbol MatrixSymbol::monomial(int k, const CMatrix& value, BlockPartition partition) {
  return MatrixSymbol(partition, {{k, value}});
}

MatrixSymbol MatrixSymbol::from_grid(const MatrixGrid& samples, BlockPartition partition,
                                     double drop_tol) {
  const int grid = static_cast<int>(samples.size());
  const int r = partition.rows();
  const int c = partition.cols();
  if (grid == 0) return MatrixSymbol(partition);
  std::vector<CMatrix> slots(grid, CMatrix::Zero(r, c));
  CVector column(grid);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) {
      for (int l = 0; l < grid; ++l) column(l) = samples[l](i, j);
      const CVector coef = coefficients_from_samples(column);
      for (int l = 0; l < grid; ++l) slots[l](i, j) = coef(l);
    }
  }
  double biggest = 0.0;
  for (const auto& s : slots) biggest = std::max(biggest, max_abs(s));
  std::map<int, CMatrix> coeffs;
  for (int l = 0; l < grid; ++l) {
    if (biggest > 0.0 && max_abs(slots[l]) > drop_tol * biggest) {
      coeffs[frequency_of_slot(l, grid)] = std::move(slots[l]);
    }
  }
  return MatrixSymbol(partition, std::move(coeffs));
}

int MatrixSymbol::degree() const noexcept {
  return std::max(positive_degree(), negative_degree());
}

int MatrixSymbol::positive_degree() const noexcept {
  if (coeffs_.empty()) return 0;
  return std::max(0, coeffs_.rbegin()->first);
}

int MatrixSymbol::negative_degree() const noexcept {
  if (coeffs_.empty()) return 0;
  return std::max(0, -coeffs_.begin()->first);
}

CMatrix MatrixSymbol::coeff(int k) const {
  auto it = coeffs_.find(k);
  if (it == coeffs_.end()) return CMatrix::Zero(rows(), cols());
  return it->second;
}

CMatrix MatrixSymbol::evaluate(Complex z) const {
  CMatrix out = CMatrix::Zero(rows(), cols());
  for (const auto& [k, c] : coeffs_) out += std::pow(z, k) * c;
  return out;
}

bool MatrixSymbol::is_zero(double tol) const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [tol](const auto& kv) { return max_abs(kv.second) <= tol; });
}

MatrixSymbol MatrixSymbol::with_partition(BlockPartition partition) const {
  if (partition.rows() != rows() || partition.cols() != cols()) {
    throw Error("shape_mismatch", "repartition changes shape");
  }
  return MatrixSymbol(partition, coeffs_);
}

MatrixSymbol MatrixSymbol::block(int r0, int c0, int nr, int nc,
                                 BlockPartition partition) const {
  if (partition.rows() != nr || partition.cols() != nc) {
    throw Error("shape_mismatch", "block partition does not match block shape");
  }
  std::map<int, CMatrix> out;
  for (const auto& [k, c] : coeffs_) out[k] = c.block(r0, c0, nr, nc);
  return MatrixSymbol(partition, std::move(out));
}

MatrixSymbol MatrixSymbol::trimmed(double tol) const {
  std::map<int, CMatrix> out;
  for (const auto& [k, c] : coeffs_) {
    if (max_abs(c) > tol) out[k] = c;
  }
  return MatrixSymbol(partition_, std::move(out));
}

void ScalarSymbol::check_tags(int grid_size) const {
  if (symbol.rows() != 1 || symbol.cols() != 1) {
    throw Error("tag_violation", "scalar symbol must be 1x1");
  }
  if (unimodular || inner) {
    const MatrixGrid s = sample_on_grid(symbol, grid_size);
    double worst = 0.0;
    for (const auto& v : s) worst = std::max(worst, std::abs(std::abs(v(0, 0)) - 1.0));
    if (worst > 1e-8) {
      throw Error("tag_violation", "not unimodular on the grid", -1, worst);
    }
  }
  if (inner) {
    const double neg = antianalytic_energy(symbol);
    if (neg > 1e-10) throw Error("tag_violation", "inner function has k<0 content", -1, neg);
  }
}

// ---------------------------------------------------------------------------

int next_power_of_two(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

int default_grid_size(int n_sym) { return next_power_of_two(4 * (n_sym + 1)); }

Complex grid_node(int l, int grid_size) {
  const double theta = 2.0 * std::numbers::pi * static_cast<double>(l) / grid_size;
  return {std::cos(theta), std::sin(theta)};
}

int frequency_of_slot(int index, int grid_size) noexcept {
  return index < grid_size / 2 ? index : index - grid_size;
}

CVector samples_from_coefficients(const std::map<int, Complex>& coeffs, int grid_size) {
  std::vector<Complex> slots(grid_size, Complex{0.0, 0.0});
  for (const auto& [k, v] : coeffs) {
    const int idx = ((k % grid_size) + grid_size) % grid_size;
    slots[idx] += v;
  }
  Eigen::FFT<double> fft;
  std::vector<Complex> out;
  // inv() carries a 1/G factor; sample values are the plain sum.
  fft.inv(out, slots);
  CVector samples(grid_size);
  for (int l = 0; l < grid_size; ++l) samples(l) = out[l] * static_cast<double>(grid_size);
  return samples;
}

CVector coefficients_from_samples(const CVector& samples) {
  const int grid = static_cast<int>(samples.size());
  std::vector<Complex> in(samples.data(), samples.data() + grid);
  std::vector<Complex> out;
  Eigen::FFT<double> fft;
  fft.fwd(out, in);
  CVector coef(grid);
  for (int l = 0; l < grid; ++l) coef(l) = out[l] / static_cast<double>(grid);
  return coef;
}

CVector riesz_project_samples(const CVector& samples, RieszPart part) {
  const int grid = static_cast<int>(samples.size());
  CVector coef = coefficients_from_samples(samples);
  std::map<int, Complex> kept;
  for (int l = 0; l < grid; ++l) {
    const int k = frequency_of_slot(l, grid);
    const bool analytic = k >= 0;
    if (analytic == (part == RieszPart::analytic)) kept[k] = coef(l);
  }
  return samples_from_coefficients(kept, grid);
}

MatrixGrid sample_on_grid(const MatrixSymbol& sym, int grid_size) {
  if (grid_size < 2 * sym.degree() + 2) {
    std::ostringstream os;
    os << "grid of " << grid_size << " nodes cannot resolve degree " << sym.degree();
    throw Error("aliasing", os.str());
  }
  const int r = sym.rows();
  const int c = sym.cols();
  MatrixGrid out(grid_size, CMatrix::Zero(r, c));
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) {
      std::map<int, Complex> entry;
      for (const auto& [k, m] : sym.coeffs()) {
        if (m(i, j) != Complex{0.0, 0.0}) entry[k] = m(i, j);
      }
      if (entry.empty()) continue;
      const CVector s = samples_from_coefficients(entry, grid_size);
      for (int l = 0; l < grid_size; ++l) out[l](i, j) = s(l);
    }
  }
  return out;
}

MatrixSymbol riesz_project(const MatrixSymbol& sym, RieszPart part) {
  std::map<int, CMatrix> out;
  for (const auto& [k, c] : sym.coeffs()) {
    if ((k >= 0) == (part == RieszPart::analytic)) out[k] = c;
  }
  return MatrixSymbol(sym.partition(), std::move(out));
}

double antianalytic_energy(const MatrixSymbol& sym) {
  double e = 0.0;
  for (const auto& [k, c] : sym.coeffs()) {
    if (k < 0) e += c.squaredNorm();
  }
  return std::sqrt(e);
}

double analytic_energy(const MatrixSymbol& sym) {
  double e = 0.0;
  for (const auto& [k, c] : sym.coeffs()) {
    if (k >= 0) e += c.squaredNorm();
  }
  return std::sqrt(e);
}

std::vector<Eigen::VectorXd> singular_values_on_grid(const MatrixGrid& samples) {
  std::vector<Eigen::VectorXd> out(samples.size());
  for (std::size_t l = 0; l < samples.size(); ++l) {
    if (samples[l].size() == 0) {
      out[l] = Eigen::VectorXd();
      continue;
    }
    Eigen::JacobiSVD<CMatrix> svd(samples[l]);
    Eigen::VectorXd s = svd.singularValues();
    std::sort(s.data(), s.data() + s.size(), std::greater<>());
    out[l] = s;
  }
  return out;
}

double linf_norm(const MatrixGrid& samples) {
  double best = 0.0;
  for (const auto& s : singular_values_on_grid(samples)) {
    if (s.size() > 0) best = std::max(best, s(0));
  }
  return best;
}

double linf_norm(const MatrixSymbol& sym, int grid_size) {
  return linf_norm(sample_on_grid(sym, grid_size));
}

SingularProfile sj_profile(const MatrixGrid& samples, int j) {
  if (samples.empty()) throw Error("out_of_range", "empty grid");
  const int bound = static_cast<int>(std::min(samples[0].rows(), samples[0].cols()));
  if (j < 0 || j >= bound) {
    std::ostringstream os;
    os << "singular index " << j << " outside [0, " << bound << ")";
    throw Error("out_of_range", os.str());
  }
  SingularProfile p;
  const auto sv = singular_values_on_grid(samples);
  p.values.reserve(sv.size());
  for (const auto& s : sv) p.values.push_back(s(j));
  const auto [lo, hi] = std::minmax_element(p.values.begin(), p.values.end());
  p.sup = *hi;
  p.flatness = *hi - *lo;
  return p;
}

SingularProfile sj_profile(const MatrixSymbol& sym, int j, int grid_size) {
  return sj_profile(sample_on_grid(sym, grid_size), j);
}

// ---------------------------------------------------------------------------

MatrixSymbol operator+(const MatrixSymbol& a, const MatrixSymbol& b) {
  require_same_shape(a, b, "add");
  std::map<int, CMatrix> out = a.coeffs();
  for (const auto& [k, c] : b.coeffs()) {
    auto it = out.find(k);
    if (it == out.end()) {
      out[k] = c;
    } else {
      it->second += c;
    }
  }
  return MatrixSymbol(a.partition(), std::move(out));
}

MatrixSymbol operator-(const MatrixSymbol& a, const MatrixSymbol& b) {
  return a + Complex{-1.0, 0.0} * b;
}

MatrixSymbol operator*(const MatrixSymbol& a, const MatrixSymbol& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream os;
    os << "multiply: " << a.rows() << "x" << a.cols() << " by " << b.rows() << "x" << b.cols();
    throw Error("shape_mismatch", os.str());
  }
  BlockPartition p{a.partition().m1, a.partition().m2, b.partition().n1, b.partition().n2};
  std::map<int, CMatrix> out;
  for (const auto& [ka, ca] : a.coeffs()) {
    for (const auto& [kb, cb] : b.coeffs()) {
      auto it = out.find(ka + kb);
      if (it == out.end()) {
        out[ka + kb] = ca * cb;
      } else {
        it->second += ca * cb;
      }
    }
  }
  return MatrixSymbol(p, std::move(out));
}

MatrixSymbol operator*(Complex s, const MatrixSymbol& a) {
  std::map<int, CMatrix> out;
  for (const auto& [k, c] : a.coeffs()) out[k] = s * c;
  return MatrixSymbol(a.partition(), std::move(out));
}

MatrixSymbol adjoint(const MatrixSymbol& a) {
  std::map<int, CMatrix> out;
  for (const auto& [k, c] : a.coeffs()) out[-k] = c.adjoint();
  return MatrixSymbol(a.partition().transposed(), std::move(out));
}

MatrixSymbol transpose(const MatrixSymbol& a) {
  std::map<int, CMatrix> out;
  for (const auto& [k, c] : a.coeffs()) out[k] = c.transpose();
  return MatrixSymbol(a.partition().transposed(), std::move(out));
}

MatrixSymbol conj(const MatrixSymbol& a) {
  std::map<int, CMatrix> out;
  for (const auto& [k, c] : a.coeffs()) out[-k] = c.conjugate();
  return MatrixSymbol(a.partition(), std::move(out));
}

// ---------------------------------------------------------------------------

MatrixGrid grid_product(const MatrixGrid& a, const MatrixGrid& b) {
  require_same_shape(a, b);
  MatrixGrid out(a.size());
  for (std::size_t l = 0; l < a.size(); ++l) out[l] = a[l] * b[l];
  return out;
}

MatrixGrid grid_adjoint(const MatrixGrid& a) {
  MatrixGrid out(a.size());
  for (std::size_t l = 0; l < a.size(); ++l) out[l] = a[l].adjoint();
  return out;
}

MatrixGrid grid_transpose(const MatrixGrid& a) {
  MatrixGrid out(a.size());
  for (std::size_t l = 0; l < a.size(); ++l) out[l] = a[l].transpose();
  return out;
}

MatrixGrid grid_conj(const MatrixGrid& a) {
  MatrixGrid out(a.size());
  for (std::size_t l = 0; l < a.size(); ++l) out[l] = a[l].conjugate();
  return out;
}

MatrixGrid grid_difference(const MatrixGrid& a, const MatrixGrid& b) {
  require_same_shape(a, b);
  MatrixGrid out(a.size());
  for (std::size_t l = 0; l < a.size(); ++l) out[l] = a[l] - b[l];
  return out;
}

double grid_distance(const MatrixGrid& a, const MatrixGrid& b) {
  return linf_norm(grid_difference(a, b));
}

double grid_unitarity_residual(const MatrixGrid& u) {
  double worst = 0.0;
  for (const auto& m : u) {
    if (m.size() == 0) continue;
    const CMatrix r = m.adjoint() * m - CMatrix::Identity(m.cols(), m.cols());
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

CVector grid_entry(const MatrixGrid& a, int i, int j) {
  CVector out(static_cast<Eigen::Index>(a.size()));
  for (std::size_t l = 0; l < a.size(); ++l) out(static_cast<Eigen::Index>(l)) = a[l](i, j);
  return out;
}

void set_grid_entry(MatrixGrid& a, int i, int j, const CVector& values) {
  for (std::size_t l = 0; l < a.size(); ++l) a[l](i, j) = values(static_cast<Eigen::Index>(l));
}

MatrixGrid grid_riesz_project(const MatrixGrid& a, RieszPart part) {
  if (a.empty()) return a;
  MatrixGrid out(a.size(), CMatrix::Zero(a[0].rows(), a[0].cols()));
  for (int i = 0; i < a[0].rows(); ++i) {
    for (int j = 0; j < a[0].cols(); ++j) {
      set_grid_entry(out, i, j, riesz_project_samples(grid_entry(a, i, j), part));
    }
  }
  return out;
}

double grid_antianalytic_energy(const MatrixGrid& a) {
  if (a.empty()) return 0.0;
  const int grid = static_cast<int>(a.size());
  double e = 0.0;
  for (int i = 0; i < a[0].rows(); ++i) {
    for (int j = 0; j < a[0].cols(); ++j) {
      const CVector c = coefficients_from_samples(grid_entry(a, i, j));
      for (int l = 0; l < grid; ++l) {
        if (frequency_of_slot(l, grid) < 0) e += std::norm(c(l));
      }
    }
  }
  return std::sqrt(e);
}

MatrixGrid scalar_grid(const CVector& values) {
  MatrixGrid out(static_cast<std::size_t>(values.size()));
  for (Eigen::Index l = 0; l < values.size(); ++l) out[l] = CMatrix::Constant(1, 1, values(l));
  return out;
}

MatrixGrid constant_grid(const CMatrix& value, int grid_size) {
  return MatrixGrid(static_cast<std::size_t>(grid_size), value);
}

}  // namespace superopt
