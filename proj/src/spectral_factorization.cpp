#include "superopt/spectral_factorization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "superopt/error.hpp"

namespace superopt {

namespace {

constexpr double kTrimTol = 1e-12;
constexpr int kCompanionMaxDegree = 128;

// Closest unitary to m (polar factor).
CMatrix polar_unitary(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

// Taylor coefficients 0..G/2-1 of sampled data.
CVector taylor_coefficients(const CVector& samples) {
  const CVector c = coefficients_from_samples(samples);
  return c.head(samples.size() / 2);
}

CVector samples_of_taylor(const CVector& coeffs, int grid_size) {
  std::map<int, Complex> m;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
    if (coeffs(k) != Complex{0.0, 0.0}) m[static_cast<int>(k)] = coeffs(k);
  }
  return samples_from_coefficients(m, grid_size);
}

std::vector<Complex> companion_roots(const CVector& c) {
  const int d = static_cast<int>(c.size()) - 1;
  std::vector<Complex> roots;
  if (d < 1) return roots;
  CMatrix comp = CMatrix::Zero(d, d);
  for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) comp(i, d - 1) = -c(i) / c(d);
  Eigen::ComplexEigenSolver<CMatrix> es(comp, false);
  for (int i = 0; i < d; ++i) roots.push_back(es.eigenvalues()(i));
  return roots;
}

// Zeros inside the unit circle from the power sums
// s_p = (1/2 pi i) \oint z^p f'/f dz, via Newton's identities.
std::vector<Complex> moment_roots(const CVector& c) {
  const int d = static_cast<int>(c.size()) - 1;
  const int grid = next_power_of_two(std::max(1024, 8 * (d + 1)));
  CVector dc = CVector::Zero(std::max(d, 1));
  for (int k = 1; k <= d; ++k) dc(k - 1) = static_cast<double>(k) * c(k);
  const CVector f = samples_of_taylor(c, grid);
  const CVector df = samples_of_taylor(dc, grid);
  const double fmin = f.cwiseAbs().minCoeff();
  if (fmin <= 1e-10 * f.cwiseAbs().maxCoeff()) {
    throw Error("root_finding", "function vanishes on the circle", -1, fmin);
  }
  auto power_sum = [&](int p) {
    Complex s{0.0, 0.0};
    for (int l = 0; l < grid; ++l) {
      s += std::pow(grid_node(l, grid), p + 1) * df(l) / f(l);
    }
    return s / static_cast<double>(grid);
  };
  const int count = static_cast<int>(std::lround(power_sum(0).real()));
  if (count <= 0) return {};
  if (count > 64) throw Error("root_finding", "too many zeros for contour moments");
  std::vector<Complex> s(count + 1), e(count + 1);
  for (int p = 1; p <= count; ++p) s[p] = power_sum(p);
  e[0] = 1.0;
  for (int k = 1; k <= count; ++k) {
    Complex acc{0.0, 0.0};
    for (int i = 1; i <= k; ++i) acc += ((i % 2 == 1) ? 1.0 : -1.0) * e[k - i] * s[i];
    e[k] = acc / static_cast<double>(k);
  }
  // prod (z - a_r) = sum_k (-1)^k e_k z^{count-k}
  CVector poly(count + 1);
  for (int k = 0; k <= count; ++k) poly(count - k) = ((k % 2 == 0) ? 1.0 : -1.0) * e[k];
  return companion_roots(poly);
}

struct DiskZeros {
  int power = 0;
  std::vector<Complex> zeros;
};

DiskZeros disk_zeros(const CVector& coeffs) {
  DiskZeros out;
  const double top = coeffs.size() > 0 ? coeffs.cwiseAbs().maxCoeff() : 0.0;
  if (top == 0.0) return out;
  int lo = 0;
  int hi = static_cast<int>(coeffs.size()) - 1;
  while (std::abs(coeffs(hi)) <= kTrimTol * top) --hi;
  while (std::abs(coeffs(lo)) <= kTrimTol * top) ++lo;
  out.power = lo;
  const CVector c = coeffs.segment(lo, hi - lo + 1);
  const std::vector<Complex> roots =
      (c.size() - 1 <= kCompanionMaxDegree) ? companion_roots(c) : moment_roots(c);
  for (const Complex& a : roots) {
    if (std::abs(a) <= 1e-9) {
      ++out.power;
    } else if (std::abs(a) < 1.0 - 1e-10) {
      out.zeros.push_back(a);
    }
  }
  return out;
}

// Evaluates sum_{k>=0} C_k z^k of an analytic matrix symbol inside the disk.
CMatrix evaluate_analytic(const MatrixSymbol& sym, Complex z) {
  CMatrix out = CMatrix::Zero(sym.rows(), sym.cols());
  for (const auto& [k, c] : sym.coeffs()) {
    if (k >= 0) out += c * std::pow(z, k);
  }
  return out;
}

double coouter_margin(const MatrixSymbol& vc) {
  if (vc.cols() == 0) return 1.0;  // vacuous for q = 1
  double margin = std::numeric_limits<double>::infinity();
  constexpr int kAngles = 32;
  for (int ir = 0; ir <= 9; ++ir) {
    const double r = 0.1 * ir;
    for (int ia = 0; ia < (ir == 0 ? 1 : kAngles); ++ia) {
      const Complex z = r * grid_node(ia, kAngles);
      Eigen::JacobiSVD<CMatrix> svd(evaluate_analytic(vc, z));
      margin = std::min(margin, svd.singularValues()(svd.singularValues().size() - 1));
    }
  }
  return margin;
}

// Fixes the constant right unitary factor: V_c(0) U lower trapezoidal with
// positive diagonal.
CMatrix qr_normalizer(const CMatrix& vc0) {
  const int r = static_cast<int>(vc0.cols());
  Eigen::HouseholderQR<CMatrix> qr(vc0.adjoint());
  CMatrix q = qr.householderQ() * CMatrix::Identity(r, r);
  const CMatrix lower = vc0 * q;
  const double scale = std::max(lower.cwiseAbs().maxCoeff(), 1e-300);
  for (int j = 0; j < r; ++j) {
    for (int i = j; i < lower.rows(); ++i) {
      const Complex d = lower(i, j);
      if (std::abs(d) > 1e-10 * scale) {
        q.col(j) *= std::conj(d) / std::abs(d);
        break;
      }
    }
  }
  return q;
}

}  // namespace

// ---------------------------------------------------------------------------

Complex BlaschkeProduct::evaluate(Complex z) const {
  Complex out = std::pow(z, power);
  for (const Complex& a : zeros) {
    out *= (-std::conj(a) / std::abs(a)) * (z - a) / (1.0 - std::conj(a) * z);
  }
  return out;
}

CVector BlaschkeProduct::samples(int grid_size) const {
  CVector s(grid_size);
  for (int l = 0; l < grid_size; ++l) s(l) = evaluate(grid_node(l, grid_size));
  return s;
}

// ---------------------------------------------------------------------------

CVector outer_factor_samples(const Eigen::VectorXd& rho, double eps) {
  const int grid = static_cast<int>(rho.size());
  if (grid == 0) return CVector();
  if (rho.minCoeff() < -1e-10) {
    throw Error("negative_density", "density has negative samples", -1, rho.minCoeff());
  }
  const double top = rho.maxCoeff();
  if (eps <= 0.0) eps = top > 0.0 ? 1e-12 * top : 1e-300;
  CVector logs(grid);
  for (int l = 0; l < grid; ++l) logs(l) = std::log(std::max(rho(l), 0.0) + eps);
  CVector c = coefficients_from_samples(logs);
  // Analytic function with real part log(rho): double k > 0, drop k < 0. The
  // Nyquist slot is real and kept once.
  for (int l = 1; l < grid; ++l) {
    if (l < grid / 2) {
      c(l) *= 2.0;
    } else if (l > grid / 2) {
      c(l) = 0.0;
    }
  }
  std::map<int, Complex> m;
  for (int l = 0; l < grid; ++l) {
    if (c(l) != Complex{0.0, 0.0}) m[l] = c(l);
  }
  const CVector s = samples_from_coefficients(m, grid);
  CVector h(grid);
  for (int l = 0; l < grid; ++l) h(l) = std::exp(0.5 * s(l));
  return h;
}

ScalarSymbol outer_factor(const Eigen::VectorXd& rho, double eps) {
  ScalarSymbol h;
  h.symbol = MatrixSymbol::from_grid(scalar_grid(outer_factor_samples(rho, eps)), BlockPartition{});
  h.outer = true;
  return h;
}

InnerOuterColumn inner_outer_column(const MatrixGrid& column) {
  const int grid = static_cast<int>(column.size());
  Eigen::VectorXd rho(grid);
  for (int l = 0; l < grid; ++l) rho(l) = column[l].squaredNorm();
  if (grid == 0 || rho.maxCoeff() <= 1e-300) throw Error("zero_column", "column vanishes");
  InnerOuterColumn out;
  out.outer = outer_factor_samples(rho);
  out.inner.resize(grid);
  for (int l = 0; l < grid; ++l) out.inner[l] = column[l] / out.outer(l);
  const int q = static_cast<int>(column[0].rows());
  out.outer_symbol.symbol = MatrixSymbol::from_grid(scalar_grid(out.outer), BlockPartition{});
  out.outer_symbol.outer = true;
  out.inner_symbol.symbol = MatrixSymbol::from_grid(out.inner, BlockPartition{q, 0, 1, 0});
  return out;
}

InnerOuterColumn inner_outer_column(const ColumnSymbol& column, int grid_size) {
  return inner_outer_column(sample_on_grid(column.symbol, grid_size));
}

std::vector<Complex> zeros_in_disk(const CVector& coeffs) {
  const DiskZeros dz = disk_zeros(coeffs);
  std::vector<Complex> out(dz.power, Complex{0.0, 0.0});
  out.insert(out.end(), dz.zeros.begin(), dz.zeros.end());
  return out;
}

BlaschkeProduct gcd_inner_divisor(const std::vector<CVector>& entries, double tol) {
  double top = 0.0;
  for (const auto& e : entries) {
    if (e.size() > 0) top = std::max(top, e.cwiseAbs().maxCoeff());
  }
  if (top == 0.0) throw Error("all_zero", "every entry vanishes");
  BlaschkeProduct out;
  bool first = true;
  for (const auto& e : entries) {
    if (e.size() == 0 || e.cwiseAbs().maxCoeff() <= kTrimTol * top) continue;
    const DiskZeros dz = disk_zeros(e);
    if (first) {
      out.power = dz.power;
      out.zeros = dz.zeros;
      first = false;
      continue;
    }
    out.power = std::min(out.power, dz.power);
    std::vector<bool> used(dz.zeros.size(), false);
    std::vector<Complex> kept;
    for (const Complex& a : out.zeros) {
      for (std::size_t i = 0; i < dz.zeros.size(); ++i) {
        if (!used[i] && std::abs(dz.zeros[i] - a) <= tol) {
          used[i] = true;
          kept.push_back(a);
          break;
        }
      }
    }
    out.zeros = std::move(kept);
  }
  return out;
}

BlaschkeProduct gcd_inner_divisor(const std::vector<ScalarSymbol>& entries, double tol) {
  std::vector<CVector> taylor;
  for (const auto& e : entries) {
    const int deg = e.symbol.positive_degree();
    CVector c = CVector::Zero(deg + 1);
    for (const auto& [k, m] : e.symbol.coeffs()) {
      if (k >= 0) c(k) = m(0, 0);
    }
    taylor.push_back(std::move(c));
  }
  return gcd_inner_divisor(taylor, tol);
}

// ---------------------------------------------------------------------------

MatrixGrid unitary_grid_completion(const MatrixGrid& isometric) {
  const int grid = static_cast<int>(isometric.size());
  if (grid == 0) return {};
  const int m = static_cast<int>(isometric[0].rows());
  const int r = static_cast<int>(isometric[0].cols());
  const double res = grid_unitarity_residual(isometric);
  if (r > m || res > 1e-7) {
    throw Error("not_isometric", "columns are not orthonormal", -1, res);
  }
  if (r == m) return isometric;
  const int extra = m - r;

  std::vector<CMatrix> comp(grid);
  for (int l = 0; l < grid; ++l) {
    Eigen::HouseholderQR<CMatrix> qr(isometric[l]);
    const CMatrix q = qr.householderQ() * CMatrix::Identity(m, m);
    comp[l] = q.rightCols(extra);
    if (l > 0) comp[l] = comp[l] * polar_unitary(comp[l].adjoint() * comp[l - 1]);
  }
  // Parallel transport around the loop returns comp[0] * H; spread H evenly.
  const CMatrix holonomy = polar_unitary(comp[0].adjoint() * comp[grid - 1]);
  Eigen::ComplexSchur<CMatrix> schur(holonomy);
  const CMatrix& z = schur.matrixU();
  Eigen::VectorXd angles(extra);
  for (int i = 0; i < extra; ++i) angles(i) = std::arg(schur.matrixT()(i, i));

  MatrixGrid out(grid);
  for (int l = 0; l < grid; ++l) {
    CVector phases(extra);
    const double frac = static_cast<double>(l) / grid;
    for (int i = 0; i < extra; ++i) phases(i) = std::exp(Complex(0.0, -angles(i) * frac));
    const CMatrix twist = z * phases.asDiagonal() * z.adjoint();
    out[l].resize(m, m);
    out[l].leftCols(r) = isometric[l];
    out[l].rightCols(extra) = comp[l] * twist;
  }
  return out;
}

namespace {

// Inner function V with ker T_{c^t} = V H^2. The orthogonal complement of the
// kernel is the closure of T_{conj c} H^2; projecting the constants e_i onto
// the kernel gives F(z) = V(z) V(0)^*, from which V follows.
MatrixGrid kernel_inner_function(const MatrixGrid& c, const ThematicOptions& options,
                                 int* degree_used) {
  const int grid = static_cast<int>(c.size());
  const int q = static_cast<int>(c[0].rows());
  std::vector<CVector> taylor(q);
  double top = 0.0;
  for (int i = 0; i < q; ++i) {
    taylor[i] = taylor_coefficients(grid_entry(c, i, 0));
    top = std::max(top, taylor[i].cwiseAbs().maxCoeff());
  }
  int eff = 0;
  for (int i = 0; i < q; ++i) {
    for (Eigen::Index k = 0; k < taylor[i].size(); ++k) {
      if (std::abs(taylor[i](k)) > 1e-15 * top) eff = std::max(eff, static_cast<int>(k));
    }
  }
  const int cap = std::min(options.max_degree, grid / 4);
  double residual = std::numeric_limits<double>::infinity();
  for (int n = std::min(std::max(8, 2 * eff), cap);; n = std::min(2 * n, cap)) {
    const int len = n + 1;
    CMatrix a = CMatrix::Zero(q * len, len);
    for (int i = 0; i < q; ++i) {
      for (int k = 0; k < len; ++k) {
        for (int j = k; j < len && j - k < taylor[i].size(); ++j) {
          a(i * len + k, j) = std::conj(taylor[i](j - k));
        }
      }
    }
    Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeThinU);
    const Eigen::VectorXd& sv = svd.singularValues();
    int rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-12 * sv(0)) ++rank;
    const CMatrix u = svd.matrixU().leftCols(rank);
    CMatrix f = CMatrix::Zero(q * len, q);
    for (int i = 0; i < q; ++i) f(i * len, i) = 1.0;
    CMatrix picked(q, rank);
    for (int i = 0; i < q; ++i) picked.row(i) = u.row(i * len);
    f -= u * picked.adjoint();

    CMatrix f0(q, q);
    for (int r = 0; r < q; ++r) f0.row(r) = f.row(r * len);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (f0 + f0.adjoint()));
    const Eigen::VectorXd lam = es.eigenvalues().tail(q - 1);
    if (lam(0) <= 1e-12) {
      throw Error("completion_not_analytic", "kernel inner function degenerate at 0", -1, lam(0));
    }
    const CMatrix scale =
        es.eigenvectors().rightCols(q - 1) * lam.cwiseSqrt().cwiseInverse().asDiagonal();
    std::map<int, CMatrix> coeffs;
    for (int k = 0; k < len; ++k) {
      CMatrix fk(q, q);
      for (int r = 0; r < q; ++r) fk.row(r) = f.row(r * len + k);
      coeffs[k] = fk * scale;
    }
    MatrixGrid v = sample_on_grid(MatrixSymbol(BlockPartition{q, 0, q - 1, 0}, coeffs), grid);
    residual = 0.0;
    for (int l = 0; l < grid; ++l) {
      const CMatrix gram = v[l].adjoint() * v[l] - CMatrix::Identity(q - 1, q - 1);
      residual = std::max(residual, gram.cwiseAbs().maxCoeff());
      residual = std::max(residual, (c[l].transpose() * v[l]).cwiseAbs().maxCoeff());
    }
    if (residual <= options.unitarity_tol) {
      *degree_used = n;
      return v;
    }
    if (n >= cap) break;
  }
  std::ostringstream os;
  os << "isometry residual " << residual << " at degree " << cap;
  throw Error("completion_not_analytic", os.str(), -1, residual);
}

}  // namespace

ThematicCompletion thematic_complete(const MatrixGrid& inner_column,
                                     const ThematicOptions& options) {
  const int grid = static_cast<int>(inner_column.size());
  if (grid == 0) throw Error("invalid_argument", "empty grid");
  const int q = static_cast<int>(inner_column[0].rows());
  ThematicCompletion out;
  out.vc.assign(grid, CMatrix::Zero(q, q - 1));

  if (q == 2) {
    CVector a = grid_entry(inner_column, 0, 0);
    CVector b = grid_entry(inner_column, 1, 0);
    // Strip a common inner factor so (-b, a) is co-outer.
    const BlaschkeProduct common =
        gcd_inner_divisor(std::vector<CVector>{taylor_coefficients(a), taylor_coefficients(b)});
    if (!common.trivial()) {
      const CVector theta = common.samples(grid);
      for (int l = 0; l < grid; ++l) {
        a(l) /= theta(l);
        b(l) /= theta(l);
      }
    }
    for (int l = 0; l < grid; ++l) {
      out.vc[l](0, 0) = -b(l);
      out.vc[l](1, 0) = a(l);
    }
  } else if (q >= 3) {
    out.vc = kernel_inner_function(inner_column, options, &out.truncation_degree);
  }

  if (q >= 2) {
    CMatrix vc0 = CMatrix::Zero(q, q - 1);
    for (const auto& m : out.vc) vc0 += m;
    vc0 /= static_cast<double>(grid);
    const CMatrix norm = qr_normalizer(vc0);
    for (auto& m : out.vc) m = (m * norm).eval();
  }
  out.vc_symbol = MatrixSymbol::from_grid(out.vc, BlockPartition{q, 0, q - 1, 0}, 1e-15);
  out.analytic_residual = grid_antianalytic_energy(out.vc);
  out.coouter_margin = coouter_margin(out.vc_symbol);
  out.unitary.resize(grid);
  for (int l = 0; l < grid; ++l) {
    out.unitary[l].resize(q, q);
    out.unitary[l].col(0) = inner_column[l];
    out.unitary[l].rightCols(q - 1) = out.vc[l].conjugate();
  }
  out.unitarity_residual = grid_unitarity_residual(out.unitary);
  return out;
}

ThematicFunction build_thematic_function(const MatrixGrid& column, int upper,
                                         const ThematicOptions& options) {
  const int grid = static_cast<int>(column.size());
  if (grid == 0) throw Error("invalid_argument", "empty grid");
  const int n = static_cast<int>(column[0].rows());
  if (upper < 1 || upper > n) throw Error("invalid_argument", "bad upper block size");
  MatrixGrid x(grid), x1(grid);
  for (int l = 0; l < grid; ++l) {
    const double nrm = column[l].norm();
    if (nrm <= 1e-300) throw Error("zero_column", "column vanishes at a node", -1, nrm);
    x[l] = column[l] / nrm;
    x1[l] = x[l].topRows(upper);
  }
  const InnerOuterColumn io = inner_outer_column(x1);
  const ThematicCompletion tc = thematic_complete(io.inner, options);

  MatrixGrid iso(grid, CMatrix::Zero(n, upper));
  for (int l = 0; l < grid; ++l) {
    iso[l].col(0) = x[l];
    iso[l].topRightCorner(upper, upper - 1) = tc.vc[l].conjugate();
  }
  ThematicFunction out;
  out.full = unitary_grid_completion(iso);
  out.xc = tc.vc;
  out.xc_symbol = tc.vc_symbol;
  out.x_outer = io.outer;
  out.x_inner = io.inner;
  out.unitarity_residual = grid_unitarity_residual(out.full);
  out.analytic_residual = tc.analytic_residual;
  out.coouter_margin = tc.coouter_margin;
  return out;
}

}  // namespace superopt
