#pragma once

#include <complex>
#include <map>
#include <vector>

#include <Eigen/Dense>

namespace superopt {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Samples of a matrix function at the nodes exp(2*pi*i*l/G), l = 0..G-1.
using MatrixGrid = std::vector<CMatrix>;

/// Row/column block sizes of a four-block symbol.
///
/// Rows split as m1 (corrected, H^2_- output) + m2 (L^2 output); columns as
/// n1 (H^2 input) + n2 (L^2 input). m2 = n2 = 0 is the plain Nehari problem.
struct BlockPartition {
  int m1 = 1;
  int m2 = 0;
  int n1 = 1;
  int n2 = 0;

  int rows() const noexcept { return m1 + m2; }
  int cols() const noexcept { return n1 + n2; }
  BlockPartition transposed() const noexcept { return {n1, n2, m1, m2}; }

  /// Throws Error("invalid_partition") on negative sizes or an empty shape.
  /// With `require_corrected_block`, m1 >= 1 and n1 >= 1 are enforced too.
  void validate(bool require_corrected_block = true) const;

  static BlockPartition nehari(int m, int n) { return {m, 0, n, 0}; }

  friend bool operator==(const BlockPartition&, const BlockPartition&) = default;
};

enum class RieszPart {
  analytic,      // k >= 0
  antianalytic,  // k < 0
  nonneg = analytic,
  neg = antianalytic,
};

/// Matrix function on the unit circle with finitely many Fourier
/// coefficients, stored sparsely by frequency.
class MatrixSymbol {
 public:
  explicit MatrixSymbol(BlockPartition partition);
  MatrixSymbol(BlockPartition partition, std::map<int, CMatrix> coeffs);

  /// Scalar (1x1, Nehari partition) symbol from frequency -> value pairs.
  static MatrixSymbol scalar(const std::map<int, Complex>& coeffs);
  /// Constant symbol.
  static MatrixSymbol constant(const CMatrix& value, BlockPartition partition);
  /// Symbol z^k * value.
  static MatrixSymbol monomial(int k, const CMatrix& value, BlockPartition partition);

  /// Recovers coefficients from grid samples by FFT. Frequencies are taken in
  /// [-G/2, G/2); coefficient matrices whose max-abs falls below
  /// `drop_tol` times the largest one are discarded.
  static MatrixSymbol from_grid(const MatrixGrid& samples, BlockPartition partition,
                                double drop_tol = 1e-15);

  const BlockPartition& partition() const noexcept { return partition_; }
  int rows() const noexcept { return partition_.rows(); }
  int cols() const noexcept { return partition_.cols(); }
  const std::map<int, CMatrix>& coeffs() const noexcept { return coeffs_; }

  /// Largest |k| with a stored coefficient (0 for the zero symbol).
  int degree() const noexcept;
  /// Largest k > 0 stored, or 0.
  int positive_degree() const noexcept;
  /// Largest -k over stored k < 0, or 0.
  int negative_degree() const noexcept;

  CMatrix coeff(int k) const;
  CMatrix evaluate(Complex z) const;
  bool is_zero(double tol = 0.0) const;

  /// Same coefficients under a different partition of the same shape.
  MatrixSymbol with_partition(BlockPartition partition) const;
  /// Sub-block of rows [r0, r0+nr) and columns [c0, c0+nc).
  MatrixSymbol block(int r0, int c0, int nr, int nc, BlockPartition partition) const;
  /// Drops coefficients below `tol` (absolute, max-abs entry).
  MatrixSymbol trimmed(double tol) const;

 private:
  BlockPartition partition_;
  std::map<int, CMatrix> coeffs_;
};

/// Scalar function with optional structural tags.
struct ScalarSymbol {
  MatrixSymbol symbol{BlockPartition{}};
  bool outer = false;
  bool inner = false;
  bool unimodular = false;

  /// Checks the tag invariants on a grid; throws Error("tag_violation").
  void check_tags(int grid_size) const;
};

/// n x 1 function whose rows split as (upper block, lower block) following
/// `symbol.partition().m1` / `m2`.
struct ColumnSymbol {
  MatrixSymbol symbol{BlockPartition{}};

  int upper() const noexcept { return symbol.partition().m1; }
  int lower() const noexcept { return symbol.partition().m2; }
  int height() const noexcept { return symbol.rows(); }
};

/// next power of two >= 4*(n_sym+1).
int default_grid_size(int n_sym);
int next_power_of_two(int n);

/// Grid node zeta_l = exp(2*pi*i*l/G).
Complex grid_node(int l, int grid_size);

// --- scalar FFT plumbing ------------------------------------------------------

/// Samples of sum_k c_k z^k at G nodes. Frequencies are reduced mod G.
CVector samples_from_coefficients(const std::map<int, Complex>& coeffs, int grid_size);
/// Fourier coefficients from G samples; entry i holds frequency i for
/// i < G/2 and i - G otherwise.
CVector coefficients_from_samples(const CVector& samples);
/// Frequency stored at FFT slot `index`.
int frequency_of_slot(int index, int grid_size) noexcept;
/// Keeps the k >= 0 (analytic) or k < 0 part of a sampled scalar function.
CVector riesz_project_samples(const CVector& samples, RieszPart part);

// --- module operations --------------------------------------------------------

/// Phi(zeta_l) for l = 0..grid_size-1. Throws Error("aliasing") when
/// grid_size < 2*degree + 2.
MatrixGrid sample_on_grid(const MatrixSymbol& sym, int grid_size);

MatrixSymbol riesz_project(const MatrixSymbol& sym, RieszPart part);

/// L^2 norm of the k < 0 part, sqrt(sum_{k<0} ||Phi_k||_F^2).
double antianalytic_energy(const MatrixSymbol& sym);
/// L^2 norm of the k >= 0 part.
double analytic_energy(const MatrixSymbol& sym);

double linf_norm(const MatrixSymbol& sym, int grid_size);
double linf_norm(const MatrixGrid& samples);

/// Descending singular values at every node.
std::vector<Eigen::VectorXd> singular_values_on_grid(const MatrixGrid& samples);

struct SingularProfile {
  std::vector<double> values;  // s_j(Phi(zeta_l)) per node
  double sup = 0.0;            // s_j^infty
  double flatness = 0.0;       // max - min over the grid
};

SingularProfile sj_profile(const MatrixSymbol& sym, int j, int grid_size);
SingularProfile sj_profile(const MatrixGrid& samples, int j);

// --- algebra -----------------------------------------------------------------

MatrixSymbol operator+(const MatrixSymbol& a, const MatrixSymbol& b);
MatrixSymbol operator-(const MatrixSymbol& a, const MatrixSymbol& b);
/// Convolution of coefficient sequences; partition is (rows of a, cols of b).
MatrixSymbol operator*(const MatrixSymbol& a, const MatrixSymbol& b);
MatrixSymbol operator*(Complex s, const MatrixSymbol& a);
/// Pointwise conjugate transpose: Phi_k -> Phi_{-k}^*.
MatrixSymbol adjoint(const MatrixSymbol& a);
MatrixSymbol transpose(const MatrixSymbol& a);
/// Pointwise complex conjugate: Phi_k -> conj(Phi_{-k}).
MatrixSymbol conj(const MatrixSymbol& a);

// --- grid helpers ------------------------------------------------------------

MatrixGrid grid_product(const MatrixGrid& a, const MatrixGrid& b);
MatrixGrid grid_adjoint(const MatrixGrid& a);
MatrixGrid grid_transpose(const MatrixGrid& a);
MatrixGrid grid_conj(const MatrixGrid& a);
MatrixGrid grid_difference(const MatrixGrid& a, const MatrixGrid& b);
/// max over nodes of ||a(zeta) - b(zeta)||_2.
double grid_distance(const MatrixGrid& a, const MatrixGrid& b);
/// max over nodes and entries of |U^*U - I|.
double grid_unitarity_residual(const MatrixGrid& u);

/// Entry (i, j) of every node as one sampled scalar function.
CVector grid_entry(const MatrixGrid& a, int i, int j);
void set_grid_entry(MatrixGrid& a, int i, int j, const CVector& values);
/// Entrywise Riesz projection of sampled data.
MatrixGrid grid_riesz_project(const MatrixGrid& a, RieszPart part);
/// L^2 norm of the k < 0 Fourier content of sampled data.
double grid_antianalytic_energy(const MatrixGrid& a);
/// Wraps scalar samples as a grid of 1x1 matrices.
MatrixGrid scalar_grid(const CVector& values);
/// Samples of a constant matrix.
MatrixGrid constant_grid(const CMatrix& value, int grid_size);

}  // namespace superopt
