#pragma once

#include <vector>

#include "superopt/fourier_symbols.hpp"

namespace superopt {

/// z^p * prod_r (-conj(a_r)/|a_r|) (z - a_r) / (1 - conj(a_r) z), 0 < |a_r| < 1.
struct BlaschkeProduct {
  int power = 0;
  std::vector<Complex> zeros;  // repeated per multiplicity

  int degree() const noexcept { return power + static_cast<int>(zeros.size()); }
  bool trivial() const noexcept { return degree() == 0; }
  Complex evaluate(Complex z) const;
  CVector samples(int grid_size) const;
};

/// Analytic h with |h|^2 = rho + eps on the grid, h(0) > 0 and no zeros in
/// the disk. `rho` holds real nonnegative samples; eps <= 0 selects
/// 1e-12 * max(rho). Throws Error("negative_density") on rho < -1e-10.
CVector outer_factor_samples(const Eigen::VectorXd& rho, double eps = 0.0);
ScalarSymbol outer_factor(const Eigen::VectorXd& rho, double eps = 0.0);

struct InnerOuterColumn {
  CVector outer;      // samples of c_o
  MatrixGrid inner;   // samples of c_i = c / c_o, pointwise unit norm
  ScalarSymbol outer_symbol;
  ColumnSymbol inner_symbol;
};

/// Splits a sampled column c = c_o * c_i with c_o scalar outer,
/// |c_o| = ||c||. Throws Error("zero_column") when c vanishes.
InnerOuterColumn inner_outer_column(const MatrixGrid& column);
InnerOuterColumn inner_outer_column(const ColumnSymbol& column, int grid_size);

/// Zeros of an analytic function inside the open unit disk (|a| < 1 - 1e-10),
/// zeros at the origin included. `coeffs` are Taylor coefficients 0..N.
std::vector<Complex> zeros_in_disk(const CVector& coeffs);

/// Greatest common inner divisor of analytic scalar functions given by their
/// Taylor coefficients. Common zeros are matched across entries within `tol`.
/// Zero entries are ignored; throws Error("all_zero") when nothing is left.
BlaschkeProduct gcd_inner_divisor(const std::vector<CVector>& entries, double tol = 1e-6);
BlaschkeProduct gcd_inner_divisor(const std::vector<ScalarSymbol>& entries, double tol = 1e-6);

struct ThematicCompletion {
  MatrixGrid vc;         // samples of V_c (q x (q-1)), analytic
  MatrixSymbol vc_symbol{BlockPartition{}};
  MatrixGrid unitary;    // samples of (c_i, conj(V_c)), q x q
  double unitarity_residual = 0.0;
  double analytic_residual = 0.0;  // k<0 energy of V_c
  double coouter_margin = 0.0;     // min sigma_min(V_c(z)) over a disk mesh
  int truncation_degree = 0;       // Taylor degree of V_c (q >= 3)
};

struct ThematicOptions {
  int max_degree = 512;
  double unitarity_tol = 1e-10;
};

/// Co-outer analytic V_c with (c_i, conj(V_c)) unitary on the grid. Exact for
/// q <= 2. For q >= 3, V_c is the inner function with ker T_{c^t} = V_c H^2:
/// V_c(z) V_c(0)^* = (P_ker e)(z), with the projections computed by least
/// squares over polynomials of doubling degree. Throws
/// Error("completion_not_analytic") when the pointwise isometry residual
/// stays above `unitarity_tol` at `max_degree`.
/// V_c is normalized so V_c(0) U is lower trapezoidal with positive diagonal.
ThematicCompletion thematic_complete(const MatrixGrid& inner_column,
                                     const ThematicOptions& options = {});

/// Appends orthonormal columns to pointwise isometric samples so each node
/// becomes unitary. Appended columns follow the minimal rotation from node to
/// node and the loop holonomy is spread evenly, so the samples close up
/// continuously. Throws Error("not_isometric").
MatrixGrid unitary_grid_completion(const MatrixGrid& isometric);

/// One thematic function: samples of the n x n unitary
///   ( x_1  conj(X_c)  * )
///   ( x_2      0      * )
/// built from a unit-norm column x = x_1 (+) x_2 with analytic x_1.
struct ThematicFunction {
  MatrixGrid full;           // n x n unitary samples
  MatrixGrid xc;             // samples of X_c (upper x (upper-1)), analytic
  MatrixSymbol xc_symbol{BlockPartition{}};
  CVector x_outer;           // x_(o)
  MatrixGrid x_inner;        // x_(i)
  double unitarity_residual = 0.0;
  double analytic_residual = 0.0;
  double coouter_margin = 0.0;
};

ThematicFunction build_thematic_function(const MatrixGrid& column, int upper,
                                         const ThematicOptions& options = {});

/// Thematic pair (V, W) of one reduction level; W is the transpose of the
/// thematic function built from w.
struct ThematicPair {
  ThematicFunction v;
  ThematicFunction w;  // holds W^t
  MatrixGrid V;        // n x n
  MatrixGrid W;        // m x m
};

}  // namespace superopt
