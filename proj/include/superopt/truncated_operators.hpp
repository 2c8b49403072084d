#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "superopt/fourier_symbols.hpp"

namespace superopt {

enum class OperatorKind { four_block, hankel, toeplitz };

/// Basis element z^k e_component.
struct BasisIndex {
  int k = 0;
  int component = 0;
  friend bool operator==(const BasisIndex&, const BasisIndex&) = default;
};

/// Finite input/output bases of a truncated operator, ordered component-major
/// (all frequencies of component 0, then component 1, ...).
///
/// four_block: input  {z^k e_j : 0 <= k <= N_in,  j < n1} u {|k| <= N_in, j >= n1}
///             output {z^k e_i : -N_in-N_sym <= k <= -1, i < m1}
///                    u {|k| <= N_in+N_sym, i >= m1}
/// hankel:     four_block with every component treated as H^2 / H^2_-.
/// toeplitz:   input  {0 <= k <= N_in}, output {0 <= k <= N_in + N_pos}.
class BasisMap {
 public:
  BasisMap() = default;
  static BasisMap four_block(const BlockPartition& p, int n_in, int n_sym);
  static BasisMap toeplitz(int components_in, int components_out, int n_in, int n_out);

  int input_size() const noexcept { return static_cast<int>(input_.size()); }
  int output_size() const noexcept { return static_cast<int>(output_.size()); }
  const BasisIndex& input(int idx) const { return input_.at(idx); }
  const BasisIndex& output(int idx) const { return output_.at(idx); }
  /// -1 when (k, component) lies outside the window.
  int input_index(int k, int component) const;
  int output_index(int k, int component) const;

  int input_components() const noexcept { return in_components_; }
  int output_components() const noexcept { return out_components_; }

 private:
  void add_input(int component, int k_lo, int k_hi);
  void add_output(int component, int k_lo, int k_hi);

  std::vector<BasisIndex> input_, output_;
  // Per component: first frequency and offset into the flat basis.
  std::vector<std::pair<int, int>> in_range_, out_range_;
  std::vector<int> in_offset_, out_offset_;
  int in_components_ = 0;
  int out_components_ = 0;
};

/// Dense matrix of a compressed multiplication operator.
struct TruncatedOperator {
  CMatrix matrix;
  BasisMap basis;
  OperatorKind kind = OperatorKind::four_block;
  MatrixSymbol source{BlockPartition{}};
  int n_in = 0;
};

/// Matrix of Gamma_Phi, H_Phi or T_Phi on the truncated bases.
/// Entry ((l,i),(k,j)) = Phi_ij(l-k).
TruncatedOperator build_operator(const MatrixSymbol& sym, OperatorKind kind, int n_in);

/// Default truncation for four-block and Hankel operators: 4*N_sym + 8.
int default_n_in(const MatrixSymbol& sym);

/// Expands a vector of basis coefficients into a column symbol. `input` picks
/// the input or output basis; the row partition of the result is
/// (upper, lower) components.
ColumnSymbol basis_vector_to_column(const BasisMap& basis, const CVector& x, bool input,
                                    int upper, int lower);

struct MaximizingOptions {
  /// 0 selects the deterministic tie-break; any other value draws a random
  /// unit vector in a degenerate top singular subspace.
  std::uint64_t seed = 0;
  /// Relative gap below which top singular values are treated as tied.
  double tie_tol = 1e-9;
  double zero_tol = 1e-12;
};

struct MaximizingPair {
  double t = 0.0;
  ColumnSymbol f;       // input side, ||f||_2 = 1
  ColumnSymbol g;       // g = Gamma f / t
  CVector f_coeffs;     // in the operator's input basis
  CVector g_coeffs;     // in the output basis
  int multiplicity = 1; // size of the tied top cluster
};

/// Largest singular value and a maximizing vector, phase-normalized so the
/// largest-magnitude coefficient of f is real positive. Throws
/// Error("zero_operator") when the operator vanishes.
MaximizingPair norm_and_maximizing_vector(const TruncatedOperator& op,
                                          const MaximizingOptions& options = {});

/// Descending singular values, padded with zeros up to `count`.
std::vector<double> singular_values(const TruncatedOperator& op, int count);

struct WindingNumber {
  int value = 0;
  double rounding_residual = 0.0;  // |raw - value|
};

/// Winding number of a sampled unimodular function.
WindingNumber winding_number(const CVector& samples);
WindingNumber winding_number(const ScalarSymbol& u, int grid_size);

/// dim Ker T_u from the rectangular truncation of T_u; cross-checked against
/// max(-winding, 0). Throws Error("index_mismatch") on disagreement.
int toeplitz_kernel_dim(const ScalarSymbol& u, int n_in, double rank_tol = 1e-8,
                        int grid_size = 0);

/// max(||(Phi21 Phi22)||_inf, ||(Phi12; Phi22)||_inf): a lower bound for the
/// essential norm of Gamma_Phi.
double essential_norm_lower_bound(const MatrixSymbol& sym, int grid_size = 0);

}  // namespace superopt
