#pragma once

#include <string>
#include <vector>

#include "superopt/fourier_symbols.hpp"
#include "superopt/superoptimal_solver.hpp"
#include "superopt/truncated_operators.hpp"

namespace superopt {

/// Grid samples of a nonnegative self-adjoint n x n matrix function.
struct MatrixWeight {
  MatrixGrid values;

  /// Throws Error("not_a_weight") unless every node is Hermitian within 1e-10
  /// with eigenvalues >= -1e-10.
  void validate() const;
  /// E^* E, pointwise.
  static MatrixWeight gram(const MatrixGrid& e);
};

enum class ClipMode {
  Lambda,  // t < a -> a
  lambda,  // t < a -> 0
};

MatrixWeight clip_weight(const MatrixWeight& w, double a, ClipMode mode);

/// Compression of multiplication by w to the input space of `gamma`.
CMatrix weight_compression(const MatrixWeight& w, const BasisMap& basis);

struct Admissibility {
  bool admissible = false;
  double min_eig = 0.0;  // of M_W - Gamma^* Gamma
};

Admissibility is_admissible(const MatrixWeight& w, const TruncatedOperator& gamma,
                            double tol = 1e-8);

struct SubspaceDim {
  int dim = 0;
  double threshold = 0.0;
  double largest_null = 0.0;      // largest |eigenvalue| counted in the kernel
  double smallest_nonnull = 0.0;  // smallest eigenvalue above the threshold
  bool ill_separated = false;     // gap around the threshold under 10x
};

/// Numerical nullspace dimension of M_W - Gamma^* Gamma, threshold
/// rank_tol * largest eigenvalue.
SubspaceDim maximizing_subspace_dim(const MatrixWeight& w, const TruncatedOperator& gamma,
                                    double rank_tol = 1e-7);

struct IndexSumEntry {
  double a = 0.0;
  int expected = 0;     // sum of k_j over t_j >= a
  int dim = 0;          // at N_in
  int dim_refined = 0;  // at N_in + 8
  bool stable = false;
  bool ill_separated = false;
  bool match = false;
};

struct IndexSumReport {
  std::vector<IndexSumEntry> entries;
  bool ok = true;
};

/// Compares sum_{t_j >= a} k_j with dim E(Lambda_{a^2}(E^*E)) for every
/// distinct superoptimal value a, E the superoptimal error. The clipping level
/// is a^2 because E^*E carries the squared singular values.
IndexSumReport check_index_sums(const MatrixSymbol& sym, const SuperoptimalResult& result,
                                int n_in = 0, double rank_tol = 1e-7);

struct InequalityEntry {
  std::string kind;  // "extended_t" or "level"
  int level = 0;
  int j = 0;
  double lhs = 0.0;
  double rhs = 0.0;    // max(truncated singular value, essential floor)
  double floor = 0.0;  // essential-norm lower bound of the larger operator
  bool ok = true;
};

struct InequalityReport {
  std::vector<InequalityEntry> entries;
  bool ok = true;
};

/// t'_j <= s_j(Gamma_Phi) + tol and, per level l,
/// s_j(Gamma_{Phi^(l+1)}) <= s_{j+k_l}(Gamma_{Phi^(l)}) + tol. Right-hand
/// sides are raised to the essential-norm lower bound of Phi^(l), which every
/// singular number of Gamma_{Phi^(l)} exceeds; level entries stop once the
/// left-hand side falls to that bound.
InequalityReport check_singular_inequalities(const MatrixSymbol& sym,
                                             const SuperoptimalResult& result, int n_in = 0,
                                             double tol = 1e-6);

struct ConstancyEntry {
  int j = 0;
  double min = 0.0;
  double max = 0.0;
  double flatness = 0.0;
  bool ok = true;
};

struct ConstancyReport {
  std::vector<ConstancyEntry> entries;
  bool ok = true;
};

/// Flatness of s_j((Phi - Q)(zeta)) for every level j, on `nodes` evenly
/// spaced nodes drawn from the solver grid.
ConstancyReport check_constancy(const SuperoptimalResult& result, int nodes = 512,
                                double tol = 1e-5);

}  // namespace superopt
