#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "superopt/fourier_symbols.hpp"
#include "superopt/spectral_factorization.hpp"
#include "superopt/truncated_operators.hpp"

namespace superopt {

enum class TransposeMode { automatic, on, off };

struct SolverConfig {
  int grid_size = 0;          // 0: max(2048, default_grid_size(N_sym))
  int max_grid_size = 65536;  // cap for automatic grid doubling on aliasing
  int n_in = 0;               // 0: default_n_in(sym) at the top level
  int n_in_cap = 256;         // cap for four-block truncations
  double truncation_tol = 1e-6;  // relative change of ||Gamma||, N_in vs N_in + 8
  int degree_M = 0;           // 0: N_sym + 4
  int interpolation_degree_cap = 128;
  double tol_gap = 1e-6;      // relative to t_0
  double zero_tol = 1e-9;     // relative to t_0
  double eq_tol = 1e-6;       // relative, grouping of equal t_j
  double rank_tol = 1e-8;
  double sandwich_tol = 1e-6;
  double hypothesis_margin = 1e-8;
  std::uint64_t seed = 0;     // tie-break seed for maximizing vectors
  TransposeMode transpose = TransposeMode::automatic;
  bool check_indices = true;  // cross-check k_j with toeplitz_kernel_dim
};

/// One level of the recursion.
struct ThematicStep {
  int level = 0;
  BlockPartition partition;
  double t = 0.0;
  CVector u_samples;
  ScalarSymbol u;
  ThematicPair pair;
  MatrixGrid q0_samples;
  MatrixSymbol Q0{BlockPartition{}};
  MatrixSymbol next_symbol{BlockPartition{}};
  MatrixGrid next_samples;
  int k = 0;
  int kernel_dim = -1;  // -1 when the cross-check was skipped
  double winding_residual = 0.0;
  CVector h_samples;
  BlaschkeProduct theta;
  BlaschkeProduct tau;
  int multiplicity = 1;
  bool base_case = false;
  double sandwich_residual = 0.0;
  double interpolation_residual = 0.0;
  double essential_lower_bound = 0.0;
  double division_floor = 1.0;  // min |f1|^2/||f||^2 (base case), else 1
  int n_in = 0;
};

struct Factorization {
  MatrixGrid D;               // diag(t_j u_j, terminal block)
  std::vector<MatrixGrid> V;  // identity-bordered V_j
  std::vector<MatrixGrid> W;
  double residual = 0.0;      // ||(Phi - Q) - W_0^* ... D ... V_0^*||_inf
};

struct IndexSummary {
  std::vector<int> k;
  std::vector<double> extended_t;
  std::vector<std::pair<double, int>> nu;  // a_r descending -> nu_r
};

struct SuperoptimalResult {
  MatrixSymbol Q{BlockPartition{}};  // m1 x n1, analytic
  MatrixGrid Q_samples;
  MatrixGrid error_samples;          // Phi - diag(Q, 0)
  std::vector<double> t_seq;         // padded with zeros to min(m1, n1)
  std::vector<ThematicStep> steps;   // nonzero levels only
  MatrixGrid terminal;               // residual block after the last level
  Factorization factorization;
  IndexSummary indices;
  bool transposed = false;
  int grid_size = 0;
  int n_in = 0;
  double t0 = 0.0;
  double essential_lower_bound = 0.0;
  double analytic_residual = 0.0;    // anti-analytic energy of Q
};

/// Analytic Q0 of degree <= M with (Phi - diag(Q0,0)) f = t g and
/// (Phi - diag(Q0,0))^* g = t f on the corrected block, by least squares on
/// Taylor coefficients. Returns Q0 and the relative residual.
std::pair<MatrixSymbol, double> aligned_interpolant(const MatrixSymbol& sym,
                                                    const MaximizingPair& pair, int degree_M);

struct LevelOptimalResult {
  MatrixSymbol Q0{BlockPartition{}};
  double norm = 0.0;         // ||Phi - diag(Q0, 0)||_inf on the grid
  double lower_bound = 0.0;  // ||Gamma_Phi||
  double gap = 0.0;
  int iterations = 0;
};

/// Optimal correction of the top singular level. Starts from the aligned
/// interpolant and falls back to smoothed minimax over the Taylor
/// coefficients. Throws Error("optimal_solve_not_converged").
LevelOptimalResult level_optimal(const MatrixSymbol& sym, int degree_M, double tol_gap,
                                 int grid_size = 0, int n_in = 0);

/// Optimal Q when n1 = 1 (or m1 = 1 via the transpose), Q = r / f1 on the
/// grid. Throws Error("hypothesis_violated") when f1 is too small to divide by.
MatrixGrid base_case(const MatrixSymbol& sym, const MaximizingPair& pair, int grid_size,
                     double essential_bound, double* division_floor = nullptr);
MatrixSymbol base_case(const MatrixSymbol& sym, const SolverConfig& config = {});

/// Diagonalizes one level: thematic pair, u, index, Phi^(1). Throws
/// Error("reduction_failed") when the sandwich is not diag(t u, Phi^(1)).
ThematicStep level_reduce(const MatrixSymbol& sym, const MatrixGrid& q0, const MaximizingPair& pair,
                          int grid_size, const SolverConfig& config = {});
ThematicStep level_reduce(const MatrixSymbol& sym, const MatrixSymbol& q0,
                          const SolverConfig& config = {});

/// The full recursion. Errors carry the level they surfaced at.
SuperoptimalResult recurse_superoptimal(const MatrixSymbol& sym, const SolverConfig& config = {});

/// Identity-bordered thematic factors and D; fills result.factorization.
Factorization assemble_factorization(const SuperoptimalResult& result);

IndexSummary indices_and_nu(const std::vector<double>& t, const std::vector<int>& k,
                            double eq_tol = 1e-6);

}  // namespace superopt
