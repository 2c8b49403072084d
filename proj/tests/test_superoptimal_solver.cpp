#include <doctest.h>

#include <cmath>
#include <random>

#include "superopt/error.hpp"
#include "superopt/superoptimal_solver.hpp"

using namespace superopt;

namespace {

CMatrix diag2(Complex a, Complex b) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// diag(a zbar, b zbar)
MatrixSymbol diag_zbar(double a, double b) {
  return MatrixSymbol::monomial(-1, diag2(a, b), BlockPartition::nehari(2, 2));
}

MatrixSymbol random_nehari(std::mt19937_64& rng, int degree) {
  std::normal_distribution<double> nd;
  std::map<int, CMatrix> c;
  for (int k = -degree; k <= degree; ++k) {
    CMatrix m(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) m(i, j) = Complex(nd(rng), nd(rng));
    c[k] = m;
  }
  return MatrixSymbol(BlockPartition::nehari(2, 2), c);
}

}  // namespace

TEST_CASE("level_optimal attains the Hankel norm") {
  const LevelOptimalResult z = level_optimal(MatrixSymbol::scalar({{-1, 1.0}}), 4, 1e-6);
  CHECK(std::abs(z.norm - 1.0) < 1e-6);
  CHECK(std::abs(z.lower_bound - 1.0) < 1e-9);
  CHECK(z.gap <= 1e-6);

  const LevelOptimalResult d = level_optimal(diag_zbar(1.0, 0.5), 5, 1e-6);
  CHECK(std::abs(d.norm - 1.0) < 1e-6);
  CHECK(antianalytic_energy(d.Q0) < 1e-12);
}

TEST_CASE("base case") {
  SUBCASE("zbar") {
    const MatrixSymbol q = base_case(MatrixSymbol::scalar({{-1, 1.0}}));
    CHECK(q.is_zero(1e-8));
  }
  SUBCASE("zbar + z") {
    const MatrixSymbol q = base_case(MatrixSymbol::scalar({{-1, 1.0}, {1, 1.0}}));
    CHECK(std::abs(q.coeff(1)(0, 0) - 1.0) < 1e-8);
    CHECK((q - MatrixSymbol::scalar({{1, 1.0}})).is_zero(1e-8));
  }
  SUBCASE("column with a constant L2 row") {
    CMatrix lo(2, 1), c0(2, 1);
    lo << 1.0, 0.0;
    c0 << 0.0, 0.3;
    const MatrixSymbol sym(BlockPartition{1, 1, 1, 0}, {{-1, lo}, {0, c0}});
    CHECK(base_case(sym).is_zero(1e-8));
  }
  CHECK_THROWS_AS(base_case(diag_zbar(1.0, 0.5)), Error);
}

TEST_CASE("level_reduce on a diagonal symbol") {
  const MatrixSymbol sym = diag_zbar(1.0, 0.5);
  const ThematicStep s = level_reduce(sym, MatrixSymbol(BlockPartition::nehari(2, 2)));
  CHECK(std::abs(s.t - 1.0) < 1e-9);
  CHECK(s.k == 1);
  CHECK(s.sandwich_residual < 1e-8);
  // Phi^(1) is 1x1 with Hankel norm 1/2.
  CHECK(s.next_symbol.rows() == 1);
  CHECK(s.next_symbol.cols() == 1);
  CHECK(std::abs(linf_norm(s.next_samples) - 0.5) < 1e-8);
  for (int l = 0; l < s.u_samples.size(); ++l) CHECK(std::abs(std::abs(s.u_samples(l)) - 1.0) < 1e-9);
}

TEST_CASE("recursion on diagonal examples") {
  SUBCASE("diag(zbar, zbar/2)") {
    const SuperoptimalResult r = recurse_superoptimal(diag_zbar(1.0, 0.5));
    REQUIRE(r.t_seq.size() == 2);
    CHECK(std::abs(r.t_seq[0] - 1.0) < 1e-6);
    CHECK(std::abs(r.t_seq[1] - 0.5) < 1e-6);
    CHECK(r.Q.is_zero(1e-6));
    CHECK(r.indices.k == std::vector<int>{1, 1});
  }
  SUBCASE("analytic symbol is reproduced") {
    const MatrixSymbol phi = MatrixSymbol::monomial(1, diag2(1.0, 2.0), BlockPartition::nehari(2, 2));
    const SuperoptimalResult r = recurse_superoptimal(phi);
    CHECK(r.t_seq == std::vector<double>{0.0, 0.0});
    CHECK(r.steps.empty());
    CHECK((r.Q - phi).is_zero(1e-10));
  }
  SUBCASE("diag(zbar + z, zbar/4)") {
    const MatrixSymbol phi(BlockPartition::nehari(2, 2),
                           {{-1, diag2(1.0, 0.25)}, {1, diag2(1.0, 0.0)}});
    const SuperoptimalResult r = recurse_superoptimal(phi);
    REQUIRE(r.t_seq.size() == 2);
    CHECK(std::abs(r.t_seq[0] - 1.0) < 1e-6);
    CHECK(std::abs(r.t_seq[1] - 0.25) < 1e-6);
    const MatrixSymbol expected = MatrixSymbol::monomial(1, diag2(1.0, 0.0), BlockPartition::nehari(2, 2));
    CHECK((r.Q - expected).is_zero(1e-6));
  }
}

TEST_CASE("factorization and index bookkeeping") {
  const SuperoptimalResult r = recurse_superoptimal(diag_zbar(1.0, 0.5));
  CHECK(r.factorization.residual < 1e-8);
  CHECK(r.factorization.V.size() == r.steps.size());
  for (const auto& v : r.factorization.V) CHECK(grid_unitarity_residual(v) < 1e-8);

  const IndexSummary s = indices_and_nu({1.0, 1.0, 0.5}, {1, 2, 1});
  CHECK(s.extended_t == std::vector<double>{1.0, 1.0, 1.0, 0.5});
  REQUIRE(s.nu.size() == 2);
  CHECK(s.nu[0] == std::pair<double, int>{1.0, 3});
  CHECK(s.nu[1] == std::pair<double, int>{0.5, 1});
  CHECK(indices_and_nu({}, {}).nu.empty());
}

TEST_CASE("four-block hypothesis") {
  CMatrix lo = CMatrix::Zero(2, 2), c0 = CMatrix::Zero(2, 2);
  lo(0, 0) = 1.0;
  c0(1, 1) = 2.0;  // ||Phi22|| = 2 > ||Gamma|| fails the hypothesis
  const MatrixSymbol bad(BlockPartition{1, 1, 1, 1}, {{-1, lo}, {0, c0}});
  try {
    recurse_superoptimal(bad);
    FAIL("expected essential_norm_hypothesis");
  } catch (const Error& e) {
    CHECK(e.code() == "essential_norm_hypothesis");
    CHECK(e.level() == 0);
  }
}

TEST_CASE("random Nehari symbols satisfy the structural invariants") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 3; ++trial) {
    const MatrixSymbol phi = random_nehari(rng, 1);
    const SuperoptimalResult r = recurse_superoptimal(phi);
    CAPTURE(trial);
    CHECK(r.analytic_residual < 1e-8);
    REQUIRE(r.t_seq.size() == 2);
    CHECK(r.t_seq[0] >= r.t_seq[1] - 1e-9);
    CHECK(std::abs(linf_norm(r.error_samples) - r.t0) < 1e-6);
    for (const auto& s : r.steps) {
      CHECK(s.k >= 1);
      for (int l = 0; l < s.u_samples.size(); ++l)
        CHECK(std::abs(std::abs(s.u_samples(l)) - 1.0) < 1e-8);
    }
    for (int j = 0; j < 2; ++j) {
      const SingularProfile prof = sj_profile(r.error_samples, j);
      CHECK(std::abs(prof.sup - r.t_seq[j]) < 1e-6);
      CHECK(prof.flatness < 1e-5);
    }

    SolverConfig seeded;
    seeded.seed = 99;
    const SuperoptimalResult r2 = recurse_superoptimal(phi, seeded);
    CHECK(grid_distance(r.Q_samples, r2.Q_samples) < 1e-6);
  }
}

TEST_CASE("transpose mode gives the same answer") {
  std::mt19937_64 rng(8);
  const MatrixSymbol phi = random_nehari(rng, 1);
  SolverConfig on, off;
  on.transpose = TransposeMode::on;
  off.transpose = TransposeMode::off;
  const SuperoptimalResult a = recurse_superoptimal(phi, on);
  const SuperoptimalResult b = recurse_superoptimal(phi, off);
  CHECK(a.transposed);
  CHECK_FALSE(b.transposed);
  CHECK(std::abs(a.t_seq[0] - b.t_seq[0]) < 1e-6);
  CHECK(std::abs(a.t_seq[1] - b.t_seq[1]) < 1e-6);
  CHECK(grid_distance(a.Q_samples, b.Q_samples) < 1e-5);
}

TEST_CASE("3x3 Nehari symbol") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  std::map<int, CMatrix> c;
  for (int k = -1; k <= 1; ++k) {
    CMatrix m(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = Complex(nd(rng), nd(rng));
    c[k] = m;
  }
  const SuperoptimalResult r = recurse_superoptimal(MatrixSymbol(BlockPartition::nehari(3, 3), c));
  REQUIRE(r.steps.size() == 3);
  CHECK(r.analytic_residual < 1e-8);
  CHECK(r.factorization.residual < 1e-8);
  for (int j = 0; j < 3; ++j) {
    const SingularProfile prof = sj_profile(r.error_samples, j);
    CHECK(std::abs(prof.sup - r.t_seq[j]) < 1e-6);
    CHECK(prof.flatness < 1e-8);
  }
}

TEST_CASE("coupled four-block symbol") {
  CMatrix lo(2, 2), c0(2, 2), hi(2, 2);
  lo << 1.0, 0.0, 0.1, 0.0;
  c0 << 0.0, 0.1, 0.0, 0.2;
  hi << 0.2, 0.0, 0.0, 0.0;
  const MatrixSymbol phi(BlockPartition{1, 1, 1, 1}, {{-1, lo}, {0, c0}, {1, hi}});
  const SuperoptimalResult r = recurse_superoptimal(phi);
  CHECK(r.essential_lower_bound < r.t0);
  REQUIRE(r.steps.size() == 1);
  CHECK(r.steps[0].k >= 1);
  CHECK(r.analytic_residual < 1e-8);
  const SingularProfile prof = sj_profile(r.error_samples, 0);
  CHECK(std::abs(prof.sup - r.t0) < 1e-6);
  CHECK(prof.flatness < 1e-8);
  // The truncation was checked against N_in + 8.
  const TruncatedOperator a = build_operator(phi, OperatorKind::four_block, r.steps[0].n_in);
  const TruncatedOperator b = build_operator(phi, OperatorKind::four_block, 2 * r.steps[0].n_in);
  CHECK(std::abs(singular_values(a, 1)[0] - singular_values(b, 1)[0]) <= 1e-6 * r.t0);
}

TEST_CASE("four-block truncation that cannot settle") {
  // ||Gamma|| equals the essential bound here, so truncations creep upwards.
  const MatrixSymbol phi(BlockPartition{2, 1, 2, 1},
                         {{-1, 0.5 * CMatrix::Identity(3, 3)}, {0, CMatrix::Constant(3, 3, 0.1)}});
  SolverConfig cfg;
  cfg.n_in_cap = 64;
  try {
    recurse_superoptimal(phi, cfg);
    FAIL("expected a hypothesis or truncation failure");
  } catch (const Error& e) {
    CHECK((e.code() == "essential_norm_hypothesis" || e.code() == "truncation_not_converged"));
  }
}

TEST_CASE("diag(zbar^2, zbar): tie-breaking decides the index sequence") {
  const MatrixSymbol phi(BlockPartition::nehari(2, 2),
                         {{-2, diag2(1.0, 0.0)}, {-1, diag2(0.0, 1.0)}});
  const ThematicStep s = level_reduce(phi, MatrixSymbol(BlockPartition::nehari(2, 2)));
  CHECK(s.k == 2);
  CHECK(s.kernel_dim == 2);
  CHECK(s.multiplicity == 3);

  const SuperoptimalResult r = recurse_superoptimal(phi);
  CHECK(r.indices.k == std::vector<int>{2, 1});
  CHECK(r.factorization.residual < 1e-8);
  // D = diag(zbar^2, zbar) up to the unimodular constants fixed by V and W.
  for (int l = 0; l < static_cast<int>(r.factorization.D.size()); l += 97) {
    CHECK(std::abs(std::abs(r.factorization.D[l](0, 0)) - 1.0) < 1e-8);
    CHECK(std::abs(std::abs(r.factorization.D[l](1, 1)) - 1.0) < 1e-8);
    CHECK(std::abs(r.factorization.D[l](0, 1)) < 1e-8);
  }

  SolverConfig seeded;
  seeded.seed = 1;
  const SuperoptimalResult r2 = recurse_superoptimal(phi, seeded);
  CHECK(r2.indices.k == std::vector<int>{1, 2});
  CHECK(r2.indices.nu == r.indices.nu);
  CHECK(grid_distance(r.Q_samples, r2.Q_samples) < 2e-5);
}
