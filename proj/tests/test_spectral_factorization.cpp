#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "superopt/error.hpp"
#include "superopt/spectral_factorization.hpp"
#include "superopt/truncated_operators.hpp"

using namespace superopt;

namespace {

MatrixGrid column_samples(int grid, const std::function<CMatrix(Complex)>& f) {
  MatrixGrid out(grid);
  for (int l = 0; l < grid; ++l) out[l] = f(grid_node(l, grid));
  return out;
}

// Zeros of sampled analytic h inside the disk of radius r, by the argument
// principle on a circle of that radius.
int zeros_inside(const std::function<Complex(Complex)>& h, double r) {
  const int n = 4096;
  double total = 0.0;
  Complex prev = h(r);
  for (int l = 1; l <= n; ++l) {
    const Complex cur = h(r * std::polar(1.0, 2 * std::numbers::pi * l / n));
    total += std::arg(cur / prev);
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2 * std::numbers::pi)));
}

std::function<Complex(Complex)> evaluator(const ScalarSymbol& s) {
  return [m = s.symbol](Complex z) { return m.evaluate(z)(0, 0); };
}

}  // namespace

TEST_CASE("Blaschke products are unimodular") {
  BlaschkeProduct b;
  b.power = 2;
  b.zeros = {Complex(0.5, 0.1), Complex(-0.3, 0.7)};
  CHECK(b.degree() == 4);
  const CVector s = b.samples(128);
  for (int l = 0; l < 128; ++l) CHECK(std::abs(std::abs(s(l)) - 1.0) < 1e-12);
  CHECK(std::abs(b.evaluate(Complex(0.5, 0.1))) < 1e-15);
  CHECK(winding_number(s).value == 4);
}

TEST_CASE("outer factor of constants and outer polynomials") {
  const int grid = 64;
  const CVector h4 = outer_factor_samples(Eigen::VectorXd::Constant(grid, 4.0));
  for (int l = 0; l < grid; ++l) CHECK(std::abs(h4(l) - 2.0) < 1e-9);

  Eigen::VectorXd rho(grid);
  for (int l = 0; l < grid; ++l) rho(l) = std::norm(2.0 + grid_node(l, grid));
  const CVector h = outer_factor_samples(rho);
  for (int l = 0; l < grid; ++l) CHECK(std::abs(h(l) - (2.0 + grid_node(l, grid))) < 1e-9);

  CHECK_THROWS_AS(outer_factor_samples(Eigen::VectorXd::Constant(8, -1.0)), Error);
}

TEST_CASE("outer factor of a density vanishing inside the disk") {
  // rho = |z - 1/2|^2: modulus agrees and the result has no zeros in the disk.
  const int grid = 256;
  Eigen::VectorXd rho(grid);
  for (int l = 0; l < grid; ++l) rho(l) = std::norm(grid_node(l, grid) - 0.5);
  const ScalarSymbol h = outer_factor(rho);
  const MatrixGrid hs = sample_on_grid(h.symbol, grid);
  for (int l = 0; l < grid; ++l) CHECK(std::abs(std::norm(hs[l](0, 0)) - rho(l)) <= 1e-6 * rho.maxCoeff());
  for (double r : {0.1, 0.3, 0.5, 0.7, 0.9}) CHECK(zeros_inside(evaluator(h), r) == 0);
  CVector phase(grid);
  for (int l = 0; l < grid; ++l) phase(l) = hs[l](0, 0) / std::abs(hs[l](0, 0));
  CHECK(winding_number(phase).value == 0);
  // h(0) > 0 and equals the geometric mean of |z - 1/2|, i.e. 1.
  CHECK(std::abs(h.symbol.coeff(0)(0, 0) - 1.0) < 1e-9);
}

TEST_CASE("inner-outer splitting of columns") {
  const int grid = 128;
  SUBCASE("inner column (z, 0)") {
    const InnerOuterColumn c = inner_outer_column(column_samples(grid, [](Complex z) {
      CVector v(2);
      v << z, 0.0;
      return v;
    }));
    for (int l = 0; l < grid; ++l) CHECK(std::abs(c.outer(l) - 1.0) < 1e-9);
    CHECK(std::abs(c.inner_symbol.symbol.coeff(1)(0, 0) - 1.0) < 1e-9);
  }
  SUBCASE("outer column (2 + z, 0)") {
    const MatrixGrid col = column_samples(grid, [](Complex z) {
      CVector v(2);
      v << 2.0 + z, 0.0;
      return v;
    });
    const InnerOuterColumn c = inner_outer_column(col);
    for (int l = 0; l < grid; ++l) {
      CHECK(std::abs(std::abs(c.outer(l)) - std::abs(2.0 + grid_node(l, grid))) < 1e-9);
      CHECK(std::abs(c.inner[l](0, 0) - c.inner[0](0, 0)) < 1e-9);
      CHECK((c.outer(l) * c.inner[l] - col[l]).norm() < 1e-6);
    }
  }
  SUBCASE("unit-norm column (1, 2z)/sqrt5") {
    const MatrixGrid col = column_samples(grid, [](Complex z) {
      CVector v(2);
      v << 1.0, 2.0 * z;
      return CVector(v / std::sqrt(5.0));
    });
    const InnerOuterColumn c = inner_outer_column(col);
    for (int l = 0; l < grid; ++l) {
      CHECK(std::abs(c.outer(l) - 1.0) < 1e-9);
      CHECK((c.inner[l] - col[l]).norm() < 1e-9);
    }
    CHECK(grid_antianalytic_energy(c.inner) < 1e-6);
  }
  CHECK_THROWS_AS(inner_outer_column(MatrixGrid(8, CMatrix::Zero(2, 1))), Error);
}

TEST_CASE("greatest common inner divisors") {
  auto poly = [](std::initializer_list<Complex> c) {
    CVector v(static_cast<int>(c.size()));
    int i = 0;
    for (Complex x : c) v(i++) = x;
    return v;
  };
  const BlaschkeProduct a = gcd_inner_divisor({poly({0, 0, 1}), poly({0, 0, 0, 1})});
  CHECK(a.power == 2);
  CHECK(a.zeros.empty());

  // (z - 1/2) and (z - 1/2)(z + 2) = z^2 + 1.5 z - 1.
  const BlaschkeProduct b = gcd_inner_divisor({poly({-0.5, 1}), poly({-1, 1.5, 1})});
  CHECK(b.power == 0);
  REQUIRE(b.zeros.size() == 1);
  CHECK(std::abs(b.zeros[0] - 0.5) < 1e-9);

  CHECK(gcd_inner_divisor({poly({1}), poly({0, 0, 0, 0, 0, 1})}).trivial());
  CHECK_THROWS_AS(gcd_inner_divisor({poly({0, 0}), poly({0})}), Error);

  // Dividing out the divisor leaves nothing in common.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  const Complex r1(u(rng), u(rng)), r2(u(rng), u(rng)), r3(1.5, 0.2);
  const CVector e1 = poly({r1 * r2, -(r1 + r2), 1});             // (z-r1)(z-r2)
  const CVector e2 = poly({r1 * r3, -(r1 + r3), 1});             // (z-r1)(z-r3)
  const BlaschkeProduct g = gcd_inner_divisor({e1, e2});
  REQUIRE(g.zeros.size() == 1);
  CHECK(std::abs(g.zeros[0] - r1) < 1e-9);
  const CVector q1 = poly({-r2, 1}), q2 = poly({-r3, 1});
  CHECK(gcd_inner_divisor({q1, q2}).trivial());
}

TEST_CASE("thematic completion of height two") {
  const int grid = 256;
  SUBCASE("(z, 0)") {
    const ThematicCompletion t = thematic_complete(column_samples(grid, [](Complex z) {
      CVector v(2);
      v << z, 0.0;
      return v;
    }));
    for (int l = 0; l < grid; ++l) {
      CHECK(std::abs(t.vc[l](0, 0)) < 1e-12);
      CHECK(std::abs(t.vc[l](1, 0) - 1.0) < 1e-12);
    }
    CHECK(t.unitarity_residual <= 1e-12);
  }
  SUBCASE("(1, 2z)/sqrt5") {
    const ThematicCompletion t = thematic_complete(column_samples(grid, [](Complex z) {
      CVector v(2);
      v << 1.0, 2.0 * z;
      return CVector(v / std::sqrt(5.0));
    }));
    // V_c = (-2z, 1)/sqrt5 up to the constant normalization, which makes
    // V_c(0) lower trapezoidal with positive diagonal.
    for (int l = 0; l < grid; ++l) {
      const Complex z = grid_node(l, grid);
      CHECK(std::abs(t.vc[l](0, 0) - (-2.0 * z / std::sqrt(5.0))) < 1e-12);
      CHECK(std::abs(t.vc[l](1, 0) - 1.0 / std::sqrt(5.0)) < 1e-12);
    }
    CHECK(t.unitarity_residual <= 1e-12);
    CHECK(t.analytic_residual <= 1e-8);
    CHECK(t.coouter_margin > 0.0);
  }
  SUBCASE("random inner columns") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 4; ++trial) {
      CVector a(3), b(3);
      for (int i = 0; i < 3; ++i) {
        a(i) = Complex(nd(rng), nd(rng));
        b(i) = Complex(nd(rng), nd(rng));
      }
      MatrixGrid col = column_samples(grid, [&](Complex z) {
        CVector v(2);
        v << a(0) + a(1) * z + a(2) * z * z, b(0) + b(1) * z + b(2) * z * z;
        return v;
      });
      const InnerOuterColumn io = inner_outer_column(col);
      const ThematicCompletion t = thematic_complete(io.inner);
      CHECK(t.unitarity_residual <= 1e-10);
      CHECK(t.analytic_residual <= 1e-8);
    }
  }
}

TEST_CASE("thematic completion of height one and three") {
  const int grid = 128;
  const ThematicCompletion one = thematic_complete(column_samples(grid, [](Complex z) {
    CVector v(1);
    v << z * z * z;
    return v;
  }));
  CHECK(one.vc[0].cols() == 0);
  CHECK(one.unitarity_residual < 1e-12);

  const ThematicCompletion three = thematic_complete(column_samples(grid, [](Complex z) {
    CVector v(3);
    v << 1.0, z, z * z;
    return CVector(v / std::sqrt(3.0));
  }));
  CHECK(three.vc[0].rows() == 3);
  CHECK(three.vc[0].cols() == 2);
  CHECK(three.unitarity_residual <= 1e-10);
  CHECK(three.analytic_residual <= 1e-10);
  CHECK(three.coouter_margin > 0.0);
}

TEST_CASE("height-three completion agrees with the height-two formula") {
  // For c = (a, b, 0) the kernel of T_{c^t} is spanned by (-b, a, 0) and e_3
  // after dividing out common inner factors, so V_c V_c^* is known exactly.
  const int grid = 256;
  const MatrixGrid c2 = column_samples(grid, [](Complex z) {
    CVector v(2);
    v << 1.0, 2.0 * z;
    return CVector(v / std::sqrt(5.0));
  });
  MatrixGrid c3(grid);
  for (int l = 0; l < grid; ++l) {
    c3[l] = CMatrix::Zero(3, 1);
    c3[l].topRows(2) = c2[l];
  }
  const ThematicCompletion two = thematic_complete(c2);
  const ThematicCompletion three = thematic_complete(c3);
  CHECK(three.truncation_degree > 0);
  for (int l = 0; l < grid; l += 17) {
    CMatrix expected = CMatrix::Zero(3, 3);
    expected.topLeftCorner(2, 2) = two.vc[l] * two.vc[l].adjoint();
    expected(2, 2) = 1.0;
    CHECK((three.vc[l] * three.vc[l].adjoint() - expected).norm() < 1e-9);
  }
}

TEST_CASE("height-three completion of a random inner column") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd;
  const int grid = 512;
  CMatrix coef(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) coef(i, j) = Complex(nd(rng), nd(rng));
  const MatrixGrid col = column_samples(grid, [&](Complex z) {
    return CMatrix(coef.col(0) + z * coef.col(1) + z * z * coef.col(2));
  });
  const InnerOuterColumn io = inner_outer_column(col);
  const ThematicCompletion t = thematic_complete(io.inner);
  CHECK(t.unitarity_residual <= 1e-10);
  CHECK(t.analytic_residual <= 1e-10);
  CHECK(t.coouter_margin > 0.0);
  // V_c(0) is lower trapezoidal with a positive diagonal.
  CMatrix v0 = CMatrix::Zero(3, 2);
  for (const auto& m : t.vc) v0 += m;
  v0 /= static_cast<double>(grid);
  CHECK(std::abs(v0(0, 1)) < 1e-9);
  CHECK(v0(0, 0).real() > 0.0);
  CHECK(std::abs(v0(0, 0).imag()) < 1e-9);
}

TEST_CASE("unitary grid completion") {
  const int grid = 64;
  const MatrixGrid e1 = constant_grid(CMatrix::Identity(2, 1), grid);
  const MatrixGrid c = unitary_grid_completion(e1);
  for (int l = 0; l < grid; ++l) {
    CHECK(std::abs(std::abs(c[l](1, 1)) - 1.0) < 1e-12);
    CHECK(std::abs(c[l](0, 1)) < 1e-12);
  }

  Eigen::HouseholderQR<CMatrix> qr(CMatrix::Random(3, 3));
  const CMatrix q = qr.householderQ();
  const MatrixGrid same = unitary_grid_completion(constant_grid(q, grid));
  CHECK(grid_distance(same, constant_grid(q, grid)) < 1e-14);

  // Shape of a thematic block for v = (z, 0 | 0): columns (v, conj(V_c)).
  const MatrixGrid iso = column_samples(grid, [](Complex z) {
    CMatrix m = CMatrix::Zero(3, 2);
    m(0, 0) = z;
    m(1, 1) = 1.0;
    return m;
  });
  const MatrixGrid u = unitary_grid_completion(iso);
  CHECK(grid_unitarity_residual(u) <= 1e-8);
  for (int l = 0; l < grid; ++l) CHECK((u[l].leftCols(2) - iso[l]).norm() < 1e-14);

  CHECK_THROWS_AS(unitary_grid_completion(constant_grid(CMatrix::Constant(2, 1, 1.0), 8)), Error);
}

TEST_CASE("thematic functions") {
  const int grid = 128;
  // x = (x1 | x2) = (1 + z/2, 0.3 z, 0.2 zbar) / h with h outer and |h| = |x|,
  // so the upper block stays analytic.
  auto raw = [](Complex z) {
    CVector v(3);
    v << 1.0 + 0.5 * z, 0.3 * z, 0.2 * std::conj(z);
    return v;
  };
  Eigen::VectorXd rho(grid);
  for (int l = 0; l < grid; ++l) rho(l) = raw(grid_node(l, grid)).squaredNorm();
  const CVector h = outer_factor_samples(rho);
  MatrixGrid col(grid);
  for (int l = 0; l < grid; ++l) col[l] = raw(grid_node(l, grid)) / h(l);

  const ThematicFunction t = build_thematic_function(col, 2);
  CHECK(grid_unitarity_residual(t.full) <= 1e-8);
  CHECK(t.analytic_residual <= 1e-8);
  for (int l = 0; l < grid; ++l) {
    CHECK((t.full[l].col(0) - col[l]).norm() < 1e-9);
    CHECK(std::abs(t.full[l](2, 1)) < 1e-12);
  }
}
