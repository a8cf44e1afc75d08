#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hardylab/identities.hpp"

using namespace hardylab;

namespace {

TestFunction bump() { return TestFunction::random(5, {0.5, 0.3, 2.0}, {0.4, 0.5, 0.2}); }

BoxGrid box_for(const TestFunction& psi, int n_xy, int n_z) {
  BoxGrid g;
  for (int a = 0; a < 3; ++a) {
    g.lo[a] = psi.center[a] - 9.0 * psi.width[a];
    g.hi[a] = psi.center[a] + 9.0 * psi.width[a];
  }
  g.n = {n_xy, n_xy, n_z};
  g.cluster = {0.0, 0.0, 1.0};
  return g;
}

// Integral of f over the box with the grid's trapezoid weights.
template <class F>
double integrate(const BoxGrid& g, F&& f) {
  const auto x = g.nodes(0), y = g.nodes(1), z = g.nodes(2);
  const auto wx = g.weights(0), wy = g.weights(1), wz = g.weights(2);
  double s = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k)
    for (std::size_t j = 0; j < y.size(); ++j)
      for (std::size_t i = 0; i < x.size(); ++i) s += wx[i] * wy[j] * wz[k] * f(Point3{x[i], y[j], z[k]});
  return s;
}

}  // namespace

TEST_CASE("V_f examples") {
  const auto paper = AnsatzFunction::paper_choice();
  CHECK(paper.label == AnsatzFunction::Label::paper_choice);
  CHECK(vf_potential(paper, 1.0, 0.0, 2.0, 1.0) == doctest::Approx(4.0));
  CHECK(vf_potential(AnsatzFunction::zero(), 1.0, 0.0, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(vf_potential(paper, 0.0, 1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(vf_potential(paper, 1.0, 1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(vf_closed_form(1.0, 1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("paper choice of f and its z derivative") {
  const auto f = AnsatzFunction::paper_choice();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ub(0.1, 10.0), ux(-5.0, 5.0), uz(0.2, 4.0);
  for (int i = 0; i < 200; ++i) {
    const double b = (i % 2 ? -1.0 : 1.0) * ub(rng), xi = ux(rng), y = ux(rng), z = uz(rng);
    const double y0 = -z * z * xi / b;
    CHECK(f.f(b, xi, y, z) == doctest::Approx(0.5 * std::abs(b) / (z * z * z) * (y0 * y0 - y * y)).epsilon(1e-13));
    const double h = 1e-5 * z;
    const double fd = (f.f(b, xi, y, z + h) - f.f(b, xi, y, z - h)) / (2.0 * h);
    CHECK(f.dfdz(b, xi, y, z) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("V_f closed form on random points") {
  const auto f = AnsatzFunction::paper_choice();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ub(0.1, 10.0), ux(-5.0, 5.0), uz(0.1, 5.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double b = (i % 2 ? -1.0 : 1.0) * ub(rng), xi = ux(rng), y = ux(rng), z = uz(rng);
    const double ref = vf_closed_form(b, xi, y, z);
    worst = std::max(worst, std::abs(vf_potential(f, b, xi, y, z) - ref) / std::abs(ref));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("corrected potential differs by f^2") {
  const auto f = AnsatzFunction::paper_choice();
  const double b = 1.3, xi = 0.7, y = -0.4, z = 1.1;
  const double fv = f.f(b, xi, y, z);
  CHECK(vf_potential_corrected(f, b, xi, y, z) == doctest::Approx(vf_potential(f, b, xi, y, z) - fv * fv));
}

TEST_CASE("test function gradients match finite differences") {
  const auto psi = TestFunction::random(17, {0.2, -0.1, 1.5}, {0.5, 0.4, 0.3});
  const Point3 q{0.4, 0.1, 1.6};
  const auto g = psi.gradient(q);
  for (int k = 0; k < 3; ++k) {
    Point3 a = q, b = q;
    const double h = 1e-6;
    a[k] += h;
    b[k] -= h;
    const Complex fd = (psi.value(a) - psi.value(b)) / (2.0 * h);
    CHECK(std::abs(fd - g[k]) < 1e-7 * (1.0 + std::abs(g[k])));
  }
}

TEST_CASE("box grids") {
  BoxGrid g;
  g.lo = {-1.0, 0.0, 0.5};
  g.hi = {1.0, 3.0, 2.5};
  g.n = {11, 7, 21};
  g.cluster = {0.0, 1.0, 2.0};
  for (int a = 0; a < 3; ++a) {
    const auto x = g.nodes(a);
    const auto w = g.weights(a);
    CHECK(x.front() == g.lo[a]);
    CHECK(x.back() == g.hi[a]);
    double total = 0.0;
    for (double v : w) total += v;
    CHECK(total == doctest::Approx(g.hi[a] - g.lo[a]));
  }
  CHECK(g.refined(2).n == std::array<int, 3>{21, 13, 41});
  BoxGrid bad = g;
  bad.n[0] = 1;
  CHECK_THROWS_AS(bad.nodes(0), std::invalid_argument);
}

TEST_CASE("support checks") {
  const auto psi = bump();
  CHECK_NOTHROW(check_support(psi, box_for(psi, 20, 20)));
  BoxGrid tight = box_for(psi, 20, 20);
  tight.hi[2] = psi.center[2] + 0.3;
  CHECK_THROWS_WITH_AS(check_support(psi, tight), doctest::Contains("upper third-axis face"), std::invalid_argument);
  const ConfiningSpec spec{1.0, 0.0};
  CHECK_THROWS_AS(substitution_identity_residual(SubstitutionStage::form2, psi, spec, tight), std::invalid_argument);
  BoxGrid through_zero = box_for(psi, 20, 20);
  through_zero.lo[2] = -1.0;
  CHECK_THROWS_AS(substitution_identity_residual(SubstitutionStage::form2, psi, spec, through_zero),
                  std::invalid_argument);
}

TEST_CASE("substitution identities converge at second order") {
  const auto psi = bump();
  const auto f = AnsatzFunction::paper_choice();
  const ConfiningSpec spec{1.0, 0.0};
  const BoxGrid coarse = box_for(psi, 41, 201);
  BoxGrid fine = coarse;
  fine.n[2] = 401;
  for (auto stage : {SubstitutionStage::form2, SubstitutionStage::form3, SubstitutionStage::form4}) {
    const auto a = substitution_identity_residual(stage, psi, spec, coarse, &f, Convention::corrected);
    const auto b = substitution_identity_residual(stage, psi, spec, fine, &f, Convention::corrected);
    CHECK(b.residual < 1e-6);
    CHECK(a.residual / b.residual == doctest::Approx(4.0).epsilon(0.1));
  }
  // The printed potential misses -f^2: the residual stalls.
  const auto printed = substitution_identity_residual(SubstitutionStage::form4, psi, spec, fine, &f, Convention::printed);
  CHECK(printed.residual > 1e-4);
}

TEST_CASE("substitution preconditions") {
  const auto psi = bump();
  const BoxGrid g = box_for(psi, 20, 40);
  CHECK_THROWS_AS(substitution_identity_residual(SubstitutionStage::form4, psi, {1.0, 0.0}, g), std::invalid_argument);
  CHECK_THROWS_AS(substitution_identity_residual(SubstitutionStage::form3, psi, {0.0, 0.0}, g), std::invalid_argument);
  CHECK_NOTHROW(substitution_identity_residual(SubstitutionStage::form2, psi, {0.0, 1.0}, g));
  CHECK(substitution_stage_from_string("form3") == SubstitutionStage::form3);
  CHECK_THROWS_AS(substitution_stage_from_string("form5"), std::invalid_argument);
}

TEST_CASE("magnetic field tensor") {
  const MagneticGradient pi(1.7);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0), uz(0.3, 3.0);
  for (int t = 0; t < 50; ++t) {
    const Point3 q{u(rng), u(rng), uz(rng)};
    for (int j = 1; j <= 3; ++j)
      for (int k = 1; k <= 3; ++k) CHECK(pi.field(j, k, q) == -pi.field(k, j, q));
    CHECK(pi.field(1, 2, q) == doctest::Approx(-1.7 / (q[2] * q[2])));
    CHECK(pi.field(1, 3, q) == doctest::Approx(2.0 * 1.7 * q[1] / (q[2] * q[2] * q[2])));
    CHECK(pi.field(2, 3, q) == 0.0);
    // B_13 = d_x A_z - d_z A_x by central differences.
    const double h = 1e-6;
    Point3 a = q, b = q;
    a[2] += h;
    b[2] -= h;
    CHECK(pi.field(1, 3, q) == doctest::Approx(-(pi.potential(1, a) - pi.potential(1, b)) / (2 * h)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(pi.field(0, 1, {0, 0, 1}), std::invalid_argument);
}

TEST_CASE("commutator identity") {
  const auto psi = bump();
  const BoxGrid g = box_for(psi, 41, 401);
  SUBCASE("no field") {
    const BoxGrid fine = box_for(psi, 41, 3201);
    for (auto [j, k] : {std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 3}}) {
      for (int s : {1, -1}) CHECK(commutator_identity_residual(psi, j, k, s, 0.0, fine).residual < 1e-8);
    }
  }
  SUBCASE("beta = 1, pair (1, 2), corrected sign") {
    for (int s : {1, -1}) {
      CHECK(commutator_identity_residual(psi, 1, 2, s, 1.0, g, Convention::corrected).residual < 1e-6);
      CHECK(commutator_identity_residual(psi, 1, 2, s, 1.0, g, Convention::printed).residual > 1e-4);
    }
  }
  SUBCASE("pair (2, 3) has no field term") {
    for (int s : {1, -1}) {
      CHECK(commutator_identity_residual(psi, 2, 3, s, 1.0, g, Convention::printed).residual < 1e-6);
      CHECK(commutator_identity_residual(psi, 2, 3, s, 1.0, g, Convention::corrected).residual < 1e-6);
    }
  }
  SUBCASE("swapping the pair with the sign flipped") {
    for (auto conv : {Convention::printed, Convention::corrected}) {
      const auto a = commutator_identity_residual(psi, 1, 3, 1, 1.0, g, conv);
      const auto b = commutator_identity_residual(psi, 3, 1, -1, 1.0, g, conv);
      CHECK(a.residual == doctest::Approx(b.residual).epsilon(1e-8));
      CHECK(a.lhs == doctest::Approx(b.lhs).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(commutator_identity_residual(psi, 1, 2, 0, 1.0, g), std::invalid_argument);
  CHECK_THROWS_AS(commutator_identity_residual(psi, 1, 4, 1, 1.0, g), std::invalid_argument);
}

TEST_CASE("diamagnetic inequality") {
  const Point3 width{0.3, 0.3, 0.2};
  SUBCASE("real function without field: equality") {
    const auto psi = TestFunction::gaussian({0.0, 0.0, 2.0}, width);
    CHECK(std::abs(diamagnetic_margin(psi, {MagneticPotential::Kind::confining, 0.0}, box_for(psi, 33, 33))) < 1e-12);
  }
  SUBCASE("real function, beta = 1: the cross term vanishes") {
    const auto psi = TestFunction::gaussian({0.4, 0.3, 2.0}, width);
    const BoxGrid g = box_for(psi, 33, 33);
    const double expected = integrate(g, [&](const Point3& q) {
      const double a = q[1] / (q[2] * q[2]);
      return a * a * std::norm(psi.value(q));
    });
    const double m = diamagnetic_margin(psi, {MagneticPotential::Kind::confining, 1.0}, g);
    CHECK(m > 0.0);
    CHECK(m == doctest::Approx(expected).epsilon(1e-9));
  }
  SUBCASE("random complex phases") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto ab = TestFunction::random(seed, {3.0, 0.0, 2.0}, width);
      CHECK(diamagnetic_margin(ab, {MagneticPotential::Kind::aharonov_bohm, 0.5}, box_for(ab, 25, 25)) >= -1e-8);
      const auto cf = TestFunction::random(seed, {0.5, 0.3, 2.0}, width);
      CHECK(diamagnetic_margin(cf, {MagneticPotential::Kind::confining, 1.0}, box_for(cf, 25, 25)) >= -1e-8);
    }
  }
  SUBCASE("AB needs support away from the flux line") {
    const auto psi = TestFunction::gaussian({0.5, 0.0, 2.0}, width);
    BoxGrid g = box_for(psi, 25, 25);
    g.lo[0] = -3.0;
    CHECK_THROWS_AS(diamagnetic_margin(psi, {MagneticPotential::Kind::aharonov_bohm, 0.5}, g), std::invalid_argument);
  }
}

TEST_CASE("Weyl residuals") {
  SUBCASE("free case: between 1/n and 1/n^2") {
    const double a = weyl_residual(0.0, 1.0, 8.0), b = weyl_residual(0.0, 1.0, 16.0), c = weyl_residual(0.0, 1.0, 32.0);
    CHECK(a / b > 2.0);
    CHECK(a / b < 4.0);
    CHECK(b / c > 2.0);
    CHECK(b / c < a / b);
  }
  for (double k : {0.0, 1.0}) {
    double previous = std::numeric_limits<double>::infinity();
    for (double n : {4.0, 8.0, 16.0, 32.0, 64.0}) {
      const double r = weyl_residual(1.0, k, n);
      CHECK(r < previous);
      previous = r;
    }
  }
  CHECK_THROWS_AS(weyl_residual(1.0, -1.0, 8.0), std::invalid_argument);
  CHECK_THROWS_AS(weyl_residual(1.0, 1.0, 0.5), std::invalid_argument);
}
