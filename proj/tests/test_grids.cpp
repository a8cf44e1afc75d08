#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hardylab/grids.hpp"

using namespace hardylab;

TEST_CASE("uniform and logarithmic radial grids") {
  const auto u = make_radial_grid(Spacing::uniform, 1.0, 3.0, 3);
  CHECK(u.nodes() == std::vector<double>{1.0, 2.0, 3.0});

  const auto l = make_radial_grid(Spacing::logarithmic, 1.0, 100.0, 3);
  CHECK(l[0] == 1.0);
  CHECK(l[1] == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(l[2] == 100.0);

  const auto big = make_radial_grid(Spacing::logarithmic, 1e-6, 10.0, 200);
  REQUIRE(big.size() == 200);
  const double ratio = std::pow(10.0 / 1e-6, 1.0 / 199.0);
  for (std::size_t i = 0; i + 1 < big.size(); ++i) {
    CHECK(std::abs(big[i + 1] / big[i] / ratio - 1.0) < 1e-12);
  }
  CHECK(big.inner_cutoff() == 1e-6);
  CHECK(big.outer_radius() == 10.0);
}

TEST_CASE("radial grid preconditions") {
  CHECK_THROWS_AS(make_radial_grid(Spacing::uniform, 0.0, 1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(make_radial_grid(Spacing::logarithmic, -1.0, 1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(make_radial_grid(Spacing::uniform, 2.0, 1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(make_radial_grid(Spacing::uniform, 1.0, 2.0, 2), std::invalid_argument);
}

TEST_CASE("refinement keeps the endpoints") {
  for (auto kind : {Spacing::uniform, Spacing::logarithmic}) {
    for (int n : {3, 7, 51, 401}) {
      const auto g = make_radial_grid(kind, 1e-3, 7.5, n);
      CHECK(g.inner_cutoff() == 1e-3);
      CHECK(g.outer_radius() == 7.5);
      for (std::size_t i = 0; i + 1 < g.size(); ++i) CHECK(g[i + 1] > g[i]);
    }
  }
}

TEST_CASE("plane grids are tensor products on z > 0") {
  const auto g = make_plane_grid(make_signed_grid(-2.0, 2.0, 5), make_radial_grid(Spacing::uniform, 1.0, 2.0, 3));
  CHECK(g.size() == 15);
  const auto h = make_plane_grid(make_signed_grid(-2.0, 2.0, 5),
                                 Axis({1.0, 2.0}, Spacing::uniform, false));
  CHECK(h.size() == 10);
  for (std::size_t j = 0; j < h.n2(); ++j) {
    for (std::size_t i = 0; i < h.n1(); ++i) CHECK(h.index(i, j) == j * 5 + i);
  }
  const auto lg = make_plane_grid(make_radial_grid(Spacing::logarithmic, 1e-4, 10.0, 30),
                                  make_radial_grid(Spacing::logarithmic, 1e-4, 10.0, 20));
  CHECK(lg.size() == 600);
  CHECK_THROWS_AS(make_plane_grid(make_signed_grid(-1, 1, 3), make_signed_grid(-1, 1, 3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_plane_grid(make_signed_grid(-1, 1, 3), make_signed_grid(0, 1, 3)),
                  std::invalid_argument);
}

TEST_CASE("hand trapezoid weights") {
  const auto g = make_radial_grid(Spacing::uniform, 1.0, 3.0, 3);
  const auto q = quadrature_for(g, MeasureKind::rho_drho);
  REQUIRE(q.weights.size() == 3);
  CHECK(q.weights[0] == doctest::Approx(0.5));
  CHECK(q.weights[1] == doctest::Approx(2.0));
  CHECK(q.weights[2] == doctest::Approx(1.5));

  const auto plane = make_plane_grid(make_signed_grid(-3.0, 3.0, 7), make_radial_grid(Spacing::uniform, 1.0, 5.0, 5));
  const auto dq = quadrature_for(plane, MeasureKind::dy_dz);
  for (std::size_t j = 1; j + 1 < plane.n2(); ++j) {
    for (std::size_t i = 1; i + 1 < plane.n1(); ++i) CHECK(dq.weights[plane.index(i, j)] == doctest::Approx(1.0));
  }
  for (double w : dq.weights) CHECK(w > 0.0);
}

TEST_CASE("total rho drho weight approaches R^2/2") {
  const double R = 2.0;
  double previous = 1.0;
  for (int n : {100, 200, 400, 800}) {
    const double h = R / n;
    const auto g = make_radial_grid(Spacing::uniform, h, R, n);
    const auto q = quadrature_for(g, MeasureKind::rho_drho);
    double total = 0.0;
    for (double w : q.weights) total += w;
    const double err = std::abs(total - 0.5 * R * R);
    CHECK(err < 2.0 * h * R);
    CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("linear integrands converge at second order on uniform grids") {
  // Integral of (1 + 2 rho) rho drho over [1, 3].
  const double exact = (9.0 - 1.0) / 2.0 + 2.0 * (27.0 - 1.0) / 3.0;
  std::vector<double> errors;
  for (int n : {11, 21, 41, 81}) {
    const auto g = make_radial_grid(Spacing::uniform, 1.0, 3.0, n);
    const auto q = quadrature_for(g, MeasureKind::rho_drho);
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) total += (1.0 + 2.0 * g[i]) * q.weights[i];
    errors.push_back(std::abs(total - exact));
  }
  for (std::size_t k = 1; k < errors.size(); ++k) {
    CHECK(errors[k - 1] / errors[k] == doctest::Approx(4.0).epsilon(0.05));
  }
}

TEST_CASE("mirror ends extend the boundary cells") {
  const Axis a({1.0, 2.0, 3.0}, Spacing::uniform, false, Boundary::mirror, Boundary::mirror, 3.5);
  const auto w = trapezoid_weights(a);
  CHECK(w[0] == doctest::Approx(1.5));
  CHECK(w[1] == doctest::Approx(1.0));
  CHECK(w[2] == doctest::Approx(1.0));
  CHECK_THROWS_AS(Axis({1.0, 2.0}, Spacing::uniform, false, Boundary::dirichlet, Boundary::mirror, 2.0),
                  std::invalid_argument);
}

TEST_CASE("ghost nodes of Dirichlet ends") {
  const auto l = make_radial_grid(Spacing::logarithmic, 1.0, 100.0, 3);
  CHECK(l.lower_ghost() == doctest::Approx(0.1));
  CHECK(l.upper_ghost() == doctest::Approx(1000.0));
  const auto u = make_radial_grid(Spacing::uniform, 0.5, 3.0, 6);
  CHECK(u.lower_ghost() == 0.0);
  CHECK(u.upper_ghost() == doctest::Approx(3.5));
  const auto s = make_signed_grid(-1.0, 1.0, 5);
  CHECK(s.lower_ghost() == doctest::Approx(-1.5));
}

TEST_CASE("polar grids") {
  const double half_pi = 0.5 * std::acos(-1.0);
  const auto g = make_polar_grid(1e-3, 1e3, 50, 1e-3, 40);
  CHECK(g.coordinates() == PlaneCoordinates::polar);
  const auto& t = g.axis2();
  CHECK(t.upper() == Boundary::mirror);
  CHECK(t.upper_plane() == doctest::Approx(half_pi));
  // pi/2 sits halfway between the last node and its geometric successor.
  const double q = t[1] / t[0];
  CHECK(0.5 * (t[t.size() - 1] + t[t.size() - 1] * q) == doctest::Approx(half_pi).epsilon(1e-10));

  const auto quad = quadrature_for(g, MeasureKind::polar_r_theta, 3);
  for (double w : quad.weights) CHECK(w > 0.0);
  CHECK_THROWS_AS(quadrature_for(g, MeasureKind::rho_drho_dz, 3), std::invalid_argument);
  CHECK_THROWS_AS(make_polar_grid(1e-3, 1e3, 50, 1.0, 40), std::invalid_argument);
  CHECK_THROWS_AS(make_polar_grid(1e-3, 1e3, 50, 1e-3, 2), std::invalid_argument);

  // Angular measure: integral of sin(theta) over [0, pi/2] is 1.
  const auto fine = make_polar_grid(0.5, 2.0, 3, 1e-4, 400);
  const auto fq = quadrature_for(fine, MeasureKind::polar_r_theta, 3);
  double total = 0.0;
  for (std::size_t j = 0; j < fine.n2(); ++j) total += fq.axis2_weights[j];
  CHECK(total == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("measure and grid mismatches are rejected") {
  const auto r = make_radial_grid(Spacing::uniform, 1.0, 2.0, 5);
  CHECK_THROWS_AS(quadrature_for(r, MeasureKind::dy_dz), std::invalid_argument);
  CHECK_THROWS_AS(quadrature_for(make_signed_grid(-1, 1, 5), MeasureKind::rho_drho), std::invalid_argument);
  const auto p = make_plane_grid(make_signed_grid(-1, 1, 5), r);
  CHECK_THROWS_AS(quadrature_for(p, MeasureKind::rho_drho), std::invalid_argument);
  CHECK_THROWS_AS(quadrature_for(p, MeasureKind::s_pow_drho_ds), std::invalid_argument);
  CHECK_NOTHROW(quadrature_for(make_plane_grid(r, r), MeasureKind::s_pow_drho_ds, 4));
}
