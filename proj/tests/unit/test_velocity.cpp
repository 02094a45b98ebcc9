#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "apkin/random.hpp"
#include "apkin/velocity.hpp"

using namespace apkin;
using Catch::Approx;

namespace {

std::vector<double> random_vector(Lcg64& rng, std::size_t n) {
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

std::vector<double> mean_zero(const VelocityGrid& g, std::vector<double> x) {
  const double m = average(g, x);
  for (double& v : x) v -= m;
  return x;
}

double weighted_dot(const VelocityGrid& g, const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < g.count(); ++j) s += 0.5 * g.weight(j) * a[j] * b[j];
  return s;
}

}  // namespace

TEST_CASE("telegraph rule has nodes -1, 1 and unit weights", "[velocity]") {
  const VelocityGrid g = build_velocity_grid(2, QuadratureRule::two_point_telegraph);
  REQUIRE(g.count() == 2);
  CHECK(g.node(0) == -1.0);
  CHECK(g.node(1) == 1.0);
  CHECK(g.weight(0) == 1.0);
  CHECK(g.weight(1) == 1.0);
}

TEST_CASE("Gauss-Legendre grids satisfy the quadrature invariants", "[velocity]") {
  for (std::size_t n : {2u, 4u, 8u, 16u, 32u, 64u}) {
    const VelocityGrid g = build_velocity_grid(n, QuadratureRule::gauss_legendre);
    const double wsum = std::accumulate(g.weights().begin(), g.weights().end(), 0.0);
    CHECK(std::abs(wsum - 2.0) <= 1e-14);
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(g.node(j) > -1.0);
      CHECK(g.node(j) < 1.0);
      CHECK(g.weight(j) > 0.0);
      CHECK(g.node(j) == -g.node(n - 1 - j));
      CHECK(g.weight(j) == g.weight(n - 1 - j));
      if (j > 0) CHECK(g.node(j) > g.node(j - 1));
    }
    const std::vector<double> ones(n, 1.0);
    CHECK(average(g, ones) == Approx(1.0).margin(1e-15));
    CHECK(std::abs(average(g, sample(g, [](double v) { return v; }))) <= 1e-16);
  }
}

TEST_CASE("8-point rule integrates v^2 exactly", "[velocity]") {
  const VelocityGrid g = build_velocity_grid(8, QuadratureRule::gauss_legendre);
  CHECK(std::abs(average(g, sample(g, [](double v) { return v * v; })) - 1.0 / 3.0) <= 1e-14);
  // degree 2n - 1 = 15 is still exact
  CHECK(std::abs(average(g, sample(g, [](double v) { return std::pow(v, 14); })) - 1.0 / 15.0) <=
        1e-14);
}

TEST_CASE("velocity grid construction rejects bad counts", "[velocity]") {
  CHECK_THROWS_AS(build_velocity_grid(0, QuadratureRule::gauss_legendre), InvalidArgument);
  CHECK_THROWS_AS(build_velocity_grid(1, QuadratureRule::gauss_legendre), InvalidArgument);
  CHECK_THROWS_AS(build_velocity_grid(7, QuadratureRule::gauss_legendre), InvalidArgument);
  CHECK_THROWS_AS(build_velocity_grid(4, QuadratureRule::two_point_telegraph), InvalidArgument);
}

TEST_CASE("average rejects a length mismatch", "[velocity]") {
  const VelocityGrid g = build_velocity_grid(4, QuadratureRule::gauss_legendre);
  const std::vector<double> x(3, 1.0);
  CHECK_THROWS_AS(average(g, x), InvalidArgument);
}

TEST_CASE("isotropic kernel gives L phi = <phi> - phi", "[velocity]") {
  const VelocityGrid g = build_velocity_grid(8, QuadratureRule::gauss_legendre);
  const CollisionOperator op = build_collision_operator(g, CollisionKernel::isotropic());
  Lcg64 rng(11);
  const std::vector<double> phi = random_vector(rng, 8);
  const std::vector<double> lphi = op.apply(phi);
  const double m = average(g, phi);
  for (std::size_t j = 0; j < 8; ++j) CHECK(lphi[j] == Approx(m - phi[j]).margin(1e-14));
  CHECK(op.spectral_gap() == 1.0);
  CHECK(op.normalization_defect() <= 1e-14);
}

TEST_CASE("telegraph grid with s = 1 has Rayleigh quotient -2 on mean-zero vectors", "[velocity]") {
  // Hand computation: L = [[-1, 1], [1, -1]]; mean-zero phi = (a, -a) maps to (-2a, 2a).
  const VelocityGrid g = build_velocity_grid(2, QuadratureRule::two_point_telegraph);
  const CollisionOperator op = build_collision_operator(g, CollisionKernel::constant(1.0));
  CHECK(op.matrix()(0, 0) == -1.0);
  CHECK(op.matrix()(0, 1) == 1.0);
  CHECK(op.matrix()(1, 0) == 1.0);
  CHECK(op.matrix()(1, 1) == -1.0);
  Lcg64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const double a = rng.uniform(-2.0, 2.0);
    const std::vector<double> phi = {a, -a};
    const std::vector<double> lphi = op.apply(phi);
    CHECK(weighted_dot(g, phi, lphi) / weighted_dot(g, phi, phi) == Approx(-2.0).epsilon(1e-14));
  }
  // the kernel integrates to 2, reported rather than rejected
  CHECK(op.normalization_defect() == Approx(1.0));
}

TEST_CASE("collision operator invariants on random vectors", "[velocity]") {
  const VelocityGrid g = build_velocity_grid(16, QuadratureRule::gauss_legendre);
  for (const CollisionKernel& k :
       {CollisionKernel::isotropic(), CollisionKernel::linear_anisotropic(0.3),
        CollisionKernel::linear_anisotropic(-0.6), CollisionKernel::constant(0.8)}) {
    const CollisionOperator op = build_collision_operator(g, k);
    Lcg64 rng(99);
    for (int t = 0; t < 120; ++t) {
      const std::vector<double> phi = random_vector(rng, 16);
      const std::vector<double> psi = random_vector(rng, 16);
      const std::vector<double> lphi = op.apply(phi);
      const std::vector<double> lpsi = op.apply(psi);
      double norm = 0.0;
      for (double x : phi) norm = std::max(norm, std::abs(x));
      // conservation
      CHECK(std::abs(average(g, lphi)) <= 1e-13 * norm);
      // self-adjointness in the weighted product
      const double a = weighted_dot(g, phi, lpsi);
      const double b = weighted_dot(g, psi, lphi);
      CHECK(std::abs(a - b) <= 1e-13 * std::max(1.0, std::abs(a)));
      // coercivity on mean-zero vectors
      const std::vector<double> z = mean_zero(g, phi);
      CHECK(weighted_dot(g, z, op.apply(z)) <=
            -op.spectral_gap() * weighted_dot(g, z, z) * (1.0 - 1e-13));
    }
    const std::vector<double> lone = op.apply(std::vector<double>(16, 1.0));
    for (double x : lone) CHECK(std::abs(x) <= 1e-13);
  }
}

TEST_CASE("kernel bound and symmetry violations raise InvalidKernel", "[velocity]") {
  const VelocityGrid g = build_velocity_grid(4, QuadratureRule::gauss_legendre);
  CHECK_THROWS_AS(build_collision_operator(
                      g, CollisionKernel([](double, double) { return 0.5; }, 0.6, 1.0)),
                  InvalidKernel);
  CHECK_THROWS_AS(build_collision_operator(
                      g, CollisionKernel([](double, double) { return 0.5; }, 0.0, 1.0)),
                  InvalidKernel);
  CHECK_THROWS_AS(
      build_collision_operator(
          g, CollisionKernel([](double v, double w) { return 0.5 + 0.1 * v + 0.05 * w; }, 0.3, 0.7)),
      InvalidKernel);
}

TEST_CASE("tabulated kernel reproduces the analytic kernel", "[velocity]") {
  const VelocityGrid g = build_velocity_grid(4, QuadratureRule::gauss_legendre);
  std::vector<double> table;
  for (double v : g.nodes())
    for (double w : g.nodes()) table.push_back(0.5 * (1.0 + 0.3 * v * w));
  const CollisionOperator a =
      build_collision_operator(g, CollisionKernel::tabulated(g, table, 0.35, 0.65));
  const CollisionOperator b = build_collision_operator(g, CollisionKernel::linear_anisotropic(0.3));
  CHECK((a.matrix() - b.matrix()).lpNorm<Eigen::Infinity>() <= 1e-15);
  CHECK_THROWS_AS(CollisionKernel::tabulated(g, {1.0, 2.0}, 0.1, 1.0), InvalidArgument);
}

TEST_CASE("pseudo-inverse examples", "[velocity]") {
  SECTION("isotropic kernel acts as -I on mean-zero vectors") {
    const VelocityGrid g = build_velocity_grid(8, QuadratureRule::gauss_legendre);
    const CollisionOperator op = build_collision_operator(g, CollisionKernel::isotropic());
    Lcg64 rng(5);
    const std::vector<double> phi = mean_zero(g, random_vector(rng, 8));
    const std::vector<double> psi = pseudo_inverse_apply(op, phi);
    for (std::size_t j = 0; j < 8; ++j) CHECK(psi[j] == Approx(-phi[j]).margin(1e-14));
  }
  SECTION("telegraph grid, s = 1: L^{-1} v = -v/2") {
    const VelocityGrid g = build_velocity_grid(2, QuadratureRule::two_point_telegraph);
    const CollisionOperator op = build_collision_operator(g, CollisionKernel::constant(1.0));
    const std::vector<double> psi = pseudo_inverse_apply(op, std::vector<double>{-1.0, 1.0});
    CHECK(psi[0] == Approx(0.5).margin(1e-15));
    CHECK(psi[1] == Approx(-0.5).margin(1e-15));
  }
  SECTION("rejects vectors that are not mean-zero") {
    const VelocityGrid g = build_velocity_grid(4, QuadratureRule::gauss_legendre);
    const CollisionOperator op = build_collision_operator(g, CollisionKernel::isotropic());
    CHECK_THROWS_AS(pseudo_inverse_apply(op, std::vector<double>(4, 1.0)), InvalidArgument);
  }
}

TEST_CASE("pseudo-inverse is a right inverse on random mean-zero vectors", "[velocity]") {
  const VelocityGrid g = build_velocity_grid(32, QuadratureRule::gauss_legendre);
  const CollisionOperator op = build_collision_operator(g, CollisionKernel::linear_anisotropic(0.5));
  Lcg64 rng(17);
  for (int t = 0; t < 100; ++t) {
    const std::vector<double> phi = mean_zero(g, random_vector(rng, 32));
    const std::vector<double> psi = pseudo_inverse_apply(op, phi);
    const std::vector<double> back = op.apply(psi);
    double err = 0.0;
    double scale = 0.0;
    for (std::size_t j = 0; j < 32; ++j) {
      err = std::max(err, std::abs(back[j] - phi[j]));
      scale = std::max(scale, std::abs(phi[j]));
    }
    CHECK(err <= 1e-11 * scale);
    CHECK(std::abs(average(g, psi)) <= 1e-13);
  }
}

TEST_CASE("diffusion coefficient values", "[velocity]") {
  for (std::size_t n : {8u, 16u, 32u}) {
    const VelocityGrid g = build_velocity_grid(n, QuadratureRule::gauss_legendre);
    const CollisionOperator op = build_collision_operator(g, CollisionKernel::isotropic());
    CHECK(std::abs(diffusion_coefficient(op, 1.0) - 1.0 / 3.0) <= 1e-12);
    CHECK(std::abs(diffusion_coefficient(op, 2.0) - 1.0 / 6.0) <= 1e-12);
  }
  const VelocityGrid t = build_velocity_grid(2, QuadratureRule::two_point_telegraph);
  const CollisionOperator top = build_collision_operator(t, CollisionKernel::constant(1.0));
  CHECK(diffusion_coefficient(top, 1.0) == Approx(0.5).epsilon(1e-15));

  // (1 + b v v')/2: L v = -(1 - b/3) v, so kappa = (1/3) / (1 - b/3)
  const VelocityGrid g = build_velocity_grid(16, QuadratureRule::gauss_legendre);
  const CollisionOperator an = build_collision_operator(g, CollisionKernel::linear_anisotropic(0.3));
  CHECK(diffusion_coefficient(an, 1.0) == Approx((1.0 / 3.0) / 0.9).epsilon(1e-13));

  const VelocityGrid g8 = build_velocity_grid(8, QuadratureRule::gauss_legendre);
  const VelocityGrid g32 = build_velocity_grid(32, QuadratureRule::gauss_legendre);
  CHECK(std::abs(diffusion_coefficient(build_collision_operator(g8, CollisionKernel::isotropic()), 1.0) -
                 diffusion_coefficient(build_collision_operator(g32, CollisionKernel::isotropic()), 1.0)) <=
        1e-12);
  CHECK_THROWS_AS(diffusion_coefficient(an, 0.0), InvalidArgument);
  CHECK_THROWS_AS(diffusion_coefficient(an, -1.0), InvalidArgument);
}

TEST_CASE("quadrature Cauchy-Schwarz constant is <|v|>", "[velocity]") {
  // <v g>^2 <= <|v|> <|v| g^2>, attained at g = sign(v)
  for (std::size_t n : {2u, 4u, 8u, 16u}) {
    const VelocityGrid g = n == 2 ? build_velocity_grid(2, QuadratureRule::two_point_telegraph)
                                  : build_velocity_grid(n, QuadratureRule::gauss_legendre);
    const std::vector<double> absv = sample(g, [](double v) { return std::abs(v); });
    const std::vector<double> sgn = sample(g, [](double v) { return v > 0 ? 1.0 : -1.0; });
    const double mean_abs = average(g, absv);
    CHECK(mean_abs >= 0.5);
    const double flux = g.flux_unchecked(sgn.data());
    CHECK(flux * flux == Approx(mean_abs * average(g, absv)).epsilon(1e-14));
  }
}
