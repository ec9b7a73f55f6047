#include <doctest.h>

#include <cmath>
#include <random>

#include "qcurv/constants.hpp"
#include "qcurv/error.hpp"
#include "qcurv/linear_lab.hpp"

using namespace qcurv;

TEST_CASE("closed-form kernel jets") {
  for (double r : {0.0, 0.5, 1.0, 3.0}) {
    double q = 1 + r * r;
    JetState j = exact_kernel_jet(r);
    CHECK(j.u() == doctest::Approx((1 - r * r) / q));
    CHECK(j.du() == doctest::Approx(-4 * r / (q * q)));
    CHECK(j.lap() == doctest::Approx(-8 * (r * r + 3) / (q * q * q)));
    CHECK(j.dlap() == doctest::Approx(32 * r * (r * r + 4) / std::pow(q, 4)));
    CHECK(j.bilap() == doctest::Approx(768 / std::pow(q, 5)));
    CHECK(j.dbilap() == doctest::Approx(-7680 * r / std::pow(q, 6)));
  }
}

TEST_CASE("kernel solution is reproduced by the linearized integrator") {
  IvpResult r = integrate_linearized({1.0, -24.0, 768.0}, 20.0);
  for (double x : {0.5, 2.0, 10.0, 20.0}) CHECK(std::abs(r.trajectory.at(x).u() - exact_kernel_solution(x)) < 1e-8);
  CHECK(kernel_operator_residual({0.25, 1.0, 5.0}) < 1e-6);
  CHECK(std::abs(kernel_weighted_integral()) < 1e-6);
}

TEST_CASE("property: linearity of the solution map") {
  std::mt19937 rng(5);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 3; ++k) {
    std::array<double, 3> a{0.0, nd(rng), nd(rng)}, b{0.0, nd(rng), nd(rng)}, s{0.0, a[1] + b[1], a[2] + b[2]};
    IvpResult ra = integrate_linearized(a, 10.0), rb = integrate_linearized(b, 10.0), rs = integrate_linearized(s, 10.0);
    for (double x : {1.0, 4.0, 10.0}) {
      double lhs = rs.trajectory.at(x).u(), rhs = ra.trajectory.at(x).u() + rb.trajectory.at(x).u();
      CHECK(std::abs(lhs - rhs) < 1e-10 * (1 + std::abs(lhs)));
    }
  }
}

TEST_CASE("asymptotic identity for random draws") {
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 3; ++k) {
    LinearizedSolution s = solve_linearized(nd(rng), nd(rng), 200.0);
    CHECK(s.identity_residual() < 1e-2);
    CHECK(s.alpha_agreement() < 1e-2);
    CHECK(s.condition < 1e12);
  }
  CHECK_THROWS_AS(solve_linearized(1.0, 0.0, 10.0), Error);
}

TEST_CASE("fit recovers a planted asymptotic profile") {
  double a = 1.3, b = -0.02, d = 0.7, al = 6 * a + 48 * b;
  auto jet = [&](double r) {
    JetState j;
    j.r = r;
    j.w = {a * r * r + b * std::pow(r, 4) + d - al * std::log(r),
           2 * a * r + 4 * b * std::pow(r, 3) - al / r,
           12 * a + 32 * b * r * r - 4 * al / (r * r),
           64 * b * r + 8 * al / std::pow(r, 3),
           384 * b + 16 * al / std::pow(r, 4),
           -64 * al / std::pow(r, 5)};
    return j;
  };
  LinearFit f = fit_asymptotics(jet, 100.0, 200.0);
  CHECK(std::abs(f.a - a) < 1e-8);
  CHECK(std::abs(f.b - b) < 1e-10);
  CHECK(std::abs(f.alpha - al) < 1e-6);
  AsymptoticCheck ac = asymptotic_table_check(jet, a, b, al, {50.0, 100.0});
  for (auto& [k, v] : ac.max_by_line()) CHECK(v < 1e-10);
}

TEST_CASE("psi0 normalization and weighted mass") {
  LinearizedSolution p = psi0_profile(200.0);
  CHECK(std::abs(p.a - 8.0) < 1e-6);
  CHECK(std::abs(p.b) < 1e-8);
  CHECK(std::abs(p.alpha - 48.0) < 0.5);
  double m = weighted_mass(p);
  CHECK(std::abs(m - 24.0 * constants::Lambda1) / (24.0 * constants::Lambda1) < 5e-2);
  CHECK_THROWS_AS(psi0_profile(50.0), Error);
}
