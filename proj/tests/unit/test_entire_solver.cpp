#include <doctest.h>

#include <cmath>

#include "qcurv/constants.hpp"
#include "qcurv/entire_solver.hpp"
#include "qcurv/error.hpp"
#include "qcurv/quadrature.hpp"
#include "qcurv/radial_core.hpp"

using namespace qcurv;
using constants::Lambda1;

namespace {

const FixedPointSolver& coarse_solver() {
  static FixedPointSolver s(make_grid(RadialGrid::geometric(5.0, 1.08, 0.01, 1e-6)));
  return s;
}

const EntireSolution& base_solution() {
  static EntireSolution sol = [] {
    FixedPointConfig cfg;
    cfg.Lambda = 1.5 * Lambda1;
    cfg.lambda = 1.0 / 24.0;
    return coarse_solver().solve(VSpec::constant(120.0), cfg);
  }();
  return sol;
}

}  // namespace

TEST_CASE("config validation") {
  FixedPointConfig cfg;
  cfg.Lambda = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.Lambda = Lambda1;
  cfg.lambda = 0.1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("entire solution meets the volume constraint") {
  const EntireSolution& s = base_solution();
  CHECK(s.converged);
  CHECK(std::abs(s.Lambda_achieved - 1.5 * Lambda1) / Lambda1 < 1e-9);
  CHECK(s.lap_u0 < 0.0);
  CHECK(tilde_monotone(s));
  CHECK(std::abs(s.curvature(5.0) - s.Lambda_achieved) / Lambda1 < 1e-9);
}

TEST_CASE("Lap u(0) identity from the jets") {
  // (1 + 24 lambda) Lap u(0) = -(4/gamma6) int V e^{6u} |y|^-2 dy
  const EntireSolution& s = base_solution();
  IvpResult j = solution_jets(s, s.V);
  auto f = [&](double r) { return 120.0 * std::exp(6.0 * j.trajectory.at(r).u()) * std::pow(r, 3); };
  double I = 0.0;
  for (double a = 0.0; a < 4.0; a += 0.25) I += integrate_adaptive(f, a, a + 0.25, 1e-14, 1e-12).value;
  double rhs = -(4.0 / constants::gamma6) * constants::omega5 * I;
  CHECK(std::abs((1.0 + 24.0 * s.lambda) * s.lap_u0 - rhs) < 1e-6 * std::abs(rhs));
}

TEST_CASE("jets agree with the node values of u") {
  const EntireSolution& s = base_solution();
  IvpResult j = solution_jets(s, s.V);
  for (std::size_t i = 0; i < s.u.size(); i += 29) {
    double r = s.u.grid()[i];
    if (r > 4.5) break;
    CHECK(std::abs(j.trajectory.at(r).u() - s.u[i]) < 1e-7 * (1 + std::abs(s.u[i])));
  }
  CHECK(std::abs(j.trajectory.at(0.0).lap() - s.lap_u0) < 1e-8 * std::abs(s.lap_u0));
}

TEST_CASE("fixed point residual at grid nodes") {
  CHECK(exist_residual(base_solution(), coarse_solver()) < 1e-8);
}

TEST_CASE("Pohozaev residual is small") {
  const EntireSolution& s = base_solution();
  CHECK(std::abs(pohozaev_residual(s, s.V)) / Lambda1 < 2e-2);
}

TEST_CASE("Pohozaev terms vanish on the spherical profile") {
  auto dens = [](double r) { return 120.0 * std::pow(2.0 / (1.0 + r * r), 6); };
  PohozaevTerms t = pohozaev_terms(dens, [](double) { return 0.0; });
  CHECK(std::abs(t.alpha - Lambda1) / Lambda1 < 1e-10);
  CHECK(std::abs(t.residual()) < 1e-6);
}

TEST_CASE("continuation rejects bad input") {
  VSpec V = VSpec::constant(120.0);
  CHECK_THROWS_AS(lambda_continuation(V, 0.9 * Lambda1, {1.0 / 24}, {}, coarse_solver()), Error);
  CHECK_THROWS_AS(lambda_continuation(V, Lambda1, {1.0 / 48, 1.0 / 24}, {}, coarse_solver()), Error);
  CHECK_THROWS_AS(lambda_continuation(V, Lambda1, {0.5}, {}, coarse_solver()), Error);
}

TEST_CASE("continuation: u(0) grows as lambda halves") {
  ContinuationResult cr = lambda_continuation(VSpec::constant(120.0), 1.5 * Lambda1, {1.0 / 24, 1.0 / 48, 1.0 / 96}, {},
                                              coarse_solver());
  REQUIRE_FALSE(cr.failure_index);
  REQUIRE(cr.steps.size() == 3);
  CHECK(cr.steps[1].u0 > cr.steps[0].u0);
  CHECK(cr.steps[2].u0 > cr.steps[1].u0);
  CHECK(cr.steps[2].lambda_lap_u0 < cr.steps[1].lambda_lap_u0);
}
