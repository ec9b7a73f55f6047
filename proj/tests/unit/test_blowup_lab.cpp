#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <random>

#include "qcurv/blowup_lab.hpp"
#include "qcurv/constants.hpp"
#include "qcurv/error.hpp"
#include "qcurv/linear_lab.hpp"
#include "qcurv/quadrature.hpp"
#include "qcurv/radial_core.hpp"

using namespace qcurv;
using constants::Lambda1;

namespace {
double eta(double r) { return std::log(2.0 / (1.0 + r * r)); }
}

TEST_CASE("phi jet") {
  JetState p = phi_jet(0.0);
  CHECK(p.u() == -1.0);
  CHECK(p.lap() == doctest::Approx(24.0));
  CHECK(p.bilap() == doctest::Approx(-384.0));
  double r = 0.6, h = 1e-5;
  CHECK(phi_jet(r).du() == doctest::Approx((phi_jet(r + h).u() - phi_jet(r - h).u()) / (2 * h)).epsilon(1e-8));
}

TEST_CASE("estimate_beta recovers the synthetic coefficient") {
  for (double u0 : {8.0, 12.0, 20.0}) {
    BetaFit f = estimate_beta([u0](double r) { return synthetic_jet(r, u0).u(); });
    CHECK(std::abs(f.beta - u0) / u0 < 1e-6);
  }
}

TEST_CASE("property: estimate_beta ignores constant and log nuisance terms") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int k = 0; k < 5; ++k) {
    double beta = 5.0 + 10.0 * std::abs(d(rng)), g0 = d(rng), g1 = d(rng);
    BetaFit f = estimate_beta([&](double r) { return -beta * std::pow(1 - r * r, 2) + g0 + g1 * std::log(r); });
    CHECK(std::abs(f.beta - beta) < 1e-9 * beta);
    CHECK(std::abs(f.gamma0 - g0) < 1e-8);
    CHECK(std::abs(f.gamma1 - g1) < 1e-8);
  }
}

TEST_CASE("estimate_beta rejects a profile that is not polyharmonic-shaped") {
  CHECK_THROWS_AS(estimate_beta([](double r) { return eta(r); }), Error);
}

TEST_CASE("theta ratios approach 1/3 and 1/12") {
  double prev2 = 1e9, prev4 = 1e9;
  for (double u0 : {8.0, 12.0, 20.0}) {
    FamilyMember m = synthetic_member(u0);
    ThetaRatios t = theta_ratios(m.jets.events, u0);
    REQUIRE(t.missing.empty());
    double e2 = std::abs(t.values.at("beta_theta2_2") - 1.0 / 3.0);
    double e4 = std::abs(t.values.at("beta_theta4_4") - 1.0 / 12.0);
    CHECK(e2 < prev2);
    CHECK(e4 <= prev4 + 1e-6);
    prev2 = e2;
    prev4 = e4;
  }
  CHECK(prev2 < 0.03);
}

TEST_CASE("synthetic member is case iv") {
  FamilyMember m = synthetic_member(12.0);
  Classification c = classify_case(m);
  CHECK(c.label == CaseLabel::iv);
  CHECK(c.pattern);
}

TEST_CASE("example 1 labels") {
  BlowupFamily a = example1_family('a', {2.0, 4.0, 8.0});
  BlowupReport ra = analyze_family(a);
  CHECK(ra.family_label == CaseLabel::i);
  BlowupFamily b = example1_family('b', {5.0, 20.0, 80.0});
  BlowupReport rb = analyze_family(b);
  CHECK(rb.family_label == CaseLabel::ii);
  for (const auto& m : b) CHECK(m.curvature(0.5) < Lambda1);
}

TEST_CASE("property: rescale_member preserves curvature and scales events") {
  FamilyMember m = synthetic_member(8.0);
  for (double rho : {0.5, 2.0}) {
    FamilyMember w = rescale_member(m, rho);
    CHECK(std::abs(w.curvature(0.3 / rho) - m.curvature(0.3)) / m.curvature(0.3) < 1e-8);
    CHECK(std::abs(*w.jets.events.theta1() - *m.jets.events.theta1() / rho) < 1e-9);
    CHECK(std::abs(w.at(0.1 / rho).u() - (m.at(0.1).u() + std::log(rho))) < 1e-10);
  }
}

TEST_CASE("rescaled profile of eta at scale lambda is eta") {
  GridPtr g = make_grid(RadialGrid::geometric(40.0, 1.05, 0.01, 1e-6));
  RadialField u = RadialField::sample(g, eta);
  for (double lam : {0.1, 1.0, 10.0}) {
    RadialField w = rescale(u, lam);
    CHECK(rescaled_profile_error(w, 3.0) < 1e-10);
  }
}

TEST_CASE("neck constant and monotonicity past c_p r_k") {
  CHECK(neck_constant(1.5) == doctest::Approx(2.0));
  CHECK_THROWS_AS(neck_constant(2.0), Error);
  // (r^p e^eta)' has the sign of p - (2 - p) r^2
  for (double p : {1.2, 1.5, 1.8}) {
    double c = neck_constant(p);
    CHECK(p - (2 - p) * c * c < 0.0);
  }
  FamilyMember m = synthetic_member(12.0);
  NeckResult n = neck_analysis(m, 1.5);
  REQUIRE(n.t_k);
  CHECK(n.monotone);
  CHECK(n.bound_ok);
  CHECK(*n.t_k > 2.0 * 2.0 * std::exp(-12.0));
}

TEST_CASE("excess slope fit") {
  std::vector<double> u0s{5, 6, 7}, c;
  for (double u : u0s) c.push_back(Lambda1 + 3.0 * u * std::exp(-2 * u));
  ExcessFit f = curvature_excess_slope(u0s, c, 0.5);
  CHECK(f.slope == doctest::Approx(3.0).epsilon(1e-7));
  CHECK(std::abs(f.intercept) < 1e-9 * Lambda1);
  CHECK_THROWS_AS(curvature_excess_slope(u0s, c, 0.7), Error);
  CHECK_THROWS_AS(curvature_excess_slope({5, 6}, {1, 2}, 0.5), Error);
}

TEST_CASE("property: eta + eps psi0 family has excess slope near 24 Lambda1") {
  LinearizedSolution p0 = psi0_profile(200.0);
  auto psi = [&](double x) {
    if (x <= p0.r_max) return p0.at(x).u();
    return p0.a * x * x + p0.b * std::pow(x, 4) + p0.d - p0.alpha * std::log(x);
  };
  const double delta = 0.25;
  std::vector<double> u0s{5.0, 6.0, 7.0}, curv;
  for (double u0 : u0s) {
    double rk = 2.0 * std::exp(-u0), eps = u0 * std::exp(-2.0 * u0), X = delta / rk;
    auto f = [&](double x) { return 120.0 * std::exp(6.0 * (eta(x) + eps * psi(x))) * std::pow(x, 5); };
    double I = 0.0;
    for (double a = 0.0, b = 0.5; a < X; a = b, b = std::min(2 * b, X)) I += integrate_adaptive(f, a, b, 1e-16, 1e-13).value;
    curv.push_back(constants::omega5 * I);
  }
  ExcessFit fit = curvature_excess_slope(u0s, curv, delta);
  CHECK(std::abs(fit.slope - 24.0 * Lambda1) / (24.0 * Lambda1) < 0.2);
}

TEST_CASE("report outputs") {
  BlowupFamily fam{synthetic_member(8.0), synthetic_member(12.0), synthetic_member(20.0)};
  BlowupOptions opt;
  BlowupReport rep = analyze_family(fam, opt);
  auto j = nlohmann::json::parse(report_json(rep));
  CHECK(j["members"].size() == 3);
  CHECK(j["members"][0]["case"] == to_string(rep.family_label));
  auto header = family_csv_header(opt);
  auto rows = family_csv_rows(rep);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) CHECK(r.size() == header.size());
  CHECK(header.front() == "u0");
  CHECK(rep.members.front().u0 < rep.members.back().u0);
}

TEST_CASE("expansion checks on the synthetic profile") {
  FamilyMember m = synthetic_member(12.0);
  auto e = expansion_checks(m, 12.0, 0.5);
  CHECK(e.at("ukglobal_residual") < 1e-10);
  CHECK(e.at("lap_phi0") == doctest::Approx(24.0));
  CHECK(e.at("bilap_phi") == doctest::Approx(-384.0));
}
