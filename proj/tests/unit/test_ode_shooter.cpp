#include <doctest.h>

#include <cmath>

#include "qcurv/blowup_lab.hpp"
#include "qcurv/constants.hpp"
#include "qcurv/error.hpp"
#include "qcurv/ode_shooter.hpp"
#include "qcurv/radial_core.hpp"

using namespace qcurv;

TEST_CASE("spherical initial data reproduces eta") {
  IvpSpec s;
  s.r_max = 10.0;
  IvpResult r = integrate_ivp(s);
  double worst = 0.0;
  for (double x = 0.0; x <= 10.0; x += 0.01) worst = std::max(worst, std::abs(r.trajectory.at(x).u() - spherical_profile(x).u()));
  CHECK(worst < 1e-6);
  CHECK(r.events.crossings[0].empty());
}

TEST_CASE("property: Lap^2 u strictly decreasing for positive V") {
  for (double bilap : {192.0, 100.0, 400.0}) {
    IvpSpec s;
    s.bilap_u0 = bilap;
    s.r_max = 3.0;
    IvpResult r = integrate_ivp(s);
    const auto& st = r.trajectory.states;
    for (std::size_t i = 1; i < st.size(); ++i) REQUIRE(st[i].bilap() < st[i - 1].bilap());
  }
}

TEST_CASE("jet relations hold along the trajectory") {
  IvpSpec s;
  s.bilap_u0 = 150.0;
  s.r_max = 2.0;
  IvpResult r = integrate_ivp(s);
  double h = 1e-4;
  for (double x : {0.4, 1.1, 1.8}) {
    JetState a = r.trajectory.at(x - h), b = r.trajectory.at(x + h), c = r.trajectory.at(x);
    CHECK(std::abs((b.u() - a.u()) / (2 * h) - c.du()) < 1e-6);
    CHECK(std::abs((b.lap() - a.lap()) / (2 * h) - c.dlap()) < 1e-5);
    double dd = (b.du() - a.du()) / (2 * h);
    CHECK(std::abs(dd + 5.0 / x * c.du() - c.lap()) < 1e-5);
    // r^5 (Lap^2 u)' = -int_0^r V e^{6u} s^5
    double flux = -std::pow(x, 5) * c.dbilap();
    double mass = curvature_integral(s.V, [&](double t) { return r.trajectory.at(t).u(); }, x) / constants::omega5;
    CHECK(std::abs(flux - mass) < 1e-7 * (1 + mass));
  }
}

TEST_CASE("shooting recovers Lap u(0) of the spherical profile") {
  IvpSpec base;
  base.r_max = 2.0;
  base.lap_u0 = -10.0;
  ShootOptions opt;
  opt.brackets = {{-14.0, -10.0}};
  ShootResult sr = shoot(base, {{1.0, ConstraintKind::value, 0.0}}, {FreeVar::lap_u0}, opt);
  CHECK(std::abs(sr.spec.lap_u0 + 12.0) < 1e-7);
}

TEST_CASE("sampled trajectory finds sign changes of a synthetic profile") {
  FamilyMember m = synthetic_member(12.0);
  const EventLog& ev = m.jets.events;
  REQUIRE(ev.theta1());
  REQUIRE(ev.theta2());
  REQUIRE(ev.theta4());
  CHECK(*ev.theta2() < *ev.theta1());
  CHECK(*ev.theta4() < *ev.theta3());
  PatternReport p = sign_pattern_check(m.jets.trajectory, ev);
  CHECK(p.present);
  for (double x : {0.2, 0.9}) CHECK(std::abs(m.at(x).u() - synthetic_jet(x, 12.0).u()) < 1e-12);
}

TEST_CASE("sign pattern reports what is missing on eta") {
  IvpSpec s;
  s.r_max = 5.0;
  IvpResult r = integrate_ivp(s);
  PatternReport p = sign_pattern_check(r.trajectory, r.events);
  CHECK_FALSE(p.present);
  CHECK_FALSE(p.missing.empty());
}

TEST_CASE("event log scaling") {
  FamilyMember m = synthetic_member(8.0);
  EventLog e = m.jets.events.scaled(2.0);
  CHECK(*e.theta1() == doctest::Approx(*m.jets.events.theta1() * 2.0));
}
