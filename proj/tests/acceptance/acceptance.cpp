// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qcurv/blowup_lab.hpp"
#include "qcurv/constants.hpp"
#include "qcurv/entire_solver.hpp"
#include "qcurv/linear_lab.hpp"
#include "qcurv/ode_shooter.hpp"
#include "qcurv/quadrature.hpp"
#include "qcurv/radial_core.hpp"

using namespace qcurv;
using constants::Lambda1;

namespace {

constexpr double kTol1Sup = 1e-6;
constexpr double kTol1Curv = 1e-6;
constexpr double kTime1 = 2.0;
constexpr double kTol2 = 1e-10;
constexpr double kTol2Typo = 1e-4;
constexpr double kTol3Identity = 1e-2;
constexpr double kTol3Kernel = 1e-6;
constexpr double kTime3 = 10.0;
constexpr double kTol4 = 5e-2;
constexpr double kTol5 = 2e-2;
constexpr double kTime5 = 60.0;
constexpr double kTol6Ratio = 0.25;
constexpr double kTime6 = 600.0;
constexpr double kTol7Beta = 1e-6;
constexpr double kTol8Identity = 1e-10;
constexpr double kTol8Curv = 1e-8;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void note(const std::string& s) {
  std::printf("    %s\n", s.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double eta(double r) { return std::log(2.0 / (1.0 + r * r)); }

void criterion1() {
  auto t0 = Clock::now();
  IvpSpec spec;
  spec.r_max = 50.0;
  IvpResult r = integrate_ivp(spec);
  double sup = 0.0;
  for (double x = 0.0; x <= 10.0 + 1e-12; x += 1e-3) sup = std::max(sup, std::abs(r.trajectory.at(x).u() - eta(x)));
  double curv = curvature_integral(spec.V, [&](double x) { return r.trajectory.at(x).u(); }, 50.0);
  double rel = std::abs(curv - Lambda1) / Lambda1;
  double t = since(t0);
  bool ok = sup <= kTol1Sup && rel <= kTol1Curv && t < kTime1;
  std::ostringstream s;
  s << "sup|u-eta| on [0,10] = " << sup << ", |Q(B_50)-Lambda1|/Lambda1 = " << rel << ", time " << t << " s";
  verdict(1, ok, s.str());
}

void criterion2() {
  double worst = 0.0;
  for (double r : {0.5, 1.0, 2.0, 5.0, 20.0}) {
    double q = integrate_adaptive([](double s) { return std::pow(s, 5) / std::pow(1 + s * s, 6); }, 0.0, r, 1e-15, 1e-14).value;
    worst = std::max(worst, std::abs(closed_form_defint(r) - q));
  }
  double q2 = integrate_adaptive([](double s) { return std::pow(s, 5) / std::pow(1 + s * s, 6); }, 0.0, 2.0, 1e-15, 1e-14).value;
  double typo = std::abs(closed_form_defint_printed(2.0) - q2);
  std::ostringstream s;
  s << "max abs error " << worst << ", printed variant off by " << typo << " at r=2";
  verdict(2, worst <= kTol2 && typo > kTol2Typo, s.str());
}

void criterion3() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    LinearizedSolution sol = solve_linearized(nd(rng), nd(rng), 200.0);
    worst = std::max(worst, sol.identity_residual());
  }
  double kres = kernel_operator_residual({0.25, 0.5, 1.0, 2.0, 5.0, 20.0});
  double kint = kernel_weighted_integral();
  double t = since(t0);
  std::ostringstream s;
  s << "max |alpha-(6a+48b)|/(|alpha|+1) = " << worst << ", Psi residual " << kres << ", weighted integral " << kint
    << ", time " << t << " s";
  verdict(3, worst <= kTol3Identity && kres <= kTol3Kernel && std::abs(kint) <= kTol3Kernel && t < kTime3, s.str());
}

void criterion4() {
  LinearizedSolution p0 = psi0_profile(200.0);
  double m = weighted_mass(p0);
  double target = 24.0 * Lambda1;
  double rel = std::abs(m - target) / target;
  std::ostringstream s;
  s << "720 int psi0 e^{6 eta} = " << m << " vs 24 Lambda1 = " << target << ", rel err " << rel;
  verdict(4, rel <= kTol4, s.str());
}

void criterion5(const FixedPointSolver& solver) {
  bool ok = true;
  std::ostringstream s;
  for (double f : {1.1, 1.5}) {
    FixedPointConfig cfg;
    cfg.Lambda = f * Lambda1;
    cfg.lambda = 1.0 / 24.0;
    auto t0 = Clock::now();
    EntireSolution sol = solver.solve(VSpec::constant(120.0), cfg);
    double t = since(t0);
    double res = std::abs(pohozaev_residual(sol, sol.V)) / Lambda1;
    ok = ok && sol.converged && res <= kTol5 && t < kTime5;
    s << "Lambda=" << f << "Lambda1: residual " << res << " (" << t << " s); ";
  }
  s << solver.grid().size() << " nodes";
  verdict(5, ok, s.str());
}

void criterion6(const FixedPointSolver& solver) {
  auto t0 = Clock::now();
  const VSpec V = VSpec::constant(120.0);
  const std::vector<double> lambdas{1.0 / 24, 1.0 / 48, 1.0 / 96, 1.0 / 192};
  ContinuationResult cr = lambda_continuation(V, 1.5 * Lambda1, lambdas, {}, solver);
  if (cr.failure_index) {
    verdict(6, false, "continuation failed at index " + std::to_string(*cr.failure_index) + ": " + cr.failure);
    return;
  }
  const auto& st = cr.steps;
  bool a = true, b = true;
  for (std::size_t i = 1; i < st.size(); ++i) {
    a = a && st[i].u0 > st[i - 1].u0;
    b = b && st[i].lambda_lap_u0 < st[i - 1].lambda_lap_u0;
  }
  for (std::size_t i = 0; i < st.size(); ++i) {
    std::ostringstream s;
    s << "lambda=1/" << std::lround(1.0 / st[i].lambda) << " u0=" << st[i].u0 << " lambda*Lap u(0)=" << st[i].lambda_lap_u0
      << " Q(B_0.5)/Lambda1=" << cr.solutions[i].curvature(0.5) / Lambda1;
    note(s.str());
  }

  std::vector<MemberReport> reps;
  for (const auto& sol : cr.solutions) {
    FamilyMember m = member_from_solution("lambda", sol, V);
    reps.push_back(analyze_member(m, BlowupOptions{}));
  }
  const MemberReport& last = reps.back();
  bool c = last.pattern.present;
  if (!c) {
    std::string miss;
    for (const auto& x : last.pattern.missing) miss += x + "; ";
    note("sign pattern at smallest lambda missing: " + miss);
  }

  bool d = false;
  auto ratio = [](const MemberReport& r, const char* key) -> std::optional<double> {
    auto it = r.ratios.values.find(key);
    if (it == r.ratios.values.end()) return std::nullopt;
    return it->second;
  };
  {
    auto t2 = ratio(last, "beta_theta2_2"), t4 = ratio(last, "beta_theta4_4");
    auto p2 = ratio(reps[reps.size() - 2], "beta_theta2_2"), p4 = ratio(reps[reps.size() - 2], "beta_theta4_4");
    if (t2 && t4 && p2 && p4) {
      bool within = std::abs(*t2 - 1.0 / 3) <= kTol6Ratio / 3 && std::abs(*t4 - 1.0 / 12) <= kTol6Ratio / 12;
      bool approach = std::abs(*t2 - 1.0 / 3) <= std::abs(*p2 - 1.0 / 3) && std::abs(*t4 - 1.0 / 12) <= std::abs(*p4 - 1.0 / 12);
      d = within && approach;
      note(fmt("beta*theta2^2 = %.4f", *t2) + fmt(", beta*theta4^4 = %.4f", *t4));
    } else {
      std::string miss;
      for (const auto& x : last.ratios.missing) miss += x + " ";
      note("theta ratios unavailable at smallest lambda: " + miss);
    }
  }

  // positive excess for the hybrid family, negative deviation for Example 1 at matched u(0)
  bool e = true;
  std::size_t above10 = 0;
  for (const auto& sol : cr.solutions) {
    double u0 = sol.u0();
    BlowupFamily ex1 = example1_family('b', {std::exp(u0) / 2.0});
    double hyb = sol.curvature(0.5) - Lambda1, ana = ex1.front().curvature(0.5) - Lambda1;
    if (&sol == &cr.solutions.back()) e = e && hyb > 0.0 && ana < 0.0;
    if (u0 > 10.0) {
      ++above10;
      e = e && hyb > 0.0 && ana < 0.0;
    }
  }
  note("members with u0 > 10: " + std::to_string(above10) +
       fmt(" ; excess at smallest lambda Q(B_0.5)/Lambda1 - 1 = %.4f", cr.solutions.back().curvature(0.5) / Lambda1 - 1));

  double t = since(t0);
  std::ostringstream s;
  s << "(a) " << (a ? "ok" : "no") << " (b) " << (b ? "ok" : "no") << " (c) " << (c ? "ok" : "no") << " (d) "
    << (d ? "ok" : "no") << " (e) " << (e ? "ok" : "no") << ", time " << t << " s";
  verdict(6, a && b && c && d && e && t < kTime6, s.str());
}

void criterion7() {
  bool ok = true;
  double prev2 = 1e300, prev4 = 1e300;
  std::ostringstream s;
  for (double u0 : {8.0, 12.0, 20.0}) {
    FamilyMember m = synthetic_member(u0);
    BetaFit f = estimate_beta([&](double r) { return m.at(r).u(); });
    double rel = std::abs(f.beta - u0) / u0;
    ThetaRatios t = theta_ratios(m.jets.events, f.beta);
    if (!t.missing.empty()) {
      ok = false;
      continue;
    }
    double e2 = std::abs(t.values.at("beta_theta2_2") - 1.0 / 3) * 3;
    double e4 = std::abs(t.values.at("beta_theta4_4") - 1.0 / 12) * 12;
    ok = ok && rel <= kTol7Beta && e2 < prev2 && e4 <= prev4;
    prev2 = e2;
    prev4 = e4;
    s << "u0=" << u0 << ": beta rel " << rel << ", rel err theta2 " << e2 << ", theta4 " << e4 << "; ";
  }
  verdict(7, ok, s.str());
}

void criterion8() {
  GridPtr g = make_grid(RadialGrid::geometric(40.0, 1.05, 0.01, 1e-6));
  RadialField u = RadialField::sample(g, eta);
  VSpec V = VSpec::constant(120.0);
  double worst_id = 0.0, worst_c = 0.0;
  double base = curvature_integral(V, u, 4.0);
  for (double lam : {0.1, 1.0, 10.0}) {
    RadialField w = rescale(u, lam);
    worst_id = std::max(worst_id, rescaled_profile_error(w, 3.0));
    worst_c = std::max(worst_c, std::abs(curvature_integral(V, w, 4.0 / lam) - base) / base);
  }
  std::ostringstream s;
  s << "identity error " << worst_id << ", curvature invariance " << worst_c;
  verdict(8, worst_id <= kTol8Identity && worst_c <= kTol8Curv, s.str());
}

// Continues past the prescribed list in lambda/sqrt(2) steps; diagnostic only.
void extended_continuation(const FixedPointSolver& solver, double lambda_min) {
  const VSpec V = VSpec::constant(120.0);
  std::vector<double> ls;
  for (double l = 1.0 / 24; l >= lambda_min; l /= std::sqrt(2.0)) ls.push_back(l);
  ContinuationResult cr = lambda_continuation(V, 1.5 * Lambda1, ls, {}, solver);
  for (const auto& sol : cr.solutions) {
    MemberReport r = analyze_member(member_from_solution("lambda", sol, V), BlowupOptions{});
    std::ostringstream s;
    s << "extended lambda=1/" << std::lround(1.0 / sol.lambda) << " u0=" << sol.u0() << " beta=" << -sol.poly_coeff
      << " pattern=" << (r.pattern.present ? "yes" : "no");
    for (const auto& [k, v] : r.ratios.values) s << " " << k << "=" << v;
    note(s.str());
  }
  if (cr.failure_index) note("extended continuation stopped: " + cr.failure);
}

}  // namespace

int main() {
  auto guard = [](int id, auto&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      verdict(id, false, std::string("exception: ") + e.what());
    }
  };
  guard(1, criterion1);
  guard(2, criterion2);
  guard(3, criterion3);
  guard(4, criterion4);
  auto tk = Clock::now();
  FixedPointSolver solver(default_entire_grid(5.0));
  note(fmt("kernel table built in %.1f s", since(tk)));
  guard(5, [&] { criterion5(solver); });
  guard(6, [&] { criterion6(solver); });
  if (const char* ext = std::getenv("QCURV_ACCEPT_EXTENDED")) extended_continuation(solver, std::atof(ext));
  guard(7, criterion7);
  guard(8, criterion8);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
