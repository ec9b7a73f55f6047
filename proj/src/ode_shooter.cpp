#include "qcurv/ode_shooter.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>

#include "qcurv/constants.hpp"
#include "qcurv/error.hpp"

namespace qcurv {

namespace {

using State = std::array<double, 6>;

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

State rhs(double r, const State& w, const Source& S) {
  double inv = 5.0 / r;
  return {w[1], w[2] - inv * w[1], w[3], w[4] - inv * w[3], w[5], -S(r, w[0]) - inv * w[5]};
}

// Degree-6 Taylor jet from the data at 0, with Lap^3 u(0) = -s0.
State taylor(const std::array<double, 3>& j0, double s0, double r) {
  double a = j0[1], b = j0[2], c = -s0;
  double r2 = r * r, r3 = r2 * r, r4 = r2 * r2, r5 = r4 * r, r6 = r4 * r2;
  return {j0[0] + a * r2 / 12.0 + b * r4 / 384.0 + c * r6 / 23040.0,
          a * r / 6.0 + b * r3 / 96.0 + c * r5 / 3840.0,
          a + b * r2 / 12.0 + c * r4 / 384.0,
          b * r / 6.0 + c * r3 / 96.0,
          b + c * r2 / 12.0,
          c * r / 6.0};
}

JetState to_original(double x, const State& w, double s) {
  JetState j;
  j.r = s * x;
  if (s == 1.0) {
    j.w = w;
    return j;
  }
  j.w[0] = w[0] - std::log(s);
  double f = 1.0;
  for (int k = 1; k < 6; ++k) {
    f /= s;
    j.w[k] = w[k] * f;
  }
  return j;
}

}  // namespace

std::array<double, 6> DenseSegment::eval(double x) const {
  double t = (x - x0) / h, t1 = 1.0 - t;
  State y;
  for (int i = 0; i < 6; ++i)
    y[i] = rc[0][i] + t * (rc[1][i] + t1 * (rc[2][i] + t * (rc[3][i] + t1 * rc[4][i])));
  return y;
}

EventLog EventLog::scaled(double s) const {
  EventLog e = *this;
  for (auto& v : e.crossings)
    for (auto& c : v) c.r *= s;
  return e;
}

JetState Trajectory::at(double r) const {
  if (states.empty()) throw Error(Errc::out_of_range, "empty trajectory");
  if (r < 0.0 || r > r_end() * (1.0 + 1e-12)) throw Error(Errc::out_of_range, "r = " + std::to_string(r));
  if (sampler) return (*sampler)(std::min(r, r_end()));
  double x = r / gauge_scale;
  if (segments.empty() || x <= segments.front().x0) {
    // before the first step: Taylor data in integration variables
    State w0 = taylor(jet0, taylor_source0, x);
    return to_original(x, w0, gauge_scale);
  }
  auto it = std::upper_bound(segments.begin(), segments.end(), x,
                             [](double v, const DenseSegment& s) { return v < s.x0; });
  const DenseSegment& seg = *(it - 1);
  return to_original(x, seg.eval(std::min(x, seg.x0 + seg.h)), gauge_scale);
}

RadialField Trajectory::u_field() const {
  std::vector<double> x, v, d1, d2;
  for (const auto& s : states) {
    if (!x.empty() && s.r <= x.back()) continue;
    x.push_back(s.r);
    v.push_back(s.u());
    d1.push_back(s.du());
    d2.push_back(s.r == 0.0 ? s.lap() / 6.0 : s.lap() - 5.0 * s.du() / s.r);
  }
  auto g = make_grid(RadialGrid(std::move(x)));
  return RadialField(g, std::move(v), std::move(d1), std::move(d2));
}

IvpResult integrate_jet(const JetIvp& p) {
  if (!(p.r_max > 0.0) || !(p.rtol > 0.0) || !(p.atol > 0.0))
    throw Error(Errc::invalid_argument, "r_max and tolerances must be positive");
  IvpResult res;
  Trajectory& tr = res.trajectory;
  tr.jet0 = p.jet0;
  tr.taylor_source0 = p.source0;

  JetState origin;
  origin.r = 0.0;
  origin.w = {p.jet0[0], 0.0, p.jet0[1], 0.0, p.jet0[2], 0.0};
  tr.states.push_back(origin);

  double x = std::min(p.r_start, 0.5 * p.r_max);
  State y = taylor(p.jet0, p.source0, x);
  tr.states.push_back({x, y});

  std::vector<double> outs(p.output_radii);
  std::sort(outs.begin(), outs.end());
  std::size_t next_out = 0;
  while (next_out < outs.size() && outs[next_out] <= x) {
    double r = outs[next_out++];
    if (r > 0.0) tr.states.push_back({r, taylor(p.jet0, p.source0, r)});
  }
  std::sort(tr.states.begin(), tr.states.end(), [](const JetState& a, const JetState& b) { return a.r < b.r; });

  State k1 = rhs(x, y, p.source);
  double h = 0.1 * x;
  std::array<int, 4> sign{};
  for (int q = 0; q < 4; ++q) sign[q] = (y[q + 1] > 0) - (y[q + 1] < 0);

  const double hmin_rel = 1e-13;
  while (x < p.r_max) {
    if (tr.steps >= p.max_steps) throw Error(Errc::stiffness_failure, "step budget exhausted");
    h = std::min(h, p.r_max - x);
    if (h < hmin_rel * x) throw Error(Errc::stiffness_failure, "step underflow at r = " + std::to_string(x));

    State y2, y3, y4, y5, y6, y7, k2, k3, k4, k5, k6, k7;
    for (int i = 0; i < 6; ++i) y2[i] = y[i] + h * a21 * k1[i];
    k2 = rhs(x + c2 * h, y2, p.source);
    for (int i = 0; i < 6; ++i) y3[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = rhs(x + c3 * h, y3, p.source);
    for (int i = 0; i < 6; ++i) y4[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = rhs(x + c4 * h, y4, p.source);
    for (int i = 0; i < 6; ++i) y5[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = rhs(x + c5 * h, y5, p.source);
    for (int i = 0; i < 6; ++i)
      y6[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = rhs(x + h, y6, p.source);
    for (int i = 0; i < 6; ++i)
      y7[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    k7 = rhs(x + h, y7, p.source);

    double err = 0.0;
    bool finite = true;
    for (int i = 0; i < 6; ++i) {
      double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      double sc = p.atol + p.rtol * std::max(std::abs(y[i]), std::abs(y7[i]));
      err += (e / sc) * (e / sc);
      if (!std::isfinite(y7[i])) finite = false;
    }
    err = std::sqrt(err / 6.0);
    if (!finite || !std::isfinite(err)) {
      h *= 0.25;
      continue;
    }
    if (err > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      continue;
    }

    DenseSegment seg;
    seg.x0 = x;
    seg.h = h;
    for (int i = 0; i < 6; ++i) {
      double ydiff = y7[i] - y[i];
      double bspl = h * k1[i] - ydiff;
      seg.rc[0][i] = y[i];
      seg.rc[1][i] = ydiff;
      seg.rc[2][i] = bspl;
      seg.rc[3][i] = ydiff - h * k7[i] - bspl;
      seg.rc[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
    }
    tr.segments.push_back(seg);

    double xn = x + h;
    while (next_out < outs.size() && outs[next_out] <= xn) {
      double r = outs[next_out++];
      if (r > x) tr.states.push_back({r, seg.eval(r)});
    }

    if (p.track_events) {
      for (int q = 0; q < 4; ++q) {
        int s1 = (y7[q + 1] > 0) - (y7[q + 1] < 0);
        if (s1 != 0 && sign[q] != 0 && s1 != sign[q]) {
          auto f = [&](double t) { return seg.eval(t)[q + 1]; };
          boost::uintmax_t iters = 200;
          auto br = boost::math::tools::toms748_solve(f, x, xn, y[q + 1], y7[q + 1],
                                                      boost::math::tools::eps_tolerance<double>(50), iters);
          double root = 0.5 * (br.first + br.second);
          res.events.crossings[q].push_back({root, s1 > 0 ? 1 : -1});
        }
        if (s1 != 0) sign[q] = s1;
      }
    }

    x = xn;
    y = y7;
    k1 = k7;
    ++tr.steps;
    if (tr.states.empty() || x > tr.states.back().r) tr.states.push_back({x, y});

    if (y[0] > p.blowup_u) {
      tr.blowup = true;
      tr.blowup_radius = x;
      break;
    }
    double fac = err > 0.0 ? std::min(5.0, 0.9 * std::pow(err, -0.2)) : 5.0;
    h *= fac;
  }
  for (auto& c : res.events.crossings)
    std::sort(c.begin(), c.end(), [](const Crossing& a, const Crossing& b) { return a.r < b.r; });
  return res;
}

IvpResult integrate_ivp(const IvpSpec& spec) {
  if (!(spec.r_max > 0.0)) throw Error(Errc::invalid_argument, "r_max must be positive");
  if (!(spec.rtol > 0.0) || !(spec.atol > 0.0)) throw Error(Errc::invalid_argument, "tolerances must be positive");
  if (!std::isfinite(spec.u0) || 6.0 * spec.u0 > 700.0) throw Error(Errc::rescale_first, "e^{6 u0} not finite");

  double s = 1.0;
  if (spec.u0 > spec.rescale_threshold) s = 2.0 * std::exp(-spec.u0);

  JetIvp p;
  VSpec Vs = s == 1.0 ? spec.V : spec.V.with_argument_scale(s);
  p.jet0 = {spec.u0 + std::log(s), spec.lap_u0 * s * s, spec.bilap_u0 * s * s * s * s};
  p.source = [Vs](double r, double w1) { return Vs(r) * std::exp(6.0 * w1); };
  p.source0 = Vs(0.0) * std::exp(6.0 * p.jet0[0]);
  p.r_max = spec.r_max / s;
  p.rtol = spec.rtol;
  p.atol = spec.atol;
  p.r_start = s == 1.0 ? spec.r_start : std::min(spec.r_start, 1e-6);
  for (double r : spec.output_radii) p.output_radii.push_back(r / s);
  p.track_events = spec.track_events;
  p.max_steps = spec.max_steps;

  IvpResult res = integrate_jet(p);
  if (s != 1.0) {
    Trajectory& tr = res.trajectory;
    for (auto& st : tr.states) st = to_original(st.r, st.w, s);
    tr.rescaled_gauge = true;
    tr.gauge_scale = s;
    tr.blowup_radius *= s;
    res.events = res.events.scaled(s);
  }
  return res;
}

IvpResult sampled_trajectory(std::function<JetState(double)> jet, const std::vector<double>& radii) {
  if (radii.empty()) throw Error(Errc::invalid_argument, "no sample radii");
  IvpResult res;
  Trajectory& tr = res.trajectory;
  JetState origin = jet(0.0);
  origin.r = 0.0;
  tr.states.push_back(origin);
  tr.jet0 = {origin.w[0], origin.w[2], origin.w[4]};
  for (double r : radii) {
    if (!(r > tr.states.back().r)) throw Error(Errc::invalid_argument, "sample radii must increase");
    JetState s = jet(r);
    s.r = r;
    tr.states.push_back(s);
  }
  tr.sampler = std::make_shared<const std::function<JetState(double)>>(jet);
  for (int q = 0; q < 4; ++q) {
    const int c = q + 1;
    for (std::size_t i = 1; i + 1 < tr.states.size(); ++i) {
      double a = tr.states[i].w[c], b = tr.states[i + 1].w[c];
      if (a == 0.0 || b == 0.0 || (a > 0) == (b > 0)) continue;
      auto fn = [&](double r) { return jet(r).w[c]; };
      boost::uintmax_t iters = 200;
      auto br = boost::math::tools::toms748_solve(fn, tr.states[i].r, tr.states[i + 1].r, a, b,
                                                  boost::math::tools::eps_tolerance<double>(50), iters);
      res.events.crossings[q].push_back({0.5 * (br.first + br.second), b > 0 ? 1 : -1});
    }
  }
  return res;
}

PatternReport sign_pattern_check(const Trajectory& traj, const EventLog& ev) {
  PatternReport rep;
  auto dirs_ok = [&](Quantity q, std::vector<int> expect) {
    const auto& c = ev.of(q);
    if (c.size() != expect.size()) return false;
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c[i].direction != expect[i]) return false;
    return true;
  };
  if (!ev.theta4()) rep.missing.push_back("theta4");
  if (!ev.theta3()) rep.missing.push_back("theta3");
  if (!ev.theta2()) rep.missing.push_back("theta2");
  if (!ev.theta1()) rep.missing.push_back("theta1");
  if (!ev.theta1_tilde()) rep.missing.push_back("theta1_tilde");

  // initial signs from the first stored state past the origin
  const JetState* first = nullptr;
  for (const auto& s : traj.states)
    if (s.r > 0.0) {
      first = &s;
      break;
    }
  if (!first) {
    rep.missing.push_back("trajectory");
    return rep;
  }
  rep.d2uk = first->bilap() > 0.0 && dirs_ok(Quantity::bilap, {-1});
  rep.duk_prime = first->dlap() > 0.0 && dirs_ok(Quantity::dlap, {-1});
  rep.uk_prime = first->du() < 0.0 && dirs_ok(Quantity::du, {1, -1});
  bool order = ev.theta1() && ev.theta2() && ev.theta1_tilde() && ev.theta3() && ev.theta4() &&
               *ev.theta2() < *ev.theta1() && *ev.theta1() < *ev.theta1_tilde() && *ev.theta4() < *ev.theta3();
  rep.present = rep.d2uk && rep.duk_prime && rep.uk_prime && order;
  if (!order && rep.missing.empty()) rep.missing.push_back("ordering");
  if (!rep.d2uk && ev.theta4()) rep.missing.push_back("sign:bilap");
  if (!rep.duk_prime && ev.theta3()) rep.missing.push_back("sign:dlap");
  if (!rep.uk_prime && ev.theta1() && ev.theta1_tilde()) rep.missing.push_back("sign:du");
  return rep;
}

double constraint_value(const IvpResult& res, const Constraint& c) {
  const Trajectory& tr = res.trajectory;
  if (tr.blowup && c.radius > tr.blowup_radius) return std::numeric_limits<double>::infinity();
  JetState j = tr.at(c.radius);
  switch (c.kind) {
    case ConstraintKind::value: return j.u();
    case ConstraintKind::du: return j.du();
    case ConstraintKind::lap: return j.lap();
    case ConstraintKind::dlap: return j.dlap();
    case ConstraintKind::bilap: return j.bilap();
    case ConstraintKind::dbilap: return j.dbilap();
    case ConstraintKind::curvature: return -constants::omega5 * std::pow(c.radius, 5) * j.dbilap();
  }
  return 0.0;
}

namespace {

double& slot(IvpSpec& s, FreeVar v) {
  switch (v) {
    case FreeVar::u0: return s.u0;
    case FreeVar::lap_u0: return s.lap_u0;
    case FreeVar::bilap_u0: return s.bilap_u0;
  }
  return s.u0;
}

std::vector<double> residuals(const IvpSpec& s, const std::vector<Constraint>& targets) {
  IvpSpec run = s;
  run.track_events = false;
  double rmax = 0.0;
  for (const auto& c : targets) rmax = std::max(rmax, c.radius);
  run.r_max = rmax;
  IvpResult res = integrate_ivp(run);
  std::vector<double> out;
  for (const auto& c : targets) {
    double v = constraint_value(res, c);
    out.push_back(std::isfinite(v) ? v - c.target : 1e100);
  }
  return out;
}

}  // namespace

ShootResult shoot(const IvpSpec& base, const std::vector<Constraint>& targets,
                  const std::vector<FreeVar>& free, const ShootOptions& opt) {
  if (targets.size() != free.size())
    throw Error(Errc::invalid_argument, "constraint count must equal free variable count");
  ShootResult out;
  out.spec = base;
  if (free.empty()) return out;
  if (opt.brackets.size() != free.size()) throw Error(Errc::invalid_argument, "one bracket per free variable");

  if (free.size() == 1) {
    auto f = [&](double v) {
      IvpSpec s = base;
      slot(s, free[0]) = v;
      ++out.iterations;
      return residuals(s, targets)[0];
    };
    double lo = opt.brackets[0].first, hi = opt.brackets[0].second;
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0 || fhi == 0.0) {
      slot(out.spec, free[0]) = flo == 0.0 ? lo : hi;
    } else {
      if ((flo > 0) == (fhi > 0)) throw Error(Errc::bracket_failure);
      boost::uintmax_t iters = opt.max_iter;
      auto tol = [&](double a, double b) { return std::abs(a - b) <= opt.tol * std::max(1.0, std::abs(a)); };
      auto br = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
      if (iters >= static_cast<boost::uintmax_t>(opt.max_iter)) throw Error(Errc::no_convergence);
      slot(out.spec, free[0]) = 0.5 * (br.first + br.second);
    }
    out.residuals = residuals(out.spec, targets);
    return out;
  }

  // Newton with forward-difference Jacobian, iterates clamped to the brackets.
  const int n = static_cast<int>(free.size());
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = 0.5 * (opt.brackets[i].first + opt.brackets[i].second);
  auto eval = [&](const Eigen::VectorXd& v) {
    IvpSpec s = base;
    for (int i = 0; i < n; ++i) slot(s, free[i]) = v[i];
    auto r = residuals(s, targets);
    return Eigen::Map<Eigen::VectorXd>(r.data(), n).eval();
  };
  Eigen::VectorXd F = eval(x);
  for (int it = 0; it < opt.max_iter; ++it) {
    out.iterations = it + 1;
    double scale = 0.0;
    for (const auto& c : targets) scale = std::max(scale, std::abs(c.target));
    if (F.norm() <= opt.tol * std::max(1.0, scale)) break;
    Eigen::MatrixXd J(n, n);
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd xp = x;
      double dh = 1e-7 * std::max(1.0, std::abs(x[j]));
      xp[j] += dh;
      J.col(j) = (eval(xp) - F) / dh;
    }
    Eigen::VectorXd dx = J.fullPivLu().solve(-F);
    double t = 1.0;
    Eigen::VectorXd xn, Fn;
    for (int ls = 0; ls < 30; ++ls) {
      xn = x + t * dx;
      for (int i = 0; i < n; ++i) xn[i] = std::clamp(xn[i], opt.brackets[i].first, opt.brackets[i].second);
      Fn = eval(xn);
      if (Fn.norm() < F.norm()) break;
      t *= 0.5;
    }
    if (!(Fn.norm() < F.norm())) throw Error(Errc::no_convergence, "line search stalled");
    x = xn;
    F = Fn;
    if (it + 1 == opt.max_iter) throw Error(Errc::no_convergence);
  }
  for (int i = 0; i < n; ++i) slot(out.spec, free[i]) = x[i];
  out.residuals.assign(F.data(), F.data() + n);
  return out;
}

}  // namespace qcurv
