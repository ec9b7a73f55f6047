#include "qcurv/blowup_lab.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <memory>
#include <numeric>
#include <sstream>

#include "qcurv/constants.hpp"
#include "qcurv/error.hpp"
#include "qcurv/radial_core.hpp"

namespace qcurv {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::analytic_example: return "analytic-example";
    case Provenance::entire_solver: return "entire-solver";
    case Provenance::external: return "external";
  }
  return "external";
}

std::string to_string(CaseLabel c) {
  switch (c) {
    case CaseLabel::i: return "i";
    case CaseLabel::ii: return "ii";
    case CaseLabel::iii: return "iii";
    case CaseLabel::iv: return "iv";
    case CaseLabel::unclassified: return "unclassified";
  }
  return "unclassified";
}

RadialField FamilyMember::u_field() const {
  const auto& st = jets.trajectory.states;
  std::vector<double> r, v, d1, d2;
  for (const auto& s : st) {
    r.push_back(s.r);
    v.push_back(s.u());
    d1.push_back(s.du());
    d2.push_back(s.r > 0.0 ? s.lap() - 5.0 * s.du() / s.r : s.lap() / 6.0);
  }
  return RadialField(make_grid(RadialGrid(std::move(r))), std::move(v), std::move(d1), std::move(d2));
}

std::vector<double> sample_radii(double r_lo, double r_hi, double ratio, double h) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo)) throw Error(Errc::invalid_argument, "sample range");
  std::vector<double> out;
  double r = r_lo;
  while (r < r_hi * (1.0 - 1e-12)) {
    out.push_back(r);
    r = std::min(r * ratio, r + h);
  }
  out.push_back(r_hi);
  return out;
}

FamilyMember member_from_jets(std::string name, std::function<JetState(double)> jet, const VSpec& V,
                              const std::vector<double>& radii, Provenance prov) {
  FamilyMember m;
  m.name = std::move(name);
  m.provenance = prov;
  m.V = V;
  m.jets = sampled_trajectory(jet, radii);
  m.curvature = [V, jet](double r) { return curvature_integral(V, [&](double s) { return jet(s).u(); }, r); };
  return m;
}

FamilyMember member_from_solution(std::string name, const EntireSolution& sol, const VSpec& V) {
  auto keep = std::make_shared<EntireSolution>(sol);
  FamilyMember m;
  m.name = std::move(name);
  m.provenance = Provenance::entire_solver;
  m.V = V;
  m.jets = solution_jets(sol, V);
  m.curvature = [keep](double r) { return keep->curvature(r); };
  m.beta_construction = -sol.poly_coeff;
  return m;
}

FamilyMember member_from_table(std::string name, const std::vector<JetState>& rows, const VSpec& V) {
  if (rows.size() < 4 || rows.front().r != 0.0)
    throw Error(Errc::invalid_argument, "jet table needs at least 4 rows starting at r = 0");
  auto tab = std::make_shared<std::vector<JetState>>(rows);
  // derivative of every component from the jet relations
  auto deriv = [V](const JetState& s) {
    std::array<double, 6> d{};
    double src = V(s.r) * std::exp(6.0 * s.u());
    d[0] = s.du();
    d[2] = s.dlap();
    d[4] = s.dbilap();
    if (s.r > 0.0) {
      d[1] = s.lap() - 5.0 * s.du() / s.r;
      d[3] = s.bilap() - 5.0 * s.dlap() / s.r;
      d[5] = -src - 5.0 * s.dbilap() / s.r;
    } else {
      d[1] = s.lap() / 6.0;
      d[3] = s.bilap() / 6.0;
      d[5] = -src / 6.0;
    }
    return d;
  };
  auto jet = [tab, deriv](double r) {
    const auto& t = *tab;
    auto it = std::upper_bound(t.begin(), t.end(), r, [](double x, const JetState& s) { return x < s.r; });
    std::size_t i = static_cast<std::size_t>(it - t.begin());
    i = std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, t.size() - 2);
    const JetState &a = t[i], &b = t[i + 1];
    double h = b.r - a.r, s = (r - a.r) / h;
    auto da = deriv(a), db = deriv(b);
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s), h01 = s * s * (3 - 2 * s),
           h11 = s * s * (s - 1);
    JetState j;
    j.r = r;
    for (int q = 0; q < 6; ++q) j.w[q] = h00 * a.w[q] + h10 * h * da[q] + h01 * b.w[q] + h11 * h * db[q];
    return j;
  };
  std::vector<double> radii;
  for (std::size_t i = 1; i < rows.size(); ++i) radii.push_back(rows[i].r);
  FamilyMember m = member_from_jets(std::move(name), jet, V, radii, Provenance::external);
  return m;
}

JetState phi_jet(double r) {
  double r2 = r * r;
  JetState j;
  j.r = r;
  j.w = {-(1.0 - r2) * (1.0 - r2), 4.0 * r * (1.0 - r2), 24.0 - 32.0 * r2, -64.0 * r, -384.0, 0.0};
  return j;
}

JetState synthetic_jet(double r, double u0) {
  double rk = 2.0 * std::exp(-u0);
  JetState b = bubble_profile(r, rk), p = phi_jet(r);
  for (int q = 0; q < 6; ++q) b.w[q] += u0 * p.w[q];
  b.w[0] += u0;
  b.r = r;
  return b;
}

FamilyMember synthetic_member(double u0, double r_max) {
  double rk = 2.0 * std::exp(-u0);
  FamilyMember m = member_from_jets("u0=" + std::to_string(u0), [u0](double r) { return synthetic_jet(r, u0); },
                                    VSpec::constant(120.0), sample_radii(1e-3 * rk, r_max), Provenance::analytic_example);
  m.parameter = u0;
  m.beta_construction = u0;
  return m;
}

BlowupFamily example1_family(char kind, const std::vector<double>& ks, double r_max) {
  if (kind != 'a' && kind != 'b') throw Error(Errc::usage, std::string("unknown example 1 kind ") + kind);
  if (ks.empty()) throw Error(Errc::usage, "empty parameter list");
  BlowupFamily fam;
  for (double k : ks) {
    if (!(k > 0.0)) throw Error(Errc::invalid_argument, "k must be positive");
    double rk = kind == 'a' ? k : 1.0 / k;
    auto jet = [rk](double r) { return bubble_profile(r, rk); };
    FamilyMember m = member_from_jets("k=" + std::to_string(k), jet, VSpec::constant(120.0),
                                      sample_radii(1e-3 * std::min(1.0, rk), r_max), Provenance::analytic_example);
    m.parameter = k;
    m.curvature = [rk](double r) { return constants::omega5 * 120.0 * 64.0 * closed_form_defint(r / rk); };
    fam.push_back(std::move(m));
  }
  return fam;
}

FamilyMember rescale_member(const FamilyMember& m, double rho) {
  if (!(rho > 0.0)) throw Error(Errc::invalid_argument, "rho must be positive");
  auto src = std::make_shared<FamilyMember>(m);
  auto jet = [src, rho](double x) {
    JetState j = src->at(rho * x);
    double f = 1.0;
    for (int q = 1; q < 6; ++q) {
      f *= rho;
      j.w[q] *= f;
    }
    j.w[0] += std::log(rho);
    j.r = x;
    return j;
  };
  std::vector<double> radii;
  for (const auto& s : m.jets.trajectory.states)
    if (s.r > 0.0) radii.push_back(s.r / rho);
  FamilyMember out = member_from_jets(m.name, jet, m.V.with_argument_scale(rho), radii, m.provenance);
  out.parameter = m.parameter;
  out.curvature = [src, rho](double x) { return src->curvature(rho * x); };
  out.beta_construction = m.beta_construction;
  return out;
}

BlowupFamily example2_family(const std::vector<EntireSolution>& sols, const VSpec& V, const std::vector<double>& rhos) {
  if (sols.empty() || rhos.size() != sols.size()) throw Error(Errc::usage, "need one rho per solution");
  BlowupFamily fam;
  for (std::size_t i = 0; i < sols.size(); ++i) {
    FamilyMember m = rescale_member(member_from_solution("lambda=" + std::to_string(sols[i].lambda), sols[i], V), rhos[i]);
    m.parameter = rhos[i];
    fam.push_back(std::move(m));
  }
  return fam;
}

BlowupFamily example3_family(const std::vector<double>& ks, double Lambda, const FixedPointSolver& solver,
                             std::vector<std::string>* failures) {
  if (ks.empty()) throw Error(Errc::usage, "empty parameter list");
  BlowupFamily fam;
  VSpec V = VSpec::constant(120.0);
  std::optional<EntireSolution> prev;
  for (double k : ks) {
    FixedPointConfig cfg;
    cfg.Lambda = Lambda;
    cfg.variant = FixedPointVariant::example3;
    cfg.example3_k = k;
    try {
      EntireSolution s = solver.solve(V, cfg, prev ? &*prev : nullptr);
      prev = s;
      double beta = -s.poly_coeff;
      FamilyMember m = rescale_member(member_from_solution("k=" + std::to_string(k), s, V), beta);
      m.parameter = k;
      fam.push_back(std::move(m));
    } catch (const Error& e) {
      if (!failures) throw;
      failures->push_back("k=" + std::to_string(k) + ": " + e.what());
    }
  }
  return fam;
}

RadialField rescaled_profile(const RadialField& u, double x_max) {
  if (!(x_max > 0.0)) throw Error(Errc::invalid_argument, "x_max must be positive");
  double u0 = u[0];
  if (!std::isfinite(u0)) throw Error(Errc::invalid_argument, "u(0) not finite");
  double rk = 2.0 * std::exp(-u0);
  const RadialGrid& g = u.grid();
  if (rk * x_max > g.back() * (1.0 + 1e-12)) throw Error(Errc::out_of_range, "r_k x_max beyond the grid");
  std::size_t inside = 0;
  for (std::size_t i = 1; i < g.size() && g[i] <= rk; ++i) ++inside;
  if (inside < 4) throw Error(Errc::refine_grid, std::to_string(inside) + " nodes inside r_k");
  RadialField s = rescale(u, rk);
  const RadialGrid& sg = s.grid();
  std::size_t n = 0;
  while (n < sg.size() && sg[n] < x_max) ++n;
  n = std::min(std::max<std::size_t>(n + 1, 6), sg.size());
  auto cut = [n](const std::vector<double>& v) { return std::vector<double>(v.begin(), v.begin() + n); };
  GridPtr ng = make_grid(RadialGrid(cut(sg.nodes())));
  if (s.has_d2()) return RadialField(ng, cut(s.values()), cut(s.d1()), cut(s.d2()), s.parity());
  if (s.has_d1()) return RadialField(ng, cut(s.values()), cut(s.d1()), s.parity());
  return RadialField(ng, cut(s.values()), s.parity());
}

double rescaled_profile_error(const RadialField& u, double x_max, int samples) {
  RadialField e = rescaled_profile(u, x_max);
  double top = std::min(x_max, e.grid().back());
  double worst = 0.0;
  for (int i = 0; i <= samples; ++i) {
    double x = top * i / samples;
    worst = std::max(worst, std::abs(e(x) - spherical_profile(x).u()));
  }
  return worst;
}

Window default_beta_window() { return {{0.3, 0.7}, {1.3, 1.7}}; }

BetaFit estimate_beta(const std::function<double(double)>& u, const Window& window, double tol, int samples) {
  if (window.empty() || samples < 2) throw Error(Errc::invalid_argument, "empty fit window");
  std::vector<double> rs;
  for (auto [a, b] : window) {
    if (!(a > 0.0) || !(b > a)) throw Error(Errc::invalid_argument, "fit window must lie in r > 0");
    for (int i = 0; i < samples; ++i) rs.push_back(a + (b - a) * i / (samples - 1));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(rs.size());
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double r = rs[static_cast<std::size_t>(i)];
    A(i, 0) = phi_jet(r).u();
    A(i, 1) = 1.0;
    A(i, 2) = std::log(r);
    y(i) = u(r);
  }
  Eigen::Vector3d c = A.colPivHouseholderQr().solve(y);
  double misfit = (A * c - y).norm() / std::sqrt(static_cast<double>(n));
  double scale = y.norm() / std::sqrt(static_cast<double>(n));
  BetaFit f;
  f.beta = c(0);
  f.gamma0 = c(1);
  f.gamma1 = c(2);
  f.residual = scale > 0.0 ? misfit / scale : misfit;
  if (!(f.residual <= tol))
    throw Error(Errc::not_polyharmonic, "fit residual " + std::to_string(f.residual));
  return f;
}

ThetaRatios theta_ratios(const EventLog& ev, double beta) {
  ThetaRatios t;
  auto t1 = ev.theta1(), t2 = ev.theta2(), t3 = ev.theta3(), t4 = ev.theta4();
  if (t4) t.values["beta_theta4_4"] = beta * std::pow(*t4, 4);
  else t.missing.push_back("theta4");
  if (t2) t.values["beta_theta2_2"] = beta * (*t2) * (*t2);
  else t.missing.push_back("theta2");
  if (t3 && t4) t.values["theta3_over_theta4"] = *t3 / *t4;
  else if (!t3) t.missing.push_back("theta3");
  if (t1 && t2) t.values["theta1_over_theta2"] = *t1 / *t2;
  else if (!t1) t.missing.push_back("theta1");
  return t;
}

std::vector<QuantRow> quantization_check(const FamilyMember& m, const std::vector<double>& deltas) {
  std::vector<QuantRow> out;
  for (double d : deltas) {
    if (!(d > 0.0 && d < 1.0)) throw Error(Errc::invalid_argument, "delta must lie in (0, 1)");
    if (d > m.r_end()) throw Error(Errc::out_of_range, "delta beyond profile");
    double c = m.curvature(d);
    out.push_back({d, c, c - constants::Lambda1});
  }
  return out;
}

ExcessFit curvature_excess_slope(const std::vector<double>& u0s, const std::vector<double>& curvatures, double delta) {
  if (!(delta > 0.0 && delta < constants::delta_star()))
    throw Error(Errc::invalid_argument, "delta must lie in (0, delta*)");
  if (u0s.size() != curvatures.size()) throw Error(Errc::invalid_argument, "size mismatch");
  if (u0s.size() < 3) throw Error(Errc::insufficient_family, std::to_string(u0s.size()) + " members");
  const std::size_t n = u0s.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = u0s[i] * std::exp(-2.0 * u0s[i]);
    y[i] = curvatures[i] - constants::Lambda1;
  }
  ExcessFit f;
  f.members = n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  f.slope = sxy / sxx;
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n, my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double cxx = 0.0, cxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cxx += (x[i] - mx) * (x[i] - mx);
    cxy += (x[i] - mx) * (y[i] - my);
  }
  f.affine_slope = cxx > 0.0 ? cxy / cxx : 0.0;
  f.intercept = my - f.affine_slope * mx;
  return f;
}

ExcessFit curvature_excess_slope(const BlowupFamily& family, double delta) {
  std::vector<double> u0s, cs;
  for (const auto& m : family) {
    u0s.push_back(m.u0());
    cs.push_back(m.curvature(delta));
  }
  return curvature_excess_slope(u0s, cs, delta);
}

double neck_constant(double p) {
  if (!(p > 1.0 && p < 2.0)) throw Error(Errc::invalid_argument, "p must lie in (1, 2)");
  return std::sqrt(1.0 + p / (2.0 - p));
}

NeckResult neck_analysis(const FamilyMember& m, double p, double C) {
  NeckResult res;
  res.p = p;
  res.c_p = neck_constant(p);
  double rk = 2.0 * std::exp(-m.u0());
  double lo = res.c_p * rk;
  auto th1 = m.jets.events.theta1();
  double hi = th1 ? *th1 : m.r_end();
  if (th1) res.u_theta1 = m.at(*th1).u();
  if (!(lo < hi)) return res;
  // r^p e^u decreasing iff p + r u' < 0
  auto g = [&](double r) { return p + r * m.at(r).du(); };
  std::vector<double> rs = sample_radii(lo, hi, 1.01, 0.002);
  res.monotone = true;
  double prev_r = rs.front(), prev_g = g(prev_r);
  if (prev_g >= 0.0) res.monotone = false;
  for (std::size_t i = 1; i < rs.size(); ++i) {
    double r = rs[i], gr = g(r);
    if (gr >= 0.0) {
      if (prev_g < 0.0) {
        boost::uintmax_t iters = 200;
        auto br = boost::math::tools::toms748_solve(g, prev_r, r, prev_g, gr,
                                                    boost::math::tools::eps_tolerance<double>(50), iters);
        res.t_k = 0.5 * (br.first + br.second);
      } else {
        res.t_k = prev_r;
      }
      break;
    }
    prev_r = r;
    prev_g = gr;
  }
  if (!res.t_k && th1) {
    res.t_k = *th1;
    res.at_theta1 = true;
  }
  if (res.t_k) {
    res.u_tk = m.at(*res.t_k).u();
    if (res.u_theta1) res.bound_ok = res.u_tk <= *res.u_theta1 + C;
  }
  return res;
}

std::map<std::string, double> expansion_checks(const FamilyMember& m, double beta, double delta) {
  std::map<std::string, double> out;
  const double u0 = m.u0();
  double top = std::min(delta, m.r_end());
  double worst = 0.0;
  for (int i = 1; i <= 400; ++i) {
    double r = top * i / 400.0;
    worst = std::max(worst, std::abs(m.at(r).u() - synthetic_jet(r, u0).u()));
  }
  out["ukglobal_residual"] = worst / std::abs(u0);
  out["beta_over_e2u0"] = beta * std::exp(-2.0 * u0);
  double sup = 0.0;
  for (const auto& s : m.jets.trajectory.states) sup = std::max(sup, s.r * std::exp(s.u()));
  out["sup_r_eu"] = sup;
  if (auto t3 = m.jets.events.theta3()) out["lap_theta3_over_beta"] = m.at(*t3).lap() / beta;
  out["lap_phi0"] = phi_jet(0.0).lap();
  out["bilap_phi"] = phi_jet(0.5).bilap();
  return out;
}

Classification classify_case(const FamilyMember& m, const BlowupOptions& opt) {
  Classification c;
  std::ostringstream ev;
  c.concentration = !opt.s1_radii.empty();
  ev << "S1 radii";
  for (double r : opt.s1_radii) {
    double mass = r <= m.r_end() ? m.curvature(r) : 0.0;
    ev << ' ' << r << ":" << mass / constants::Lambda1;
    if (!(mass >= 0.5 * constants::Lambda1)) c.concentration = false;
  }
  std::optional<double> beta = m.beta_construction;
  if (!beta) {
    try {
      beta = estimate_beta([&](double r) { return m.at(r).u(); }, opt.beta_window, opt.beta_tol).beta;
    } catch (const Error&) {
    }
  }
  bool interior_max = false;
  for (const auto& x : m.jets.events.of(Quantity::du))
    if (x.direction < 0) interior_max = true;
  c.ring = beta && *beta >= opt.beta_min && interior_max;
  c.pattern = sign_pattern_check(m.jets.trajectory, m.jets.events).present;
  ev << "; beta " << (beta ? std::to_string(*beta) : std::string("none")) << "; interior max " << interior_max
     << "; pattern " << c.pattern;
  if (c.concentration && c.ring && c.pattern) c.label = CaseLabel::iv;
  else if (c.concentration && !c.ring) c.label = CaseLabel::ii;
  else if (!c.concentration && c.ring) c.label = CaseLabel::iii;
  else if (!c.concentration && !c.ring && !(beta && *beta >= opt.beta_min)) c.label = CaseLabel::i;
  else c.label = CaseLabel::unclassified;
  c.evidence = ev.str();
  return c;
}

double annulus_mass(const FamilyMember& m, double rho, double eps) {
  if (!(eps > 0.0 && eps < rho)) throw Error(Errc::invalid_argument, "need 0 < eps < rho");
  if (rho + eps > m.r_end()) throw Error(Errc::out_of_range, "annulus beyond profile");
  return m.curvature(rho + eps) - m.curvature(rho - eps);
}

MemberReport analyze_member(const FamilyMember& m, const BlowupOptions& opt) {
  MemberReport r;
  r.name = m.name;
  r.parameter = m.parameter;
  r.provenance = m.provenance;
  r.u0 = m.u0();
  r.r_k = 2.0 * std::exp(-r.u0);
  r.eps_k = r.u0 * std::exp(-2.0 * r.u0);
  r.events = m.jets.events;
  r.pattern = sign_pattern_check(m.jets.trajectory, m.jets.events);
  if (m.beta_construction) {
    r.beta = m.beta_construction;
    r.beta_source = "construction";
  } else {
    try {
      BetaFit f = estimate_beta([&](double x) { return m.at(x).u(); }, opt.beta_window, opt.beta_tol);
      r.beta = f.beta;
      r.beta_residual = f.residual;
      r.beta_source = "fit";
    } catch (const Error& e) {
      r.beta_source = e.what();
    }
  }
  if (r.beta) {
    r.ratios = theta_ratios(r.events, *r.beta);
    r.expansion = expansion_checks(m, *r.beta, opt.expansion_delta);
  }
  r.neck = neck_analysis(m, opt.neck_p, opt.neck_C);
  for (double d : opt.deltas)
    if (d <= m.r_end()) r.curvature.push_back(quantization_check(m, {d}).front());
  if (opt.annulus_rho + opt.annulus_eps <= m.r_end()) r.annulus = annulus_mass(m, opt.annulus_rho, opt.annulus_eps);
  r.cls = classify_case(m, opt);
  return r;
}

BlowupReport analyze_family(const BlowupFamily& family, const BlowupOptions& opt) {
  if (family.empty()) throw Error(Errc::insufficient_family, "empty family");
  BlowupReport rep;
  rep.options = opt;
  std::vector<std::size_t> order(family.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return family[a].u0() < family[b].u0(); });
  for (std::size_t i : order) rep.members.push_back(analyze_member(family[i], opt));
  rep.family_label = rep.members.back().cls.label;
  double delta = 0.0;
  for (double d : opt.deltas)
    if (d < constants::delta_star()) delta = std::max(delta, d);
  if (delta > 0.0) {
    try {
      std::vector<double> u0s, cs;
      for (const auto& m : rep.members)
        for (const auto& q : m.curvature)
          if (q.delta == delta) {
            u0s.push_back(m.u0);
            cs.push_back(q.curvature);
          }
      rep.excess = curvature_excess_slope(u0s, cs, delta);
      rep.excess_note = "delta=" + std::to_string(delta);
    } catch (const Error& e) {
      rep.excess_note = e.what();
    }
  }
  return rep;
}

namespace {

using nlohmann::json;

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json events_json(const EventLog& ev) {
  json j;
  j["theta1"] = opt_json(ev.theta1());
  j["theta1_tilde"] = opt_json(ev.theta1_tilde());
  j["theta2"] = opt_json(ev.theta2());
  j["theta2_tilde"] = opt_json(ev.theta2_tilde());
  j["theta3"] = opt_json(ev.theta3());
  j["theta4"] = opt_json(ev.theta4());
  static const char* names[4] = {"du", "lap", "dlap", "bilap"};
  for (int q = 0; q < 4; ++q) {
    json arr = json::array();
    for (const auto& c : ev.crossings[q]) arr.push_back({{"r", c.r}, {"direction", c.direction}});
    j["crossings"][names[q]] = arr;
  }
  return j;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

}  // namespace

std::string report_json(const BlowupReport& rep) {
  json j;
  const auto& o = rep.options;
  j["options"] = {{"deltas", o.deltas},       {"s1_radii", o.s1_radii},   {"beta_tol", o.beta_tol},
                  {"beta_min", o.beta_min},   {"neck_p", o.neck_p},       {"neck_C", o.neck_C},
                  {"annulus_rho", o.annulus_rho}, {"annulus_eps", o.annulus_eps},
                  {"expansion_delta", o.expansion_delta}};
  json win = json::array();
  for (auto [a, b] : o.beta_window) win.push_back({a, b});
  j["options"]["beta_window"] = win;
  j["family_case"] = to_string(rep.family_label);
  if (rep.excess)
    j["excess"] = {{"slope", rep.excess->slope},
                   {"affine_slope", rep.excess->affine_slope},
                   {"intercept", rep.excess->intercept},
                   {"members", rep.excess->members},
                   {"reference_slope", 24.0 * constants::Lambda1}};
  else
    j["excess"] = nullptr;
  j["excess_note"] = rep.excess_note;
  json ms = json::array();
  for (const auto& m : rep.members) {
    json x;
    x["name"] = m.name;
    x["parameter"] = m.parameter;
    x["provenance"] = to_string(m.provenance);
    x["u0"] = m.u0;
    x["r_k"] = m.r_k;
    x["eps_k"] = m.eps_k;
    x["beta"] = opt_json(m.beta);
    x["beta_source"] = m.beta_source;
    x["beta_residual"] = m.beta_residual;
    x["events"] = events_json(m.events);
    x["pattern"] = {{"present", m.pattern.present},
                    {"d2uk", m.pattern.d2uk},
                    {"duk_prime", m.pattern.duk_prime},
                    {"uk_prime", m.pattern.uk_prime},
                    {"missing", m.pattern.missing}};
    x["theta_ratios"] = m.ratios.values;
    x["theta_missing"] = m.ratios.missing;
    x["neck"] = {{"p", m.neck.p},           {"c_p", m.neck.c_p},           {"t_k", opt_json(m.neck.t_k)},
                 {"at_theta1", m.neck.at_theta1}, {"monotone", m.neck.monotone}, {"u_tk", m.neck.u_tk},
                 {"u_theta1", opt_json(m.neck.u_theta1)}, {"bound_ok", m.neck.bound_ok}};
    json q = json::array();
    for (const auto& c : m.curvature) q.push_back({{"delta", c.delta}, {"curvature", c.curvature}, {"deviation", c.deviation}});
    x["curvature"] = q;
    x["annulus_mass"] = m.annulus;
    x["expansion"] = m.expansion;
    x["case"] = to_string(rep.family_label);
    x["member_case"] = to_string(m.cls.label);
    x["evidence"] = m.cls.evidence;
    ms.push_back(x);
  }
  j["members"] = ms;
  return j.dump(2);
}

std::vector<std::string> family_csv_header(const BlowupOptions& opt) {
  std::vector<std::string> h{"u0", "beta", "theta1", "theta1_tilde", "theta2", "theta3", "theta4", "t_k"};
  for (double d : opt.deltas) h.push_back("curv_delta_" + fmt(d));
  h.push_back("annulus_mass");
  h.push_back("case");
  h.push_back("member_case");
  return h;
}

std::vector<std::vector<std::string>> family_csv_rows(const BlowupReport& rep) {
  std::vector<std::vector<std::string>> rows;
  auto o = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  for (const auto& m : rep.members) {
    std::vector<std::string> row{fmt(m.u0),
                                 o(m.beta),
                                 o(m.events.theta1()),
                                 o(m.events.theta1_tilde()),
                                 o(m.events.theta2()),
                                 o(m.events.theta3()),
                                 o(m.events.theta4()),
                                 o(m.neck.t_k)};
    for (double d : rep.options.deltas) {
      std::string cell;
      for (const auto& q : m.curvature)
        if (q.delta == d) cell = fmt(q.curvature);
      row.push_back(cell);
    }
    row.push_back(fmt(m.annulus));
    row.push_back(to_string(rep.family_label));
    row.push_back(to_string(m.cls.label));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace qcurv
