#include "qcurv/commands.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <json.hpp>
#include <random>
#include <sstream>

#include "qcurv/blowup_lab.hpp"
#include "qcurv/constants.hpp"
#include "qcurv/entire_solver.hpp"
#include "qcurv/error.hpp"
#include "qcurv/linear_lab.hpp"
#include "qcurv/ode_shooter.hpp"
#include "qcurv/radial_core.hpp"

namespace qcurv {

namespace fs = std::filesystem;
using nlohmann::json;
using io::format_double;

bool CommandResult::all_pass() const {
  if (!failures.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const io::Check& c) { return c.pass; });
}

namespace {

void add_check(CommandResult& r, const CommandOptions& opt, std::string id, double value, double tol,
               std::string note = {}) {
  io::Check c;
  c.id = std::move(id);
  c.value = value;
  c.tolerance = tol * opt.tol_scale;
  c.pass = std::isfinite(value) && value <= c.tolerance;
  c.note = std::move(note);
  r.checks.push_back(std::move(c));
}

void add_flag(CommandResult& r, std::string id, bool ok, std::string note = {}) {
  io::Check c;
  c.id = std::move(id);
  c.value = ok ? 0.0 : 1.0;
  c.tolerance = 0.0;
  c.pass = ok;
  c.note = std::move(note);
  r.checks.push_back(std::move(c));
}

void emit(CommandResult& r, const CommandOptions& opt, const std::string& rel, const std::string& content) {
  io::write_text_atomic(opt.out / rel, content);
  r.artifacts.push_back(rel);
}

void emit_csv(CommandResult& r, const CommandOptions& opt, const std::string& rel, const io::CsvTable& t) {
  emit(r, opt, rel, io::to_csv(t));
}

// Runs f(i) for i in [0, n) on up to `jobs` threads.
template <class F>
void parallel_for(std::size_t n, int jobs, F f) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::future<void>> running;
  for (std::size_t i = 0; i < n; ++i) {
    if (running.size() >= static_cast<std::size_t>(jobs)) {
      running.front().get();
      running.erase(running.begin());
    }
    running.push_back(std::async(std::launch::async, f, i));
  }
  for (auto& r : running) r.get();
}

BlowupOptions blowup_options(const RunConfig& cfg) {
  BlowupOptions o;
  o.deltas = cfg.list("blowup.deltas", o.deltas);
  o.s1_radii = cfg.list("blowup.s1_radii", o.s1_radii);
  o.beta_tol = cfg.number("blowup.beta_tol", o.beta_tol);
  o.beta_min = cfg.number("blowup.beta_min", o.beta_min);
  o.neck_p = cfg.number("blowup.neck_p", o.neck_p);
  o.neck_C = cfg.number("blowup.neck_C", o.neck_C);
  o.annulus_rho = cfg.number("blowup.annulus_rho", o.annulus_rho);
  o.annulus_eps = cfg.number("blowup.annulus_eps", o.annulus_eps);
  o.expansion_delta = cfg.number("blowup.expansion_delta", o.expansion_delta);
  for (double d : o.deltas)
    if (!(d > 0.0 && d < 1.0)) throw Error(Errc::usage, "blowup.deltas must lie in (0, 1)");
  if (!(o.neck_p > 1.0 && o.neck_p < 2.0)) throw Error(Errc::usage, "blowup.neck_p must lie in (1, 2)");
  if (!(o.annulus_eps > 0.0 && o.annulus_eps < o.annulus_rho)) throw Error(Errc::usage, "need 0 < annulus_eps < annulus_rho");
  return o;
}

void write_family_outputs(CommandResult& r, const CommandOptions& opt, const BlowupFamily& fam, const BlowupOptions& bo,
                          std::ostream& log) {
  BlowupReport rep = analyze_family(fam, bo);
  emit(r, opt, "report.json", report_json(rep));
  io::CsvTable t;
  t.header = family_csv_header(bo);
  t.rows = family_csv_rows(rep);
  emit_csv(r, opt, "family.csv", t);
  std::vector<std::string> rels(fam.size());
  std::vector<std::string> bodies(fam.size());
  parallel_for(fam.size(), opt.jobs, [&](std::size_t i) {
    rels[i] = "member_" + std::to_string(i) + ".csv";
    bodies[i] = io::to_csv(io::trajectory_table(fam[i].jets.trajectory));
  });
  for (std::size_t i = 0; i < fam.size(); ++i) {
    emit(r, opt, rels[i], bodies[i]);
    emit(r, opt, "member_" + std::to_string(i) + "_events.json", io::events_json(fam[i].jets.events));
  }
  log << "family case: " << to_string(rep.family_label) << "\n";
  for (const auto& m : rep.members)
    log << "  " << m.name << " u0=" << m.u0 << " case=" << to_string(m.cls.label) << "\n";
}

std::vector<double> validated_lambdas(const RunConfig& cfg, const std::string& key) {
  std::vector<double> ls = cfg.list(key, {1.0 / 24, 1.0 / 48, 1.0 / 96, 1.0 / 192});
  if (ls.empty()) throw Error(Errc::usage, key + " is empty");
  for (std::size_t i = 0; i < ls.size(); ++i) {
    if (!(ls[i] > 0.0 && ls[i] <= 1.0 / 24.0 + 1e-15)) throw Error(Errc::usage, key + " must lie in (0, 1/24]");
    if (i > 0 && !(ls[i] < ls[i - 1])) throw Error(Errc::usage, key + " must decrease");
  }
  return ls;
}

}  // namespace

CommandResult cmd_spherical(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  double r_max = cfg.number("spherical.r_max", 50.0);
  if (!(r_max > 0.0)) throw Error(Errc::usage, "spherical.r_max must be positive");
  std::vector<double> radii = cfg.list("spherical.curvature_radii", {0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0});
  for (double r : radii)
    if (!(r > 0.0 && r <= r_max)) throw Error(Errc::usage, "curvature radii must lie in (0, r_max]");
  CommandResult res;
  IvpSpec spec;
  spec.r_max = r_max;
  spec.rtol = cfg.number("spherical.rtol", spec.rtol);
  spec.atol = cfg.number("spherical.atol", spec.atol);
  IvpResult ivp = integrate_ivp(spec);
  const Trajectory& tr = ivp.trajectory;

  io::CsvTable t = io::trajectory_table(tr);
  t.header.insert(t.header.end(), {"eta", "residual"});
  double sup10 = 0.0;
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const JetState& s = tr.states[i];
    JetState e = spherical_profile(s.r);
    double worst = 0.0;
    for (int q = 0; q < 6; ++q) worst = std::max(worst, std::abs(s.w[q] - e.w[q]) / (1.0 + std::abs(e.w[q])));
    if (s.r <= 10.0) sup10 = std::max(sup10, std::abs(s.u() - e.u()));
    t.rows[i].push_back(format_double(e.u()));
    t.rows[i].push_back(format_double(worst));
  }
  double max_resid = 0.0;
  for (const auto& row : t.rows) max_resid = std::max(max_resid, std::stod(row.back()));
  emit_csv(res, opt, "trajectory.csv", t);

  io::CsvTable c;
  c.header = {"r", "quadrature", "flux", "closed_form", "rel_err"};
  const VSpec V = VSpec::constant(120.0);
  auto u = [&](double r) { return tr.at(r).u(); };
  double worst_curv = 0.0, flux_gap = 0.0, curv_rmax = 0.0;
  for (double r : radii) {
    double q = curvature_integral(V, u, r);
    double flux = -constants::omega5 * std::pow(r, 5) * tr.at(r).dbilap();
    double exact = constants::omega5 * 7680.0 * closed_form_defint(r);
    double rel = std::abs(q - exact) / exact;
    worst_curv = std::max(worst_curv, rel);
    flux_gap = std::max(flux_gap, std::abs(q - flux) / constants::Lambda1);
    if (r == radii.back()) curv_rmax = std::abs(q - constants::Lambda1) / constants::Lambda1;
    c.rows.push_back({format_double(r), format_double(q), format_double(flux), format_double(exact), format_double(rel)});
  }
  double q_inf = curvature_integral(V, [](double r) { return spherical_profile(r).u(); }, infinity);
  c.rows.push_back({"inf", format_double(q_inf), "", format_double(constants::Lambda1),
                    format_double(std::abs(q_inf - constants::Lambda1) / constants::Lambda1)});
  emit_csv(res, opt, "curvature.csv", c);

  json j = {{"sup_error_u_0_10", sup10},         {"max_jet_residual", max_resid},
            {"curvature_rel_err_max", worst_curv}, {"curvature_rel_err_rmax", curv_rmax},
            {"operator_residual", flux_gap},       {"steps", tr.steps},
            {"events", json::parse(io::events_json(ivp.events))}};
  emit(res, opt, "residuals.json", j.dump(2));
  add_check(res, opt, "spherical.sup_error", sup10, cfg.number("spherical.tol_residual", 1e-6), "|u - eta| on [0, 10]");
  add_check(res, opt, "spherical.jet_residual", max_resid, cfg.number("spherical.tol_residual", 1e-6));
  add_check(res, opt, "spherical.curvature", worst_curv, cfg.number("spherical.tol_curvature", 1e-6));
  add_check(res, opt, "spherical.operator_residual", flux_gap, cfg.number("spherical.tol_curvature", 1e-6));
  log << "spherical: sup error " << sup10 << ", curvature rel err " << worst_curv << "\n";
  return res;
}

CommandResult cmd_family(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  std::string ex = cfg.str("family.example");
  if (ex.empty()) throw Error(Errc::usage, "family.example is required (1a, 1b, 2 or 3)");
  std::vector<double> params = cfg.list("family.params");
  if (params.empty()) throw Error(Errc::usage, "family.params is empty");
  BlowupOptions bo = blowup_options(cfg);
  CommandResult res;
  BlowupFamily fam;
  if (ex == "1a" || ex == "1b") {
    fam = example1_family(ex[1], params, cfg.number("grid.r_max", 5.0));
  } else if (ex == "2") {
    double Lambda = cfg.number("family.Lambda", 1.5 * constants::Lambda1);
    std::vector<double> lambdas = validated_lambdas(cfg, "family.lambdas");
    if (lambdas.size() != params.size()) throw Error(Errc::usage, "family.params (rho) needs one entry per lambda");
    VSpec V = cfg.potential();
    FixedPointSolver solver(make_grid(cfg.grid()));
    ContinuationResult cr = lambda_continuation(V, Lambda, lambdas, FixedPointConfig{}, solver);
    if (cr.failure_index) res.failures.push_back("continuation failed at index " + std::to_string(*cr.failure_index) + ": " + cr.failure);
    std::vector<double> rhos(params.begin(), params.begin() + static_cast<long>(cr.solutions.size()));
    if (!cr.solutions.empty()) fam = example2_family(cr.solutions, V, rhos);
  } else if (ex == "3") {
    double Lambda = cfg.number("family.Lambda", constants::Lambda1);
    if (!(Lambda > 0.0)) throw Error(Errc::usage, "family.Lambda must be positive");
    FixedPointSolver solver(make_grid(cfg.grid()));
    std::vector<std::string> failures;
    fam = example3_family(params, Lambda, solver, &failures);
    for (auto& f : failures) res.failures.push_back(f);
  } else {
    throw Error(Errc::usage, "unknown example id '" + ex + "'");
  }
  if (fam.empty()) {
    res.failures.push_back("no family members produced");
    return res;
  }
  write_family_outputs(res, opt, fam, bo, log);
  return res;
}

CommandResult cmd_hybrid(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  double Lambda = cfg.number("hybrid.Lambda", 1.5 * constants::Lambda1);
  if (!(Lambda >= constants::Lambda1 * (1.0 - 1e-12))) throw Error(Errc::usage, "hybrid.Lambda must be >= Lambda1");
  std::vector<double> lambdas = validated_lambdas(cfg, "hybrid.lambdas");
  BlowupOptions bo = blowup_options(cfg);
  FixedPointConfig base;
  base.damping = cfg.number("hybrid.damping", base.damping);
  base.damping_floor = cfg.number("hybrid.damping_floor", base.damping_floor);
  base.max_sweeps = static_cast<int>(cfg.number("hybrid.max_sweeps", base.max_sweeps));
  base.tol = cfg.number("hybrid.tol", base.tol);
  base.newton_fallback = cfg.flag("hybrid.newton_fallback", base.newton_fallback);
  VSpec V = cfg.potential();
  CommandResult res;
  FixedPointSolver solver(make_grid(cfg.grid()));
  log << "kernel table " << solver.kernel().rows() << " x " << solver.kernel().cols() << "\n";
  ContinuationResult cr = lambda_continuation(V, Lambda, lambdas, base, solver);
  if (cr.failure_index)
    res.failures.push_back("continuation failed at index " + std::to_string(*cr.failure_index) + ": " + cr.failure);

  io::CsvTable t;
  t.header = {"lambda", "u0", "lambda_lap_u0", "lap_u0", "c", "c_tilde", "sweeps", "newton_steps", "residual",
              "Lambda_achieved", "pohozaev_residual", "curv_delta_0.5", "annulus_mass"};
  const double tol_poh = cfg.number("hybrid.tol_pohozaev", 2e-2);
  const double tol_L = cfg.number("hybrid.tol_Lambda", 1e-6);
  for (std::size_t i = 0; i < cr.solutions.size(); ++i) {
    const EntireSolution& s = cr.solutions[i];
    double poh = pohozaev_residual(s, V) / constants::Lambda1;
    double ann = s.curvature(1.5) - s.curvature(0.5);
    t.rows.push_back({format_double(s.lambda), format_double(s.u0()), format_double(s.lambda * s.lap_u0),
                      format_double(s.lap_u0), format_double(s.c), format_double(s.c_tilde), std::to_string(s.sweeps),
                      std::to_string(s.newton_steps), format_double(s.residual), format_double(s.Lambda_achieved),
                      format_double(poh), format_double(s.curvature(0.5)), format_double(ann)});
    std::string tag = "lambda[" + std::to_string(i) + "]";
    add_check(res, opt, "hybrid.pohozaev." + tag, std::abs(poh), tol_poh);
    add_check(res, opt, "hybrid.Lambda." + tag, std::abs(s.Lambda_achieved - Lambda) / Lambda, tol_L);
    add_flag(res, "hybrid.lap_u0_negative." + tag, s.lap_u0 < 0.0);
    add_flag(res, "hybrid.tilde_monotone." + tag, tilde_monotone(s));
    io::write_solution(opt.out / ("solution_" + std::to_string(i)), s, V);
    res.artifacts.push_back("solution_" + std::to_string(i) + ".csv");
    res.artifacts.push_back("solution_" + std::to_string(i) + ".json");
    log << "lambda " << s.lambda << " u0 " << s.u0() << " lambda*lap_u0 " << s.lambda * s.lap_u0 << " sweeps "
        << s.sweeps << " newton " << s.newton_steps << " pohozaev " << poh << "\n";
  }
  emit_csv(res, opt, "continuation.csv", t);
  if (cr.solutions.size() >= 2) {
    bool up = true, down = true;
    for (std::size_t i = 1; i < cr.steps.size(); ++i) {
      up = up && cr.steps[i].u0 > cr.steps[i - 1].u0;
      down = down && cr.steps[i].lambda_lap_u0 < cr.steps[i - 1].lambda_lap_u0;
    }
    add_flag(res, "hybrid.u0_increasing", up);
    add_flag(res, "hybrid.lambda_lap_u0_decreasing", down);
  }
  if (!cr.solutions.empty()) {
    BlowupFamily fam;
    for (std::size_t i = 0; i < cr.solutions.size(); ++i)
      fam.push_back(member_from_solution("lambda=" + format_double(cr.solutions[i].lambda), cr.solutions[i], V));
    BlowupReport rep = analyze_family(fam, bo);
    emit(res, opt, "report.json", report_json(rep));
    io::CsvTable f;
    f.header = family_csv_header(bo);
    f.rows = family_csv_rows(rep);
    emit_csv(res, opt, "family.csv", f);
    log << "case at smallest lambda: " << to_string(rep.family_label) << "\n";
    if (cfg.flag("hybrid.require_case_iv", false))
      add_flag(res, "hybrid.case_iv", rep.family_label == CaseLabel::iv, rep.members.back().cls.evidence);
  }
  return res;
}

CommandResult cmd_linearize(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  double r_max = cfg.number("linearize.r_max", 200.0);
  if (!(r_max >= 100.0)) throw Error(Errc::usage, "linearize.r_max must be >= 100");
  double draws_d = cfg.number("linearize.draws", 5.0);
  if (!(draws_d >= 0.0)) throw Error(Errc::usage, "linearize.draws must be non-negative");
  const std::size_t draws = static_cast<std::size_t>(draws_d);
  const double tol_id = cfg.number("linearize.tol_identity", 1e-2);
  const double tol_k = cfg.number("linearize.tol_kernel", 1e-6);
  CommandResult res;

  std::mt19937_64 rng(cfg.seed());
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<std::pair<double, double>> inits{{1.0, 0.0}, {0.0, 1.0}};
  for (std::size_t i = 0; i < draws; ++i) inits.emplace_back(nd(rng), nd(rng));
  std::vector<LinearizedSolution> sols(inits.size());
  parallel_for(inits.size(), opt.jobs,
               [&](std::size_t i) { sols[i] = solve_linearized(inits[i].first, inits[i].second, r_max); });
  for (std::size_t i = 0; i < sols.size(); ++i) {
    std::string stem = i < 2 ? "basis_" + std::to_string(i + 1) : "draw_" + std::to_string(i - 2);
    io::write_linearized(opt.out / stem, sols[i]);
    res.artifacts.push_back(stem + ".csv");
    res.artifacts.push_back(stem + ".json");
    add_check(res, opt, "linearize.identity." + stem, sols[i].identity_residual(), tol_id, "|alpha - (6a + 48b)| / (|alpha| + 1)");
    add_check(res, opt, "linearize.alpha_integral." + stem, sols[i].alpha_agreement(), tol_id);
  }
  json summary;
  try {
    LinearizedSolution p0 = psi0_profile(r_max);
    io::write_linearized(opt.out / "psi0", p0);
    res.artifacts.push_back("psi0.csv");
    res.artifacts.push_back("psi0.json");
    double mass = weighted_mass(p0);
    double rel = std::abs(mass - 24.0 * constants::Lambda1) / (24.0 * constants::Lambda1);
    summary["psi0"] = {{"a", p0.a}, {"b", p0.b}, {"alpha", p0.alpha}, {"weighted_mass", mass},
                       {"target", 24.0 * constants::Lambda1}, {"rel_err", rel}};
    add_check(res, opt, "linearize.psi0_slope", rel, 5e-2, "720 int psi0 e^{6 eta} vs 24 Lambda1");
    add_check(res, opt, "linearize.psi0_identity", p0.identity_residual(), tol_id);
    log << "psi0: a " << p0.a << " b " << p0.b << " alpha " << p0.alpha << " mass/24L1 "
        << mass / (24.0 * constants::Lambda1) << "\n";
  } catch (const Error& e) {
    res.failures.push_back(e.what());
    summary["psi0"] = {{"error", e.what()}};
  }
  std::vector<double> probes{0.25, 0.5, 1.0, 2.0, 5.0, 20.0};
  double kres = kernel_operator_residual(probes);
  double kint = kernel_weighted_integral();
  summary["kernel_operator_residual"] = kres;
  summary["kernel_weighted_integral"] = kint;
  summary["r_max"] = r_max;
  summary["seed"] = cfg.seed();
  add_check(res, opt, "linearize.kernel_residual", kres, tol_k);
  add_check(res, opt, "linearize.kernel_integral", std::abs(kint), tol_k);
  emit(res, opt, "linearize.json", summary.dump(2));
  return res;
}

CommandResult cmd_analyze(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  std::string inputs = cfg.str("analyze.input");
  if (inputs.empty()) throw Error(Errc::usage, "analyze.input is required");
  BlowupOptions bo = blowup_options(cfg);
  VSpec V = cfg.potential();
  BlowupFamily fam;
  std::istringstream ss(inputs);
  std::string path;
  while (std::getline(ss, path, ',')) {
    auto b = path.find_first_not_of(" \t"), e = path.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    path = path.substr(b, e - b + 1);
    io::CsvTable t = io::read_csv(path);
    fam.push_back(member_from_table(fs::path(path).filename().string(), io::jets_from_table(t), V));
  }
  if (fam.empty()) throw Error(Errc::usage, "analyze.input lists no files");
  CommandResult res;
  write_family_outputs(res, opt, fam, bo, log);
  return res;
}

CommandResult cmd_report(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  fs::path dir = cfg.str("report.dir", opt.out.string());
  if (!fs::exists(dir / "manifest.json")) throw Error(Errc::io_failure, "no manifest in " + dir.string());
  CommandResult res;
  std::vector<std::string> bad = io::verify_manifest(dir);
  json m = json::parse(io::read_text(dir / "manifest.json"));
  std::ostringstream s;
  s << "command: " << m.value("command", "") << "\n";
  for (const auto& c : m.at("checks"))
    s << (c.at("pass").get<bool>() ? "PASS " : "FAIL ") << c.at("id").get<std::string>() << " value "
      << c.at("value").get<double>() << " tol " << c.at("tolerance").get<double>() << "\n";
  for (const auto& f : m.at("failures")) s << "FAILURE " << f.get<std::string>() << "\n";
  for (const auto& b : bad) s << "CHECKSUM MISMATCH " << b << "\n";
  log << s.str();
  add_flag(res, "report.checksums", bad.empty());
  add_flag(res, "report.source_checks", m.value("all_checks_pass", false));
  if (fs::equivalent(dir, opt.out) == false || !fs::exists(opt.out)) fs::create_directories(opt.out);
  emit(res, opt, "report.txt", s.str());
  return res;
}

int run_command(const std::string& name, const RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  try {
    if (!(opt.tol_scale > 0.0)) throw Error(Errc::usage, "--tol-scale must be positive");
    if (opt.jobs < 1) throw Error(Errc::usage, "--jobs must be >= 1");
    CommandResult res;
    if (name == "spherical") res = cmd_spherical(cfg, opt, log);
    else if (name == "family") res = cmd_family(cfg, opt, log);
    else if (name == "hybrid") res = cmd_hybrid(cfg, opt, log);
    else if (name == "linearize") res = cmd_linearize(cfg, opt, log);
    else if (name == "analyze") res = cmd_analyze(cfg, opt, log);
    else if (name == "report") res = cmd_report(cfg, opt, log);
    else throw Error(Errc::usage, "unknown command '" + name + "'");

    io::Manifest man;
    man.command = name;
    man.config_text = cfg.text();
    man.artifacts = res.artifacts;
    man.checks = res.checks;
    man.failures = res.failures;
    man.tol_scale = opt.tol_scale;
    man.seed = cfg.seed();
    if (name != "report") io::write_manifest(opt.out, man);
    std::vector<std::string> failing;
    for (const auto& c : res.checks)
      if (!c.pass) failing.push_back(c.id);
    for (const auto& f : res.failures) log << "failure: " << f << "\n";
    if (!failing.empty()) {
      log << "failing checks:";
      for (const auto& f : failing) log << ' ' << f;
      log << "\n";
    }
    return res.all_pass() ? 0 : 1;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    if (e.code() == Errc::usage || e.code() == Errc::invalid_argument) return 2;
    if (e.code() == Errc::io_failure) return 3;
    return 1;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace qcurv
