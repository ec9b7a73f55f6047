#include <CLI11.hpp>
#include <iostream>

#include "qcurv/commands.hpp"
#include "qcurv/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qcurv: radial Q-curvature solver and blow-up analysis"};
  app.require_subcommand(1, 1);

  std::string config_path;
  qcurv::CommandOptions opt;
  std::string out = opt.out.string();
  std::vector<std::string> overrides;

  const char* names[][2] = {
      {"spherical", "integrate the spherical profile and check curvature quantization"},
      {"family", "build an example family and run the blow-up analysis"},
      {"hybrid", "continue entire solutions in lambda and analyze the family"},
      {"linearize", "solve the linearized problem and fit asymptotics"},
      {"analyze", "run the blow-up analysis on external jet tables"},
      {"report", "verify a run directory and print its checks"},
  };
  for (auto& n : names) {
    CLI::App* sub = app.add_subcommand(n[0], n[1]);
    sub->add_option("-c,--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", out, "output directory");
    sub->add_option("--tol-scale", opt.tol_scale, "multiplier on every check tolerance")->check(CLI::PositiveNumber);
    sub->add_option("-j,--jobs", opt.jobs, "worker threads")->check(CLI::Range(1, 256));
    sub->add_option("-s,--set", overrides, "override a config key, section.key=value");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::string cmd = sub->get_name();
  try {
    qcurv::RunConfig cfg = config_path.empty() ? qcurv::RunConfig::parse("") : qcurv::RunConfig::load(config_path);
    for (const auto& kv : overrides) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw qcurv::Error(qcurv::Errc::usage, "--set expects section.key=value");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    // [run] supplies defaults for flags not given on the command line
    opt.out = sub->count("--out") ? out : cfg.str("run.out", out);
    if (!sub->count("--tol-scale")) opt.tol_scale = cfg.number("run.tol_scale", opt.tol_scale);
    if (!sub->count("--jobs")) opt.jobs = static_cast<int>(cfg.number("run.jobs", opt.jobs));
    std::string want = cfg.str("run.command");
    if (!want.empty() && want != cmd)
      throw qcurv::Error(qcurv::Errc::usage, "config is for '" + want + "', not '" + cmd + "'");
    return qcurv::run_command(cmd, cfg, opt, std::cerr);
  } catch (const qcurv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == qcurv::Errc::io_failure ? 3 : 2;
  }
}
