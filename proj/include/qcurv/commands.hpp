#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "qcurv/config.hpp"
#include "qcurv/io.hpp"

namespace qcurv {

struct CommandOptions {
  std::filesystem::path out = "out";
  double tol_scale = 1.0;
  int jobs = 1;
};

struct CommandResult {
  std::vector<io::Check> checks;
  std::vector<std::string> artifacts;
  std::vector<std::string> failures;
  bool all_pass() const;
};

// Exit codes: 0 all checks pass, 1 failed checks or run failure, 2 validation or usage error, 3 I/O failure.
int run_command(const std::string& name, const RunConfig& cfg, const CommandOptions& opt, std::ostream& log);

CommandResult cmd_spherical(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log);
CommandResult cmd_family(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log);
CommandResult cmd_hybrid(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log);
CommandResult cmd_linearize(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log);
CommandResult cmd_analyze(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log);
CommandResult cmd_report(const RunConfig& cfg, const CommandOptions& opt, std::ostream& log);

}  // namespace qcurv
