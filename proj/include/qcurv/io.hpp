#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qcurv/entire_solver.hpp"
#include "qcurv/kernel.hpp"
#include "qcurv/linear_lab.hpp"
#include "qcurv/ode_shooter.hpp"

namespace qcurv::io {

namespace fs = std::filesystem;

// Writes to a sibling temporary and renames over `path`.
void write_text_atomic(const fs::path& path, const std::string& content);
std::string read_text(const fs::path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // Index of a header column; throws io_failure naming the column when absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> numeric(const std::string& name) const;
};
std::string to_csv(const CsvTable& t);
CsvTable parse_csv(const std::string& text);
void write_csv(const fs::path& path, const CsvTable& t);
CsvTable read_csv(const fs::path& path);

std::string format_double(double v);

// r, u, du, lap, dlap, bilap, dbilap
CsvTable trajectory_table(const Trajectory& tr);
std::vector<JetState> jets_from_table(const CsvTable& t);
std::string events_json(const EventLog& ev);

// Trajectory CSV plus JSON metadata for an entire solution.
void write_solution(const fs::path& stem, const EntireSolution& sol, const VSpec& V);
std::string solution_metadata_json(const EntireSolution& sol);

void write_linearized(const fs::path& stem, const LinearizedSolution& sol);

// Binary layout: magic, rows, cols, order, r nodes, s nodes, s weights, values (little-endian doubles).
void save_kernel(const fs::path& path, const KernelTable& k);
KernelTable load_kernel(const fs::path& path);

std::string sha256_file(const fs::path& path);

struct Check {
  std::string id;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

struct Manifest {
  std::string command;
  std::string config_text;
  std::vector<std::string> artifacts;  // relative to the output directory
  std::vector<Check> checks;
  std::vector<std::string> failures;
  double tol_scale = 1.0;
  std::uint64_t seed = 0;
};
// manifest.json with sha256 and size per artifact.
void write_manifest(const fs::path& out_dir, const Manifest& m);
// Re-hashes every artifact listed in out_dir/manifest.json; returns mismatching paths.
std::vector<std::string> verify_manifest(const fs::path& out_dir);

}  // namespace qcurv::io
