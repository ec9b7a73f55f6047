#include "qcurv/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <random>
#include <sstream>

#include "qcurv/error.hpp"

namespace qcurv::io {

using nlohmann::json;

void write_text_atomic(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::random_device rd;
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(Errc::io_failure, "cannot write " + tmp.string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw Error(Errc::io_failure, "short write " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::io_failure, "cannot rename onto " + path.string());
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::io_failure, "cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(Errc::io_failure, "missing column " + name);
}

std::vector<double> CsvTable::numeric(const std::string& name) const {
  std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (c >= row.size() || row[c].empty()) throw Error(Errc::io_failure, "empty cell in column " + name);
    try {
      out.push_back(std::stod(row[c]));
    } catch (const std::exception&) {
      throw Error(Errc::io_failure, "non-numeric cell '" + row[c] + "' in column " + name);
    }
  }
  return out;
}

std::string to_csv(const CsvTable& t) {
  std::ostringstream s;
  auto line = [&](const std::vector<std::string>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
    s << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return s.str();
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) {
      auto b = cell.find_first_not_of(" \t"), e = cell.find_last_not_of(" \t");
      cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (line.back() == ',') cells.emplace_back();
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw Error(Errc::io_failure, "empty CSV");
  return t;
}

void write_csv(const fs::path& path, const CsvTable& t) { write_text_atomic(path, to_csv(t)); }

CsvTable read_csv(const fs::path& path) { return parse_csv(read_text(path)); }

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

CsvTable trajectory_table(const Trajectory& tr) {
  CsvTable t;
  t.header = {"r", "u", "du", "lap", "dlap", "bilap", "dbilap"};
  for (const auto& s : tr.states) {
    std::vector<std::string> row{format_double(s.r)};
    for (double w : s.w) row.push_back(format_double(w));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<JetState> jets_from_table(const CsvTable& t) {
  static const char* names[7] = {"r", "u", "du", "lap", "dlap", "bilap", "dbilap"};
  std::array<std::vector<double>, 7> cols;
  for (int i = 0; i < 7; ++i) cols[i] = t.numeric(names[i]);
  std::vector<JetState> out(cols[0].size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k].r = cols[0][k];
    for (int q = 0; q < 6; ++q) out[k].w[q] = cols[q + 1][k];
  }
  return out;
}

std::string events_json(const EventLog& ev) {
  auto o = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j = {{"theta1", o(ev.theta1())}, {"theta1_tilde", o(ev.theta1_tilde())}, {"theta2", o(ev.theta2())},
            {"theta2_tilde", o(ev.theta2_tilde())}, {"theta3", o(ev.theta3())}, {"theta4", o(ev.theta4())}};
  static const char* names[4] = {"du", "lap", "dlap", "bilap"};
  for (int q = 0; q < 4; ++q) {
    json arr = json::array();
    for (const auto& c : ev.crossings[q]) arr.push_back({{"r", c.r}, {"direction", c.direction}});
    j["crossings"][names[q]] = arr;
  }
  return j.dump(2);
}

std::string solution_metadata_json(const EntireSolution& sol) {
  json j = {{"lambda", sol.lambda},
            {"c", sol.c},
            {"c_tilde", sol.c_tilde},
            {"lap_u0", sol.lap_u0},
            {"bilap_u0", sol.bilap_u0},
            {"u0", sol.u0()},
            {"poly_coeff", sol.poly_coeff},
            {"Lambda_target", sol.Lambda_target},
            {"Lambda_achieved", sol.Lambda_achieved},
            {"sweeps", sol.sweeps},
            {"newton_steps", sol.newton_steps},
            {"residual", sol.residual},
            {"damping_used", sol.damping_used},
            {"tail_bound", sol.tail_bound},
            {"converged", sol.converged},
            {"variant", sol.variant == FixedPointVariant::hybrid ? "hybrid" : "example3"},
            {"grid_nodes", sol.grid ? sol.grid->size() : 0}};
  return j.dump(2);
}

void write_solution(const fs::path& stem, const EntireSolution& sol, const VSpec& V) {
  IvpResult jets = solution_jets(sol, V);
  write_csv(fs::path(stem.string() + ".csv"), trajectory_table(jets.trajectory));
  json meta = json::parse(solution_metadata_json(sol));
  meta["events"] = json::parse(events_json(jets.events));
  write_text_atomic(fs::path(stem.string() + ".json"), meta.dump(2));
}

void write_linearized(const fs::path& stem, const LinearizedSolution& sol) {
  CsvTable t = trajectory_table(sol.ivp.trajectory);
  t.header = {"r", "psi", "dpsi", "lap_psi", "dlap_psi", "bilap_psi", "dbilap_psi"};
  write_csv(fs::path(stem.string() + ".csv"), t);
  AsymptoticCheck ac = asymptotic_table_check(sol, {sol.r_max / 8, sol.r_max / 4, sol.r_max / 2, sol.r_max});
  json j = {{"lap_psi0", sol.lap_psi0},
            {"bilap_psi0", sol.bilap_psi0},
            {"r_max", sol.r_max},
            {"a", sol.a},
            {"b", sol.b},
            {"d", sol.d},
            {"alpha", sol.alpha},
            {"alpha_integral", sol.alpha_integral},
            {"fit_residual", sol.fit_residual},
            {"condition", sol.condition},
            {"identity_residual", sol.identity_residual()},
            {"alpha_agreement", sol.alpha_agreement()},
            {"asymptotic_radii", ac.radii},
            {"asymptotic_residuals", ac.max_by_line()}};
  write_text_atomic(fs::path(stem.string() + ".json"), j.dump(2));
}

namespace {
constexpr char kMagic[8] = {'Q', 'C', 'K', 'E', 'R', 'N', '0', '1'};
}

void save_kernel(const fs::path& path, const KernelTable& k) {
  std::string buf(kMagic, 8);
  auto put_u64 = [&](std::uint64_t v) { buf.append(reinterpret_cast<const char*>(&v), 8); };
  auto put_vec = [&](const std::vector<double>& v) {
    buf.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  };
  put_u64(k.rows());
  put_u64(k.cols());
  put_u64(static_cast<std::uint64_t>(k.order));
  put_vec(k.r_nodes);
  put_vec(k.s_nodes);
  put_vec(k.s_weights);
  put_vec(k.values);
  write_text_atomic(path, buf);
}

KernelTable load_kernel(const fs::path& path) {
  std::string buf = read_text(path);
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (pos + n > buf.size()) throw Error(Errc::io_failure, "truncated kernel file " + path.string());
  };
  need(8);
  if (std::memcmp(buf.data(), kMagic, 8) != 0) throw Error(Errc::io_failure, "not a kernel file " + path.string());
  pos = 8;
  auto get_u64 = [&] {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, buf.data() + pos, 8);
    pos += 8;
    return v;
  };
  auto get_vec = [&](std::size_t n) {
    need(n * sizeof(double));
    std::vector<double> v(n);
    std::memcpy(v.data(), buf.data() + pos, n * sizeof(double));
    pos += n * sizeof(double);
    return v;
  };
  KernelTable k;
  std::size_t rows = get_u64(), cols = get_u64();
  k.order = static_cast<int>(get_u64());
  k.r_nodes = get_vec(rows);
  k.s_nodes = get_vec(cols);
  k.s_weights = get_vec(cols);
  k.values = get_vec(rows * cols);
  return k;
}

std::string sha256_file(const fs::path& path) {
  std::string data = read_text(path);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(Errc::io_failure, "sha256 failed for " + path.string());
  std::ostringstream s;
  for (unsigned int i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return s.str();
}

void write_manifest(const fs::path& out_dir, const Manifest& m) {
  json arts = json::array();
  for (const auto& a : m.artifacts) {
    fs::path p = out_dir / a;
    arts.push_back({{"path", a}, {"sha256", sha256_file(p)}, {"bytes", fs::file_size(p)}});
  }
  json checks = json::array();
  bool all = true;
  for (const auto& c : m.checks) {
    checks.push_back({{"id", c.id}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}, {"note", c.note}});
    all = all && c.pass;
  }
  json j = {{"command", m.command},   {"config", m.config_text}, {"tol_scale", m.tol_scale}, {"seed", m.seed},
            {"artifacts", arts},      {"checks", checks},        {"all_checks_pass", all && m.failures.empty()},
            {"failures", m.failures}};
  write_text_atomic(out_dir / "manifest.json", j.dump(2));
}

std::vector<std::string> verify_manifest(const fs::path& out_dir) {
  json j = json::parse(read_text(out_dir / "manifest.json"));
  std::vector<std::string> bad;
  for (const auto& a : j.at("artifacts")) {
    std::string p = a.at("path").get<std::string>();
    std::error_code ec;
    if (!fs::exists(out_dir / p, ec) || sha256_file(out_dir / p) != a.at("sha256").get<std::string>()) bad.push_back(p);
  }
  return bad;
}

}  // namespace qcurv::io
