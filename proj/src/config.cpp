#include "qcurv/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <map>
#include <set>
#include <sstream>

#include "qcurv/constants.hpp"
#include "qcurv/error.hpp"
#include "qcurv/io.hpp"

namespace qcurv {

namespace {

double parse_factor(std::string t) {
  boost::algorithm::trim(t);
  if (t == "pi") return constants::pi;
  if (t == "Lambda1") return constants::Lambda1;
  if (t == "gamma6") return constants::gamma6;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw Error(Errc::usage, "not a number: '" + t + "'");
  }
  if (used != t.size()) throw Error(Errc::usage, "not a number: '" + t + "'");
  return v;
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"run", {"command", "out", "seed", "tol_scale", "jobs"}},
      {"potential", {"kind", "c0", "q", "a", "b"}},
      {"grid", {"r_max", "ratio", "h", "r_min"}},
      {"spherical", {"r_max", "curvature_radii", "rtol", "atol", "tol_residual", "tol_curvature"}},
      {"hybrid",
       {"Lambda", "lambdas", "damping", "damping_floor", "max_sweeps", "tol", "newton_fallback", "require_case_iv",
        "tol_pohozaev", "tol_Lambda"}},
      {"family", {"example", "params", "Lambda", "lambdas", "rhos"}},
      {"blowup",
       {"deltas", "s1_radii", "beta_tol", "beta_min", "neck_p", "neck_C", "annulus_rho", "annulus_eps",
        "expansion_delta"}},
      {"linearize", {"r_max", "draws", "tol_identity", "tol_kernel"}},
      {"analyze", {"input", "name"}},
      {"report", {"dir"}},
  };
  return s;
}

}  // namespace

double parse_number(const std::string& text) {
  std::string t = boost::algorithm::trim_copy(text);
  if (t.empty()) throw Error(Errc::usage, "empty number");
  double v = 1.0;
  std::vector<std::string> prod;
  boost::algorithm::split(prod, t, boost::is_any_of("*"));
  for (const auto& p : prod) {
    std::vector<std::string> q;
    boost::algorithm::split(q, p, boost::is_any_of("/"));
    double f = parse_factor(q[0]);
    for (std::size_t i = 1; i < q.size(); ++i) {
      double d = parse_factor(q[i]);
      if (d == 0.0) throw Error(Errc::usage, "division by zero in '" + t + "'");
      f /= d;
    }
    v *= f;
  }
  return v;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::vector<std::string> parts;
  boost::algorithm::split(parts, text, boost::is_any_of(","));
  for (const auto& p : parts)
    if (!boost::algorithm::trim_copy(p).empty()) out.push_back(parse_number(p));
  return out;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  c.text_ = text;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, c.tree_);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(Errc::usage, std::string("config: ") + e.what());
  }
  c.validate_keys();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) { return parse(io::read_text(path)); }

bool RunConfig::has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

std::string RunConfig::str(const std::string& key, const std::string& fallback) const {
  auto v = tree_.get_optional<std::string>(key);
  return v ? boost::algorithm::trim_copy(*v) : fallback;
}

std::optional<double> RunConfig::number(const std::string& key) const {
  auto v = tree_.get_optional<std::string>(key);
  if (!v) return std::nullopt;
  try {
    return parse_number(*v);
  } catch (const Error& e) {
    throw Error(Errc::usage, key + ": " + e.what());
  }
}

double RunConfig::number(const std::string& key, double fallback) const { return number(key).value_or(fallback); }

std::vector<double> RunConfig::list(const std::string& key, const std::vector<double>& fallback) const {
  auto v = tree_.get_optional<std::string>(key);
  if (!v) return fallback;
  try {
    return parse_list(*v);
  } catch (const Error& e) {
    throw Error(Errc::usage, key + ": " + e.what());
  }
}

bool RunConfig::flag(const std::string& key, bool fallback) const {
  auto v = tree_.get_optional<std::string>(key);
  if (!v) return fallback;
  std::string s = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(*v));
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw Error(Errc::usage, key + ": expected a boolean, got '" + *v + "'");
}

std::uint64_t RunConfig::seed() const {
  double s = number("run.seed", 20240601.0);
  if (!(s >= 0.0)) throw Error(Errc::usage, "run.seed must be non-negative");
  return static_cast<std::uint64_t>(s);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key.find('.') == std::string::npos) throw Error(Errc::usage, "override key must be section.key: " + key);
  tree_.put(key, value);
  validate_keys();
  std::ostringstream out;
  boost::property_tree::ini_parser::write_ini(out, tree_);
  text_ = out.str();
}

VSpec RunConfig::potential() const {
  std::string kind = str("potential.kind", "constant");
  double c0 = number("potential.c0", 120.0);
  VSpec base = VSpec::constant(c0);
  if (kind == "constant") {
  } else if (kind == "quadratic") {
    if (has("potential.c0") && c0 != 120.0) throw Error(Errc::usage, "quadratic potential fixes c0 = 120");
    base = VSpec::quadratic(number("potential.q", 0.0));
  } else if (kind == "gaussian") {
    base = VSpec::gaussian_weighted(c0, number("potential.a", 0.0), number("potential.b", 0.0));
  } else {
    throw Error(Errc::usage, "potential.kind must be constant, quadratic or gaussian");
  }
  if (!(c0 > 0.0)) throw Error(Errc::usage, "potential.c0 must be positive");
  return base;
}

RadialGrid RunConfig::grid(double default_r_max) const {
  double r_max = number("grid.r_max", default_r_max);
  double ratio = number("grid.ratio", 1.05);
  double h = number("grid.h", 0.004);
  double r_min = number("grid.r_min", 1e-7);
  if (!(r_max > 0.0) || !(ratio > 1.0) || !(h > 0.0) || !(r_min > 0.0) || r_min >= r_max)
    throw Error(Errc::usage, "grid: need r_max > r_min > 0, ratio > 1, h > 0");
  return RadialGrid::geometric(r_max, ratio, h, r_min);
}

void RunConfig::validate_keys() const {
  const auto& s = schema();
  for (const auto& [section, body] : tree_) {
    auto it = s.find(section);
    if (it == s.end()) throw Error(Errc::usage, "unknown config section [" + section + "]");
    if (body.empty() && !body.data().empty()) throw Error(Errc::usage, "key outside a section: " + section);
    for (const auto& [key, value] : body)
      if (!it->second.count(key)) throw Error(Errc::usage, "unknown key " + section + "." + key);
  }
}

}  // namespace qcurv
