#pragma once

#include <boost/property_tree/ptree.hpp>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qcurv/radial_field.hpp"
#include "qcurv/vspec.hpp"

namespace qcurv {

// Accepts plain numbers, fractions "1/24", and products with the names pi, Lambda1, gamma6.
double parse_number(const std::string& text);
std::vector<double> parse_list(const std::string& text);

// INI-style text: [section] headers, key = value lines, ';' or '#' comments.
class RunConfig {
 public:
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);

  const std::string& text() const { return text_; }
  bool has(const std::string& key) const;  // "section.key"
  std::string str(const std::string& key, const std::string& fallback = {}) const;
  double number(const std::string& key, double fallback) const;
  std::optional<double> number(const std::string& key) const;
  std::vector<double> list(const std::string& key, const std::vector<double>& fallback = {}) const;
  bool flag(const std::string& key, bool fallback) const;
  std::uint64_t seed() const;

  // Overrides one key; text() is regenerated from the merged tree.
  void set(const std::string& key, const std::string& value);

  // [potential] kind = constant | quadratic | gaussian, with c0, q, a, b.
  VSpec potential() const;
  // [grid] r_max, ratio, h, r_min.
  RadialGrid grid(double default_r_max = 5.0) const;

  // Rejects keys outside the documented schema.
  void validate_keys() const;

 private:
  boost::property_tree::ptree tree_;
  std::string text_;
};

}  // namespace qcurv
