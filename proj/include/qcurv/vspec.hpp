#pragma once

#include <map>
#include <memory>
#include <string>

#include "qcurv/radial_field.hpp"

namespace qcurv {

enum class VKind { constant, quadratic, gaussian_weighted, tabulated };

std::string to_string(VKind k);

// V(r) = base(s r) * exp(e2 (s r)^2 + e4 (s r)^4), base = c0 + q r^2 or a table.
class VSpec {
 public:
  static VSpec constant(double c0);
  static VSpec quadratic(double q);
  static VSpec gaussian_weighted(double v_inf, double a, double b);
  static VSpec gaussian_weighted(const VSpec& v_inf, double a, double b);
  static VSpec tabulated(RadialField samples);

  VKind kind() const { return kind_; }
  double operator()(double r) const;
  bool differentiable() const { return !table_; }
  double derivative(double r) const;
  // r V'(r) / V(r)
  double radial_log_derivative(double r) const;

  VSpec times_exp_poly(double c2, double c4) const;
  VSpec with_argument_scale(double s) const;

  bool flag_assVk() const { return assVk_; }
  VSpec& set_flag_assVk(bool on = true);
  // Records (a, b) for which d/dr(V / e^{a r^2 + b r^4}) <= 0 is claimed.
  VSpec& set_flag_condVinfty(double a, double b);
  bool flag_condVinfty() const { return condVinfty_; }

  // Throws invalid_argument on the first failing sample.
  void validate_positive(double r_max, int samples = 2000) const;
  bool check_assVk(double tol = 1e-9) const;
  bool check_condVinfty(double a, double b, double r_max, int samples = 2000) const;
  void validate(double r_max) const;

  std::map<std::string, double> params() const;

 private:
  VKind kind_ = VKind::constant;
  double c0_ = 120.0;
  double q_ = 0.0;
  double e2_ = 0.0;
  double e4_ = 0.0;
  double scale_ = 1.0;
  std::shared_ptr<const RadialField> table_;
  bool assVk_ = false;
  bool condVinfty_ = false;
  double cond_a_ = 0.0;
  double cond_b_ = 0.0;
};

}  // namespace qcurv
