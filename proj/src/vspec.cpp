#include "qcurv/vspec.hpp"

#include <cmath>

#include "qcurv/error.hpp"

namespace qcurv {

std::string to_string(VKind k) {
  switch (k) {
    case VKind::constant: return "constant";
    case VKind::quadratic: return "quadratic";
    case VKind::gaussian_weighted: return "gaussian-weighted";
    case VKind::tabulated: return "tabulated";
  }
  return "constant";
}

VSpec VSpec::constant(double c0) {
  VSpec v;
  v.kind_ = VKind::constant;
  v.c0_ = c0;
  return v;
}

VSpec VSpec::quadratic(double q) {
  VSpec v;
  v.kind_ = VKind::quadratic;
  v.c0_ = 120.0;
  v.q_ = q;
  return v;
}

VSpec VSpec::gaussian_weighted(double v_inf, double a, double b) {
  return gaussian_weighted(constant(v_inf), a, b);
}

VSpec VSpec::gaussian_weighted(const VSpec& v_inf, double a, double b) {
  VSpec v = v_inf.times_exp_poly(-a, -b);
  if (v.kind_ != VKind::tabulated) v.kind_ = VKind::gaussian_weighted;
  return v;
}

VSpec VSpec::tabulated(RadialField samples) {
  VSpec v;
  v.kind_ = VKind::tabulated;
  v.c0_ = samples[0];
  v.table_ = std::make_shared<const RadialField>(std::move(samples));
  return v;
}

double VSpec::operator()(double r) const {
  double x = scale_ * r;
  double x2 = x * x;
  double base = table_ ? (*table_)(x) : c0_ + q_ * x2;
  if (e2_ == 0.0 && e4_ == 0.0) return base;
  return base * std::exp(e2_ * x2 + e4_ * x2 * x2);
}

double VSpec::derivative(double r) const {
  if (table_) throw Error(Errc::gradient_unavailable, "tabulated V");
  double x = scale_ * r;
  double x2 = x * x;
  double base = c0_ + q_ * x2;
  double dbase = 2.0 * q_ * x;
  double ex = std::exp(e2_ * x2 + e4_ * x2 * x2);
  return scale_ * ex * (dbase + base * (2.0 * e2_ * x + 4.0 * e4_ * x2 * x));
}

double VSpec::radial_log_derivative(double r) const {
  if (table_) throw Error(Errc::gradient_unavailable, "tabulated V");
  double x = scale_ * r;
  double x2 = x * x;
  double base = c0_ + q_ * x2;
  return 2.0 * q_ * x2 / base + 2.0 * e2_ * x2 + 4.0 * e4_ * x2 * x2;
}

VSpec VSpec::times_exp_poly(double c2, double c4) const {
  VSpec v = *this;
  double s2 = scale_ * scale_;
  v.e2_ += c2 / s2;
  v.e4_ += c4 / (s2 * s2);
  if (v.kind_ != VKind::tabulated) {
    if (v.e2_ != 0.0 || v.e4_ != 0.0) v.kind_ = VKind::gaussian_weighted;
    else v.kind_ = v.q_ != 0.0 ? VKind::quadratic : VKind::constant;
  }
  return v;
}

VSpec VSpec::with_argument_scale(double s) const {
  if (!(s > 0.0)) throw Error(Errc::invalid_argument, "argument scale must be positive");
  VSpec v = *this;
  v.scale_ *= s;
  return v;
}

VSpec& VSpec::set_flag_assVk(bool on) {
  assVk_ = on;
  return *this;
}

VSpec& VSpec::set_flag_condVinfty(double a, double b) {
  condVinfty_ = true;
  cond_a_ = a;
  cond_b_ = b;
  return *this;
}

void VSpec::validate_positive(double r_max, int samples) const {
  for (int i = 0; i <= samples; ++i) {
    double r = r_max * i / samples;
    double v = (*this)(r);
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(Errc::invalid_argument, "V must be positive; V(" + std::to_string(r) + ") = " + std::to_string(v));
  }
}

bool VSpec::check_assVk(double tol) const {
  double v0 = (*this)(0.0);
  if (std::abs(v0 - 120.0) > tol * 120.0) return false;
  if (table_) {
    // (V - 120)/r^2 must stay bounded on the first table cells
    const auto& g = table_->grid();
    double h = g.size() > 1 ? g[1] - g[0] : 1.0;
    double worst = 0.0;
    for (int i = 1; i <= 8; ++i) {
      double r = 0.25 * h * i / scale_;
      worst = std::max(worst, std::abs((*this)(r) - 120.0) / (r * r));
    }
    return std::isfinite(worst);
  }
  return true;  // parametric forms are even and smooth
}

bool VSpec::check_condVinfty(double a, double b, double r_max, int samples) const {
  auto g = [&](double r) { return (*this)(r) * std::exp(-a * r * r - b * r * r * r * r); };
  for (int i = 0; i < samples; ++i) {
    double r0 = r_max * i / samples, r1 = r_max * (i + 1) / samples;
    double g0 = g(r0), g1 = g(r1);
    if (g1 - g0 > 1e-12 * std::max(1.0, std::abs(g0))) return false;
  }
  return true;
}

void VSpec::validate(double r_max) const {
  validate_positive(r_max);
  if (assVk_ && !check_assVk()) throw Error(Errc::invalid_argument, "V fails assVk: V(0) must be 120");
  if (condVinfty_ && !check_condVinfty(cond_a_, cond_b_, r_max))
    throw Error(Errc::invalid_argument, "V fails condVinfty monotonicity");
}

std::map<std::string, double> VSpec::params() const {
  std::map<std::string, double> m{{"c0", c0_}, {"q", q_}, {"e2", e2_}, {"e4", e4_}, {"arg_scale", scale_}};
  if (condVinfty_) {
    m["cond_a"] = cond_a_;
    m["cond_b"] = cond_b_;
  }
  return m;
}

}  // namespace qcurv
