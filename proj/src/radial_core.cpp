#include "qcurv/radial_core.hpp"

#include <cmath>

#include "qcurv/constants.hpp"
#include "qcurv/error.hpp"
#include "qcurv/quadrature.hpp"

namespace qcurv {

namespace {

// Integral of f over [a, b], one Gauss-Legendre panel per grid cell.
double cellwise(const RadialGrid& grid, const std::function<double(double)>& f, double a, double b,
                int order = 8) {
  const auto& x = grid.nodes();
  double total = 0.0;
  double lo = a;
  std::size_t i = grid.cell(a);
  while (lo < b) {
    double hi = (i + 1 < x.size()) ? std::min(b, x[i + 1]) : b;
    if (hi > lo) total += integrate_gl(f, lo, hi, order);
    lo = hi;
    ++i;
    if (i + 1 >= x.size() && lo < b) {
      total += integrate_gl(f, lo, b, order);
      break;
    }
  }
  return total;
}

double check_exp6(double u) {
  if (6.0 * u > 700.0) throw Error(Errc::rescale_first, "e^{6u} overflows at u = " + std::to_string(u));
  return std::exp(6.0 * u);
}

// Dyadic split of [r0, r1] before adaptive refinement.
double dyadic_adaptive(const std::function<double(double)>& g, double r0, double r1) {
  if (r1 <= r0) return 0.0;
  double total = 0.0;
  double lo = r0;
  if (lo < std::ldexp(1.0, -60)) {
    double hi = std::min(r1, std::ldexp(1.0, -60));
    total += integrate_adaptive(g, lo, hi, 1e-300, 1e-13).value;
    lo = hi;
  }
  while (lo < r1) {
    int e;
    std::frexp(lo, &e);  // lo in [2^(e-1), 2^e)
    double hi = std::ldexp(1.0, e);
    if (hi <= lo) hi = 2.0 * lo;
    if (std::isinf(r1) && hi > std::ldexp(1.0, 60)) {
      total += integrate_to_infinity(g, lo, 1e-300, 1e-13).value;
      break;
    }
    hi = std::min(hi, r1);
    total += integrate_adaptive(g, lo, hi, 1e-300, 1e-13).value;
    lo = hi;
  }
  return total;
}

}  // namespace

RadialField radial_laplacian(const RadialField& f) {
  const RadialGrid& g = f.grid();
  if (g.size() < 5) throw Error(Errc::insufficient_resolution, "laplacian needs at least 5 nodes");
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double r = g[i];
    double d1, d2;
    if (f.has_d2()) {
      d1 = f.d1()[i];
      d2 = f.d2()[i];
    } else {
      Stencil s1 = lagrange_stencil(g, r, f.parity(), 1);
      Stencil s2 = lagrange_stencil(g, r, f.parity(), 2);
      d1 = d2 = 0.0;
      for (int k = 0; k < Stencil::width; ++k) {
        d1 += s1.weight[k] * f[s1.index[k]];
        d2 += s2.weight[k] * f[s2.index[k]];
      }
    }
    out[i] = (r == 0.0) ? 6.0 * d2 : d2 + 5.0 * d1 / r;
  }
  return RadialField(f.grid_ptr(), std::move(out), f.parity());
}

double derivative_from_laplacian(const RadialField& g, double r) {
  if (!(r > 0.0) || !g.grid().contains(r)) throw Error(Errc::out_of_range, "r = " + std::to_string(r));
  double a = g.grid().front();
  double head = 0.0;
  if (a > 0.0) throw Error(Errc::out_of_range, "grid must start at 0");
  head = cellwise(g.grid(), [&](double s) { return g(s) * std::pow(s, 5); }, a, r);
  return head / std::pow(r, 5);
}

double outward_integrate(double f0, double f0prime, const RadialField& lap, double r0, double r1) {
  if (r0 == 0.0) throw Error(Errc::use_series_start);
  if (!(r0 > 0.0) || !(r1 > r0) || !lap.grid().contains(r0) || !lap.grid().contains(r1))
    throw Error(Errc::out_of_range, "need 0 < r0 < r1 inside the grid");
  double q1 = std::pow(r1, -4);
  double flux = std::pow(r0, 5) * f0prime * (std::pow(r0, -4) - q1) / 4.0;
  double body = cellwise(lap.grid(), [&](double s) { return lap(s) * (s - std::pow(s, 5) * q1) / 4.0; }, r0, r1);
  return f0 + flux + body;
}

double curvature_integral(const VSpec& V, const RadialField& u, double r) {
  const RadialGrid& g = u.grid();
  if (!(r >= 0.0)) throw Error(Errc::out_of_range, "negative radius");
  double top = std::min(r, g.back());
  if (top <= g.front()) return 0.0;
  auto f = [&](double s) { return V(s) * check_exp6(u(s)) * std::pow(s, 5); };
  const auto& x = g.nodes();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < x.size() && x[i] < top; ++i) {
    double hi = std::min(top, x[i + 1]);
    total += integrate_adaptive(f, x[i], hi, 1e-300, 1e-12, 20).value;
  }
  return constants::omega5 * total;
}

double curvature_integral(const VSpec& V, const std::function<double(double)>& u, double r) {
  return curvature_integral(V, u, 0.0, r);
}

double curvature_integral(const VSpec& V, const std::function<double(double)>& u, double r0, double r1) {
  if (!(r0 >= 0.0) || r1 < r0) throw Error(Errc::out_of_range, "need 0 <= r0 <= r1");
  auto f = [&](double s) {
    double e = check_exp6(u(s));
    return e == 0.0 ? 0.0 : V(s) * e * std::pow(s, 5);
  };
  return constants::omega5 * dyadic_adaptive(f, r0, r1);
}

double closed_form_defint(double r) {
  double q = 1.0 + r * r;
  double r2 = r * r;
  return (1.0 - (10.0 * r2 * r2 + 5.0 * r2 + 1.0) / std::pow(q, 5)) / 60.0;
}

double closed_form_defint_printed(double r) {
  double q = 1.0 + r * r;
  return (1.0 - (10.0 * std::pow(r, 4) + 5.0 * std::pow(r, 5) + 1.0) / std::pow(q, 5)) / 60.0;
}

JetState spherical_profile(double r) {
  double r2 = r * r;
  double q = 1.0 + r2;
  JetState j;
  j.r = r;
  j.w[0] = std::log(2.0 / q);
  j.w[1] = -2.0 * r / q;
  j.w[2] = -4.0 * (2.0 * r2 + 3.0) / (q * q);
  j.w[3] = 16.0 * r * (r2 + 2.0) / (q * q * q);
  j.w[4] = 32.0 * (r2 * r2 + 4.0 * r2 + 6.0) / std::pow(q, 4);
  j.w[5] = -128.0 * r * (r2 * r2 + 5.0 * r2 + 10.0) / std::pow(q, 5);
  return j;
}

JetState bubble_profile(double r, double rk) {
  JetState j = spherical_profile(r / rk);
  j.r = r;
  j.w[0] -= std::log(rk);
  double s = 1.0;
  for (int k = 1; k < 6; ++k) {
    s /= rk;
    j.w[k] *= s;
  }
  return j;
}

RadialField rescale(const RadialField& u, double lambda) {
  if (!(lambda > 0.0)) throw Error(Errc::invalid_argument, "lambda must be positive");
  const RadialGrid& g = u.grid();
  std::vector<double> x(g.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = g[i] / lambda;
  auto grid = make_grid(RadialGrid(std::move(x), g.grading()));
  std::vector<double> v(u.values());
  double shift = std::log(lambda);
  for (double& e : v) e += shift;
  if (!u.has_d1()) return RadialField(grid, std::move(v), u.parity());
  std::vector<double> d1(u.d1());
  for (double& e : d1) e *= lambda;
  if (!u.has_d2()) return RadialField(grid, std::move(v), std::move(d1), u.parity());
  std::vector<double> d2(u.d2());
  for (double& e : d2) e *= lambda * lambda;
  return RadialField(grid, std::move(v), std::move(d1), std::move(d2), u.parity());
}

RadialField rescale(const RadialField& u, double lambda, GridPtr target) {
  if (!(lambda > 0.0)) throw Error(Errc::invalid_argument, "lambda must be positive");
  double shift = std::log(lambda);
  std::vector<double> v(target->size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double x = lambda * (*target)[i];
    if (!u.grid().contains(x)) throw Error(Errc::extend_grid, "lambda r = " + std::to_string(x));
    v[i] = u(x) + shift;
  }
  return RadialField(std::move(target), std::move(v), u.parity());
}

namespace {

std::pair<RadialField, VSpec> gauge(const RadialField& u, const VSpec& V, double a, double b, double sign) {
  const RadialGrid& g = u.grid();
  // sign = +1: u - P/6 with P = -a r^2 - b r^4
  auto shift = [&](double r) { return sign * (a * r * r + b * r * r * r * r) / 6.0; };
  auto dshift = [&](double r) { return sign * (2.0 * a * r + 4.0 * b * r * r * r) / 6.0; };
  std::vector<double> v(u.values());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += shift(g[i]);
  VSpec W = V.times_exp_poly(-sign * a, -sign * b);
  if (!u.has_d1()) return {RadialField(u.grid_ptr(), std::move(v), u.parity()), W};
  std::vector<double> d1(u.d1());
  for (std::size_t i = 0; i < d1.size(); ++i) d1[i] += dshift(g[i]);
  if (!u.has_d2()) return {RadialField(u.grid_ptr(), std::move(v), std::move(d1), u.parity()), W};
  std::vector<double> d2(u.d2());
  for (std::size_t i = 0; i < d2.size(); ++i) d2[i] += sign * (2.0 * a + 12.0 * b * g[i] * g[i]) / 6.0;
  return {RadialField(u.grid_ptr(), std::move(v), std::move(d1), std::move(d2), u.parity()), W};
}

}  // namespace

std::pair<RadialField, VSpec> gauge_transform(const RadialField& u, const VSpec& V, double a, double b) {
  return gauge(u, V, a, b, 1.0);
}

std::pair<RadialField, VSpec> gauge_inverse(const RadialField& u, const VSpec& V, double a, double b) {
  return gauge(u, V, a, b, -1.0);
}

}  // namespace qcurv
