#include "qcurv/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "qcurv/error.hpp"
#include "qcurv/quadrature.hpp"

namespace qcurv {

namespace {

constexpr int kShapePanels = 16;
constexpr int kShapeOrder = 20;
constexpr int kShapeTable = 4096;

double shape_quadrature(double t) {
  const double pi = std::numbers::pi;
  const GaussRule& g = gauss_legendre(kShapeOrder);
  auto integrand = [t](double th) {
    double s = std::sin(th);
    double d = (1.0 - t) * (1.0 - t) + 4.0 * t * std::pow(std::sin(0.5 * th), 2);
    return -0.5 * std::log(d) * s * s * s * s;
  };
  double total = 0.0;
  double hi = pi;
  for (int k = 0; k <= kShapePanels; ++k) {
    double lo = k == kShapePanels ? 0.0 : 0.5 * hi;
    double m = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double s = 0.0;
    for (int i = 0; i < kShapeOrder; ++i) s += g.w[i] * integrand(m + h * g.x[i]);
    total += s * h;
    hi = lo;
  }
  double v = total / (3.0 * pi / 8.0);
  if (!std::isfinite(v)) throw Error(Errc::kernel_quadrature_failure, "t = " + std::to_string(t));
  return v;
}

const std::vector<double>& shape_table() {
  static std::vector<double> table;
  static std::once_flag once;
  std::call_once(once, [] {
    table.resize(kShapeTable + 1);
    for (int i = 0; i <= kShapeTable; ++i) table[i] = shape_quadrature(static_cast<double>(i) / kShapeTable);
  });
  return table;
}

}  // namespace

double kernel_shape(double t) {
  if (!(t >= 0.0) || t > 1.0 + 1e-15) throw Error(Errc::out_of_range, "kernel shape needs 0 <= t <= 1");
  t = std::min(t, 1.0);
  const auto& tab = shape_table();
  // six-point Lagrange on the uniform table
  double x = t * kShapeTable;
  int i0 = static_cast<int>(std::floor(x)) - 2;
  i0 = std::clamp(i0, 0, kShapeTable - 5);
  double s = 0.0;
  for (int j = 0; j < 6; ++j) {
    double w = 1.0;
    for (int k = 0; k < 6; ++k)
      if (k != j) w *= (x - (i0 + k)) / static_cast<double>(j - k);
    s += w * tab[i0 + j];
  }
  return s;
}

double spherical_log_kernel(double r, double s) {
  if (r < 0.0 || s < 0.0) throw Error(Errc::out_of_range, "negative radius");
  double R = std::max(r, s);
  if (R == 0.0) throw Error(Errc::out_of_range, "kernel undefined at r = s = 0");
  return -std::log(R) + kernel_shape(std::min(r, s) / R);
}

KernelTable build_log_kernel(const RadialGrid& grid, int order) {
  if (grid.size() < 2) throw Error(Errc::insufficient_resolution, "kernel needs a grid");
  if (order < 2) throw Error(Errc::invalid_argument, "kernel quadrature order must be >= 2");
  KernelTable K;
  K.order = order;
  K.r_nodes = grid.nodes();
  const GaussRule& g = gauss_legendre(order);
  for (std::size_t c = 0; c + 1 < grid.size(); ++c) {
    double a = grid[c], b = grid[c + 1];
    for (int i = 0; i < order; ++i) {
      K.s_nodes.push_back(0.5 * (a + b) + 0.5 * (b - a) * g.x[i]);
      K.s_weights.push_back(0.5 * (b - a) * g.w[i]);
    }
  }
  const std::size_t nr = K.r_nodes.size(), ns = K.s_nodes.size();
  K.values.resize(nr * ns);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < ns; ++j) K.values[i * ns + j] = spherical_log_kernel(K.r_nodes[i], K.s_nodes[j]);
  return K;
}

}  // namespace qcurv
