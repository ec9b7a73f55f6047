#include "qcurv/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "qcurv/error.hpp"

namespace qcurv {

namespace {

GaussRule build_rule(int n) {
  GaussRule g;
  g.x.resize(n);
  g.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // final derivative at converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    g.x[i] = -x;
    g.x[n - 1 - i] = x;
    g.w[i] = w;
    g.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) g.x[n / 2] = 0.0;
  return g;
}

struct Seg {
  double value;
  double error;
};

Seg panel(const Integrand& f, double a, double b, int& evals) {
  const GaussRule& g = gauss_legendre(10);
  double m = 0.5 * (a + b), h = 0.5 * (b - a);
  double whole = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i) whole += g.w[i] * f(m + h * g.x[i]);
  whole *= h;
  double halves = 0.0;
  double h2 = 0.5 * h;
  for (double c : {m - h2, m + h2}) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(c + h2 * g.x[i]);
    halves += s * h2;
  }
  evals += 30;
  return {halves, std::abs(halves - whole)};
}

void recurse(const Integrand& f, double a, double b, Seg s, double abs_tol, double rel_tol,
             int depth, AdaptiveResult& out) {
  double tol = std::max(abs_tol, rel_tol * std::abs(s.value));
  if (s.error <= tol || depth <= 0 || b - a < 1e-15 * (1.0 + std::abs(a))) {
    if (s.error > tol) out.converged = false;
    out.value += s.value;
    out.error += s.error;
    return;
  }
  double m = 0.5 * (a + b);
  Seg l = panel(f, a, m, out.evaluations);
  Seg r = panel(f, m, b, out.evaluations);
  recurse(f, a, m, l, 0.5 * abs_tol, rel_tol, depth - 1, out);
  recurse(f, m, b, r, 0.5 * abs_tol, rel_tol, depth - 1, out);
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw Error(Errc::invalid_argument, "gauss rule order must be positive");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule>(build_rule(n));
  return *slot;
}

double integrate_gl(const Integrand& f, double a, double b, int n) {
  const GaussRule& g = gauss_legendre(n);
  double m = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += g.w[i] * f(m + h * g.x[i]);
  return s * h;
}

AdaptiveResult integrate_adaptive(const Integrand& f, double a, double b, double abs_tol,
                                  double rel_tol, int max_depth) {
  AdaptiveResult out;
  if (a == b) return out;
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  Seg s = panel(f, a, b, out.evaluations);
  recurse(f, a, b, s, abs_tol, rel_tol, max_depth, out);
  out.value *= sign;
  return out;
}

AdaptiveResult integrate_to_infinity(const Integrand& f, double a, double abs_tol,
                                     double rel_tol) {
  auto g = [&](double t) {
    if (t >= 1.0) return 0.0;
    double om = 1.0 - t;
    double v = f(a + t / om);
    return v / (om * om);
  };
  return integrate_adaptive(g, 0.0, 1.0, abs_tol, rel_tol, 50);
}

}  // namespace qcurv
