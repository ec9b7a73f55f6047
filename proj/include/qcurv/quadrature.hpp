#pragma once

#include <functional>
#include <vector>

namespace qcurv {

struct GaussRule {
  std::vector<double> x;  // nodes on [-1, 1]
  std::vector<double> w;
};

// Cached; thread safe after first call for a given n.
const GaussRule& gauss_legendre(int n);

using Integrand = std::function<double(double)>;

double integrate_gl(const Integrand& f, double a, double b, int n = 10);

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = true;
};

// Recursive bisection with a 10/20 point Gauss-Legendre error estimate.
AdaptiveResult integrate_adaptive(const Integrand& f, double a, double b,
                                  double abs_tol = 1e-13, double rel_tol = 1e-12,
                                  int max_depth = 40);

// Integral over [a, inf) via s = a + t/(1-t).
AdaptiveResult integrate_to_infinity(const Integrand& f, double a,
                                     double abs_tol = 1e-13, double rel_tol = 1e-12);

}  // namespace qcurv
