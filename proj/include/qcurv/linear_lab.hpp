#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qcurv/ode_shooter.hpp"

namespace qcurv {

// 720 e^{6 eta} = 720 * 64 / (1+r^2)^6
double linear_weight(double r);

// Jet solve of (-Lap)^3 psi = 720 e^{6 eta} psi from (psi(0), Lap psi(0), Lap^2 psi(0)).
IvpResult integrate_linearized(const std::array<double, 3>& jet0, double r_max, double rtol = 1e-12,
                               double atol = 1e-14);

struct LinearizedSolution {
  IvpResult ivp;
  double lap_psi0 = 0.0;
  double bilap_psi0 = 0.0;
  double r_max = 0.0;
  // psi ~ a r^2 + b r^4 + d - alpha log r
  double a = 0.0;
  double b = 0.0;
  double d = 0.0;
  double alpha = 0.0;
  double fit_residual = 0.0;
  double condition = 0.0;
  double alpha_integral = 0.0;  // (720/gamma6) int psi e^{6 eta}
  double identity_residual() const;  // |alpha - (6a + 48b)| / (|alpha| + 1)
  double alpha_agreement() const;    // |alpha - alpha_integral| / (|alpha| + 1)
  JetState at(double r) const { return ivp.trajectory.at(r); }
};

struct LinearFit {
  double a = 0.0, b = 0.0, d = 0.0, alpha = 0.0;
  double residual = 0.0;
  double condition = 0.0;
};

// Weighted (1/r) least squares of every jet component on [r_lo, r_hi].
LinearFit fit_asymptotics(const std::function<JetState(double)>& jet, double r_lo, double r_hi, int samples = 200);

// psi(0) = 0; fit window [r_max/2, r_max].
LinearizedSolution solve_linearized(double lap_psi0, double bilap_psi0, double r_max = 200.0);

// (1 - r^2)/(1 + r^2) and its closed-form jet.
double exact_kernel_solution(double r);
JetState exact_kernel_jet(double r);
// max over probes of |r^5 (Lap^2 Psi)'(r) + int_0^r 720 e^{6 eta} Psi s^5 ds|, scaled by the integral magnitude.
double kernel_operator_residual(const std::vector<double>& probes);
// (720/gamma6) int Psi e^{6 eta} dx
double kernel_weighted_integral();

struct AsymptoticCheck {
  std::vector<double> radii;
  // rows: psi', Lap psi, (Lap psi)', Lap^2 psi, (Lap^2 psi)'
  std::array<std::vector<double>, 5> residuals;
  std::map<std::string, double> max_by_line() const;
};
AsymptoticCheck asymptotic_table_check(const std::function<JetState(double)>& jet, double a, double b, double alpha,
                                       const std::vector<double>& radii);
AsymptoticCheck asymptotic_table_check(const LinearizedSolution& sol, const std::vector<double>& radii);

// Combination of the two basis solves with (a, b) = (8, 0).
LinearizedSolution psi0_profile(double r_max = 200.0);

// 720 int psi e^{6 eta} dx over R^6 with the fitted tail beyond r_max.
double weighted_mass(const LinearizedSolution& sol);

}  // namespace qcurv
