#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qcurv/jet.hpp"
#include "qcurv/kernel.hpp"
#include "qcurv/ode_shooter.hpp"
#include "qcurv/radial_field.hpp"
#include "qcurv/vspec.hpp"

namespace qcurv {

enum class FixedPointVariant {
  hybrid,  // u = v + c - r^4, T(v) = I[f] + lambda D (r^4 - 2 r^2)
  example3,   // u = v + c, T(v) = I[f] - (k + |Lap v(0)|/24)(1 - r^2)^2
};

struct FixedPointConfig {
  double Lambda = 0.0;
  double lambda = 1.0 / 24.0;
  double damping = 0.5;
  double damping_floor = 1.0 / 64.0;
  int max_sweeps = 20000;
  double tol = 1e-10;
  int divergence_window = 10;
  bool newton_fallback = true;
  int newton_max = 40;
  FixedPointVariant variant = FixedPointVariant::hybrid;
  double example3_k = 0.0;

  void validate() const;
};

struct EntireSolution {
  GridPtr grid;
  VSpec V;
  RadialField v;
  RadialField u;
  double c = 0.0;
  double c_tilde = 0.0;
  double lambda = 0.0;
  double lap_u0 = 0.0;
  double bilap_u0 = 0.0;
  double poly_coeff = 0.0;  // lambda * lap_u0, or -beta for the example-3 variant
  double Lambda_target = 0.0;
  double Lambda_achieved = 0.0;
  int sweeps = 0;
  int newton_steps = 0;
  double residual = 0.0;
  double damping_used = 0.0;
  double tail_bound = 0.0;
  bool converged = false;
  FixedPointVariant variant = FixedPointVariant::hybrid;
  std::vector<double> history;

  // curvature density f = V e^{6u} on the kernel quadrature points
  std::vector<double> sq, wq, fq;

  double u0() const { return u[0]; }
  JetState jet0() const;
  // omega5 * int_0^r f s^5 ds from the quadrature data.
  double curvature(double r) const;
};

class FixedPointSolver {
 public:
  explicit FixedPointSolver(GridPtr grid, int order = 6);

  const RadialGrid& grid() const { return *grid_; }
  const KernelTable& kernel() const { return kernel_; }

  EntireSolution solve(const VSpec& V, const FixedPointConfig& cfg, const EntireSolution* warm = nullptr) const;

 private:
  struct Eval;
  Eval evaluate(const VSpec& V, const FixedPointConfig& cfg, const std::vector<double>& v, double beta) const;
  bool newton(const VSpec& V, const FixedPointConfig& cfg, std::vector<double>& v, EntireSolution& out) const;

  GridPtr grid_;
  KernelTable kernel_;
  std::vector<Stencil> stencils_;
};

GridPtr default_entire_grid(double r_max = 5.0);

EntireSolution picard_solve(const VSpec& V, const FixedPointConfig& cfg, GridPtr grid = nullptr);

struct PohozaevTerms {
  double alpha = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double residual() const { return lhs - rhs; }
};

// (2 alpha / Lambda1)(alpha - Lambda1) against (1/3) int (y . grad K) e^{6w}, given
// the weight K e^{6w} and r K'/K as functions of r.
PohozaevTerms pohozaev_terms(const std::function<double(double)>& density,
                             const std::function<double(double)>& radial_log_dK, double r_max = 1e300);

// w is the kernel-potential part u - poly_coeff (1-r^2)^2 + r^4, K = V e^{6 poly_coeff (1-r^2)^2 - 6 r^4}.
PohozaevTerms pohozaev(const EntireSolution& sol, const VSpec& V);
double pohozaev_residual(const EntireSolution& sol, const VSpec& V);

// Jets of u from nested cumulative quadrature of the curvature density (Lap^2 u taken from outside).
IvpResult solution_jets(const EntireSolution& sol, const VSpec& V, std::vector<double> output_radii = {},
                        double r_max = 0.0);

// max |u - (I[f] + poly + c~)| at `probes` nodes.
double exist_residual(const EntireSolution& sol, const FixedPointSolver& solver, int probes = 20);

// u - lambda D (1-r^2)^2 + r^4 is non-increasing at every node.
bool tilde_monotone(const EntireSolution& sol);

struct ContinuationStep {
  double lambda;
  double u0;
  double lambda_lap_u0;
  double lap_u0;
};

struct ContinuationResult {
  std::vector<EntireSolution> solutions;
  std::vector<ContinuationStep> steps;
  std::optional<std::size_t> failure_index;
  std::string failure;
};

ContinuationResult lambda_continuation(const VSpec& V, double Lambda, const std::vector<double>& lambdas,
                                       const FixedPointConfig& base, const FixedPointSolver& solver);

}  // namespace qcurv
