#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qcurv/jet.hpp"
#include "qcurv/radial_field.hpp"
#include "qcurv/vspec.hpp"

namespace qcurv {

struct IvpSpec {
  double u0 = 0.6931471805599453;
  double lap_u0 = -12.0;
  double bilap_u0 = 192.0;
  VSpec V = VSpec::constant(120.0);
  double r_max = 10.0;
  double rtol = 1e-11;
  double atol = 1e-13;
  double r_start = 1e-6;
  std::vector<double> output_radii;
  bool track_events = true;
  std::size_t max_steps = 2'000'000;
  double rescale_threshold = 20.0;
};

enum class Quantity { du = 0, lap = 1, dlap = 2, bilap = 3 };

struct Crossing {
  double r;
  int direction;  // +1 upward, -1 downward
};

struct EventLog {
  std::array<std::vector<Crossing>, 4> crossings;

  const std::vector<Crossing>& of(Quantity q) const { return crossings[static_cast<int>(q)]; }
  std::vector<Crossing>& of(Quantity q) { return crossings[static_cast<int>(q)]; }

  std::optional<double> theta1() const { return nth(Quantity::du, 0); }
  std::optional<double> theta1_tilde() const { return nth(Quantity::du, 1); }
  std::optional<double> theta2() const { return nth(Quantity::lap, 0); }
  std::optional<double> theta2_tilde() const { return nth(Quantity::lap, 1); }
  std::optional<double> theta3() const { return nth(Quantity::dlap, 0); }
  std::optional<double> theta4() const { return nth(Quantity::bilap, 0); }

  EventLog scaled(double s) const;

 private:
  std::optional<double> nth(Quantity q, std::size_t k) const {
    const auto& v = of(q);
    if (v.size() <= k) return std::nullopt;
    return v[k].r;
  }
};

// Dormand-Prince continuous extension over one accepted step, integration variables.
struct DenseSegment {
  double x0 = 0.0;
  double h = 0.0;
  std::array<std::array<double, 6>, 5> rc{};
  std::array<double, 6> eval(double x) const;
};

struct Trajectory {
  std::vector<JetState> states;  // starts with the exact jet at r = 0
  std::vector<DenseSegment> segments;
  std::array<double, 3> jet0{};  // integration variables
  double taylor_source0 = 0.0;
  bool blowup = false;
  double blowup_radius = 0.0;
  bool rescaled_gauge = false;
  double gauge_scale = 1.0;
  std::size_t steps = 0;
  // Optional evaluator used by at() for trajectories not produced by the integrator.
  std::shared_ptr<const std::function<JetState(double)>> sampler;

  // Quintic Hermite field of u built from (u, u', u'').
  RadialField u_field() const;
  // Jet at any r in [0, last radius] from the dense output (Taylor series before the first step).
  JetState at(double r) const;
  double r_end() const { return states.empty() ? 0.0 : states.back().r; }
};

struct IvpResult {
  Trajectory trajectory;
  EventLog events;
};

// Right side source S(r, w1) in (Lap^2 u)' = -S - 5 (Lap^2 u)'/r.
using Source = std::function<double(double r, double w1)>;

struct JetIvp {
  std::array<double, 3> jet0{};  // (w1, Lap w1, Lap^2 w1) at 0
  Source source;
  double source0 = 0.0;  // S(0, w1(0))
  double r_max = 1.0;
  double rtol = 1e-11;
  double atol = 1e-13;
  double r_start = 1e-6;
  std::vector<double> output_radii;
  bool track_events = true;
  std::size_t max_steps = 2'000'000;
  double blowup_u = 115.0;  // stop once w1 exceeds this
};

// Generic driver shared by the nonlinear, linearized and forced problems.
IvpResult integrate_jet(const JetIvp& p);

IvpResult integrate_ivp(const IvpSpec& spec);

// Trajectory backed by an arbitrary jet evaluator; events from sign changes between
// consecutive radii, polished on the evaluator. radii must be increasing and positive.
IvpResult sampled_trajectory(std::function<JetState(double)> jet, const std::vector<double>& radii);

struct PatternReport {
  bool d2uk = false;      // Lap^2 u > 0 on (0, theta4), < 0 after
  bool duk_prime = false; // (Lap u)' > 0 then < 0 across theta3
  bool uk_prime = false;  // u' < 0, > 0, < 0 across theta1, theta1~
  bool present = false;
  std::vector<std::string> missing;
};

PatternReport sign_pattern_check(const Trajectory& traj, const EventLog& events);

enum class ConstraintKind { value, du, lap, dlap, bilap, dbilap, curvature };
enum class FreeVar { u0, lap_u0, bilap_u0 };

struct Constraint {
  double radius;
  ConstraintKind kind;
  double target;
};

struct ShootOptions {
  std::vector<std::pair<double, double>> brackets;  // one per free variable
  double tol = 1e-10;
  int max_iter = 200;
};

struct ShootResult {
  IvpSpec spec;
  std::vector<double> residuals;
  int iterations = 0;
};

ShootResult shoot(const IvpSpec& base, const std::vector<Constraint>& targets,
                  const std::vector<FreeVar>& free, const ShootOptions& opt);

// Value of a constraint on a finished trajectory.
double constraint_value(const IvpResult& res, const Constraint& c);

}  // namespace qcurv
