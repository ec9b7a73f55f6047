#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qcurv/entire_solver.hpp"
#include "qcurv/linear_lab.hpp"
#include "qcurv/ode_shooter.hpp"
#include "qcurv/radial_field.hpp"
#include "qcurv/vspec.hpp"

namespace qcurv {

enum class Provenance { analytic_example, entire_solver, external };
enum class CaseLabel { i, ii, iii, iv, unclassified };
std::string to_string(Provenance p);
std::string to_string(CaseLabel c);

// One profile of a blow-up family with its jets and curvature.
struct FamilyMember {
  std::string name;
  double parameter = 0.0;
  Provenance provenance = Provenance::external;
  VSpec V = VSpec::constant(120.0);
  IvpResult jets;                                  // trajectory with sampler and events
  std::function<double(double)> curvature;         // omega5 int_0^r V e^{6u} s^5 ds
  std::optional<double> beta_construction;         // known polyharmonic coefficient
  double u0() const { return jets.trajectory.states.front().u(); }
  double r_end() const { return jets.trajectory.r_end(); }
  JetState at(double r) const { return jets.trajectory.at(r); }
  // Quintic Hermite field of u on the stored radii.
  RadialField u_field() const;
};

using BlowupFamily = std::vector<FamilyMember>;

// Geometric sample radii from r_lo to r_hi, plus the origin-free uniform tail.
std::vector<double> sample_radii(double r_lo, double r_hi, double ratio = 1.02, double h = 0.005);

FamilyMember member_from_jets(std::string name, std::function<JetState(double)> jet, const VSpec& V,
                              const std::vector<double>& radii, Provenance prov);
FamilyMember member_from_solution(std::string name, const EntireSolution& sol, const VSpec& V);
// Jet columns (u, u', Lap u, (Lap u)', Lap^2 u, (Lap^2 u)') tabulated at increasing radii starting at 0.
FamilyMember member_from_table(std::string name, const std::vector<JetState>& rows, const VSpec& V);

// eta(r/rk) - log rk + u0 (phi + 1), phi = -(1-r^2)^2, rk = 2 e^{-u0}.
JetState synthetic_jet(double r, double u0);
FamilyMember synthetic_member(double u0, double r_max = 2.0);
// phi = -(1-r^2)^2 and its jet.
JetState phi_jet(double r);

// Example 1: eta(x/k) - log k (flattening, kind 'a') or eta(kx) + log k (concentration, kind 'b').
BlowupFamily example1_family(char kind, const std::vector<double>& ks, double r_max = 5.0);
// Example 2: v(x) = u(rho x) + log rho for entire solutions u.
BlowupFamily example2_family(const std::vector<EntireSolution>& sols, const VSpec& V, const std::vector<double>& rhos);
FamilyMember rescale_member(const FamilyMember& m, double rho);
// Example 3: v_k from the example-3 fixed point, u_k(x) = v_k(beta_k x) + log beta_k.
BlowupFamily example3_family(const std::vector<double>& ks, double Lambda, const FixedPointSolver& solver,
                             std::vector<std::string>* failures = nullptr);

// eta_k(x) = u(rk x) + log rk on [0, x_max].
RadialField rescaled_profile(const RadialField& u, double x_max);
// sup over sample points in [0, x_max] of |eta_k - eta|.
double rescaled_profile_error(const RadialField& u, double x_max, int samples = 400);

struct BetaFit {
  double beta = 0.0;
  double residual = 0.0;  // rms misfit over rms of u on the window
  double gamma0 = 0.0;    // constant nuisance term
  double gamma1 = 0.0;    // log r nuisance term
};
using Window = std::vector<std::pair<double, double>>;
Window default_beta_window();
// u ~ -beta (1-r^2)^2 + gamma0 + gamma1 log r; throws not_polyharmonic above `tol`.
BetaFit estimate_beta(const std::function<double(double)>& u, const Window& window = default_beta_window(),
                      double tol = 1e-2, int samples = 64);

struct ThetaRatios {
  std::map<std::string, double> values;  // beta_theta4_4, beta_theta2_2, theta3_over_theta4, theta1_over_theta2
  std::vector<std::string> missing;
  bool empty() const { return values.empty(); }
};
ThetaRatios theta_ratios(const EventLog& ev, double beta);

struct QuantRow {
  double delta;
  double curvature;
  double deviation;  // curvature - Lambda1
};
std::vector<QuantRow> quantization_check(const FamilyMember& m, const std::vector<double>& deltas);

// Least-squares slope of (curvature(delta) - Lambda1) against eps_k = u0 e^{-2 u0}.
struct ExcessFit {
  double slope = 0.0;         // through the origin
  double affine_slope = 0.0;  // with intercept
  double intercept = 0.0;
  std::size_t members = 0;
};
ExcessFit curvature_excess_slope(const std::vector<double>& u0s, const std::vector<double>& curvatures, double delta);
ExcessFit curvature_excess_slope(const BlowupFamily& family, double delta);

struct NeckResult {
  double p = 0.0;
  double c_p = 0.0;
  std::optional<double> t_k;
  bool at_theta1 = false;  // no stationary point before theta1
  bool monotone = false;
  double u_tk = 0.0;
  std::optional<double> u_theta1;
  bool bound_ok = true;  // u(t_k) <= u(theta1) + C
};
double neck_constant(double p);
NeckResult neck_analysis(const FamilyMember& m, double p, double C = 1.0);

std::map<std::string, double> expansion_checks(const FamilyMember& m, double beta, double delta);

struct BlowupOptions {
  std::vector<double> deltas{0.25, 0.5};
  std::vector<double> s1_radii{0.2, 0.1, 0.05};
  Window beta_window = default_beta_window();
  double beta_tol = 1e-2;
  double beta_min = 1.0;
  double neck_p = 1.5;
  double neck_C = 1.0;
  double annulus_rho = 1.0;
  double annulus_eps = 0.5;
  double expansion_delta = 0.5;
};

struct Classification {
  CaseLabel label = CaseLabel::unclassified;
  bool concentration = false;
  bool ring = false;
  bool pattern = false;
  std::string evidence;
};
Classification classify_case(const FamilyMember& m, const BlowupOptions& opt = {});

double annulus_mass(const FamilyMember& m, double rho, double eps);

struct MemberReport {
  std::string name;
  double parameter = 0.0;
  Provenance provenance = Provenance::external;
  double u0 = 0.0;
  double r_k = 0.0;
  double eps_k = 0.0;
  std::optional<double> beta;
  std::string beta_source;
  double beta_residual = 0.0;
  EventLog events;
  PatternReport pattern;
  ThetaRatios ratios;
  NeckResult neck;
  std::vector<QuantRow> curvature;
  double annulus = 0.0;
  std::map<std::string, double> expansion;
  Classification cls;
};

struct BlowupReport {
  BlowupOptions options;
  std::vector<MemberReport> members;
  CaseLabel family_label = CaseLabel::unclassified;
  std::optional<ExcessFit> excess;
  std::string excess_note;
};

MemberReport analyze_member(const FamilyMember& m, const BlowupOptions& opt);
// Members are labelled with the verdict of the last (largest u0) member.
BlowupReport analyze_family(const BlowupFamily& family, const BlowupOptions& opt = {});

std::string report_json(const BlowupReport& rep);
std::vector<std::string> family_csv_header(const BlowupOptions& opt);
std::vector<std::vector<std::string>> family_csv_rows(const BlowupReport& rep);

}  // namespace qcurv
