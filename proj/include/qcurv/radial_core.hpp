#pragma once

#include <functional>
#include <limits>
#include <utility>

#include "qcurv/jet.hpp"
#include "qcurv/radial_field.hpp"
#include "qcurv/vspec.hpp"

namespace qcurv {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

// f'' + 5 f'/r at every node, 6 f''(0) at the origin.
RadialField radial_laplacian(const RadialField& f);

// r^-5 * int_0^r g(s) s^5 ds
double derivative_from_laplacian(const RadialField& g, double r);

// f(r1) from f(r0), f'(r0) and Lap f on [r0, r1].
double outward_integrate(double f0, double f0prime, const RadialField& lap, double r0, double r1);

// omega5 * int_0^r V e^{6u} s^5 ds; r may be infinity for callable profiles.
double curvature_integral(const VSpec& V, const RadialField& u, double r);
double curvature_integral(const VSpec& V, const std::function<double(double)>& u, double r);
double curvature_integral(const VSpec& V, const std::function<double(double)>& u, double r0, double r1);

// int_0^r s^5/(1+s^2)^6 ds
double closed_form_defint(double r);
// Variant with 5 r^5 in the numerator, kept only to expose the discrepancy.
double closed_form_defint_printed(double r);

// eta = log(2/(1+r^2)) with its jet.
JetState spherical_profile(double r);
// Bubble at scale rk: eta(r/rk) - log rk.
JetState bubble_profile(double r, double rk);

// u(lambda r) + log lambda on the grid scaled by 1/lambda (exact node values).
RadialField rescale(const RadialField& u, double lambda);
// Same, sampled on a target grid; throws extend_grid when lambda r leaves the support.
RadialField rescale(const RadialField& u, double lambda, GridPtr target);

// P = -a r^2 - b r^4; returns (u - P/6, V e^{P}). V e^{6u} is unchanged.
std::pair<RadialField, VSpec> gauge_transform(const RadialField& u, const VSpec& V, double a, double b);
std::pair<RadialField, VSpec> gauge_inverse(const RadialField& u, const VSpec& V, double a, double b);

}  // namespace qcurv
