#include <doctest.h>

#include <cmath>
#include <random>

#include "qcurv/constants.hpp"
#include "qcurv/error.hpp"
#include "qcurv/kernel.hpp"
#include "qcurv/quadrature.hpp"
#include "qcurv/radial_core.hpp"

using namespace qcurv;

namespace {

// int_0^r s^5 (1+s^2)^-6 ds with t = s^2, x = 1 + t
double defint_oracle(double r) {
  auto G = [](double x) { return -1.0 / (3 * x * x * x) + 1.0 / (2 * std::pow(x, 4)) - 1.0 / (5 * std::pow(x, 5)); };
  return 0.5 * (G(1.0 + r * r) - G(1.0));
}

double eta(double r) { return std::log(2.0 / (1.0 + r * r)); }

}  // namespace

TEST_CASE("closed-form integral matches an independent antiderivative") {
  for (double r : {0.5, 1.0, 2.0, 5.0, 20.0}) {
    CHECK(std::abs(closed_form_defint(r) - defint_oracle(r)) < 1e-14);
    double q = integrate_adaptive([](double s) { return std::pow(s, 5) / std::pow(1 + s * s, 6); }, 0.0, r).value;
    CHECK(std::abs(closed_form_defint(r) - q) < 1e-12);
  }
  CHECK(std::abs(closed_form_defint(1e8) - 1.0 / 60.0) < 1e-14);
}

TEST_CASE("printed variant disagrees at r = 2") {
  CHECK(std::abs(closed_form_defint_printed(2.0) - defint_oracle(2.0)) > 1e-4);
}

TEST_CASE("total curvature of the spherical profile is Lambda1") {
  double q = curvature_integral(VSpec::constant(120.0), eta, infinity);
  CHECK(std::abs(q - constants::Lambda1) / constants::Lambda1 < 1e-10);
  CHECK(constants::Lambda1 == doctest::Approx(3968.803415078376).epsilon(1e-12));
}

TEST_CASE("spherical profile jets against finite differences") {
  for (double r : {0.3, 1.0, 2.5}) {
    JetState j = spherical_profile(r);
    double h = 1e-4;
    CHECK(j.u() == doctest::Approx(eta(r)).epsilon(1e-15));
    CHECK(j.du() == doctest::Approx((eta(r + h) - eta(r - h)) / (2 * h)).epsilon(1e-7));
    double lap = (eta(r + h) - 2 * eta(r) + eta(r - h)) / (h * h) + 5.0 / r * (eta(r + h) - eta(r - h)) / (2 * h);
    CHECK(j.lap() == doctest::Approx(lap).epsilon(1e-6));
    double dl = (spherical_profile(r + h).lap() - spherical_profile(r - h).lap()) / (2 * h);
    CHECK(j.dlap() == doctest::Approx(dl).epsilon(1e-7));
    double db = (spherical_profile(r + h).bilap() - spherical_profile(r - h).bilap()) / (2 * h);
    CHECK(j.dbilap() == doctest::Approx(db).epsilon(1e-7));
  }
  JetState o = spherical_profile(0.0);
  CHECK(o.lap() == doctest::Approx(-12.0));
  CHECK(o.bilap() == doctest::Approx(192.0));
}

TEST_CASE("radial laplacian of r^4 is 32 r^2") {
  GridPtr g = make_grid(RadialGrid::geometric(3.0, 1.05, 0.01, 1e-4));
  RadialField f = RadialField::sample(g, [](double r) { return std::pow(r, 4); });
  RadialField L = radial_laplacian(f);
  for (std::size_t i = 0; i < g->size(); i += 37) CHECK(std::abs(L[i] - 32 * std::pow((*g)[i], 2)) < 1e-6);
  CHECK(std::abs(derivative_from_laplacian(L, 2.0) - 32.0) < 1e-8);
}

TEST_CASE("bubble profile and rescale") {
  CHECK(bubble_profile(0.7, 0.5).u() == doctest::Approx(eta(1.4) - std::log(0.5)));
  GridPtr g = make_grid(RadialGrid::geometric(10.0, 1.05, 0.01, 1e-5));
  RadialField u = RadialField::sample(g, eta);
  for (double lam : {0.1, 1.0, 10.0}) {
    RadialField w = rescale(u, lam);
    for (std::size_t i = 0; i < w.size(); i += 50) {
      double r = w.grid()[i];
      CHECK(std::abs(w[i] - (eta(lam * r) + std::log(lam))) < 1e-12);
    }
  }
}

TEST_CASE("property: curvature is invariant under rescale") {
  GridPtr g = make_grid(RadialGrid::geometric(20.0, 1.05, 0.01, 1e-6));
  RadialField u = RadialField::sample(g, eta);
  VSpec V = VSpec::constant(120.0);
  double base = curvature_integral(V, u, 2.0);
  for (double lam : {0.25, 0.5, 4.0}) {
    RadialField w = rescale(u, lam);
    CHECK(std::abs(curvature_integral(V, w, 2.0 / lam) - base) / base < 1e-8);
  }
}

TEST_CASE("property: curvature is monotone in the radius") {
  VSpec V = VSpec::constant(120.0);
  double prev = 0.0;
  for (double r = 0.1; r < 30.0; r *= 1.5) {
    double c = curvature_integral(V, eta, r);
    CHECK(c > prev);
    prev = c;
  }
}

TEST_CASE("property: gauge transform preserves the curvature density") {
  GridPtr g = make_grid(RadialGrid::geometric(4.0, 1.05, 0.01, 1e-6));
  RadialField u = RadialField::sample(g, eta);
  VSpec V = VSpec::constant(120.0);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int k = 0; k < 5; ++k) {
    double a = d(rng), b = d(rng);
    auto [w, W] = gauge_transform(u, V, a, b);
    for (double r : {0.0, 0.5, 1.3, 3.9}) CHECK(std::abs(W(r) * std::exp(6 * w(r)) - V(r) * std::exp(6 * u(r))) < 1e-9 * V(r) * std::exp(6 * u(r)) + 1e-13);
    auto [u2, V2] = gauge_inverse(w, W, a, b);
    for (std::size_t i = 0; i < u.size(); i += 41) CHECK(std::abs(u2[i] - u[i]) < 1e-13);
    CHECK(std::abs(V2(1.7) - V(1.7)) < 1e-11);
  }
}

TEST_CASE("property: spherical log kernel is symmetric") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(0.01, 5.0);
  for (int k = 0; k < 20; ++k) {
    double r = d(rng), s = d(rng);
    CHECK(std::abs(spherical_log_kernel(r, s) - spherical_log_kernel(s, r)) < 1e-13);
  }
  CHECK(std::abs(kernel_shape(0.0)) < 1e-15);
}

TEST_CASE("kernel shape against a Monte Carlo sphere average") {
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> nd;
  const int N = 400000;
  for (double t : {0.3, 0.8}) {
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < N; ++i) {
      double x[6], n2 = 0.0;
      for (double& c : x) {
        c = nd(rng);
        n2 += c * c;
      }
      double w1 = x[0] / std::sqrt(n2);
      double v = -0.5 * std::log(1.0 - 2.0 * t * w1 + t * t);
      acc += v;
      acc2 += v * v;
    }
    double mean = acc / N, se = std::sqrt((acc2 / N - mean * mean) / N);
    CHECK(std::abs(kernel_shape(t) - mean) < 5.0 * se);
  }
}

TEST_CASE("kernel shape closed form for t -> 1 log singularity is integrable") {
  double a = kernel_shape(0.999), b = kernel_shape(1.0);
  CHECK(std::isfinite(b));
  CHECK(std::abs(a - b) < 1e-2);
}
