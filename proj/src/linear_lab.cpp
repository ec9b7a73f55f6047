#include "qcurv/linear_lab.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "qcurv/constants.hpp"
#include "qcurv/error.hpp"
#include "qcurv/quadrature.hpp"

namespace qcurv {

double linear_weight(double r) { return 720.0 * 64.0 / std::pow(1.0 + r * r, 6); }

IvpResult integrate_linearized(const std::array<double, 3>& jet0, double r_max, double rtol, double atol) {
  JetIvp p;
  p.jet0 = jet0;
  p.source = [](double r, double w1) { return linear_weight(r) * w1; };
  p.source0 = linear_weight(0.0) * jet0[0];
  p.r_max = r_max;
  p.rtol = rtol;
  p.atol = atol;
  p.track_events = false;
  p.blowup_u = 1e300;
  return integrate_jet(p);
}

double LinearizedSolution::identity_residual() const { return std::abs(alpha - (6.0 * a + 48.0 * b)) / (std::abs(alpha) + 1.0); }

double LinearizedSolution::alpha_agreement() const { return std::abs(alpha - alpha_integral) / (std::abs(alpha) + 1.0); }

LinearFit fit_asymptotics(const std::function<JetState(double)>& jet, double r_lo, double r_hi, int samples) {
  if (!(r_hi > r_lo) || r_lo <= 0.0 || samples < 4) throw Error(Errc::invalid_argument, "fit window");
  const int rows = 6 * samples;
  Eigen::MatrixXd A(rows, 4);
  Eigen::VectorXd y(rows);
  int k = 0;
  for (int i = 0; i < samples; ++i) {
    double r = r_lo + (r_hi - r_lo) * i / (samples - 1);
    JetState j = jet(r);
    double r2 = r * r, lr = std::log(r);
    const double basis[6][4] = {
        {r2, r2 * r2, 1.0, -lr},
        {2 * r, 4 * r2 * r, 0.0, -1.0 / r},
        {12.0, 32.0 * r2, 0.0, -4.0 / r2},
        {0.0, 64.0 * r, 0.0, 8.0 / (r2 * r)},
        {0.0, 384.0, 0.0, 16.0 / (r2 * r2)},
        {0.0, 0.0, 0.0, -64.0 / (r2 * r2 * r)},
    };
    for (int q = 0; q < 6; ++q, ++k) {
      double norm = 0.0;
      for (double c : basis[q]) norm += c * c;
      double s = 1.0 / (r * std::sqrt(norm));
      for (int c = 0; c < 4; ++c) A(k, c) = basis[q][c] * s;
      y(k) = j.w[q] * s;
    }
  }
  Eigen::Vector4d cs;
  for (int c = 0; c < 4; ++c) {
    cs(c) = A.col(c).norm();
    A.col(c) /= cs(c);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  LinearFit fit;
  fit.condition = sv(0) / sv(3);
  if (!(fit.condition < 1e12)) throw Error(Errc::increase_r_max, "condition " + std::to_string(fit.condition));
  Eigen::VectorXd x = svd.solve(y);
  Eigen::VectorXd res = A * x - y;
  fit.residual = y.norm() > 0.0 ? res.norm() / y.norm() : 0.0;
  x = x.cwiseQuotient(cs);
  fit.a = x(0);
  fit.b = x(1);
  fit.d = x(2);
  fit.alpha = x(3);
  return fit;
}

namespace {

double weighted_integral(const std::function<double(double)>& psi, double r_max, const LinearFit& tail_fit) {
  double acc = 0.0;
  double lo = 0.0, hi = std::min(1.0, r_max);
  while (lo < r_max) {
    acc += integrate_adaptive([&](double r) { return psi(r) * linear_weight(r) * std::pow(r, 5); }, lo, hi, 1e-14, 1e-13)
               .value;
    lo = hi;
    hi = std::min(2.0 * hi, r_max);
  }
  auto model = [&](double r) {
    return tail_fit.a * r * r + tail_fit.b * std::pow(r, 4) + tail_fit.d - tail_fit.alpha * std::log(r);
  };
  acc += integrate_to_infinity([&](double r) { return model(r) * linear_weight(r) * std::pow(r, 5); }, r_max).value;
  return constants::omega5 * acc;
}

}  // namespace

LinearizedSolution solve_linearized(double lap_psi0, double bilap_psi0, double r_max) {
  if (!(r_max >= 50.0)) throw Error(Errc::increase_r_max, "r_max = " + std::to_string(r_max));
  LinearizedSolution s;
  s.lap_psi0 = lap_psi0;
  s.bilap_psi0 = bilap_psi0;
  s.r_max = r_max;
  s.ivp = integrate_linearized({0.0, lap_psi0, bilap_psi0}, r_max);
  const Trajectory& tr = s.ivp.trajectory;
  LinearFit fit = fit_asymptotics([&](double r) { return tr.at(r); }, 0.5 * r_max, r_max);
  s.a = fit.a;
  s.b = fit.b;
  s.d = fit.d;
  s.alpha = fit.alpha;
  s.fit_residual = fit.residual;
  s.condition = fit.condition;
  s.alpha_integral = weighted_integral([&](double r) { return tr.at(r).u(); }, r_max, fit) / constants::gamma6;
  return s;
}

double weighted_mass(const LinearizedSolution& sol) { return constants::gamma6 * sol.alpha_integral; }

double exact_kernel_solution(double r) { return (1.0 - r * r) / (1.0 + r * r); }

JetState exact_kernel_jet(double r) {
  double q = 1.0 + r * r, r2 = r * r;
  JetState j;
  j.r = r;
  j.w = {(1.0 - r2) / q,
         -4.0 * r / (q * q),
         -8.0 * (r2 + 3.0) / std::pow(q, 3),
         32.0 * r * (r2 + 4.0) / std::pow(q, 4),
         768.0 / std::pow(q, 5),
         -7680.0 * r / std::pow(q, 6)};
  return j;
}

double kernel_operator_residual(const std::vector<double>& probes) {
  double worst = 0.0;
  for (double r : probes) {
    if (r <= 0.0) continue;
    double mass =
        integrate_adaptive([](double s) { return linear_weight(s) * exact_kernel_solution(s) * std::pow(s, 5); }, 0.0, r,
                           1e-15, 1e-14)
            .value;
    double lhs = std::pow(r, 5) * exact_kernel_jet(r).dbilap();
    double scale = std::max(std::abs(mass), 1e-300);
    worst = std::max(worst, std::abs(lhs + mass) / scale);
  }
  return worst;
}

double kernel_weighted_integral() {
  auto g = [](double s) { return linear_weight(s) * exact_kernel_solution(s) * std::pow(s, 5); };
  double v = integrate_adaptive(g, 0.0, 1.0, 1e-15, 1e-14).value + integrate_to_infinity(g, 1.0, 1e-15, 1e-14).value;
  return constants::omega5 * v / constants::gamma6;
}

std::map<std::string, double> AsymptoticCheck::max_by_line() const {
  static const char* names[5] = {"dpsi", "lap", "dlap", "bilap", "dbilap"};
  std::map<std::string, double> m;
  for (int q = 0; q < 5; ++q) {
    double w = 0.0;
    for (double v : residuals[q]) w = std::max(w, v);
    m[names[q]] = w;
  }
  return m;
}

AsymptoticCheck asymptotic_table_check(const std::function<JetState(double)>& jet, double a, double b, double alpha,
                                       const std::vector<double>& radii) {
  AsymptoticCheck out;
  out.radii = radii;
  for (double r : radii) {
    JetState j = jet(r);
    double r2 = r * r;
    // model terms per line
    const double terms[5][3] = {
        {2 * a * r, 4 * b * r2 * r, -alpha / r},
        {12 * a, 32 * b * r2, -4 * alpha / r2},
        {0.0, 64 * b * r, 8 * alpha / (r2 * r)},
        {0.0, 384 * b, 16 * alpha / (r2 * r2)},
        {0.0, 0.0, -64 * alpha / (r2 * r2 * r)},
    };
    for (int q = 0; q < 5; ++q) {
      double model = terms[q][0] + terms[q][1] + terms[q][2];
      double scale = std::abs(terms[q][0]) + std::abs(terms[q][1]) + std::abs(terms[q][2]);
      double diff = std::abs(j.w[q + 1] - model);
      out.residuals[q].push_back(scale > 0.0 ? diff / scale : diff);
    }
  }
  return out;
}

AsymptoticCheck asymptotic_table_check(const LinearizedSolution& sol, const std::vector<double>& radii) {
  return asymptotic_table_check([&](double r) { return sol.at(r); }, sol.a, sol.b, sol.alpha, radii);
}

LinearizedSolution psi0_profile(double r_max) {
  if (!(r_max >= 100.0)) throw Error(Errc::increase_r_max, "r_max = " + std::to_string(r_max));
  LinearizedSolution e1 = solve_linearized(1.0, 0.0, r_max);
  LinearizedSolution e2 = solve_linearized(0.0, 1.0, r_max);
  Eigen::Matrix2d M;
  M << e1.a, e2.a, e1.b, e2.b;
  double det = M.determinant();
  double scale = M.cwiseAbs().maxCoeff();
  if (!(std::abs(det) > 1e-12 * scale * scale))
    throw Error(Errc::normalization_failed, "basis determinant " + std::to_string(det));
  Eigen::Vector2d c = M.partialPivLu().solve(Eigen::Vector2d(8.0, 0.0));
  return solve_linearized(c(0), c(1), r_max);
}

}  // namespace qcurv
