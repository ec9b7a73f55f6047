#include "qcurv/entire_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "qcurv/constants.hpp"
#include "qcurv/error.hpp"
#include "qcurv/quadrature.hpp"

namespace qcurv {

using constants::gamma6;
using constants::omega5;

void FixedPointConfig::validate() const {
  if (!(Lambda > 0.0)) throw Error(Errc::invalid_argument, "Lambda must be positive");
  if (variant == FixedPointVariant::hybrid && !(lambda > 0.0 && lambda <= 1.0 / 24.0 + 1e-15))
    throw Error(Errc::invalid_argument, "lambda must lie in (0, 1/24]");
  if (!(damping > 0.0 && damping <= 1.0)) throw Error(Errc::invalid_argument, "damping must lie in (0, 1]");
  if (!(damping_floor > 0.0 && damping_floor <= damping)) throw Error(Errc::invalid_argument, "damping floor");
  if (max_sweeps < 1 || !(tol > 0.0)) throw Error(Errc::invalid_argument, "max_sweeps and tol must be positive");
  if (variant == FixedPointVariant::example3 && !(example3_k > 0.0))
    throw Error(Errc::invalid_argument, "example-3 variant needs k > 0");
}

JetState EntireSolution::jet0() const {
  JetState j;
  j.w = {u[0], 0.0, lap_u0, 0.0, bilap_u0, 0.0};
  return j;
}

double EntireSolution::curvature(double r) const {
  if (r <= 0.0) return 0.0;
  const RadialGrid& g = *grid;
  double top = std::min(r, g.back());
  std::size_t cell = g.cell(top);
  std::size_t order = sq.size() / (g.size() - 1);
  double total = 0.0;
  for (std::size_t q = 0; q < cell * order; ++q) total += wq[q] * std::pow(sq[q], 5) * fq[q];
  if (top > g[cell]) {
    const bool thd = variant == FixedPointVariant::hybrid;
    auto f = [&](double x) {
      double h = thd ? -std::pow(x, 4) : 0.0;
      return V(x) * std::exp(6.0 * (v(x) + c + h)) * std::pow(x, 5);
    };
    total += integrate_gl(f, g[cell], top, static_cast<int>(order));
  }
  return omega5 * total;
}

struct FixedPointSolver::Eval {
  std::vector<double> T;
  std::vector<double> f;
  double c = 0.0;
  double lapI0 = 0.0;
  double lap0 = 0.0;
  double beta_next = 0.0;
  double mass = 0.0;
};

GridPtr default_entire_grid(double r_max) { return make_grid(RadialGrid::geometric(r_max, 1.05, 0.004, 1e-7)); }

FixedPointSolver::FixedPointSolver(GridPtr grid, int order) : grid_(std::move(grid)) {
  if (!grid_) throw Error(Errc::invalid_argument, "null grid");
  if (grid_->front() != 0.0) throw Error(Errc::invalid_argument, "entire-solver grid must start at 0");
  kernel_ = build_log_kernel(*grid_, order);
  stencils_.reserve(kernel_.cols());
  for (double s : kernel_.s_nodes) stencils_.push_back(lagrange_stencil(*grid_, s, Parity::even));
}

FixedPointSolver::Eval FixedPointSolver::evaluate(const VSpec& V, const FixedPointConfig& cfg,
                                                  const std::vector<double>& v, double beta) const {
  const std::size_t n = grid_->size(), nq = kernel_.cols();
  const bool thd = cfg.variant == FixedPointVariant::hybrid;
  Eval e;
  e.f.resize(nq);
  std::vector<double> E(nq);
  double Emax = -std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < nq; ++q) {
    const Stencil& st = stencils_[q];
    double vq = 0.0;
    for (int k = 0; k < Stencil::width; ++k) vq += st.weight[k] * v[st.index[k]];
    double s = kernel_.s_nodes[q];
    double h = thd ? -std::pow(s, 4) : 0.0;
    double Vs = V(s);
    E[q] = Vs > 0.0 ? std::log(Vs) + 6.0 * (vq + h) : -std::numeric_limits<double>::infinity();
    Emax = std::max(Emax, E[q]);
  }
  if (!std::isfinite(Emax)) throw Error(Errc::rescale_failure, "density vanishes or overflows");
  double M = 0.0;
  for (std::size_t q = 0; q < nq; ++q) {
    double s = kernel_.s_nodes[q];
    e.f[q] = std::exp(E[q] - Emax);
    M += kernel_.s_weights[q] * std::pow(s, 5) * e.f[q];
  }
  M *= omega5;
  if (!(M > 0.0) || !std::isfinite(M)) throw Error(Errc::rescale_failure, "volume integral degenerate");
  e.c = (std::log(cfg.Lambda / M) - Emax) / 6.0;
  double scale = cfg.Lambda / M;
  double s3 = 0.0;
  for (std::size_t q = 0; q < nq; ++q) {
    e.f[q] *= scale;
    s3 += kernel_.s_weights[q] * std::pow(kernel_.s_nodes[q], 3) * e.f[q];
  }
  e.mass = cfg.Lambda;
  e.lapI0 = -(4.0 * omega5 / gamma6) * s3;

  std::vector<double> g(nq);
  for (std::size_t q = 0; q < nq; ++q) g[q] = kernel_.s_weights[q] * std::pow(kernel_.s_nodes[q], 5) * e.f[q];
  e.T.assign(n, 0.0);
  const double pre = omega5 / gamma6;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &kernel_.values[i * nq];
    double acc = 0.0;
    for (std::size_t q = 0; q < nq; ++q) acc += row[q] * g[q];
    e.T[i] = pre * acc;
  }
  if (thd) {
    e.lap0 = e.lapI0 / (1.0 + 24.0 * cfg.lambda);
    double a = cfg.lambda * e.lap0;
    for (std::size_t i = 0; i < n; ++i) {
      double r2 = (*grid_)[i] * (*grid_)[i];
      e.T[i] += a * (r2 * r2 - 2.0 * r2);
    }
  } else {
    e.lap0 = e.lapI0 + 24.0 * beta;
    e.beta_next = cfg.example3_k + std::abs(e.lap0) / 24.0;
    for (std::size_t i = 0; i < n; ++i) {
      double r2 = (*grid_)[i] * (*grid_)[i];
      e.T[i] -= beta * (1.0 - r2) * (1.0 - r2);
    }
  }
  return e;
}

bool FixedPointSolver::newton(const VSpec& V, const FixedPointConfig& cfg, std::vector<double>& v,
                              EntireSolution& out) const {
  const std::size_t n = grid_->size(), nq = kernel_.cols();
  auto sup_residual = [&](const Eval& e, const std::vector<double>& x) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(e.T[i] - x[i]));
    return m;
  };
  Eval e = evaluate(V, cfg, v, 0.0);
  double res = sup_residual(e, v);
  const double pre = omega5 / gamma6;
  const double dscale = -(4.0 * omega5 / gamma6) / (1.0 + 24.0 * cfg.lambda);
  for (int it = 0; it < cfg.newton_max; ++it) {
    if (res < cfg.tol) return true;
    // J_T = A (6 diag(f) P) - (A f)(6 m^T P)/Lambda, A = pre K W5 + lambda p dD^T
    std::vector<double> a5(nq), a3(nq);
    for (std::size_t q = 0; q < nq; ++q) {
      double s = kernel_.s_nodes[q], w = kernel_.s_weights[q];
      a5[q] = w * std::pow(s, 5);
      a3[q] = w * std::pow(s, 3);
    }
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd Af = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd mP = Eigen::VectorXd::Zero(n);  // m^T P
    for (std::size_t q = 0; q < nq; ++q) {
      const Stencil& st = stencils_[q];
      double mq = omega5 * a5[q] * e.f[q];
      for (int k = 0; k < Stencil::width; ++k) mP[st.index[k]] += mq * st.weight[k];
    }
    std::vector<double> poly(n);
    for (std::size_t i = 0; i < n; ++i) {
      double r2 = (*grid_)[i] * (*grid_)[i];
      poly[i] = cfg.lambda * (r2 * r2 - 2.0 * r2);
    }
    std::vector<double> coef(nq);
    for (std::size_t q = 0; q < nq; ++q) coef[q] = 6.0 * e.f[q];
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = &kernel_.values[i * nq];
      double afi = 0.0;
      for (std::size_t q = 0; q < nq; ++q) {
        double A = pre * row[q] * a5[q] + poly[i] * dscale * a3[q];
        afi += A * e.f[q];
        double cq = A * coef[q];
        const Stencil& st = stencils_[q];
        for (int k = 0; k < Stencil::width; ++k) B(i, st.index[k]) += cq * st.weight[k];
      }
      Af[i] = afi;
    }
    B.noalias() -= Af * (6.0 / cfg.Lambda) * mP.transpose();
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n) - B;
    Eigen::VectorXd F(n);
    for (std::size_t i = 0; i < n; ++i) F[i] = v[i] - e.T[i];
    Eigen::VectorXd dv = J.partialPivLu().solve(-F);

    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 20; ++ls) {
      std::vector<double> trial(v);
      for (std::size_t i = 0; i < n; ++i) trial[i] += t * dv[i];
      try {
        Eval et = evaluate(V, cfg, trial, 0.0);
        double rt = sup_residual(et, trial);
        if (rt < res) {
          v = std::move(trial);
          e = std::move(et);
          res = rt;
          accepted = true;
          break;
        }
      } catch (const Error&) {
      }
      t *= 0.5;
    }
    ++out.newton_steps;
    out.history.push_back(res);
    if (!accepted) return false;
  }
  return res < cfg.tol;
}

EntireSolution FixedPointSolver::solve(const VSpec& V, const FixedPointConfig& cfg, const EntireSolution* warm) const {
  cfg.validate();
  if (!(V(0.0) > 0.0)) throw Error(Errc::invalid_argument, "V(0) must be positive");
  V.validate_positive(grid_->back(), 500);
  const std::size_t n = grid_->size();
  const bool thd = cfg.variant == FixedPointVariant::hybrid;

  EntireSolution out;
  out.grid = grid_;
  out.lambda = thd ? cfg.lambda : 0.0;
  out.V = V;
  out.Lambda_target = cfg.Lambda;
  out.variant = cfg.variant;

  std::vector<double> v(n, 0.0);
  double beta = cfg.example3_k;
  if (warm && warm->grid && warm->grid->size() == n && warm->variant == cfg.variant) {
    v = warm->v.values();
    if (!thd) beta = -warm->poly_coeff;
  }

  double theta = cfg.damping;
  std::vector<double> best = v;
  double best_beta = beta;
  double best_upd = std::numeric_limits<double>::infinity();
  double prev_upd = std::numeric_limits<double>::infinity();
  int growth = 0, since_best = 0;
  bool converged = false;
  int sweep = 0;
  for (; sweep < cfg.max_sweeps; ++sweep) {
    Eval e = evaluate(V, cfg, v, beta);
    double upd = 0.0;
    for (std::size_t i = 0; i < n; ++i) upd = std::max(upd, std::abs(e.T[i] - v[i]));
    if (!thd) upd = std::max(upd, std::abs(e.beta_next - beta));
    if (!std::isfinite(upd)) throw Error(Errc::rescale_failure, "non-finite sweep");
    out.history.push_back(upd);
    if (upd < cfg.tol) {
      converged = true;
      break;
    }
    if (upd < best_upd) {
      best_upd = upd;
      best = v;
      best_beta = beta;
      since_best = 0;
    } else {
      ++since_best;
    }
    growth = upd > prev_upd ? growth + 1 : 0;
    prev_upd = upd;
    if (growth >= cfg.divergence_window || since_best >= 50 * cfg.divergence_window) {
      theta *= 0.5;
      v = best;
      beta = best_beta;
      growth = since_best = 0;
      prev_upd = std::numeric_limits<double>::infinity();
      if (theta < cfg.damping_floor) break;
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = (1.0 - theta) * v[i] + theta * e.T[i];
    if (!thd) beta = (1.0 - theta) * beta + theta * e.beta_next;
  }
  out.sweeps = sweep;
  out.damping_used = theta;

  if (!converged) {
    if (thd && cfg.newton_fallback) {
      // Newton from the warm start first, then from the best sweep
      v = (warm && warm->grid && warm->grid->size() == n && warm->variant == cfg.variant) ? warm->v.values() : best;
      converged = newton(V, cfg, v, out);
      if (!converged && warm) {
        v = best;
        converged = newton(V, cfg, v, out);
      }
    }
    if (!converged) {
      if (!thd) {
        // beta = k + |Lap I(0) + 24 beta|/24 has a root only when Lap I(0) <= -24 k
        Eval eb = evaluate(V, cfg, best, best_beta);
        if (eb.lapI0 > -24.0 * cfg.example3_k)
          throw Error(Errc::fixed_point_diverged, "coefficient equation has no root: Lap I(0) = " +
                                                      std::to_string(eb.lapI0) + " > -24k");
      }
      if (theta < cfg.damping_floor) throw Error(Errc::fixed_point_diverged);
      throw Error(Errc::no_convergence, "after " + std::to_string(out.sweeps) + " sweeps");
    }
  }

  Eval e = evaluate(V, cfg, v, beta);
  out.converged = true;
  out.residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) out.residual = std::max(out.residual, std::abs(e.T[i] - v[i]));
  out.v = RadialField(grid_, v);
  out.c = e.c;
  out.lap_u0 = e.lap0;
  double s1 = 0.0, mass = 0.0;
  for (std::size_t q = 0; q < kernel_.cols(); ++q) {
    double s = kernel_.s_nodes[q], w = kernel_.s_weights[q];
    s1 += w * s * e.f[q];
    mass += w * std::pow(s, 5) * e.f[q];
  }
  out.Lambda_achieved = omega5 * mass;
  std::vector<double> u(n);
  if (thd) {
    out.poly_coeff = cfg.lambda * e.lap0;
    out.bilap_u0 = 384.0 * (out.poly_coeff - 1.0) + 0.25 * s1;
    out.c_tilde = e.c - out.poly_coeff;
    for (std::size_t i = 0; i < n; ++i) u[i] = v[i] + e.c - std::pow((*grid_)[i], 4);
  } else {
    out.poly_coeff = -beta;
    out.bilap_u0 = -384.0 * beta + 0.25 * s1;
    out.c_tilde = e.c;
    for (std::size_t i = 0; i < n; ++i) u[i] = v[i] + e.c;
  }
  out.u = RadialField(grid_, std::move(u));
  out.sq = kernel_.s_nodes;
  out.wq = kernel_.s_weights;
  out.fq = e.f;
  double R = grid_->back();
  double fR = e.f.back();
  out.tail_bound = omega5 * fR * std::pow(R, 5) / (24.0 * std::pow(R, 3));
  return out;
}

EntireSolution picard_solve(const VSpec& V, const FixedPointConfig& cfg, GridPtr grid) {
  if (!grid) grid = default_entire_grid();
  FixedPointSolver solver(grid);
  return solver.solve(V, cfg);
}

PohozaevTerms pohozaev_terms(const std::function<double(double)>& density,
                             const std::function<double(double)>& radial_log_dK, double r_max) {
  PohozaevTerms p;
  auto a = [&](double s) { return density(s) * std::pow(s, 5); };
  auto b = [&](double s) { return radial_log_dK(s) * density(s) * std::pow(s, 5); };
  if (r_max >= 1e300) {
    p.alpha = omega5 * (integrate_adaptive(a, 0.0, 1.0).value + integrate_to_infinity(a, 1.0).value);
    p.rhs = omega5 / 3.0 * (integrate_adaptive(b, 0.0, 1.0).value + integrate_to_infinity(b, 1.0).value);
  } else {
    p.alpha = omega5 * integrate_adaptive(a, 0.0, r_max).value;
    p.rhs = omega5 / 3.0 * integrate_adaptive(b, 0.0, r_max).value;
  }
  p.lhs = 2.0 * p.alpha / constants::Lambda1 * (p.alpha - constants::Lambda1);
  return p;
}

PohozaevTerms pohozaev(const EntireSolution& sol, const VSpec& V) {
  if (!V.differentiable()) throw Error(Errc::gradient_unavailable, "tabulated V");
  const bool thd = sol.variant == FixedPointVariant::hybrid;
  const double a = sol.poly_coeff;
  PohozaevTerms p;
  double alpha = 0.0, rhs = 0.0;
  for (std::size_t q = 0; q < sol.sq.size(); ++q) {
    double s = sol.sq[q], s2 = s * s;
    double m = sol.wq[q] * std::pow(s, 5) * sol.fq[q];
    // r d/dr log K with K = V e^{6 a (1-r^2)^2 - 6 h}
    double rdlogK = V.radial_log_derivative(s) - 24.0 * a * s2 * (1.0 - s2);
    if (thd) rdlogK -= 24.0 * s2 * s2;
    alpha += m;
    rhs += m * rdlogK;
  }
  p.alpha = omega5 * alpha;
  p.rhs = omega5 / 3.0 * rhs;
  p.lhs = 2.0 * p.alpha / constants::Lambda1 * (p.alpha - constants::Lambda1);
  return p;
}

double pohozaev_residual(const EntireSolution& sol, const VSpec& V) { return pohozaev(sol, V).residual(); }

namespace {

constexpr int kJetOrder = 10;

// Per-cell Gauss nodes with cumulative (spectral) integration.
struct CellMesh {
  std::vector<double> edges;
  std::vector<double> x;  // kJetOrder nodes per cell
  std::vector<double> half;
  std::array<std::array<double, kJetOrder>, kJetOrder> S{};  // int_{-1}^{x_j} l_k
  std::array<double, kJetOrder> w{};
  std::array<double, kJetOrder> t{};

  explicit CellMesh(const RadialGrid& g, double r_max) {
    const GaussRule& gr = gauss_legendre(kJetOrder);
    for (int j = 0; j < kJetOrder; ++j) {
      t[j] = gr.x[j];
      w[j] = gr.w[j];
    }
    for (int j = 0; j < kJetOrder; ++j) {
      for (int k = 0; k < kJetOrder; ++k) {
        // exact: l_k has degree kJetOrder - 1
        double a = -1.0, b = t[j], m = 0.5 * (a + b), h = 0.5 * (b - a), acc = 0.0;
        for (int q = 0; q < kJetOrder; ++q) {
          double z = m + h * t[q], l = 1.0;
          for (int i = 0; i < kJetOrder; ++i)
            if (i != k) l *= (z - t[i]) / (t[k] - t[i]);
          acc += w[q] * l;
        }
        S[j][k] = acc * h;
      }
    }
    for (std::size_t i = 0; i < g.size() && g[i] <= r_max; ++i) edges.push_back(g[i]);
    if (edges.back() < r_max) edges.push_back(r_max);
    for (std::size_t c = 0; c + 1 < edges.size(); ++c) {
      double m = 0.5 * (edges[c] + edges[c + 1]), h = 0.5 * (edges[c + 1] - edges[c]);
      half.push_back(h);
      for (int j = 0; j < kJetOrder; ++j) x.push_back(m + h * t[j]);
    }
  }
  std::size_t cells() const { return half.size(); }

  // int_0^{x_n} g at every node; `total` receives the integral over the whole mesh.
  std::vector<double> cumulative(const std::vector<double>& g, double* total = nullptr) const {
    std::vector<double> out(g.size());
    double base = 0.0;
    for (std::size_t c = 0; c < cells(); ++c) {
      const double* gc = &g[c * kJetOrder];
      for (int j = 0; j < kJetOrder; ++j) {
        double acc = 0.0;
        for (int k = 0; k < kJetOrder; ++k) acc += S[j][k] * gc[k];
        out[c * kJetOrder + j] = base + half[c] * acc;
      }
      double cell = 0.0;
      for (int k = 0; k < kJetOrder; ++k) cell += w[k] * gc[k];
      base += half[c] * cell;
    }
    if (total) *total = base;
    return out;
  }
};

}  // namespace

IvpResult solution_jets(const EntireSolution& sol, const VSpec& V, std::vector<double> output_radii, double r_max) {
  const bool thd = sol.variant == FixedPointVariant::hybrid;
  const double R = r_max > 0.0 ? std::min(r_max, sol.grid->back()) : sol.grid->back();
  auto mesh = std::make_shared<CellMesh>(*sol.grid, R);
  const std::size_t N = mesh->x.size();
  const auto& x = mesh->x;

  std::vector<double> f(N), g(N);
  for (std::size_t i = 0; i < N; ++i) {
    double h = thd ? -std::pow(x[i], 4) : 0.0;
    f[i] = V(x[i]) * std::exp(6.0 * (sol.v(x[i]) + sol.c + h));
  }
  auto p5 = [&](std::size_t i) { return std::pow(x[i], 5); };

  // Lap^2 u from outside: B_inf + int_r^inf m / t^5, tail m(R)/(4 R^4)
  for (std::size_t i = 0; i < N; ++i) g[i] = f[i] * p5(i);
  double mR = 0.0;
  std::vector<double> m = mesh->cumulative(g, &mR);
  auto w6 = std::make_shared<std::vector<double>>(N);
  for (std::size_t i = 0; i < N; ++i) {
    (*w6)[i] = -m[i] / p5(i);
    g[i] = m[i] / p5(i);
  }
  double inner_total = 0.0;
  std::vector<double> mc = mesh->cumulative(g, &inner_total);
  const double B_inf = 384.0 * sol.poly_coeff - (thd ? 384.0 : 0.0);
  const double tail = mR / (4.0 * std::pow(R, 4));
  auto w5 = std::make_shared<std::vector<double>>(N);
  for (std::size_t i = 0; i < N; ++i) (*w5)[i] = B_inf + (inner_total - mc[i]) + tail;
  const double bilap0 = B_inf + inner_total + tail;

  for (std::size_t i = 0; i < N; ++i) g[i] = (*w5)[i] * p5(i);
  std::vector<double> nn = mesh->cumulative(g);
  auto w4 = std::make_shared<std::vector<double>>(N);
  for (std::size_t i = 0; i < N; ++i) (*w4)[i] = nn[i] / p5(i);
  std::vector<double> lc = mesh->cumulative(*w4);
  auto w3 = std::make_shared<std::vector<double>>(N);
  for (std::size_t i = 0; i < N; ++i) (*w3)[i] = sol.lap_u0 + lc[i];
  for (std::size_t i = 0; i < N; ++i) g[i] = (*w3)[i] * p5(i);
  std::vector<double> pp = mesh->cumulative(g);
  auto w2 = std::make_shared<std::vector<double>>(N);
  for (std::size_t i = 0; i < N; ++i) (*w2)[i] = pp[i] / p5(i);
  std::vector<double> uc = mesh->cumulative(*w2);
  auto w1 = std::make_shared<std::vector<double>>(N);
  const double u0 = sol.u[0];
  for (std::size_t i = 0; i < N; ++i) (*w1)[i] = u0 + uc[i];

  std::array<std::shared_ptr<std::vector<double>>, 6> comp{w1, w2, w3, w4, w5, w6};
  JetState origin;
  origin.w = {u0, 0.0, sol.lap_u0, 0.0, bilap0, 0.0};

  // Lagrange evaluation on the cell containing r
  auto eval = [mesh, comp, origin](double r) {
    const auto& e = mesh->edges;
    JetState j;
    j.r = r;
    if (r <= mesh->x.front()) {
      // below the first node: even/odd Taylor from the origin jet
      double t = mesh->x.front() > 0 ? r / mesh->x.front() : 0.0;
      for (int k = 0; k < 6; ++k) j.w[k] = (k % 2 == 0) ? origin.w[k] + t * t * ((*comp[k])[0] - origin.w[k]) : t * (*comp[k])[0];
      return j;
    }
    std::size_t c = static_cast<std::size_t>(std::upper_bound(e.begin(), e.end(), r) - e.begin());
    c = std::min(c == 0 ? 0 : c - 1, mesh->cells() - 1);
    double mid = 0.5 * (e[c] + e[c + 1]), h = mesh->half[c];
    double z = (r - mid) / h;
    std::array<double, kJetOrder> L;
    for (int k = 0; k < kJetOrder; ++k) {
      double l = 1.0;
      for (int i = 0; i < kJetOrder; ++i)
        if (i != k) l *= (z - mesh->t[i]) / (mesh->t[k] - mesh->t[i]);
      L[k] = l;
    }
    for (int q = 0; q < 6; ++q) {
      double acc = 0.0;
      for (int k = 0; k < kJetOrder; ++k) acc += L[k] * (*comp[q])[c * kJetOrder + k];
      j.w[q] = acc;
    }
    return j;
  };

  std::vector<double> radii;
  std::sort(output_radii.begin(), output_radii.end());
  std::size_t o = 0;
  for (std::size_t i = 0; i < N; ++i) {
    for (; o < output_radii.size() && output_radii[o] < x[i]; ++o)
      if (output_radii[o] > 0.0 && (radii.empty() || output_radii[o] > radii.back())) radii.push_back(output_radii[o]);
    if (radii.empty() || x[i] > radii.back()) radii.push_back(x[i]);
  }
  if (R > radii.back()) radii.push_back(R);
  auto jet = [eval, origin](double r) { return r == 0.0 ? origin : eval(r); };
  IvpResult res = sampled_trajectory(jet, radii);
  res.trajectory.jet0 = {u0, sol.lap_u0, bilap0};
  return res;
}

double exist_residual(const EntireSolution& sol, const FixedPointSolver& solver, int probes) {
  const KernelTable& K = solver.kernel();
  const std::size_t n = sol.grid->size(), nq = K.cols();
  if (K.rows() != n || nq != sol.fq.size()) throw Error(Errc::invalid_argument, "solver grid mismatch");
  const bool thd = sol.variant == FixedPointVariant::hybrid;
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    std::size_t i = static_cast<std::size_t>((n - 1) * static_cast<double>(p) / std::max(1, probes - 1));
    double acc = 0.0;
    for (std::size_t q = 0; q < nq; ++q) acc += K.at(i, q) * sol.wq[q] * std::pow(sol.sq[q], 5) * sol.fq[q];
    double r = (*sol.grid)[i], r2 = r * r;
    double model = omega5 / gamma6 * acc + sol.poly_coeff * (1.0 - r2) * (1.0 - r2) + sol.c_tilde;
    if (thd) model -= r2 * r2;
    worst = std::max(worst, std::abs(sol.u[i] - model));
  }
  return worst;
}

bool tilde_monotone(const EntireSolution& sol) {
  const RadialGrid& g = *sol.grid;
  const bool thd = sol.variant == FixedPointVariant::hybrid;
  double prev = std::numeric_limits<double>::infinity();
  double slack = 1e-9 * (1.0 + std::abs(sol.u[0]));
  for (std::size_t i = 0; i < g.size(); ++i) {
    double r2 = g[i] * g[i];
    double t = sol.u[i] - sol.poly_coeff * (1.0 - r2) * (1.0 - r2) + (thd ? r2 * r2 : 0.0);
    if (t > prev + slack) return false;
    prev = t;
  }
  return true;
}

ContinuationResult lambda_continuation(const VSpec& V, double Lambda, const std::vector<double>& lambdas,
                                       const FixedPointConfig& base, const FixedPointSolver& solver) {
  if (Lambda < constants::Lambda1 * (1.0 - 1e-12))
    throw Error(Errc::invalid_argument, "continuation requires Lambda >= Lambda1");
  if (lambdas.empty()) throw Error(Errc::invalid_argument, "empty lambda sequence");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0 && lambdas[i] <= 1.0 / 24.0 + 1e-15))
      throw Error(Errc::invalid_argument, "lambdas must lie in (0, 1/24]");
    if (i > 0 && !(lambdas[i] < lambdas[i - 1])) throw Error(Errc::invalid_argument, "lambdas must decrease");
  }
  ContinuationResult out;
  FixedPointConfig cfg = base;
  cfg.Lambda = Lambda;
  cfg.variant = FixedPointVariant::hybrid;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    cfg.lambda = lambdas[i];
    try {
      const EntireSolution* warm = out.solutions.empty() ? nullptr : &out.solutions.back();
      EntireSolution s = solver.solve(V, cfg, warm);
      out.steps.push_back({s.lambda, s.u0(), s.lambda * s.lap_u0, s.lap_u0});
      out.solutions.push_back(std::move(s));
    } catch (const Error& e) {
      out.failure_index = i;
      out.failure = e.what();
      break;
    }
  }
  return out;
}

}  // namespace qcurv
