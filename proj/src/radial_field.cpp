#include "qcurv/radial_field.hpp"

#include <algorithm>
#include <cmath>

#include "qcurv/error.hpp"

namespace qcurv {

std::string to_string(Grading g) {
  switch (g) {
    case Grading::uniform: return "uniform";
    case Grading::geometric_refined: return "geometric-refined";
    case Grading::custom: return "custom";
  }
  return "custom";
}

RadialGrid::RadialGrid(std::vector<double> nodes, Grading grading, std::vector<double> refine_near)
    : nodes_(std::move(nodes)), grading_(grading), refine_near_(std::move(refine_near)) {
  if (nodes_.empty()) throw Error(Errc::invalid_argument, "empty grid");
  if (nodes_.front() < 0.0) throw Error(Errc::invalid_argument, "negative radius in grid");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1]))
      throw Error(Errc::invalid_argument, "grid nodes must be strictly increasing");
  }
  for (double x : nodes_)
    if (!std::isfinite(x)) throw Error(Errc::invalid_argument, "non-finite grid node");
}

RadialGrid RadialGrid::uniform(double r_max, std::size_t cells) {
  if (!(r_max > 0.0) || cells < 1) throw Error(Errc::invalid_argument, "uniform grid needs r_max > 0");
  std::vector<double> x(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i) x[i] = r_max * static_cast<double>(i) / cells;
  x.back() = r_max;
  return RadialGrid(std::move(x), Grading::uniform);
}

RadialGrid RadialGrid::geometric(double r_max, double ratio, double h, double r_min,
                                 std::vector<double> refine_near) {
  if (!(r_max > 0.0) || !(ratio > 1.0) || !(h > 0.0) || !(r_min > 0.0) || r_min >= r_max)
    throw Error(Errc::invalid_argument, "geometric grid parameters");
  auto step = [&](double r) {
    double s = std::min(h, (ratio - 1.0) * r);
    for (double rho : refine_near) s = std::min(s, h / 8.0 + (ratio - 1.0) * std::abs(r - rho));
    return s;
  };
  std::vector<double> x{0.0, r_min};
  while (true) {
    double r = x.back();
    double s = step(r);
    if (r + s >= r_max) {
      if (r_max - r < 0.5 * s && x.size() > 2) x.back() = r_max;
      else x.push_back(r_max);
      break;
    }
    x.push_back(r + s);
  }
  return RadialGrid(std::move(x), Grading::geometric_refined, std::move(refine_near));
}

bool RadialGrid::contains(double r) const {
  double slack = 1e-12 * std::max(1.0, std::abs(back()));
  return r >= front() - slack && r <= back() + slack;
}

std::size_t RadialGrid::cell(double r) const {
  if (!contains(r)) throw Error(Errc::out_of_range, "r = " + std::to_string(r));
  if (nodes_.size() < 2) return 0;
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
  std::size_t i = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  return std::min(i, nodes_.size() - 2);
}

GridPtr make_grid(RadialGrid g) { return std::make_shared<const RadialGrid>(std::move(g)); }

Stencil lagrange_stencil(const RadialGrid& grid, double r, Parity parity, int derivative) {
  if (derivative < 0 || derivative > 2) throw Error(Errc::invalid_argument, "stencil derivative order");
  constexpr int W = Stencil::width;
  const auto& x = grid.nodes();
  const std::size_t n = x.size();
  std::size_t first_pos = (x.front() == 0.0) ? 1 : 0;
  std::size_t mirrored = 0;
  if (parity != Parity::none) mirrored = std::min<std::size_t>(W - 1, n - first_pos);
  std::size_t total = mirrored + n;
  if (total < static_cast<std::size_t>(W)) throw Error(Errc::insufficient_resolution, "interpolation needs 6 nodes");

  // virtual position p: p < mirrored -> node first_pos + (mirrored - 1 - p) reflected
  auto vnode = [&](std::size_t p, double& xv, std::size_t& idx, double& sgn) {
    if (p < mirrored) {
      idx = first_pos + (mirrored - 1 - p);
      xv = -x[idx];
      sgn = parity == Parity::odd ? -1.0 : 1.0;
    } else {
      idx = p - mirrored;
      xv = x[idx];
      sgn = 1.0;
    }
  };

  std::size_t c = grid.cell(r);
  long pos = static_cast<long>(mirrored + c) - 2;
  pos = std::clamp(pos, 0L, static_cast<long>(total) - W);

  std::array<double, W> xs{}, sg{};
  Stencil st;
  for (int k = 0; k < W; ++k) vnode(static_cast<std::size_t>(pos + k), xs[k], st.index[k], sg[k]);

  // Fornberg recursion for derivative weights up to order `derivative`.
  const int M = derivative;
  double cw[3][W] = {};
  cw[0][0] = 1.0;
  double c1 = 1.0, c4 = xs[0] - r;
  for (int i = 1; i < W; ++i) {
    int mn = std::min(i, M);
    double c2 = 1.0, c5 = c4;
    c4 = xs[i] - r;
    for (int j = 0; j < i; ++j) {
      double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) cw[k][i] = c1 * (k * cw[k - 1][i - 1] - c5 * cw[k][i - 1]) / c2;
        cw[0][i] = -c1 * c5 * cw[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) cw[k][j] = (c4 * cw[k][j] - k * cw[k - 1][j]) / c3;
      cw[0][j] = c4 * cw[0][j] / c3;
    }
    c1 = c2;
  }
  for (int j = 0; j < W; ++j) st.weight[j] = cw[M][j] * sg[j];
  return st;
}

RadialField::RadialField(GridPtr grid, std::vector<double> values, Parity parity)
    : grid_(std::move(grid)), values_(std::move(values)), parity_(parity) {
  if (!grid_) throw Error(Errc::invalid_argument, "null grid");
  if (values_.size() != grid_->size()) throw Error(Errc::invalid_argument, "value count differs from node count");
}

RadialField::RadialField(GridPtr grid, std::vector<double> values, std::vector<double> d1, Parity parity)
    : RadialField(std::move(grid), std::move(values), parity) {
  if (d1.size() != values_.size()) throw Error(Errc::invalid_argument, "derivative count differs from node count");
  d1_ = std::move(d1);
}

RadialField::RadialField(GridPtr grid, std::vector<double> values, std::vector<double> d1,
                         std::vector<double> d2, Parity parity)
    : RadialField(std::move(grid), std::move(values), std::move(d1), parity) {
  if (d2.size() != values_.size()) throw Error(Errc::invalid_argument, "derivative count differs from node count");
  d2_ = std::move(d2);
}

RadialField RadialField::sample(GridPtr grid, const std::function<double(double)>& f, Parity parity) {
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f((*grid)[i]);
  return RadialField(std::move(grid), std::move(v), parity);
}

namespace {

// Hermite interpolation on one cell; returns value or first derivative.
double hermite(double x0, double x1, double f0, double f1, double g0, double g1, const double* h0,
               const double* h1, double r, bool deriv) {
  double h = x1 - x0;
  double t = (r - x0) / h;
  double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  if (!h0) {
    if (!deriv) {
      return f0 * (2 * t3 - 3 * t2 + 1) + h * g0 * (t3 - 2 * t2 + t) + f1 * (-2 * t3 + 3 * t2) +
             h * g1 * (t3 - t2);
    }
    return (f0 * (6 * t2 - 6 * t) + h * g0 * (3 * t2 - 4 * t + 1) + f1 * (-6 * t2 + 6 * t) +
            h * g1 * (3 * t2 - 2 * t)) / h;
  }
  double s0 = *h0, s1 = *h1;
  if (!deriv) {
    return f0 * (1 - 10 * t3 + 15 * t4 - 6 * t5) + h * g0 * (t - 6 * t3 + 8 * t4 - 3 * t5) +
           h * h * s0 * 0.5 * (t2 - 3 * t3 + 3 * t4 - t5) + f1 * (10 * t3 - 15 * t4 + 6 * t5) +
           h * g1 * (-4 * t3 + 7 * t4 - 3 * t5) + h * h * s1 * 0.5 * (t3 - 2 * t4 + t5);
  }
  return (f0 * (-30 * t2 + 60 * t3 - 30 * t4) + h * g0 * (1 - 18 * t2 + 32 * t3 - 15 * t4) +
          h * h * s0 * 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4) + f1 * (30 * t2 - 60 * t3 + 30 * t4) +
          h * g1 * (-12 * t2 + 28 * t3 - 15 * t4) + h * h * s1 * 0.5 * (3 * t2 - 8 * t3 + 5 * t4)) /
         h;
}

}  // namespace

double RadialField::operator()(double r) const {
  if (has_d1()) {
    std::size_t i = grid_->cell(r);
    const auto& x = grid_->nodes();
    return hermite(x[i], x[i + 1], values_[i], values_[i + 1], d1_[i], d1_[i + 1],
                   has_d2() ? &d2_[i] : nullptr, has_d2() ? &d2_[i + 1] : nullptr, r, false);
  }
  Stencil st = lagrange_stencil(*grid_, r, parity_);
  double s = 0.0;
  for (int k = 0; k < Stencil::width; ++k) s += st.weight[k] * values_[st.index[k]];
  return s;
}

double RadialField::derivative(double r) const {
  if (has_d1()) {
    std::size_t i = grid_->cell(r);
    const auto& x = grid_->nodes();
    return hermite(x[i], x[i + 1], values_[i], values_[i + 1], d1_[i], d1_[i + 1],
                   has_d2() ? &d2_[i] : nullptr, has_d2() ? &d2_[i + 1] : nullptr, r, true);
  }
  Stencil st = lagrange_stencil(*grid_, r, parity_, 1);
  double s = 0.0;
  for (int k = 0; k < Stencil::width; ++k) s += st.weight[k] * values_[st.index[k]];
  return s;
}

}  // namespace qcurv
