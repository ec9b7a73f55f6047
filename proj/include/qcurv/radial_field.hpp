#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace qcurv {

enum class Grading { uniform, geometric_refined, custom };

std::string to_string(Grading g);

class RadialGrid {
 public:
  RadialGrid() = default;
  explicit RadialGrid(std::vector<double> nodes, Grading grading = Grading::custom,
                      std::vector<double> refine_near = {});

  static RadialGrid uniform(double r_max, std::size_t cells);
  // Node at 0, geometric growth from r_min by `ratio` until the step reaches h,
  // then uniform. Steps shrink to h/8 near each radius in refine_near.
  static RadialGrid geometric(double r_max, double ratio = 1.05, double h = 0.004,
                              double r_min = 1e-7, std::vector<double> refine_near = {});

  std::size_t size() const { return nodes_.size(); }
  double operator[](std::size_t i) const { return nodes_[i]; }
  const std::vector<double>& nodes() const { return nodes_; }
  double front() const { return nodes_.front(); }
  double back() const { return nodes_.back(); }
  Grading grading() const { return grading_; }
  const std::vector<double>& refine_near() const { return refine_near_; }

  // i with nodes[i] <= r <= nodes[i+1]; r must lie in [front, back].
  std::size_t cell(double r) const;
  bool contains(double r) const;

 private:
  std::vector<double> nodes_;
  Grading grading_ = Grading::custom;
  std::vector<double> refine_near_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(RadialGrid g);

// Parity of the radial profile under r -> -r; used to mirror stencils at the origin.
enum class Parity { even, odd, none };

struct Stencil {
  static constexpr int width = 6;
  std::array<std::size_t, width> index{};
  std::array<double, width> weight{};
};

// Degree-5 Lagrange weights at r for the given derivative order (0..2);
// mirrored nodes fold back onto their real index.
Stencil lagrange_stencil(const RadialGrid& grid, double r, Parity parity, int derivative = 0);

class RadialField {
 public:
  RadialField() = default;
  RadialField(GridPtr grid, std::vector<double> values, Parity parity = Parity::even);
  RadialField(GridPtr grid, std::vector<double> values, std::vector<double> d1,
              Parity parity = Parity::even);
  RadialField(GridPtr grid, std::vector<double> values, std::vector<double> d1,
              std::vector<double> d2, Parity parity = Parity::even);

  static RadialField sample(GridPtr grid, const std::function<double(double)>& f,
                            Parity parity = Parity::even);

  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  Parity parity() const { return parity_; }

  bool has_d1() const { return !d1_.empty(); }
  bool has_d2() const { return !d2_.empty(); }
  const std::vector<double>& d1() const { return d1_; }
  const std::vector<double>& d2() const { return d2_; }
  // Polynomial degree of the interpolant.
  int order() const { return has_d1() && !has_d2() ? 3 : 5; }

  double operator()(double r) const;
  double derivative(double r) const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
  std::vector<double> d1_;
  std::vector<double> d2_;
  Parity parity_ = Parity::even;
};

}  // namespace qcurv
