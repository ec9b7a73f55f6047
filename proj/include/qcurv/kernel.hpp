#pragma once

#include <cstddef>
#include <vector>

#include "qcurv/radial_field.hpp"

namespace qcurv {

// Mean over S^5 of log(1/|e1 - t w|), 0 <= t <= 1, by polar-angle quadrature
// with weight sin^4 and dyadic panels toward the log singularity at t = 1.
double kernel_shape(double t);

// Spherical mean of log(1/|r e1 - s w|) = -log max(r,s) + kernel_shape(min/max).
double spherical_log_kernel(double r, double s);

struct KernelTable {
  std::vector<double> r_nodes;
  std::vector<double> s_nodes;    // Gauss points, `order` per grid cell
  std::vector<double> s_weights;  // matching panel weights (no s^5 factor)
  std::vector<double> values;     // row-major, r_nodes.size() x s_nodes.size()
  int order = 0;

  std::size_t rows() const { return r_nodes.size(); }
  std::size_t cols() const { return s_nodes.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * s_nodes.size() + j]; }
};

KernelTable build_log_kernel(const RadialGrid& grid, int order = 6);

}  // namespace qcurv
