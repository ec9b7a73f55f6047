#pragma once

#include <stdexcept>
#include <string>

namespace qcurv {

enum class Errc {
  insufficient_resolution,
  out_of_range,
  use_series_start,
  rescale_first,
  extend_grid,
  invalid_argument,
  finite_radius_blowup,
  stiffness_failure,
  bracket_failure,
  no_convergence,
  kernel_quadrature_failure,
  fixed_point_diverged,
  rescale_failure,
  gradient_unavailable,
  refine_grid,
  not_polyharmonic,
  insufficient_family,
  increase_r_max,
  normalization_failed,
  io_failure,
  usage,
};

const char* errc_message(Errc e);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail = {});
  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace qcurv
