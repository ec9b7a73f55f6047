#include "qcurv/error.hpp"

namespace qcurv {

const char* errc_message(Errc e) {
  switch (e) {
    case Errc::insufficient_resolution: return "insufficient resolution";
    case Errc::out_of_range: return "out of range";
    case Errc::use_series_start: return "use series start";
    case Errc::rescale_first: return "rescale first";
    case Errc::extend_grid: return "extend grid";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::finite_radius_blowup: return "finite-radius blow-up";
    case Errc::stiffness_failure: return "stiffness failure";
    case Errc::bracket_failure: return "bracket failure";
    case Errc::no_convergence: return "no convergence";
    case Errc::kernel_quadrature_failure: return "kernel quadrature failure";
    case Errc::fixed_point_diverged: return "fixed point diverged; reduce theta or Lambda";
    case Errc::rescale_failure: return "rescale failure";
    case Errc::gradient_unavailable: return "gradient unavailable";
    case Errc::refine_grid: return "refine grid";
    case Errc::not_polyharmonic: return "profile not polyharmonic-type";
    case Errc::insufficient_family: return "insufficient family";
    case Errc::increase_r_max: return "increase r_max";
    case Errc::normalization_failed: return "normalization failed";
    case Errc::io_failure: return "i/o failure";
    case Errc::usage: return "usage error";
  }
  return "unknown error";
}

static std::string compose(Errc code, const std::string& detail) {
  std::string s = errc_message(code);
  if (!detail.empty()) s += ": " + detail;
  return s;
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(compose(code, detail)), code_(code) {}

}  // namespace qcurv
