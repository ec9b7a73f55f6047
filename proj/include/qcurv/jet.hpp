#pragma once

#include <array>

namespace qcurv {

// (u, u', Lap u, (Lap u)', Lap^2 u, (Lap^2 u)') at radius r.
struct JetState {
  double r = 0.0;
  std::array<double, 6> w{};

  double u() const { return w[0]; }
  double du() const { return w[1]; }
  double lap() const { return w[2]; }
  double dlap() const { return w[3]; }
  double bilap() const { return w[4]; }
  double dbilap() const { return w[5]; }
};

}  // namespace qcurv
