#include "wgqed/waveguide.hpp"

#include <cmath>
#include <sstream>

namespace wgqed {

namespace {

void require_valid(const WaveguideGeometry& geom) {
  if (!(geom.broad_wall > 0) || !(geom.light_speed > 0) || !(geom.pair_separation >= 0)) {
    throw ModelError("waveguide geometry needs a > 0, c > 0 and d_y >= 0");
  }
}

}  // namespace

double propagation_constant(const WaveguideGeometry& geom, double omega) {
  require_valid(geom);
  const double k = omega / geom.light_speed;
  const double kc = pi / geom.broad_wall;
  if (!(k > kc)) {
    std::ostringstream msg;
    msg << "frequency " << to_ghz(omega) << " GHz is at or below the TE10 cutoff "
        << to_ghz(geom.cutoff()) << " GHz";
    throw BelowCutoffError(msg.str());
  }
  // (k - kc)(k + kc) keeps precision close to cutoff
  return std::sqrt((k - kc) * (k + kc));
}

double guided_wavelength(const WaveguideGeometry& geom, double omega) {
  return two_pi / propagation_constant(geom, omega);
}

double phase_velocity(const WaveguideGeometry& geom, double omega) {
  return omega / propagation_constant(geom, omega);
}

double phase_between_sites(const WaveguideGeometry& geom, double omega) {
  return propagation_phase(geom, omega, geom.pair_separation);
}

double propagation_phase(const WaveguideGeometry& geom, double omega, double distance) {
  const double beta = propagation_constant(geom, omega);
  return beta * distance;
}

double propagation_delay(const WaveguideGeometry& geom, double omega, double distance) {
  return propagation_phase(geom, omega, distance) / omega;
}

double decoherence_free_frequency(const WaveguideGeometry& geom, double rel_tol) {
  require_valid(geom);
  if (!(geom.pair_separation > 0)) {
    throw ModelError("decoherence-free frequency needs a positive pair separation");
  }
  const double wc = geom.cutoff();
  auto excess = [&](double omega) { return phase_between_sites(geom, omega) - pi; };

  // beta rises monotonically from 0 at cutoff, so the root is bracketed by
  // [wc, w_hi] once the phase at w_hi exceeds pi.
  double lo = wc * (1.0 + 1e-15);
  double hi = 2.0 * wc;
  const double search_limit = 1e6 * wc;
  while (excess(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > search_limit) {
      throw ModelError("no frequency with beta*d_y = pi inside the search window");
    }
  }
  while ((hi - lo) > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace wgqed
