#pragma once

#include "wgqed/types.hpp"

namespace wgqed {

// Air-filled rectangular waveguide, TE10 mode only.
struct WaveguideGeometry {
  double broad_wall = 22.9e-3;       // a (m)
  double pair_separation = 46e-3;    // d_y along propagation (m)
  double light_speed = speed_of_light;

  // omega_c = pi c / a
  double cutoff() const { return pi * light_speed / broad_wall; }
};

// Thrown for frequencies at or below cutoff (evanescent regime).
class BelowCutoffError : public ModelError {
 public:
  using ModelError::ModelError;
};

// beta = sqrt((omega/c)^2 - (pi/a)^2), rad/m.
double propagation_constant(const WaveguideGeometry& geom, double omega);
double guided_wavelength(const WaveguideGeometry& geom, double omega);
double phase_velocity(const WaveguideGeometry& geom, double omega);

// Phase acquired over the pair separation, beta(omega) * d_y.
double phase_between_sites(const WaveguideGeometry& geom, double omega);
// Phase acquired over an arbitrary distance.
double propagation_phase(const WaveguideGeometry& geom, double omega, double distance);

// t = beta(omega) d / omega, so that omega * t is the accumulated phase.
double propagation_delay(const WaveguideGeometry& geom, double omega, double distance);

// Frequency where the pair separation is half a guided wavelength
// (beta * d_y = pi), found by bracketing and bisection.
double decoherence_free_frequency(const WaveguideGeometry& geom, double rel_tol = 1e-12);

}  // namespace wgqed
