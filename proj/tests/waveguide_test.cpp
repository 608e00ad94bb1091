#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "wgqed/waveguide.hpp"

using namespace wgqed;

TEST_CASE("TE10 dispersion") {
  const WaveguideGeometry g;
  const double c = speed_of_light;
  // f_c = c / 2a for the broad wall.
  CHECK(to_ghz(g.cutoff()) == doctest::Approx(c / (2 * 22.9e-3) * 1e-9).epsilon(1e-12));
  const double w = ghz(7.0);
  const double beta = std::sqrt(w * w / (c * c) - std::pow(pi / 22.9e-3, 2));
  CHECK(propagation_constant(g, w) == doctest::Approx(beta).epsilon(1e-12));
  CHECK(guided_wavelength(g, w) == doctest::Approx(two_pi / beta).epsilon(1e-12));
  // Phase velocity exceeds c in a hollow guide.
  CHECK(phase_velocity(g, w) > c);
  CHECK(propagation_phase(g, w, 0.1) == doctest::Approx(beta * 0.1).epsilon(1e-12));
  CHECK(propagation_delay(g, w, 0.1) * w == doctest::Approx(propagation_phase(g, w, 0.1)).epsilon(1e-12));
  CHECK(phase_between_sites(g, w) == doctest::Approx(beta * 46e-3).epsilon(1e-12));
}

TEST_CASE("below cutoff is rejected") {
  const WaveguideGeometry g;
  CHECK_THROWS_AS(propagation_constant(g, 0.9 * g.cutoff()), BelowCutoffError);
  CHECK_THROWS_AS(propagation_constant(g, g.cutoff()), BelowCutoffError);
  CHECK_THROWS_AS(phase_between_sites(g, ghz(5.0)), ModelError);
}

TEST_CASE("decoherence-free frequency") {
  const WaveguideGeometry g;
  const double w = decoherence_free_frequency(g);
  // beta d = pi  =>  omega = pi c sqrt(1/a^2 + 1/d^2).
  const double closed = pi * speed_of_light * std::sqrt(1 / (22.9e-3 * 22.9e-3) + 1 / (46e-3 * 46e-3));
  CHECK(w == doctest::Approx(closed).epsilon(1e-10));
  CHECK(phase_between_sites(g, w) == doctest::Approx(pi).epsilon(1e-10));
  CHECK(guided_wavelength(g, w) == doctest::Approx(2 * 46e-3).epsilon(1e-10));
  // Reported analytic value 7.312 +- 0.016 GHz.
  CHECK(std::abs(to_ghz(w) - 7.312) < 0.016);
}

TEST_CASE("phase grows monotonically with frequency") {
  const WaveguideGeometry g;
  double last = 0.0;
  for (double f = 6.6; f < 9.0; f += 0.1) {
    const double p = phase_between_sites(g, ghz(f));
    CHECK(p > last);
    last = p;
  }
}
