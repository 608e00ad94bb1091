#pragma once

#include <optional>
#include <vector>

#include "wgqed/model.hpp"
#include "wgqed/types.hpp"

namespace wgqed {

enum class EnvelopeShape { gaussian, rectangular };

// One sideport pulse. The gaussian has sigma = duration / 3, is cut at
// +-1.5 sigma and baseline-subtracted so it starts and ends at zero. Its
// height is chosen so the envelope averages to one over the pulse, which
// makes `amplitude` the equivalent rectangular Rabi amplitude.
struct Pulse {
  EnvelopeShape shape = EnvelopeShape::gaussian;
  double start = 0.0;
  double duration = 0.0;
  double amplitude = 0.0;      // Omega
  double phase = 0.0;          // sideport phase difference phi
  double gradient = 0.0;       // Omega_delta
  double detuning = 0.0;       // carrier offset from the frame, Delta
  double carrier_phase = 0.0;  // global phase of all coefficients
  // Explicit per-site coefficients replace the sideport pattern when set.
  std::optional<Vector> site_coefficients;

  double end() const { return start + duration; }
  // Dimensionless envelope, zero outside [start, end].
  double envelope(double t) const;
  // c_j(t) with H_d(t) = sum_j c_j(t) a_j + h.c.
  Vector coefficients(double t, std::size_t n_sites) const;
};

void validate(const Pulse& p);

// Pulse area integral of envelope * amplitude over time.
double pulse_area(const Pulse& p);

class PulseSequence {
 public:
  PulseSequence() = default;
  explicit PulseSequence(std::vector<Pulse> pulses);

  const std::vector<Pulse>& pulses() const { return pulses_; }
  bool empty() const { return pulses_.empty(); }
  double end() const;
  // Sum of all active pulses' coefficients at t.
  Vector coefficients(double t, std::size_t n_sites) const;
  bool active(double t) const;
  // Pulse edges, sorted and unique; the integrator does not step across them.
  std::vector<double> breakpoints() const;

 private:
  std::vector<Pulse> pulses_;
};

}  // namespace wgqed
