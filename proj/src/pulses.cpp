#include "wgqed/pulses.hpp"

#include <algorithm>
#include <cmath>

namespace wgqed {

namespace {

// Mean of exp(-x^2/2) - exp(-9/8) over x in [-1.5, 1.5].
double gaussian_mean() {
  static const double mean = [] {
    const double edge = std::exp(-9.0 / 8.0);
    const double integral = std::sqrt(2.0 * pi) * std::erf(1.5 / std::sqrt(2.0));
    return integral / 3.0 - edge;
  }();
  return mean;
}

}  // namespace

double Pulse::envelope(double t) const {
  if (t < start || t > end() || duration <= 0) return 0.0;
  if (shape == EnvelopeShape::rectangular) return 1.0;
  const double sigma = duration / 3.0;
  const double x = (t - start - duration / 2.0) / sigma;
  const double edge = std::exp(-9.0 / 8.0);
  return std::max(0.0, std::exp(-0.5 * x * x) - edge) / gaussian_mean();
}

Vector Pulse::coefficients(double t, std::size_t n_sites) const {
  const double env = envelope(t);
  Vector c = Vector::Zero(static_cast<Eigen::Index>(n_sites));
  if (env == 0.0) return c;
  if (site_coefficients) {
    if (static_cast<std::size_t>(site_coefficients->size()) != n_sites) {
      throw ModelError("pulse site coefficients do not match the number of sites");
    }
    c = amplitude * *site_coefficients;
  } else {
    if (n_sites != 4) throw ModelError("sideport pulses need the four-site layout");
    const auto s = drive_coefficients(DriveConfig{amplitude, phase, gradient, 0.0});
    for (Eigen::Index j = 0; j < 4; ++j) c(j) = s[static_cast<std::size_t>(j)];
  }
  return c * (env * std::exp(I * (detuning * (t - start) + carrier_phase)));
}

void validate(const Pulse& p) {
  if (!(p.duration > 0)) throw ModelError("pulse duration must be positive");
  if (!std::isfinite(p.start)) throw ModelError("pulse start must be finite");
  if (!(p.amplitude >= 0)) throw ModelError("pulse amplitude must be >= 0");
  if (!(p.gradient >= 0) || p.gradient > p.amplitude) {
    throw ModelError("pulse gradient must lie in [0, amplitude]");
  }
}

double pulse_area(const Pulse& p) { return p.amplitude * p.duration; }

PulseSequence::PulseSequence(std::vector<Pulse> pulses) : pulses_(std::move(pulses)) {
  std::sort(pulses_.begin(), pulses_.end(), [](const Pulse& a, const Pulse& b) { return a.start < b.start; });
  for (std::size_t k = 0; k < pulses_.size(); ++k) {
    validate(pulses_[k]);
    if (k > 0 && pulses_[k].start < pulses_[k - 1].end() - 1e-15) {
      throw ModelError("pulses in a sequence must not overlap");
    }
  }
}

double PulseSequence::end() const { return pulses_.empty() ? 0.0 : pulses_.back().end(); }

Vector PulseSequence::coefficients(double t, std::size_t n_sites) const {
  Vector c = Vector::Zero(static_cast<Eigen::Index>(n_sites));
  for (const auto& p : pulses_)
    if (t >= p.start && t <= p.end()) c += p.coefficients(t, n_sites);
  return c;
}

bool PulseSequence::active(double t) const {
  return std::any_of(pulses_.begin(), pulses_.end(),
                     [t](const Pulse& p) { return t >= p.start && t <= p.end(); });
}

std::vector<double> PulseSequence::breakpoints() const {
  std::vector<double> b;
  for (const auto& p : pulses_) {
    b.push_back(p.start);
    b.push_back(p.end());
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

}  // namespace wgqed
