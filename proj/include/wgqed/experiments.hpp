#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wgqed/dynamics.hpp"
#include "wgqed/fitting.hpp"
#include "wgqed/model.hpp"
#include "wgqed/oracle.hpp"
#include "wgqed/pulses.hpp"

namespace wgqed {

struct ExperimentSettings {
  IntegratorSettings integrator{1e-7, 1e-10};
  std::size_t levels_per_site = 3;
  // Total-excitation cap of the simulated space; pulse experiments never
  // populate more than three excitations appreciably.
  int max_excitations = 3;
  std::size_t jobs = 1;
  // Binomial readout noise; zero shots means exact populations.
  unsigned shots = 0;
  std::uint64_t seed = 0;
};

// A configured four-site device in the frame of its G -> D3 transition.
class Device {
 public:
  Device(const SystemConfig& cfg, const ExperimentSettings& settings);

  const SystemConfig& config() const { return cfg_; }
  const FockSpace& space() const { return space_; }
  const MasterEquation& master_equation() const { return me_; }
  const CollectiveBasis& basis() const { return basis_; }
  const ExperimentSettings& settings() const { return settings_; }
  // Re(lambda) of the numerically identified D3 state (lab frame).
  double dark_frequency() const { return dark_frequency_; }
  Matrix ground_state() const;

 private:
  SystemConfig cfg_;
  ExperimentSettings settings_;
  FockSpace space_;
  CollectiveBasis basis_;
  double dark_frequency_ = 0.0;
  MasterEquation me_;
};

inline constexpr double default_pulse_length = 240e-9;

// Sideport pulse resonant with G -> D3 (zero detuning in the device frame).
Pulse sideport_pulse(double start, double duration, double amplitude, double phase,
                     double gradient = 0.0, EnvelopeShape shape = EnvelopeShape::gaussian);

// Ground population right after a single pulse from |G>.
double ground_after_pulse(const Device& dev, const Pulse& pulse);

struct PiCalibration {
  double amplitude = 0.0;  // Omega of the pi pulse
  double ground_population = 0.0;
};

// First minimum of P_G against Omega at fixed pulse length and phi = 0.
PiCalibration calibrate_pi_pulse(const Device& dev, double duration = default_pulse_length,
                                 double gradient_power_ratio = 1.0);

struct RabiMap {
  std::vector<double> amplitudes;
  std::vector<double> phases;
  std::vector<std::vector<double>> ground;  // ground[amplitude][phase]
};

RabiMap rabi_map(const Device& dev, const std::vector<double>& amplitudes,
                 const std::vector<double>& phases, double duration = default_pulse_length);

struct DecayExperiment {
  std::vector<double> delays;
  std::vector<double> ground;  // P_G after each delay
  FitResult fit;
  double T1 = 0.0;
  double pi_amplitude = 0.0;
};

// Pi pulse, then free decay sampled at the delays; fits 1 - P_G.
DecayExperiment t1_experiment(const Device& dev, const std::vector<double>& delays,
                              double pi_amplitude, double duration = default_pulse_length);

struct RamseyExperiment {
  std::vector<double> delays;
  std::vector<double> signal;          // P_G(theta) - P_G(theta + pi)
  std::vector<double> ground;          // P_G(theta)
  std::vector<double> ground_shifted;  // P_G(theta + pi)
  FitResult fit;
  double T2 = 0.0;
  double frequency = 0.0;  // fitted oscillation frequency (Hz)
};

// pi/2 - tau - pi/2 with virtual detuning: the second pulse carries phase
// Delta * tau. The second pulse and readout act on the free-evolution state
// through a single backward-propagated readout operator.
RamseyExperiment ramsey_experiment(const Device& dev, double detuning,
                                   const std::vector<double>& delays, double pi_amplitude,
                                   double duration = default_pulse_length);

struct SpectroscopyMap {
  std::vector<double> frequencies;  // lab frame (rad/s)
  std::vector<double> phases;
  std::vector<std::vector<double>> ground;  // ground[frequency][phase]
};

struct SpectroscopySettings {
  double pulse_length = 1.2e-6;
  double amplitude = 0.0;  // 0 uses the pi amplitude
  double power_ratio = 0.75;
};

SpectroscopyMap spectroscopy_second_manifold(const Device& dev, const std::vector<double>& frequencies,
                                             const std::vector<double>& phases, double pi_amplitude,
                                             const SpectroscopySettings& spec = {},
                                             double duration = default_pulse_length);

struct LifetimePoint {
  double omega = 0.0;
  double phase = 0.0;       // propagation phase over the pair
  double T1 = 0.0;
  double predicted_decay = 0.0;  // Gamma of the prepared eigenstate
  FitResult fit;
};

// Two-site pair in exact_delay mode tuned to each frequency; prepares the
// pair's darkest one-excitation eigenstate and fits its lifetime.
std::vector<LifetimePoint> lifetime_vs_frequency(const SystemConfig& pair_cfg,
                                                 const std::vector<double>& omegas,
                                                 const ExperimentSettings& settings);

struct PurityTrace {
  double gamma = 0.0;
  double omega = 0.0;
  std::vector<double> times;
  std::vector<double> dark_population;
  std::vector<double> purity;
  double damping_rate = 0.0;  // envelope decay of the Rabi oscillation
  double purity_loss = 0.0;   // mean of 1 - Tr rho^2 over the trace
  FitResult fit;
};

// Identical-transmon idealization with gamma overridden, radiative decay
// only, driven from |G> by a constant resonant phi = 0 drive.
std::vector<PurityTrace> purity_leakage_scan(const SystemConfig& cfg, const std::vector<double>& gammas,
                                             const std::vector<double>& amplitudes,
                                             const std::vector<double>& times,
                                             const ExperimentSettings& settings);

struct ReducedDecay {
  double fitted_rate = 0.0;
  AdiabaticResult predicted;
  FitResult fit;
};

// Simulates the reduced (G, D3, B4, f) model from |D3> with the G-D3 drive
// off and fits the dark-state decay.
ReducedDecay reduced_model_decay(const ReducedModel& model, const IntegratorSettings& integrator = {});

// Applies binomial readout noise to a population in place.
void apply_shot_noise(std::vector<double>& populations, unsigned shots, std::uint64_t seed);

}  // namespace wgqed
