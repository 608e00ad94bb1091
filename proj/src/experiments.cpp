#include "wgqed/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "wgqed/linalg.hpp"
#include "wgqed/parallel.hpp"

namespace wgqed {

namespace {

SystemConfig require_four_sites(const SystemConfig& cfg) {
  validate(cfg);
  if (cfg.n_sites() != 4) {
    throw ModelError("pulse experiments need the four-site layout, got " + std::to_string(cfg.n_sites()) +
                     " transmons");
  }
  SystemConfig lab = cfg;
  lab.frame = 0.0;
  return lab;
}

// Eigenvector of the one-excitation block with the largest overlap to `ref`.
struct BlockEigen {
  cplx eigenvalue;
  Vector state;
};

std::vector<BlockEigen> one_excitation_eigen(const SystemConfig& cfg, const FockSpace& space) {
  const ComplexOperator h = effective_hamiltonian(cfg, space, false);
  const auto idx = space.manifold(1);
  const auto n = static_cast<Eigen::Index>(idx.size());
  Matrix block(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      block(r, c) = h.matrix(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]),
                             static_cast<Eigen::Index>(idx[static_cast<std::size_t>(c)]));
  const double shift = block.diagonal().real().mean();
  block.diagonal().array() -= shift;
  Eigen::ComplexEigenSolver<Matrix> eig(block);
  if (eig.info() != Eigen::Success) throw NumericalError("one-excitation eigensolver failed");
  std::vector<BlockEigen> out;
  for (Eigen::Index k = 0; k < n; ++k) {
    Vector v = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
    const Vector col = eig.eigenvectors().col(k).normalized();
    for (std::size_t r = 0; r < idx.size(); ++r) v(static_cast<Eigen::Index>(idx[r])) = col(static_cast<Eigen::Index>(r));
    out.push_back({eig.eigenvalues()(k) + shift, v});
  }
  return out;
}

double find_dark_frequency(const SystemConfig& lab, const FockSpace& space, const CollectiveBasis& basis) {
  const auto states = one_excitation_eigen(lab, space);
  const BlockEigen* best = nullptr;
  double overlap = -1.0;
  for (const auto& s : states) {
    const double f = fidelity(s.state, basis.D3);
    if (f > overlap) {
      overlap = f;
      best = &s;
    }
  }
  return best->eigenvalue.real();
}

Matrix ground_projector(std::size_t dim) {
  Matrix p = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  p(0, 0) = 1.0;
  return p;
}

}  // namespace

Device::Device(const SystemConfig& cfg, const ExperimentSettings& settings)
    : cfg_(require_four_sites(cfg)),
      settings_(settings),
      space_(4, settings.levels_per_site, FockSpace::default_max_dim, settings.max_excitations),
      basis_(collective_states(space_)),
      dark_frequency_(find_dark_frequency(cfg_, space_, basis_)),
      me_(space_, lindblad_terms(rotating_frame(cfg_, dark_frequency_), space_)) {
  cfg_ = rotating_frame(cfg_, dark_frequency_);
}

Matrix Device::ground_state() const { return ground_projector(space_.dim()); }

Pulse sideport_pulse(double start, double duration, double amplitude, double phase, double gradient,
                     EnvelopeShape shape) {
  Pulse p;
  p.shape = shape;
  p.start = start;
  p.duration = duration;
  p.amplitude = amplitude;
  p.phase = phase;
  p.gradient = gradient;
  return p;
}

double ground_after_pulse(const Device& dev, const Pulse& pulse) {
  const PulseSequence seq({pulse});
  const auto res = evolve(dev.ground_state(), seq, dev.master_equation(), dev.settings().integrator,
                          {population("P_G", dev.basis().G)}, {pulse.end()}, pulse.start);
  return res.values[0][0];
}

PiCalibration calibrate_pi_pulse(const Device& dev, double duration, double gradient_power_ratio) {
  if (!(duration > 0)) throw ModelError("pulse duration must be positive");
  auto pg = [&](double omega) {
    const double grad = gradient_power_ratio < 1.0 ? gradient_for_power_ratio(omega, gradient_power_ratio) : 0.0;
    return ground_after_pulse(dev, sideport_pulse(0.0, duration, omega, 0.0, grad));
  };
  // Area pi/2 on the G-D3 element (magnitude Omega) is the ideal pi pulse.
  const double ideal = pi / (2.0 * duration);
  std::vector<double> grid;
  for (int k = 0; k <= 16; ++k) grid.push_back(ideal * (0.4 + 0.1 * k));
  const auto values = parallel_map(grid.size(), dev.settings().jobs, [&](std::size_t k) { return pg(grid[k]); });

  std::size_t k = 1;
  while (k + 1 < grid.size() && !(values[k] <= values[k - 1] && values[k] <= values[k + 1])) ++k;
  if (k + 1 >= grid.size()) throw NumericalError("no pi-pulse minimum within 0.4..2.0 x the ideal amplitude");

  // Golden-section refinement inside the bracketing grid cells.
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = grid[k - 1], b = grid[k + 1];
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = pg(x1), f2 = pg(x2);
  while (b - a > 1e-4 * ideal) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = pg(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = pg(x2);
    }
  }
  PiCalibration cal;
  cal.amplitude = f1 < f2 ? x1 : x2;
  cal.ground_population = std::min(f1, f2);
  return cal;
}

RabiMap rabi_map(const Device& dev, const std::vector<double>& amplitudes, const std::vector<double>& phases,
                 double duration) {
  RabiMap map;
  map.amplitudes = amplitudes;
  map.phases = phases;
  const std::size_t np = phases.size();
  const auto flat = parallel_map(amplitudes.size() * np, dev.settings().jobs, [&](std::size_t i) {
    return ground_after_pulse(dev, sideport_pulse(0.0, duration, amplitudes[i / np], phases[i % np]));
  });
  for (std::size_t a = 0; a < amplitudes.size(); ++a) {
    std::vector<double> row(flat.begin() + static_cast<long>(a * np), flat.begin() + static_cast<long>((a + 1) * np));
    if (dev.settings().shots > 0) apply_shot_noise(row, dev.settings().shots, dev.settings().seed + a);
    map.ground.push_back(std::move(row));
  }
  return map;
}

DecayExperiment t1_experiment(const Device& dev, const std::vector<double>& delays, double pi_amplitude,
                              double duration) {
  if (delays.size() < 4) throw ModelError("t1 experiment needs at least four delays");
  const PulseSequence seq({sideport_pulse(0.0, duration, pi_amplitude, 0.0)});
  std::vector<double> samples;
  for (double d : delays) samples.push_back(duration + d);
  const auto res = evolve(dev.ground_state(), seq, dev.master_equation(), dev.settings().integrator,
                          {population("P_G", dev.basis().G)}, samples, 0.0);
  DecayExperiment out;
  out.delays = delays;
  out.ground = res.values[0];
  out.pi_amplitude = pi_amplitude;
  if (dev.settings().shots > 0) apply_shot_noise(out.ground, dev.settings().shots, dev.settings().seed);
  std::vector<double> excited;
  for (double p : out.ground) excited.push_back(1.0 - p);
  out.fit = fit_exponential(delays, excited, true, 0.0);
  out.T1 = 1.0 / out.fit.params(1);
  return out;
}

RamseyExperiment ramsey_experiment(const Device& dev, double detuning, const std::vector<double>& delays,
                                   double pi_amplitude, double duration) {
  if (delays.size() < 6) throw ModelError("ramsey experiment needs at least six delays");
  const MasterEquation& me = dev.master_equation();
  const auto& settings = dev.settings();
  const Pulse half = sideport_pulse(0.0, duration, pi_amplitude / 2.0, 0.0);

  // Readout operator seen just before the second pulse (carrier phase zero).
  const Matrix readout = heisenberg_propagate(dev.ground_state(), PulseSequence({half}), me,
                                              settings.integrator, 0.0, duration);
  const auto& n = me.occupations();
  // P_G for carrier phase theta: Tr(E U rho U^dag), U = exp(i theta N).
  auto ground_for = [&](double theta, const Matrix& rho) {
    cplx acc = 0.0;
    for (Eigen::Index b = 0; b < rho.cols(); ++b)
      for (Eigen::Index a = 0; a < rho.rows(); ++a)
        if (readout(b, a) != 0.0)
          acc += readout(b, a) * rho(a, b) * std::exp(I * (theta * (n[static_cast<std::size_t>(a)] - n[static_cast<std::size_t>(b)])));
    return acc.real();
  };
  std::vector<double> samples;
  for (double d : delays) samples.push_back(duration + d);
  const Observable plain{"P_G", [&](double t, const Matrix& rho) { return ground_for(detuning * (t - duration), rho); }};
  const Observable flipped{"P_G_pi", [&](double t, const Matrix& rho) {
                             return ground_for(detuning * (t - duration) + pi, rho);
                           }};
  const auto res = evolve(dev.ground_state(), PulseSequence({half}), me, settings.integrator, {plain, flipped},
                          samples, 0.0);
  RamseyExperiment out;
  out.delays = delays;
  out.ground = res.values[0];
  out.ground_shifted = res.values[1];
  if (settings.shots > 0) {
    apply_shot_noise(out.ground, settings.shots, settings.seed);
    apply_shot_noise(out.ground_shifted, settings.shots, settings.seed + 1);
  }
  for (std::size_t k = 0; k < delays.size(); ++k) out.signal.push_back(out.ground[k] - out.ground_shifted[k]);
  out.fit = fit_damped_cosine(delays, out.signal);
  out.T2 = 1.0 / out.fit.params(1);
  out.frequency = out.fit.params(2);
  return out;
}

SpectroscopyMap spectroscopy_second_manifold(const Device& dev, const std::vector<double>& frequencies,
                                             const std::vector<double>& phases, double pi_amplitude,
                                             const SpectroscopySettings& spec, double duration) {
  if (!(spec.pulse_length > 0)) throw ModelError("spectroscopy pulse length must be positive");
  SpectroscopyMap map;
  map.frequencies = frequencies;
  map.phases = phases;
  const double amp = spec.amplitude > 0 ? spec.amplitude : pi_amplitude;
  const double pi_grad = spec.power_ratio < 1.0 ? gradient_for_power_ratio(pi_amplitude, spec.power_ratio) : 0.0;
  const double sp_grad = spec.power_ratio < 1.0 ? gradient_for_power_ratio(amp, spec.power_ratio) : 0.0;
  const double frame = dev.config().frame;
  const std::size_t np = phases.size();
  const auto flat = parallel_map(frequencies.size() * np, dev.settings().jobs, [&](std::size_t i) {
    Pulse probe = sideport_pulse(duration, spec.pulse_length, amp, phases[i % np], sp_grad);
    probe.detuning = frequencies[i / np] - frame;
    const PulseSequence seq({sideport_pulse(0.0, duration, pi_amplitude, 0.0, pi_grad), probe});
    const auto res = evolve(dev.ground_state(), seq, dev.master_equation(), dev.settings().integrator,
                            {population("P_G", dev.basis().G)}, {probe.end()}, 0.0);
    return res.values[0][0];
  });
  for (std::size_t f = 0; f < frequencies.size(); ++f) {
    map.ground.emplace_back(flat.begin() + static_cast<long>(f * np), flat.begin() + static_cast<long>((f + 1) * np));
  }
  return map;
}

std::vector<LifetimePoint> lifetime_vs_frequency(const SystemConfig& pair_cfg, const std::vector<double>& omegas,
                                                 const ExperimentSettings& settings) {
  if (pair_cfg.n_sites() != 2) throw ModelError("lifetime sweep needs a two-site pair");
  const FockSpace space(2, settings.levels_per_site, FockSpace::default_max_dim, settings.max_excitations);
  const double distance = std::abs(pair_cfg.transmons[0].x - pair_cfg.transmons[1].x);
  return parallel_map(omegas.size(), settings.jobs, [&](std::size_t k) {
    SystemConfig cfg = pair_cfg;
    cfg.coupling_mode = CouplingMode::exact_delay;
    cfg.frame = 0.0;
    for (auto& t : cfg.transmons) t.omega = omegas[k];
    validate(cfg);

    // Darkest one-excitation eigenstate of the pair.
    const auto states = one_excitation_eigen(cfg, space);
    const auto darkest = std::min_element(states.begin(), states.end(), [](const auto& a, const auto& b) {
      return a.eigenvalue.imag() > b.eigenvalue.imag();
    });
    LifetimePoint p;
    p.omega = omegas[k];
    p.phase = propagation_phase(cfg.geometry, omegas[k], distance);
    p.predicted_decay = -2.0 * darkest->eigenvalue.imag();

    const SystemConfig framed = rotating_frame(cfg, omegas[k]);
    const MasterEquation me(space, lindblad_terms(framed, space));
    double rate_scale = p.predicted_decay;
    for (const auto& t : cfg.transmons) rate_scale += 0.5 * t.kappa_phi;
    const double t_max = 3.0 / std::max(rate_scale, 1.0);
    std::vector<double> samples;
    for (int s = 1; s <= 40; ++s) samples.push_back(t_max * s / 40.0);
    const Matrix rho0 = pure_state(darkest->state);
    const auto res = evolve(rho0, PulseSequence{}, me, settings.integrator,
                            {population("P_G", space.basis_state({0, 0}))}, samples, 0.0);
    std::vector<double> excited;
    for (double v : res.values[0]) excited.push_back(1.0 - v);
    p.fit = fit_exponential(samples, excited, true, 0.0);
    p.T1 = 1.0 / p.fit.params(1);
    return p;
  });
}

std::vector<PurityTrace> purity_leakage_scan(const SystemConfig& cfg, const std::vector<double>& gammas,
                                             const std::vector<double>& amplitudes, const std::vector<double>& times,
                                             const ExperimentSettings& settings) {
  if (times.size() < 8) throw ModelError("purity scan needs at least eight time samples");
  const std::size_t na = amplitudes.size();
  ExperimentSettings serial = settings;
  serial.jobs = 1;
  return parallel_map(gammas.size() * na, settings.jobs, [&](std::size_t i) {
    SystemConfig c = cfg;
    for (auto& t : c.transmons) {
      t.gamma = gammas[i / na];
      t.gamma_nr = 0.0;
      t.kappa_phi = 0.0;
    }
    c.K_phi = 0.0;
    const Device dev(c, serial);
    Pulse drive = sideport_pulse(0.0, times.back(), amplitudes[i % na], 0.0, 0.0, EnvelopeShape::rectangular);
    const auto res = evolve(dev.ground_state(), PulseSequence({drive}), dev.master_equation(), settings.integrator,
                            {population("P_D3", dev.basis().D3), purity_observable()}, times, 0.0);
    PurityTrace tr;
    tr.gamma = gammas[i / na];
    tr.omega = amplitudes[i % na];
    tr.times = times;
    tr.dark_population = res.values[0];
    tr.purity = res.values[1];
    tr.fit = fit_damped_cosine(times, tr.dark_population);
    tr.damping_rate = tr.fit.params(1);
    double loss = 0.0;
    for (double p : tr.purity) loss += 1.0 - p;
    tr.purity_loss = loss / static_cast<double>(tr.purity.size());
    return tr;
  });
}

ReducedDecay reduced_model_decay(const ReducedModel& model, const IntegratorSettings& integrator) {
  const FockSpace space(1, 4);
  const Matrix h = reduced_hamiltonian(model);
  const auto jumps = reduced_jumps(model);
  LindbladTerms terms;
  Matrix h_eff = h;
  for (const auto& l : jumps) h_eff -= 0.5 * I * (l.adjoint() * l);
  terms.h_eff = ComplexOperator(space, h_eff);
  for (const auto& l : jumps) terms.jumps.emplace_back(space, l);
  terms.dephasing_weights = RealMatrix::Zero(4, 4);
  const MasterEquation me(space, terms);

  ReducedDecay out;
  out.predicted = adiabatic_elimination(model.omega_tilde, model.U_tilde, model.gamma_f);
  const double fast = std::max(model.gamma_f, std::abs(model.U_tilde));
  const double t_max = 3.0 / out.predicted.dark_decay;
  const double t_start = std::min(0.1 * t_max, 20.0 / fast);
  std::vector<double> samples;
  for (int s = 0; s < 60; ++s) samples.push_back(t_start + (t_max - t_start) * s / 59.0);
  Vector d3 = Vector::Zero(4);
  d3(reduced_D3) = 1.0;
  const auto res = evolve(pure_state(d3), PulseSequence{}, me, integrator, {population("P_D3", d3)}, samples, 0.0);
  out.fit = fit_exponential(samples, res.values[0], true, 0.0);
  out.fitted_rate = out.fit.params(1);
  return out;
}

void apply_shot_noise(std::vector<double>& populations, unsigned shots, std::uint64_t seed) {
  if (shots == 0) return;
  std::mt19937_64 rng(seed);
  for (double& p : populations) {
    std::binomial_distribution<unsigned> draw(shots, std::clamp(p, 0.0, 1.0));
    p = static_cast<double>(draw(rng)) / shots;
  }
}

}  // namespace wgqed
