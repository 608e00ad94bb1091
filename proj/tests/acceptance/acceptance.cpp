// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
// if any fails. Everything here runs against the bundled fixtures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "support.hpp"
#include "wgqed/experiments.hpp"
#include "wgqed/linalg.hpp"
#include "wgqed/spectra.hpp"
#include "wgqed/waveguide.hpp"

using namespace wgqed;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int n, const std::string& title, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("%s %d %s:%s (%.1f s)\n", o.pass ? "PASS" : "FAIL", n, title.c_str(), o.detail.str().c_str(), secs);
  std::fflush(stdout);
}

SystemConfig fixture(const std::string& name) { return load_config(test::fixture(name)).system; }

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return v;
}

const EigenState& closest(const EffectiveSpectrum& spec, int manifold, const Vector& ref) {
  const auto& m = spec.manifolds[static_cast<std::size_t>(manifold)];
  return *std::max_element(m.begin(), m.end(), [&](const auto& a, const auto& b) {
    return fidelity(a.amplitudes, ref) < fidelity(b.amplitudes, ref);
  });
}

double sum_gamma(const SystemConfig& cfg) {
  double s = 0.0;
  for (const auto& t : cfg.transmons) s += t.gamma;
  return s;
}

}  // namespace

int main() {
  criterion(1, "bright-state decay equals the summed emitter rates", [](Outcome& o) {
    const auto cfg = fixture("paper_tableS1.cfg");
    const FockSpace s(4, 3);
    const auto spec = spectrum(effective_hamiltonian(cfg, s, false), s);
    const auto& m1 = spec.manifolds[1];
    const auto b4 = std::max_element(m1.begin(), m1.end(), [](const auto& a, const auto& b) { return a.decay < b.decay; });
    const double rel = b4->decay / sum_gamma(cfg) - 1.0;
    o.detail << " Gamma(B4)/2pi = " << to_mhz(b4->decay) << " MHz, sum gamma/2pi = " << to_mhz(sum_gamma(cfg))
             << " MHz, deviation " << 100 * rel << "%";
    o.require(std::abs(rel) < 0.05, "within 5%");
    o.require(fidelity(b4->amplitudes, collective_states(s).B4) > 0.9, "state is B4-like");
  });

  criterion(2, "dark-state protection ratio", [](Outcome& o) {
    auto cfg = test::with_rates(fixture("ideal_identical.cfg"), 0.0, 0.0, 0.0);
    cfg.coupling_mode = CouplingMode::fixed_phase;
    cfg.fixed_phase = pi;
    const FockSpace s(4, 3);
    const auto spec = spectrum(effective_hamiltonian(cfg, s, false), s);
    const auto basis = collective_states(s);
    const auto& d3 = closest(spec, 1, basis.D3);
    const auto& b4 = closest(spec, 1, basis.B4);
    const double ratio = d3.decay / b4.decay;
    o.detail << " Gamma(D3)/Gamma(B4) = " << ratio;
    o.require(ratio < 1e-6, "ratio < 1e-6");
  });

  criterion(3, "phase-selective sideport drive", [](Outcome& o) {
    const FockSpace s(4, 3);
    const auto basis = collective_states(s);
    const double omega = mhz(1);
    const auto h0 = drive_hamiltonian({omega, 0.0, 0.0, 0.0}, s).matrix;
    const auto hpi = drive_hamiltonian({omega, pi, 0.0, 0.0}, s).matrix;
    const double bright = std::abs(basis.B4.dot(h0 * basis.G)) / omega;
    const double dark = std::abs(basis.D3.dot(hpi * basis.G)) / omega;
    o.detail << " |<B4|Hd|G>|/Omega at phi=0: " << bright << ", |<D3|Hd|G>|/Omega at phi=pi: " << dark;
    o.require(bright < 1e-10 && dark < 1e-10, "both below 1e-10");
  });

  criterion(4, "Ramsey T2 against the closed form", [](Outcome& o) {
    const auto rc = load_config(test::fixture("ideal_identical.cfg"));
    const Device dev(rc.system, ExperimentSettings{});
    const auto cal = calibrate_pi_pulse(dev);
    const auto r = ramsey_experiment(dev, mhz(9), rc.ramsey.delays, cal.amplitude);
    const double closed = 1 / t2_rate(khz(15), khz(100), khz(437));
    o.detail << " fitted T2 = " << r.T2 * 1e6 << " us (closed form " << closed * 1e6 << " us), fringe "
             << r.frequency / 1e6 << " MHz";
    o.require(std::abs(r.T2 / 0.577e-6 - 1) < 0.03, "0.577 us +- 3%");
    o.require(!r.fit.flagged, "fit accepted");
  });

  criterion(5, "T1 against the closed form across gamma", [](Outcome& o) {
    for (double g : {5.0, 28.0, 100.0}) {
      auto cfg = fixture("ideal_identical.cfg");
      for (auto& t : cfg.transmons) t.gamma = mhz(g);
      const Device dev(cfg, ExperimentSettings{});
      const auto cal = calibrate_pi_pulse(dev);
      const auto r = t1_experiment(dev, linspace(0.2e-6, 10.2e-6, 41), cal.amplitude);
      const double closed = 1 / t1_rate(mhz(g), khz(15), khz(100));
      const double rel = r.T1 / closed - 1;
      o.detail << " gamma/2pi=" << g << " MHz: T1 " << r.T1 * 1e6 << " us vs " << closed * 1e6 << " us;";
      o.require(std::abs(rel) < 0.05, "within 5% at gamma/2pi = " + std::to_string(g) + " MHz");
    }
  });

  criterion(6, "decoherence-free frequency and lifetime peak", [](Outcome& o) {
    const auto rc = load_config(test::fixture("paper_tableS1.cfg"));
    const double w_pi = decoherence_free_frequency(rc.system.geometry);
    o.detail << " omega_pi/2pi = " << to_ghz(w_pi) << " GHz;";
    o.require(std::abs(to_ghz(w_pi) - 7.312) <= 0.016, "7.312 +- 0.016 GHz");
    const auto& freqs = rc.lifetime.frequencies;
    const auto pair = select_sites(rc.system, rc.lifetime.sites);
    const auto pts = lifetime_vs_frequency(pair, freqs, ExperimentSettings{});
    const auto best = std::max_element(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.T1 < b.T1; });
    const double step = freqs[1] - freqs[0];
    o.detail << " argmax at " << to_ghz(best->omega) << " GHz (T1 " << best->T1 * 1e6 << " us), grid step "
             << to_mhz(step) << " MHz";
    o.require(std::abs(best->omega - w_pi) <= step, "argmax within one grid step");
  });

  criterion(7, "two-excitation closed forms and symmetry labels", [](Outcome& o) {
    const auto cfg = test::with_rates(fixture("ideal_identical.cfg"), 0.0, 0.0, 0.0);
    const FockSpace s(4, 3);
    auto spec = spectrum(effective_hamiltonian(cfg, s, false), s);
    label_symmetries(spec, s, ideal_symmetry_eps);
    const auto ref = naming_reference(cfg);
    const auto named = identify_named_states(spec, s, ref);
    const auto closed = two_excitation_states(collective_states(s), analytic_two_excitation(ref.gamma, ref.J, ref.U));
    double worst = 1.0;
    for (const auto& [label, v] : closed) worst = std::min(worst, fidelity(named.at(std::to_string(label)).amplitudes, v));
    o.detail << " worst fidelity 1 - " << 1 - worst << ";";
    o.require(worst > 1 - 1e-8, "fidelity > 1 - 1e-8");
    auto label_of = [&](const std::string& n) {
      const auto& st = named.at(n);
      for (const auto& e : spec.manifolds[2])
        if (e.energy == st.energy && e.decay == st.decay) return e.pair_symmetry;
      return Symmetry::none;
    };
    std::string sym;
    for (const char* n : {"6", "9", "13"}) {
      sym += std::string(" ") + n + ":" + to_string(label_of(n));
      o.require(label_of(n) == Symmetry::symmetric, std::string("|") + n + "> pair-symmetric");
    }
    for (const char* n : {"7", "8", "10", "11"}) {
      sym += std::string(" ") + n + ":" + to_string(label_of(n));
      o.require(label_of(n) == Symmetry::none, std::string("|") + n + "> without pair symmetry");
    }
    o.detail << sym;
  });

  criterion(8, "reduced model against adiabatic elimination", [](Outcome& o) {
    const double u = mhz(15);
    std::vector<double> fitted;
    for (double ratio : {0.5, 2.0, 8.0}) {
      const ReducedModel m{0.0, u / 20, u, ratio * u, 4 * mhz(28)};
      const auto r = reduced_model_decay(m);
      fitted.push_back(r.fitted_rate);
      const double rel = r.fitted_rate / r.predicted.dark_decay - 1;
      o.detail << " gamma_f/U=" << ratio << ": " << to_khz(r.fitted_rate) << " vs " << to_khz(r.predicted.dark_decay)
               << " kHz;";
      o.require(std::abs(rel) < 0.10, "within 10% at gamma_f/U = " + std::to_string(ratio));
    }
    o.require(fitted[1] > fitted[0] && fitted[1] > fitted[2], "largest at gamma_f/U = 2");
    o.require(std::abs(dark_decay_slope(u / 20, u, 2 * u)) < 1e-9, "closed-form turning point at 2");
  });

  criterion(9, "leakage suppression improves with gamma", [](Outcome& o) {
    const auto rc = load_config(test::fixture("ideal_identical.cfg"));
    const auto traces = purity_leakage_scan(rc.system, rc.purity.gammas, rc.purity.amplitudes, rc.purity.times,
                                            ExperimentSettings{});
    for (std::size_t k = 0; k < traces.size(); ++k) {
      o.detail << " gamma/2pi=" << to_mhz(traces[k].gamma) << ": damping " << to_khz(traces[k].damping_rate)
               << " kHz, purity loss " << traces[k].purity_loss << ";";
      if (k > 0) {
        o.require(traces[k].damping_rate < traces[k - 1].damping_rate, "damping decreases");
        o.require(traces[k].purity_loss < traces[k - 1].purity_loss, "purity loss decreases");
      }
    }
  });

  criterion(10, "transmission linewidths", [](Outcome& o) {
    const auto cfg = fixture("paper_tableS1.cfg");
    struct Case {
      const char* name;
      std::vector<std::size_t> sites;
      double gamma_mhz;  // Gamma/2pi, FWHM = 2 Gamma
    };
    for (const Case& c : {Case{"single", {0}, 14.9}, Case{"pair bright", {2, 3}, 30.2},
                          Case{"four bright", {0, 1, 2, 3}, 60.9}}) {
      const auto sub = select_sites(cfg, c.sites);
      double lo = sub.transmons.front().omega, hi = lo;
      for (const auto& t : sub.transmons) {
        lo = std::min(lo, t.omega);
        hi = std::max(hi, t.omega);
      }
      double j = 0.0;
      for (const auto& [k, v] : sub.direct) j = std::max(j, std::abs(v));
      const double span = j + 3 * sum_gamma(sub);
      const auto ws = linspace(lo - span, hi + span, 301);
      TransmissionSettings ts;
      double min_gamma = sub.transmons.front().gamma;
      for (const auto& t : sub.transmons) min_gamma = std::min(min_gamma, t.gamma);
      ts.probe_amplitude = std::sqrt(2e-3 * min_gamma);
      const auto pts = transmission_spectrum(sub, ws, ts);
      std::vector<double> y;
      for (const auto& p : pts) y.push_back(std::norm(p.t));
      const auto fit = fit_lorentzian_dip(ws, y);
      const double fwhm = to_mhz(fit.params(2));
      o.detail << " " << c.name << ": FWHM " << fwhm << " MHz vs " << 2 * c.gamma_mhz << ";";
      o.require(std::abs(fwhm / (2 * c.gamma_mhz) - 1) < 0.10, std::string(c.name) + " within 10%");
    }
  });

  criterion(11, "trajectory, manifold, budget and convergence properties", [](Outcome& o) {
    const auto cfg = fixture("paper_tableS1.cfg");
    // Trajectory invariants under a pi pulse on the measured device.
    const Device dev(cfg, ExperimentSettings{});
    const PulseSequence seq({sideport_pulse(0.0, default_pulse_length, mhz(1), 0.3, mhz(0.2))});
    const auto r = evolve(dev.ground_state(), seq, dev.master_equation(), dev.settings().integrator,
                          {purity_observable()}, linspace(20e-9, 2e-6, 60));
    o.detail << " trace drift " << r.max_trace_drift << ", min eigenvalue " << r.min_eigenvalue << ";";
    o.require(r.max_trace_drift < 1e-6, "trace preserved");
    o.require(r.min_eigenvalue > -1e-6, "positivity");
    o.require(r.max_hermiticity_defect < 1e-8, "hermiticity");
    const auto& pur = r.trace("purity");
    o.require(*std::max_element(pur.begin(), pur.end()) <= 1 + 1e-6, "purity bounded by one");

    // H_eff commutes with N; per-manifold decay budget matches the trace.
    const FockSpace s(4, 3);
    const auto h = effective_hamiltonian(cfg, s, true);
    const double comm = max_abs(commutator(h.matrix, number_ops(s).total.matrix)) / max_abs(h.matrix);
    o.detail << " [H,N] " << comm << ";";
    o.require(comm < 1e-14, "manifold conservation");
    const auto spec = spectrum(h, s);
    for (int n = 0; n <= 4; ++n) {
      const auto b = decay_budget(spec, h, s, n);
      o.require(std::abs(b.sum_decay - b.trace_decay) <= 1e-9 * std::max(1.0, b.trace_decay),
                "decay budget in manifold " + std::to_string(n));
    }

    // Fixed-step Dormand-Prince error shrinks at fifth order.
    const cplx rate{-0.7, 5.0};
    auto err = [&](double h) {
      Vector y = Vector::Ones(1);
      IntegratorSettings st;
      st.rel_tol = st.abs_tol = 1e3;
      st.max_step = st.initial_step = h;
      const std::vector<double> stop{2.0};
      integrate_dopri5([&](double, const Vector& v, Vector& d) { d = rate * v; }, y, 0.0, stop, st,
                       [](double, Vector&) { return false; }, [](std::size_t, double, Vector&) {});
      return std::abs(y(0) - std::exp(rate * 2.0));
    };
    const double order = std::log2(err(0.05) / err(0.025));
    o.detail << " observed order " << order;
    o.require(order > 4.5 && order < 5.6, "fifth-order convergence");
  });

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
