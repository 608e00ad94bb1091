#include "wgqed/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "wgqed/config.hpp"
#include "wgqed/experiments.hpp"
#include "wgqed/spectra.hpp"
#include "wgqed/waveguide.hpp"

#ifndef WGQED_VERSION
#define WGQED_VERSION "0.0.0"
#endif

namespace wgqed {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string out_dir = ".";
  std::size_t jobs = 1;
  double rtol = 1e-7;
  double atol = 1e-10;
  std::uint64_t seed = 0;
  unsigned shots = 0;
  std::vector<std::size_t> sites;
  // Subcommand extras.
  std::optional<double> detuning_mhz;
  double gamma_mhz = 28.0, J_mhz = 45.0, U_mhz = 218.0;
  double gamma_nr_khz = 15.0, kappa_khz = 100.0, K_khz = 437.0;
};

// Collects output files and writes each one atomically.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw IoError("cannot create output directory " + dir_.string());
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path target = dir_ / name;
    const fs::path tmp = dir_ / (name + ".tmp");
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) throw IoError("cannot write " + tmp.string());
      f << content;
      if (!f) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
    files_.push_back(name);
  }

  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

class Csv {
 public:
  explicit Csv(std::initializer_list<std::string> header) {
    ss_ << std::setprecision(12);
    bool first = true;
    for (const auto& h : header) {
      ss_ << (first ? "" : ",") << h;
      first = false;
    }
    ss_ << '\n';
  }
  template <typename... T>
  void row(const T&... values) {
    bool first = true;
    ((ss_ << (first ? "" : ",") << values, first = false), ...);
    ss_ << '\n';
  }
  std::string str() const { return ss_.str(); }

 private:
  std::ostringstream ss_;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json fit_json(const FitResult& f) {
  return {{"rms", f.rms}, {"converged", f.converged}, {"flagged", f.flagged}, {"iterations", f.iterations}};
}

fs::path resolve_config(const std::string& name) {
  if (name.empty()) throw ConfigError("", "--config is required");
  if (fs::exists(name)) return name;
  const fs::path bundled = bundled_config_dir() / name;
  if (fs::exists(bundled)) return bundled;
  throw ConfigError("", "config file not found: " + name);
}

SystemConfig chosen_sites(const RunConfig& rc, const Options& opt) {
  if (opt.sites.empty()) return rc.system;
  for (auto s : opt.sites) {
    if (s >= rc.system.n_sites()) throw ConfigError("", "--sites index out of range");
  }
  return select_sites(rc.system, opt.sites);
}

ExperimentSettings experiment_settings(const RunConfig& rc, const Options& opt) {
  ExperimentSettings s;
  s.integrator.rel_tol = opt.rtol;
  s.integrator.abs_tol = opt.atol;
  s.levels_per_site = rc.levels_per_site;
  s.jobs = opt.jobs;
  s.shots = opt.shots;
  s.seed = opt.seed;
  return s;
}

bool identical_transmons(const SystemConfig& cfg) {
  for (const auto& t : cfg.transmons) {
    const auto& r = cfg.transmons.front();
    if (t.omega != r.omega || t.gamma != r.gamma || t.anharmonicity != r.anharmonicity) return false;
  }
  return true;
}

// --- subcommands -----------------------------------------------------------

json cmd_spectrum(const RunConfig& rc, const Options& opt, Outputs& out, std::ostream& log) {
  const SystemConfig cfg = chosen_sites(rc, opt);
  const FockSpace space(cfg.n_sites(), rc.levels_per_site);
  const auto h = effective_hamiltonian(cfg, space, false);
  EffectiveSpectrum spec = spectrum(h, space);
  const bool four = cfg.n_sites() == 4;
  if (four) label_symmetries(spec, space, identical_transmons(cfg) ? ideal_symmetry_eps : asymmetric_symmetry_eps);

  std::map<std::pair<int, std::size_t>, std::string> names;
  json naming = nullptr;
  if (four) {
    try {
      for (const auto& [name, st] : identify_named_states(spec, space, naming_reference(cfg))) {
        for (const auto& e : spec.manifolds[static_cast<std::size_t>(st.manifold)]) {
          if (e.energy == st.energy && e.decay == st.decay) names[{e.manifold, e.index}] = name;
        }
      }
      naming = "ok";
    } catch (const ModelError& e) {
      // Naming is a convenience; asymmetric devices may not admit it.
      log << "warning: state naming skipped: " << e.what() << '\n';
      naming = e.what();
    }
  }

  Csv csv({"manifold", "index", "E_over_2pi_GHz", "Gamma_over_2pi_MHz", "pair_symmetry", "within_pair_symmetry",
           "name"});
  for (const auto* st : spec.all()) {
    const auto it = names.find({st->manifold, st->index});
    csv.row(st->manifold, st->index, to_ghz(st->energy), to_mhz(st->decay) + 0.0, to_string(st->pair_symmetry),
            to_string(st->within_pair_symmetry), it == names.end() ? "" : it->second);
  }
  out.write("spectrum.csv", csv.str());

  const auto wc = waveguide_couplings(cfg);
  json budgets = json::array();
  for (int n = 0; n < static_cast<int>(spec.manifolds.size()); ++n) {
    const auto b = decay_budget(spec, h, space, n);
    budgets.push_back({{"manifold", n}, {"sum_Gamma_over_2pi_MHz", to_mhz(b.sum_decay)},
                       {"trace_Gamma_over_2pi_MHz", to_mhz(b.trace_decay)}});
  }
  return {{"states", spec.size()},
          {"worst_condition", spec.worst_condition},
          {"ill_conditioned", spec.ill_conditioned},
          {"markov_parameter", wc.markov_parameter},
          {"decay_budget", budgets},
          {"naming", naming}};
}

json cmd_transmission(const RunConfig& rc, const Options& opt, Outputs& out, std::ostream&) {
  std::vector<std::size_t> sites = opt.sites.empty() ? rc.transmission.sites : opt.sites;
  SystemConfig cfg = rc.system;
  if (!sites.empty()) {
    for (auto s : sites)
      if (s >= cfg.n_sites()) throw ConfigError("/experiments/transmission/sites", "site index out of range");
    cfg = select_sites(rc.system, sites);
  }
  double lo = cfg.transmons.front().omega, hi = lo, sum_gamma = 0.0, min_gamma = cfg.transmons.front().gamma;
  for (const auto& t : cfg.transmons) {
    lo = std::min(lo, t.omega);
    hi = std::max(hi, t.omega);
    sum_gamma += t.gamma;
    min_gamma = std::min(min_gamma, t.gamma);
  }
  double max_j = 0.0;
  for (const auto& [k, v] : cfg.direct) max_j = std::max(max_j, std::abs(v));
  std::vector<double> omegas = rc.transmission.frequencies;
  if (omegas.empty()) {
    const double a = lo - max_j - 3.0 * sum_gamma, b = hi + max_j + 3.0 * sum_gamma;
    for (int k = 0; k <= 400; ++k) omegas.push_back(a + (b - a) * k / 400.0);
  }
  TransmissionSettings ts;
  ts.probe_amplitude = rc.transmission.probe_amplitude > 0 ? rc.transmission.probe_amplitude : std::sqrt(2e-3 * min_gamma);
  ts.levels_per_site = rc.levels_per_site;
  ts.jobs = opt.jobs;
  const auto pts = transmission_spectrum(cfg, omegas, ts);

  Csv csv({"omega_over_2pi_GHz", "t_re", "t_im", "abs_t_squared", "max_occupation"});
  std::vector<double> x, y;
  for (const auto& p : pts) {
    csv.row(to_ghz(p.omega), p.t.real(), p.t.imag(), std::norm(p.t), p.max_occupation);
    x.push_back(p.omega);
    y.push_back(std::norm(p.t));
  }
  out.write("transmission.csv", csv.str());
  const FitResult fit = fit_lorentzian_dip(x, y);
  return {{"sites", cfg.n_sites()},
          {"probe_amplitude", ts.probe_amplitude},
          {"fwhm_over_2pi_MHz", to_mhz(fit.params(2))},
          {"center_over_2pi_GHz", to_ghz(fit.params(1))},
          {"sum_gamma_over_2pi_MHz", to_mhz(sum_gamma)},
          {"fit", fit_json(fit)}};
}

json cmd_rabi(const RunConfig& rc, const Options& opt, Outputs& out, std::ostream&) {
  const Device dev(rc.system, experiment_settings(rc, opt));
  const auto map = rabi_map(dev, rc.rabi.amplitudes, rc.rabi.phases, rc.rabi.pulse_length);
  Csv csv({"Omega_over_2pi_MHz", "phi_rad", "P_G"});
  for (std::size_t a = 0; a < map.amplitudes.size(); ++a)
    for (std::size_t p = 0; p < map.phases.size(); ++p) csv.row(to_mhz(map.amplitudes[a]), map.phases[p], map.ground[a][p]);
  out.write("rabi_map.csv", csv.str());
  return {{"pulse_ns", rc.rabi.pulse_length * 1e9}, {"dark_frequency_over_2pi_GHz", to_ghz(dev.dark_frequency())}};
}

json cmd_t1(const RunConfig& rc, const Options& opt, Outputs& out, std::ostream&) {
  const Device dev(rc.system, experiment_settings(rc, opt));
  const auto cal = calibrate_pi_pulse(dev, rc.t1.pulse_length);
  const auto res = t1_experiment(dev, rc.t1.delays, cal.amplitude, rc.t1.pulse_length);
  Csv csv({"delay_us", "P_G"});
  for (std::size_t k = 0; k < res.delays.size(); ++k) csv.row(res.delays[k] * 1e6, res.ground[k]);
  out.write("t1.csv", csv.str());
  json s = {{"T1_us", res.T1 * 1e6},
            {"pi_amplitude_over_2pi_MHz", to_mhz(cal.amplitude)},
            {"pi_ground_population", cal.ground_population},
            {"fit", fit_json(res.fit)}};
  if (identical_transmons(rc.system)) {
    const auto& t = rc.system.transmons.front();
    s["closed_form_T1_us"] = 1e6 / t1_rate(t.gamma, t.gamma_nr, t.kappa_phi);
  }
  return s;
}

json cmd_ramsey(const RunConfig& rc, const Options& opt, Outputs& out, std::ostream&) {
  const Device dev(rc.system, experiment_settings(rc, opt));
  const double detuning = opt.detuning_mhz ? mhz(*opt.detuning_mhz) : rc.ramsey.detuning;
  const auto cal = calibrate_pi_pulse(dev, rc.ramsey.pulse_length);
  const auto res = ramsey_experiment(dev, detuning, rc.ramsey.delays, cal.amplitude, rc.ramsey.pulse_length);
  Csv csv({"delay_us", "P_G", "P_G_shifted", "signal"});
  for (std::size_t k = 0; k < res.delays.size(); ++k)
    csv.row(res.delays[k] * 1e6, res.ground[k], res.ground_shifted[k], res.signal[k]);
  out.write("ramsey.csv", csv.str());
  double rate = 0.0;
  for (const auto& t : rc.system.transmons) rate += t.gamma_nr + t.kappa_phi;
  rate /= static_cast<double>(rc.system.n_sites());
  return {{"T2_us", res.T2 * 1e6},
          {"frequency_MHz", res.frequency / 1e6},
          {"detuning_MHz", to_mhz(detuning)},
          {"closed_form_T2_us", 1e6 / t2_rate(rate / 2.0, rate / 2.0, rc.system.K_phi)},
          {"pi_amplitude_over_2pi_MHz", to_mhz(cal.amplitude)},
          {"fit", fit_json(res.fit)}};
}

json cmd_spectroscopy(const RunConfig& rc, const Options& opt, Outputs& out, std::ostream&) {
  const Device dev(rc.system, experiment_settings(rc, opt));
  std::vector<double> freqs = rc.spectroscopy.frequencies;
  if (freqs.empty()) {
    const double c = dev.dark_frequency();
    for (int k = 0; k <= 70; ++k) freqs.push_back(c + mhz(-300.0 + 6.0 * k));
  }
  const auto cal = calibrate_pi_pulse(dev, default_pulse_length, rc.spectroscopy.power_ratio);
  SpectroscopySettings s;
  s.pulse_length = rc.spectroscopy.pulse_length;
  s.amplitude = rc.spectroscopy.amplitude;
  s.power_ratio = rc.spectroscopy.power_ratio;
  const auto map = spectroscopy_second_manifold(dev, freqs, rc.spectroscopy.phases, cal.amplitude, s);
  Csv csv({"omega_over_2pi_GHz", "phi_rad", "P_G"});
  for (std::size_t f = 0; f < map.frequencies.size(); ++f)
    for (std::size_t p = 0; p < map.phases.size(); ++p) csv.row(to_ghz(map.frequencies[f]), map.phases[p], map.ground[f][p]);
  out.write("spectroscopy.csv", csv.str());
  return {{"pi_amplitude_over_2pi_MHz", to_mhz(cal.amplitude)},
          {"dark_frequency_over_2pi_GHz", to_ghz(dev.dark_frequency())},
          {"power_ratio", s.power_ratio}};
}

json cmd_lifetime(const RunConfig& rc, const Options& opt, Outputs& out, std::ostream&) {
  const auto sites = opt.sites.empty() ? rc.lifetime.sites : opt.sites;
  if (sites.size() != 2) throw ConfigError("/experiments/lifetime_sweep/sites", "expected exactly two sites");
  for (auto s : sites)
    if (s >= rc.system.n_sites()) throw ConfigError("/experiments/lifetime_sweep/sites", "site index out of range");
  const SystemConfig pair = select_sites(rc.system, sites);
  const double w_pi = decoherence_free_frequency(pair.geometry);
  std::vector<double> omegas = rc.lifetime.frequencies;
  if (omegas.empty()) {
    for (int k = 0; k <= 20; ++k) omegas.push_back(w_pi + ghz(-0.1 + 0.01 * k));
  }
  const auto pts = lifetime_vs_frequency(pair, omegas, experiment_settings(rc, opt));
  Csv csv({"omega_over_2pi_GHz", "phase_rad", "T1_us", "predicted_Gamma_over_2pi_kHz", "fit_rms"});
  std::size_t best = 0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    csv.row(to_ghz(pts[k].omega), pts[k].phase, pts[k].T1 * 1e6, to_khz(pts[k].predicted_decay), pts[k].fit.rms);
    if (pts[k].T1 > pts[best].T1) best = k;
  }
  out.write("lifetime.csv", csv.str());
  return {{"argmax_over_2pi_GHz", to_ghz(pts[best].omega)},
          {"max_T1_us", pts[best].T1 * 1e6},
          {"decoherence_free_over_2pi_GHz", to_ghz(w_pi)}};
}

json cmd_purity(const RunConfig& rc, const Options& opt, Outputs& out, std::ostream&) {
  const auto traces =
      purity_leakage_scan(rc.system, rc.purity.gammas, rc.purity.amplitudes, rc.purity.times, experiment_settings(rc, opt));
  Csv csv({"gamma_over_2pi_MHz", "Omega_over_2pi_MHz", "t_us", "P_D3", "purity"});
  json summary = json::array();
  for (const auto& tr : traces) {
    for (std::size_t k = 0; k < tr.times.size(); ++k)
      csv.row(to_mhz(tr.gamma), to_mhz(tr.omega), tr.times[k] * 1e6, tr.dark_population[k], tr.purity[k]);
    summary.push_back({{"gamma_over_2pi_MHz", to_mhz(tr.gamma)},
                       {"Omega_over_2pi_MHz", to_mhz(tr.omega)},
                       {"damping_rate_per_us", tr.damping_rate * 1e-6},
                       {"purity_loss", tr.purity_loss},
                       {"fit", fit_json(tr.fit)}});
  }
  out.write("purity.csv", csv.str());
  return {{"traces", summary}};
}

json cmd_oracle(const Options& opt, Outputs& out, std::ostream&) {
  const double g = mhz(opt.gamma_mhz), J = mhz(opt.J_mhz), U = mhz(opt.U_mhz);
  const double gnr = khz(opt.gamma_nr_khz), kp = khz(opt.kappa_khz), K = khz(opt.K_khz);
  const double t1 = t1_rate(g, gnr, kp), t2 = t2_rate(gnr, kp, K);

  // Reduced-model curves against gamma_f / U~ at Omega~ = U~ / 20.
  const double u = mhz(15.0), w = u / 20.0;
  Csv csv({"gamma_f_over_U", "stark_shift_over_2pi_kHz", "dark_decay_over_2pi_kHz"});
  for (int k = 0; k <= 200; ++k) {
    const double ratio = std::pow(10.0, -1.0 + 2.5 * k / 200.0);
    const auto r = adiabatic_elimination(w, u, ratio * u);
    csv.row(ratio, to_khz(r.stark_shift), to_khz(r.dark_decay));
  }
  out.write("oracle_adiabatic.csv", csv.str());
  const auto peak = adiabatic_elimination(w, u, 2.0 * u);

  const auto tab = analytic_two_excitation(g, J, U);
  auto c = [](cplx z) { return json::array({z.real(), z.imag()}); };
  return {{"T1_us", 1e6 / t1},
          {"T2_us", 1e6 / t2},
          {"one_over_2pi_T1_kHz", to_khz(t1)},
          {"two_excitation_coefficients",
           {{"c5", c(tab.c5)}, {"c7", c(tab.c7)}, {"c8", c(tab.c8)}, {"c10", c(tab.c10)}, {"c11", c(tab.c11)}, {"c12", c(tab.c12)}}},
          {"adiabatic_peak", {{"gamma_f_over_U", 2.0}, {"dark_decay_over_2pi_kHz", to_khz(peak.dark_decay)}}},
          {"decoherence_free_over_2pi_GHz", to_ghz(decoherence_free_frequency(WaveguideGeometry{}))}};
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Collective-state simulator for transmons on a waveguide", "wgqed"};
  app.require_subcommand(1);
  Options opt;
  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opt.config, "Config file (JSON); bundled fixtures resolve by name");
    if (needs_config) c->required();
    sub->add_option("--out-dir", opt.out_dir, "Output directory");
    sub->add_option("--jobs", opt.jobs, "Parallel sweep workers")->check(CLI::PositiveNumber);
    sub->add_option("--rtol", opt.rtol, "Integrator relative tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--atol", opt.atol, "Integrator absolute tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--seed", opt.seed, "Shot-noise seed");
    sub->add_option("--shots", opt.shots, "Binomial readout shots (0: exact)");
    sub->add_option("--sites", opt.sites, "Subset of transmon indices");
  };
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"spectrum", "Eigenstates of the effective Hamiltonian"},
      {"transmission", "Weak-probe waveguide transmission"},
      {"rabi", "Rabi map of P_G against amplitude and phase"},
      {"t1", "Dark-state relaxation"},
      {"ramsey", "Dark-state coherence with virtual detuning"},
      {"spectroscopy", "Second-manifold spectroscopy after a pi pulse"},
      {"lifetime-sweep", "Pair dark-state lifetime against frequency"},
      {"purity-scan", "Rabi damping and purity against gamma"},
      {"oracle", "Closed-form reference values"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    common(sub, name != "oracle");
    subs[name] = sub;
  }
  subs["ramsey"]->add_option("--detuning-MHz", opt.detuning_mhz, "Virtual detuning Delta/2pi");
  auto* oracle = subs["oracle"];
  oracle->add_option("--gamma-MHz", opt.gamma_mhz);
  oracle->add_option("--J-MHz", opt.J_mhz);
  oracle->add_option("--U-MHz", opt.U_mhz);
  oracle->add_option("--gamma-nr-kHz", opt.gamma_nr_khz);
  oracle->add_option("--kappa-phi-kHz", opt.kappa_khz);
  oracle->add_option("--K-phi-kHz", opt.K_khz);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return exit_config;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    const auto start = std::chrono::steady_clock::now();
    std::optional<RunConfig> rc;
    if (!opt.config.empty()) rc = load_config(resolve_config(opt.config));
    Outputs files(opt.out_dir);
    json summary;
    if (cmd == "spectrum") summary = cmd_spectrum(*rc, opt, files, err);
    else if (cmd == "transmission") summary = cmd_transmission(*rc, opt, files, err);
    else if (cmd == "rabi") summary = cmd_rabi(*rc, opt, files, err);
    else if (cmd == "t1") summary = cmd_t1(*rc, opt, files, err);
    else if (cmd == "ramsey") summary = cmd_ramsey(*rc, opt, files, err);
    else if (cmd == "spectroscopy") summary = cmd_spectroscopy(*rc, opt, files, err);
    else if (cmd == "lifetime-sweep") summary = cmd_lifetime(*rc, opt, files, err);
    else if (cmd == "purity-scan") summary = cmd_purity(*rc, opt, files, err);
    else summary = cmd_oracle(opt, files, err);

    std::string stem = cmd;
    std::replace(stem.begin(), stem.end(), '-', '_');
    files.write(stem + "_summary.json", dump(summary));
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json manifest = {{"tool", "wgqed"},
                     {"version", WGQED_VERSION},
                     {"subcommand", cmd},
                     {"config", opt.config},
                     {"config_hash", rc ? rc->hash : ""},
                     {"jobs", opt.jobs},
                     {"rtol", opt.rtol},
                     {"atol", opt.atol},
                     {"seed", opt.seed},
                     {"shots", opt.shots},
                     {"timestamp", utc_timestamp()},
                     {"wall_time_s", wall}};
    manifest["outputs"] = files.files();
    manifest["outputs"].push_back("manifest.json");
    files.write("manifest.json", dump(manifest));
    out << dump(summary);
    return exit_ok;
  } catch (const ConfigError& e) {
    err << "config error at " << e.what() << '\n';
    return exit_config;
  } catch (const ModelError& e) {
    err << "invalid model: " << e.what() << '\n';
    return exit_config;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return exit_io;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_numerical;
  }
}

}  // namespace wgqed
