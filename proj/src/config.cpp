#include "wgqed/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace wgqed {

namespace {

using json = nlohmann::json;

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

const json& require(const json& obj, const std::string& path, const std::string& key) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(child(path, key), "required field missing");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

double require_number(const json& obj, const std::string& path, const std::string& key) {
  return number(require(obj, path, key), child(path, key));
}

double optional_number(const json& obj, const std::string& path, const std::string& key, double fallback) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : number(*it, child(path, key));
}

std::size_t index_value(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(path, "expected a non-negative integer");
  return v.get<std::size_t>();
}

// A list of numbers or {"start", "stop", "count"}, scaled into SI units.
std::vector<double> axis(const json& v, const std::string& path, double unit) {
  std::vector<double> out;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], child(path, i)) * unit);
    return out;
  }
  if (!v.is_object()) throw ConfigError(path, "expected a list or a {start, stop, count} range");
  const double a = require_number(v, path, "start");
  const double b = require_number(v, path, "stop");
  const auto& c = require(v, path, "count");
  const std::size_t n = index_value(c, child(path, "count"));
  if (n == 0) throw ConfigError(child(path, "count"), "must be positive");
  for (std::size_t i = 0; i < n; ++i) out.push_back(unit * (n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1)));
  return out;
}

std::vector<double> optional_axis(const json& obj, const std::string& path, const std::string& key, double unit,
                                  std::vector<double> fallback) {
  const auto it = obj.find(key);
  return it == obj.end() ? fallback : axis(*it, child(path, key), unit);
}

std::vector<std::size_t> site_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected a list of site indices");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(index_value(v[i], child(path, i)));
  return out;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

TransmonParams parse_transmon(const json& t, const std::string& path, std::size_t index) {
  if (!t.is_object()) throw ConfigError(path, "expected an object");
  TransmonParams p;
  p.name = "Q" + std::to_string(index + 1);
  if (const auto it = t.find("name"); it != t.end()) {
    if (!it->is_string()) throw ConfigError(child(path, "name"), "expected a string");
    p.name = it->get<std::string>();
  }
  p.omega = ghz(require_number(t, path, "frequency_GHz"));
  p.anharmonicity = mhz(require_number(t, path, "anharmonicity_MHz"));
  p.gamma = mhz(require_number(t, path, "gamma_MHz"));
  p.gamma_nr = khz(optional_number(t, path, "gamma_nr_kHz", 0.0));
  p.kappa_phi = khz(optional_number(t, path, "kappa_phi_kHz", 0.0));
  p.x = 1e-3 * require_number(t, path, "x_mm");
  if (const auto it = t.find("pair"); it != t.end()) {
    p.pair = static_cast<int>(index_value(*it, child(path, "pair")));
  } else {
    p.pair = static_cast<int>(index / 2);
  }
  if (p.omega <= 0) throw ConfigError(child(path, "frequency_GHz"), "must be positive");
  if (p.gamma < 0) throw ConfigError(child(path, "gamma_MHz"), "must be non-negative");
  if (p.gamma_nr < 0) throw ConfigError(child(path, "gamma_nr_kHz"), "must be non-negative");
  if (p.kappa_phi < 0) throw ConfigError(child(path, "kappa_phi_kHz"), "must be non-negative");
  return p;
}

void parse_experiments(const json& e, const std::string& path, RunConfig& rc) {
  if (!e.is_object()) throw ConfigError(path, "expected an object");
  if (const auto it = e.find("rabi"); it != e.end()) {
    const std::string p = child(path, "rabi");
    rc.rabi.amplitudes = optional_axis(*it, p, "amplitudes_MHz", mhz(1.0), rc.rabi.amplitudes);
    rc.rabi.phases = optional_axis(*it, p, "phases_rad", 1.0, rc.rabi.phases);
    rc.rabi.pulse_length = 1e-9 * optional_number(*it, p, "pulse_ns", rc.rabi.pulse_length * 1e9);
  }
  if (const auto it = e.find("t1"); it != e.end()) {
    const std::string p = child(path, "t1");
    rc.t1.delays = optional_axis(*it, p, "delays_us", 1e-6, rc.t1.delays);
    rc.t1.pulse_length = 1e-9 * optional_number(*it, p, "pulse_ns", rc.t1.pulse_length * 1e9);
  }
  if (const auto it = e.find("ramsey"); it != e.end()) {
    const std::string p = child(path, "ramsey");
    rc.ramsey.detuning = mhz(optional_number(*it, p, "detuning_MHz", to_mhz(rc.ramsey.detuning)));
    rc.ramsey.delays = optional_axis(*it, p, "delays_us", 1e-6, rc.ramsey.delays);
    rc.ramsey.pulse_length = 1e-9 * optional_number(*it, p, "pulse_ns", rc.ramsey.pulse_length * 1e9);
  }
  if (const auto it = e.find("spectroscopy"); it != e.end()) {
    const std::string p = child(path, "spectroscopy");
    auto& s = rc.spectroscopy;
    s.frequencies = optional_axis(*it, p, "frequencies_GHz", ghz(1.0), s.frequencies);
    s.phases = optional_axis(*it, p, "phases_rad", 1.0, s.phases);
    s.pulse_length = 1e-6 * optional_number(*it, p, "pulse_us", s.pulse_length * 1e6);
    s.amplitude = mhz(optional_number(*it, p, "amplitude_MHz", to_mhz(s.amplitude)));
    s.power_ratio = optional_number(*it, p, "power_ratio", s.power_ratio);
    if (!(s.power_ratio > 0 && s.power_ratio <= 1)) throw ConfigError(child(p, "power_ratio"), "must lie in (0, 1]");
  }
  if (const auto it = e.find("lifetime_sweep"); it != e.end()) {
    const std::string p = child(path, "lifetime_sweep");
    if (const auto s = it->find("sites"); s != it->end()) rc.lifetime.sites = site_list(*s, child(p, "sites"));
    if (rc.lifetime.sites.size() != 2) throw ConfigError(child(p, "sites"), "expected exactly two sites");
    rc.lifetime.frequencies = optional_axis(*it, p, "frequencies_GHz", ghz(1.0), rc.lifetime.frequencies);
  }
  if (const auto it = e.find("purity_scan"); it != e.end()) {
    const std::string p = child(path, "purity_scan");
    rc.purity.gammas = optional_axis(*it, p, "gammas_MHz", mhz(1.0), rc.purity.gammas);
    rc.purity.amplitudes = optional_axis(*it, p, "amplitudes_MHz", mhz(1.0), rc.purity.amplitudes);
    rc.purity.times = optional_axis(*it, p, "times_us", 1e-6, rc.purity.times);
  }
  if (const auto it = e.find("transmission"); it != e.end()) {
    const std::string p = child(path, "transmission");
    if (const auto s = it->find("sites"); s != it->end()) rc.transmission.sites = site_list(*s, child(p, "sites"));
    rc.transmission.frequencies = optional_axis(*it, p, "frequencies_GHz", ghz(1.0), rc.transmission.frequencies);
    rc.transmission.probe_amplitude = mhz(optional_number(*it, p, "probe_amplitude_MHz", 0.0));
  }
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "top level must be an object");

  RunConfig rc;
  auto& sys = rc.system;
  const auto& ts = require(doc, "", "transmons");
  if (!ts.is_array() || ts.empty()) throw ConfigError("/transmons", "expected a non-empty list");
  for (std::size_t i = 0; i < ts.size(); ++i) sys.transmons.push_back(parse_transmon(ts[i], child("/transmons", i), i));

  if (const auto it = doc.find("couplings"); it != doc.end()) {
    if (!it->is_array()) throw ConfigError("/couplings", "expected a list");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string p = child("/couplings", i);
      const auto sites = site_list(require((*it)[i], p, "sites"), child(p, "sites"));
      if (sites.size() != 2 || sites[0] == sites[1]) throw ConfigError(child(p, "sites"), "expected two distinct sites");
      if (sites[0] >= sys.n_sites() || sites[1] >= sys.n_sites()) throw ConfigError(child(p, "sites"), "site out of range");
      sys.set_coupling(sites[0], sites[1], mhz(require_number((*it)[i], p, "J_MHz")));
    }
  }
  sys.K_phi = khz(optional_number(doc, "", "global_dephasing_kHz", 0.0));
  if (sys.K_phi < 0) throw ConfigError("/global_dephasing_kHz", "must be non-negative");

  if (const auto it = doc.find("geometry"); it != doc.end()) {
    sys.geometry.broad_wall = 1e-3 * optional_number(*it, "/geometry", "broad_wall_mm", sys.geometry.broad_wall * 1e3);
    sys.geometry.pair_separation =
        1e-3 * optional_number(*it, "/geometry", "pair_separation_mm", sys.geometry.pair_separation * 1e3);
    if (!(sys.geometry.broad_wall > 0)) throw ConfigError("/geometry/broad_wall_mm", "must be positive");
    if (!(sys.geometry.pair_separation > 0)) throw ConfigError("/geometry/pair_separation_mm", "must be positive");
  }
  if (const auto it = doc.find("coupling_mode"); it != doc.end()) {
    const std::string mode = it->is_string() ? it->get<std::string>() : "";
    if (mode == "fixed_phase") {
      sys.coupling_mode = CouplingMode::fixed_phase;
    } else if (mode == "exact_delay") {
      sys.coupling_mode = CouplingMode::exact_delay;
    } else {
      throw ConfigError("/coupling_mode", "expected \"fixed_phase\" or \"exact_delay\"");
    }
  }
  sys.fixed_phase = optional_number(doc, "", "fixed_phase_rad", pi);

  if (const auto it = doc.find("truncation"); it != doc.end()) {
    if (const auto l = it->find("levels_per_site"); l != it->end()) {
      rc.levels_per_site = index_value(*l, "/truncation/levels_per_site");
      if (rc.levels_per_site < 2) throw ConfigError("/truncation/levels_per_site", "must be at least 2");
    }
  }

  // Defaults for the experiment blocks.
  rc.rabi.amplitudes = linspace(0.0, mhz(3.0), 31);
  rc.rabi.phases = linspace(0.0, two_pi, 25);
  rc.t1.delays = linspace(0.2e-6, 10.2e-6, 41);
  rc.ramsey.detuning = mhz(9.0);
  rc.ramsey.delays = linspace(0.0, 2e-6, 101);
  rc.spectroscopy.phases = linspace(0.0, two_pi, 9);
  rc.purity.gammas = {mhz(14.0), mhz(56.0), mhz(197.0)};
  rc.purity.amplitudes = {mhz(4.0)};
  rc.purity.times = linspace(0.0, 1e-6, 201);
  if (const auto it = doc.find("experiments"); it != doc.end()) parse_experiments(*it, "/experiments", rc);

  validate(sys);
  rc.hash = [&] {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
    return std::string(buf);
  }();
  return rc;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::filesystem::path bundled_config_dir() {
#ifdef WGQED_CONFIG_DIR
  return WGQED_CONFIG_DIR;
#else
  return "configs";
#endif
}

}  // namespace wgqed
