#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wgqed/model.hpp"

namespace wgqed {

// Schema violation; path() is a JSON pointer into the offending document.
class ConfigError : public ModelError {
 public:
  ConfigError(std::string path, const std::string& what)
      : ModelError((path.empty() ? std::string("/") : path) + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct RabiBlock {
  std::vector<double> amplitudes;  // rad/s
  std::vector<double> phases;
  double pulse_length = 240e-9;
};

struct T1Block {
  std::vector<double> delays;
  double pulse_length = 240e-9;
};

struct RamseyBlock {
  double detuning = 0.0;
  std::vector<double> delays;
  double pulse_length = 240e-9;
};

struct SpectroscopyBlock {
  std::vector<double> frequencies;  // lab frame, rad/s
  std::vector<double> phases;
  double pulse_length = 1.2e-6;
  double amplitude = 0.0;  // 0: reuse the pi amplitude
  double power_ratio = 0.75;
};

struct LifetimeBlock {
  std::vector<std::size_t> sites{0, 2};
  std::vector<double> frequencies;
};

struct PurityBlock {
  std::vector<double> gammas;
  std::vector<double> amplitudes;
  std::vector<double> times;
};

struct TransmissionBlock {
  std::vector<std::size_t> sites;  // empty: all
  std::vector<double> frequencies;  // empty: centred on the mean frequency
  double probe_amplitude = 0.0;     // 0: automatic
};

struct RunConfig {
  SystemConfig system;
  std::size_t levels_per_site = 3;
  RabiBlock rabi;
  T1Block t1;
  RamseyBlock ramsey;
  SpectroscopyBlock spectroscopy;
  LifetimeBlock lifetime;
  PurityBlock purity;
  TransmissionBlock transmission;
  std::string hash;  // FNV-1a 64 of the source bytes, hex
};

std::uint64_t fnv1a64(std::string_view bytes);

// Parses the JSON config text; throws ConfigError on schema violations and
// ModelError if the resulting system is physically invalid.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

// Bundled fixture directory set at build time (may not exist at runtime).
std::filesystem::path bundled_config_dir();

}  // namespace wgqed
