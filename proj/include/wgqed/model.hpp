#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wgqed/fockspace.hpp"
#include "wgqed/types.hpp"
#include "wgqed/waveguide.hpp"

namespace wgqed {

// All rates and frequencies in rad/s, positions in m.
struct TransmonParams {
  std::string name;
  double omega = 0.0;          // fundamental frequency
  double anharmonicity = 0.0;  // U, positive
  double gamma = 0.0;          // radiative decay into the waveguide
  double gamma_nr = 0.0;       // non-radiative decay
  double kappa_phi = 0.0;      // local pure dephasing
  double x = 0.0;              // position along the propagation axis
  int pair = 0;

  // g = sqrt(gamma / (2 pi omega))
  double dimensionless_coupling() const;
};

enum class CouplingMode { exact_delay, fixed_phase };

struct SystemConfig {
  std::vector<TransmonParams> transmons;
  // Capacitive couplings keyed by (j, k) with j < k.
  std::map<std::pair<std::size_t, std::size_t>, double> direct;
  double K_phi = 0.0;
  WaveguideGeometry geometry;
  CouplingMode coupling_mode = CouplingMode::fixed_phase;
  // Phase accumulated over the pair separation in fixed_phase mode.
  double fixed_phase = pi;
  // Rotating-frame frequency. Only the bare H_T diagonal sees it; couplings
  // always use lab-frame frequencies.
  double frame = 0.0;

  std::size_t n_sites() const { return transmons.size(); }
  double coupling(std::size_t j, std::size_t k) const;
  void set_coupling(std::size_t j, std::size_t k, double value);
};

// Throws ModelError describing the first violated invariant.
void validate(const SystemConfig& cfg);

// Subsystem with the listed transmons, couplings restricted accordingly.
SystemConfig select_sites(const SystemConfig& cfg, const std::vector<std::size_t>& sites);

// Frame with omega_j -> omega_j - omega_d. Dissipative terms unchanged.
SystemConfig rotating_frame(const SystemConfig& cfg, double omega_d);

// Transmon frequencies as seen in the current frame.
RealVector frame_frequencies(const SystemConfig& cfg);

struct WaveguideCouplings {
  Matrix exchange;  // J~_{jk}, hermitian
  Matrix decay;     // gamma_{jk}, hermitian PSD, diag = gamma_j
  // max_j gamma_j * t_jk; the instantaneous-decay picture wants this << 1
  double markov_parameter = 0.0;
  double clipped_eigenvalue = 0.0;  // most negative eigenvalue removed by clipping
};

// Markov parameters above this trigger a warning from callers.
inline constexpr double markov_warning_threshold = 0.01;

// Phase theta_j = beta(omega_j)|x_j - x_k| (exact_delay) or
// phi |x_j - x_k| / d_y (fixed_phase) seen by emitter j towards k.
double coupling_phase(const SystemConfig& cfg, std::size_t j, std::size_t k);

WaveguideCouplings waveguide_couplings(const SystemConfig& cfg);

ComplexOperator transmon_hamiltonian(const SystemConfig& cfg, const FockSpace& space);

ComplexOperator effective_hamiltonian(const SystemConfig& cfg, const FockSpace& space,
                                      bool include_dephasing);

// Everything the master equation needs:
//   d rho = -i(H rho - rho H^dag) + sum_c L_c rho L_c^dag + W o rho
// with H the dephasing-extended effective Hamiltonian, L_c the eigen-channels
// of gamma_{jk} + diag(gamma_nr) and W_ab = sum_j kappa_j n_j(a) n_j(b)
// + K N(a) N(b) the diagonal dephasing sandwich terms (o is elementwise).
struct LindbladTerms {
  ComplexOperator h_eff;
  std::vector<ComplexOperator> jumps;
  RealMatrix dephasing_weights;
};

LindbladTerms lindblad_terms(const SystemConfig& cfg, const FockSpace& space);

struct DriveConfig {
  double omega = 0.0;     // Rabi amplitude
  double phase = 0.0;     // sideport phase difference
  double gradient = 0.0;  // within-pair amplitude gradient Omega_delta
  double frequency = 0.0; // drive frequency (lab)
};

void validate(const DriveConfig& drive);

// Gradient giving a Q2/Q4 to Q1/Q3 drive power ratio.
double gradient_for_power_ratio(double omega, double power_ratio);

// Coefficients c_j with H_d = sum_j (c_j a_j + h.c.), four-site layout.
std::array<cplx, 4> drive_coefficients(const DriveConfig& drive);

// sum_j (c_j a_j + conj(c_j) a_j^dag) for arbitrary per-site coefficients.
ComplexOperator drive_operator(const FockSpace& space, const Vector& coefficients);

ComplexOperator drive_hamiltonian(const DriveConfig& drive, const FockSpace& space);

}  // namespace wgqed
