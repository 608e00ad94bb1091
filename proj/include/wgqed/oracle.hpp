#pragma once

#include <map>

#include "wgqed/fockspace.hpp"
#include "wgqed/types.hpp"

namespace wgqed {

// Collective states of the four-site (1,2)|(3,4) layout.
//   D1 = (a1+ - a2+)/sqrt2          D2 = (a3+ - a4+)/sqrt2
//   D3 = (a1+ + a2+ + a3+ + a4+)/2  B4 = (-a1+ - a2+ + a3+ + a4+)/2
struct CollectiveBasis {
  Vector G, D1, D2, D3, B4;
  Matrix D1_dag, D2_dag, D3_dag, B4_dag;
};

CollectiveBasis collective_states(const FockSpace& space);

// |nB nD3; nD1 nD2> = prod_c (c^dag)^n_c / sqrt(n_c!) |G>, normalized.
Vector collective_fock_state(const CollectiveBasis& basis, int n_b4, int n_d3, int n_d1, int n_d2);

// Unnormalized two-excitation coefficients for identical transmons
// (decay gamma, in-pair coupling J, anharmonicity U), no dephasing.
//   |5>, |12>: c (|00;20> - |00;02>) + |11;00>
//   |7>, |10>: c |10;10> + |01;10>
//   |8>, |11>: c |10;01> + |01;01>
//   |9>     : |00;11>
struct TwoExcitationTable {
  cplx c5, c12, c7, c10, c8, c11;
};

TwoExcitationTable analytic_two_excitation(double gamma, double J, double U);

// Normalized closed-form vectors keyed by label (5, 7, 8, 9, 10, 11, 12).
std::map<int, Vector> two_excitation_states(const CollectiveBasis& basis,
                                            const TwoExcitationTable& table);

// Dark-state relaxation and coherence rates for identical transmons.
double t1_rate(double gamma, double gamma_nr, double kappa_phi);
double t2_rate(double gamma_nr, double kappa_phi, double K_phi);

// rho_03(t) = rho_03(0) exp(-i t (omega + J)) exp(-t (gamma_nr + kappa + K) / 2)
cplx coherence_decay(cplx rho03_initial, double t, double omega, double J, double gamma_nr,
                     double kappa_phi, double K_phi);

// Adiabatic elimination of a leakage level f detuned by U~ and decaying at
// gamma_f, driven from the dark state with amplitude Omega~.
struct AdiabaticResult {
  double stark_shift = 0.0;  // delta
  double dark_decay = 0.0;   // gamma_D
  // Amplitude of the effective jump |B4><D3|, sqrt(gamma_D).
  double jump_amplitude = 0.0;
};

AdiabaticResult adiabatic_elimination(double omega_tilde, double U_tilde, double gamma_f);

// d gamma_D / d gamma_f, used to locate the maximum at gamma_f = 2|U~|.
double dark_decay_slope(double omega_tilde, double U_tilde, double gamma_f);

// Standalone reduced model on (G, D3, B4, f):
//   H = Omega (|G><D3| + h.c.) + Omega~ (|D3><f| + h.c.) - U~ |f><f|
//   L_B = sqrt(gamma_B) |G><B4|,  L_f = sqrt(gamma_f) |B4><f|
struct ReducedModel {
  double omega = 0.0;
  double omega_tilde = 0.0;
  double U_tilde = 0.0;
  double gamma_f = 0.0;
  double gamma_b = 0.0;
};

// Basis order of the reduced model.
enum ReducedLevel : int { reduced_G = 0, reduced_D3 = 1, reduced_B4 = 2, reduced_f = 3 };

Matrix reduced_hamiltonian(const ReducedModel& model);
std::vector<Matrix> reduced_jumps(const ReducedModel& model);

}  // namespace wgqed
