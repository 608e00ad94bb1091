#include "wgqed/oracle.hpp"

#include <cmath>

namespace wgqed {

CollectiveBasis collective_states(const FockSpace& space) {
  if (space.n_sites() != 4) {
    throw ModelError("collective states need the four-site layout");
  }
  std::vector<Matrix> ad;
  for (std::size_t j = 0; j < 4; ++j) ad.push_back(ladder_op(space, j).matrix.adjoint());
  const double r2 = std::sqrt(0.5);

  CollectiveBasis b;
  b.D1_dag = r2 * (ad[0] - ad[1]);
  b.D2_dag = r2 * (ad[2] - ad[3]);
  b.D3_dag = 0.5 * (ad[0] + ad[1] + ad[2] + ad[3]);
  b.B4_dag = 0.5 * (-ad[0] - ad[1] + ad[2] + ad[3]);
  b.G = space.basis_state({0, 0, 0, 0});
  b.D1 = b.D1_dag * b.G;
  b.D2 = b.D2_dag * b.G;
  b.D3 = b.D3_dag * b.G;
  b.B4 = b.B4_dag * b.G;
  return b;
}

Vector collective_fock_state(const CollectiveBasis& basis, int n_b4, int n_d3, int n_d1, int n_d2) {
  if (n_b4 < 0 || n_d3 < 0 || n_d1 < 0 || n_d2 < 0) {
    throw ModelError("collective occupations must be non-negative");
  }
  Vector psi = basis.G;
  auto raise = [&](const Matrix& op, int n) {
    for (int k = 0; k < n; ++k) psi = op * psi;
    psi /= std::sqrt(std::tgamma(n + 1.0));
  };
  raise(basis.D2_dag, n_d2);
  raise(basis.D1_dag, n_d1);
  raise(basis.D3_dag, n_d3);
  raise(basis.B4_dag, n_b4);
  const double norm = psi.norm();
  if (norm < 1e-12) throw ModelError("collective state vanishes in this truncation");
  return psi / norm;
}

TwoExcitationTable analytic_two_excitation(double gamma, double J, double U) {
  if (U == 0.0) {
    throw ModelError(
        "two-excitation closed forms divide by U; use products of collective operators in the "
        "harmonic limit");
  }
  const cplx ig = I * gamma;
  const cplx sq = std::sqrt(cplx(U * U) + 16.0 * (J - ig / 2.0) * (J - ig / 2.0));
  const cplx s = std::sqrt(cplx(U * U - 4.0 * gamma * gamma));
  const double r2U = std::sqrt(2.0) * U;
  TwoExcitationTable t;
  t.c5 = (2.0 * ig - 4.0 * J + sq) / r2U;
  t.c12 = (2.0 * ig - 4.0 * J - sq) / r2U;
  t.c7 = (-2.0 * ig + s) / U;
  t.c8 = (2.0 * ig - s) / U;
  t.c10 = (-2.0 * ig - s) / U;
  t.c11 = (2.0 * ig + s) / U;
  return t;
}

std::map<int, Vector> two_excitation_states(const CollectiveBasis& basis,
                                            const TwoExcitationTable& table) {
  const Vector d1_sq = collective_fock_state(basis, 0, 0, 2, 0);
  const Vector d2_sq = collective_fock_state(basis, 0, 0, 0, 2);
  const Vector b_d3 = collective_fock_state(basis, 1, 1, 0, 0);
  const Vector b_d1 = collective_fock_state(basis, 1, 0, 1, 0);
  const Vector d3_d1 = collective_fock_state(basis, 0, 1, 1, 0);
  const Vector b_d2 = collective_fock_state(basis, 1, 0, 0, 1);
  const Vector d3_d2 = collective_fock_state(basis, 0, 1, 0, 1);
  auto unit = [](Vector v) { return Vector(v / v.norm()); };

  std::map<int, Vector> out;
  out[5] = unit(table.c5 * (d1_sq - d2_sq) + b_d3);
  out[12] = unit(table.c12 * (d1_sq - d2_sq) + b_d3);
  out[7] = unit(table.c7 * b_d1 + d3_d1);
  out[10] = unit(table.c10 * b_d1 + d3_d1);
  out[8] = unit(table.c8 * b_d2 + d3_d2);
  out[11] = unit(table.c11 * b_d2 + d3_d2);
  out[9] = collective_fock_state(basis, 0, 0, 1, 1);
  return out;
}

double t1_rate(double gamma, double gamma_nr, double kappa_phi) {
  if (gamma < 0 || gamma_nr < 0 || kappa_phi < 0) throw ModelError("rates must be non-negative");
  const double k = kappa_phi;
  const double root = std::sqrt(16.0 * gamma * gamma + 4.0 * gamma * k + k * k);
  return 2.0 * gamma + gamma_nr + k / 2.0 - 0.5 * root;
}

double t2_rate(double gamma_nr, double kappa_phi, double K_phi) {
  if (gamma_nr < 0 || kappa_phi < 0 || K_phi < 0) throw ModelError("rates must be non-negative");
  return 0.5 * (gamma_nr + kappa_phi + K_phi);
}

cplx coherence_decay(cplx rho03_initial, double t, double omega, double J, double gamma_nr,
                     double kappa_phi, double K_phi) {
  return rho03_initial * std::exp(-I * t * (omega + J)) *
         std::exp(-t * t2_rate(gamma_nr, kappa_phi, K_phi));
}

AdiabaticResult adiabatic_elimination(double omega_tilde, double U_tilde, double gamma_f) {
  if (U_tilde == 0.0 && gamma_f == 0.0) {
    throw ModelError("adiabatic elimination needs a detuned or decaying leakage level");
  }
  if (gamma_f < 0) throw ModelError("gamma_f must be non-negative");
  const double w2 = omega_tilde * omega_tilde;
  const double denom = 4.0 * U_tilde * U_tilde + gamma_f * gamma_f;
  AdiabaticResult r;
  r.stark_shift = 4.0 * w2 * U_tilde / denom;
  r.dark_decay = 4.0 * gamma_f * w2 / denom;
  r.jump_amplitude = std::sqrt(r.dark_decay);
  return r;
}

double dark_decay_slope(double omega_tilde, double U_tilde, double gamma_f) {
  const double w2 = omega_tilde * omega_tilde;
  const double denom = 4.0 * U_tilde * U_tilde + gamma_f * gamma_f;
  return 4.0 * w2 * (4.0 * U_tilde * U_tilde - gamma_f * gamma_f) / (denom * denom);
}

Matrix reduced_hamiltonian(const ReducedModel& m) {
  Matrix h = Matrix::Zero(4, 4);
  h(reduced_G, reduced_D3) = h(reduced_D3, reduced_G) = m.omega;
  h(reduced_D3, reduced_f) = h(reduced_f, reduced_D3) = m.omega_tilde;
  h(reduced_f, reduced_f) = -m.U_tilde;
  return h;
}

std::vector<Matrix> reduced_jumps(const ReducedModel& m) {
  if (m.gamma_b < 0 || m.gamma_f < 0) throw ModelError("reduced-model rates must be non-negative");
  Matrix lb = Matrix::Zero(4, 4);
  lb(reduced_G, reduced_B4) = std::sqrt(m.gamma_b);
  Matrix lf = Matrix::Zero(4, 4);
  lf(reduced_B4, reduced_f) = std::sqrt(m.gamma_f);
  return {lb, lf};
}

}  // namespace wgqed
