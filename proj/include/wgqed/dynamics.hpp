#pragma once

#include <functional>
#include <string>
#include <vector>

#include "wgqed/fockspace.hpp"
#include "wgqed/model.hpp"
#include "wgqed/ode.hpp"
#include "wgqed/pulses.hpp"
#include "wgqed/types.hpp"

namespace wgqed {

// Lindblad generator in sparse form,
//   L(rho) = -i(H rho - rho H^dag) + sum_c L_c rho L_c^dag + W o rho
// with H = H_eff + H_d(t). Vectorization is column stacking:
// vec(rho)[a + D b] = rho(a, b).
class MasterEquation {
 public:
  MasterEquation(const FockSpace& space, const LindbladTerms& terms);

  std::size_t dim() const { return dim_; }
  std::size_t n_sites() const { return ladders_.size(); }

  // Shifts the frame of H_eff by delta: H -> H - delta N.
  void shift_frame(double delta);

  void apply(const Vector& drive, const Matrix& rho, Matrix& out) const;
  // Heisenberg-picture generator, the adjoint under Tr(X^dag rho).
  void apply_adjoint(const Vector& drive, const Matrix& x, Matrix& out) const;

  // Sparse superoperator for a constant drive.
  SparseMatrix liouvillian(const Vector& drive) const;

  const SparseMatrix& ladder(std::size_t j) const { return ladders_.at(j); }
  const std::vector<int>& occupations() const { return totals_; }

 private:
  SparseMatrix hamiltonian(const Vector& drive) const;

  std::size_t dim_;
  SparseMatrix h_eff_;
  SparseMatrix number_;
  std::vector<SparseMatrix> jumps_;
  std::vector<SparseMatrix> jumps_adj_;
  std::vector<SparseMatrix> ladders_;
  std::vector<SparseMatrix> raisers_;
  RealMatrix weights_;
  bool has_weights_ = false;
  std::vector<int> totals_;
};

// Checks the density-matrix invariants: hermitian, unit trace, PSD.
void validate_density(const Matrix& rho, double tol = 1e-8);

Matrix pure_state(const Vector& psi);

struct Observable {
  std::string name;
  std::function<double(double t, const Matrix& rho)> eval;
};

Observable population(const std::string& name, const Vector& psi);
Observable purity_observable();

struct SimResult {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // values[observable][sample]
  Matrix final_state;
  IntegrationStats stats;
  double max_trace_drift = 0.0;
  double min_eigenvalue = 0.0;
  double max_hermiticity_defect = 0.0;

  const std::vector<double>& trace(const std::string& name) const;
};

// Evolves rho0 from t0 under the pulse sequence, recording observables at
// the sample times (all >= t0). Trace drift above 1e-6 aborts; positivity
// is checked every 100 steps.
SimResult evolve(const Matrix& rho0, const PulseSequence& sequence, const MasterEquation& me,
                 const IntegratorSettings& settings, const std::vector<Observable>& observables,
                 const std::vector<double>& sample_times, double t0 = 0.0);

// Propagates an observable backwards through the sequence from t1 to t0:
// returns X(t0) with Tr(X(t0) rho(t0)) = Tr(X rho(t1)) for every rho.
Matrix heisenberg_propagate(const Matrix& observable, const PulseSequence& sequence,
                            const MasterEquation& me, const IntegratorSettings& settings,
                            double t0, double t1);

// Steady state for a constant drive: direct sparse solve when dim^2 <= 1e4,
// otherwise long-time integration to relative settling 1e-8.
Matrix steady_state(const MasterEquation& me, const Vector& drive,
                    const IntegratorSettings& settings = {});

// Weak coherent probe through the waveguide. The drive on site j is
// sqrt(gamma_j / 2) eps (e^{i phi_j} a_j^dag + h.c.) and
//   t = 1 - (i / eps) sum_j sqrt(gamma_j / 2) e^{-i phi_j} <a_j>.
struct TransmissionPoint {
  double omega = 0.0;
  cplx t;
  double max_occupation = 0.0;
};

struct TransmissionSettings {
  double probe_amplitude = 0.0;  // eps, rad/s^(1/2) scale as in the drive term
  double max_occupation = 0.05;
  std::size_t levels_per_site = 3;
  // A weak probe leaves N >= 3 populated at O(<n>^3); capping keeps the
  // steady-state solve small.
  int max_excitations = 2;
  std::size_t jobs = 1;
};

// Probe phase phi_j = beta(omega) x_j (exact_delay) or fixed_phase x_j / d_y.
double probe_phase(const SystemConfig& cfg, std::size_t j, double omega);

std::vector<TransmissionPoint> transmission_spectrum(const SystemConfig& cfg,
                                                     const std::vector<double>& probe_omegas,
                                                     const TransmissionSettings& settings);

}  // namespace wgqed
