#include "wgqed/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "wgqed/linalg.hpp"
#include "wgqed/parallel.hpp"

namespace wgqed {

void validate(const IntegratorSettings& s) {
  if (!(s.rel_tol > 0) || !(s.abs_tol > 0)) throw ModelError("integrator tolerances must be positive");
  if (!(s.max_step > 0)) throw ModelError("integrator max_step must be positive");
  if (s.max_steps == 0) throw ModelError("integrator max_steps must be positive");
}

namespace {

SparseMatrix to_sparse(const Matrix& m) {
  SparseMatrix s = m.sparseView(1.0, 0.0);
  s.makeCompressed();
  return s;
}

// Kronecker product A (x) B.
SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (SparseMatrix::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib)
          trip.emplace_back(static_cast<int>(ia.row() * b.rows() + ib.row()),
                            static_cast<int>(ia.col() * b.cols() + ib.col()), ia.value() * ib.value());
  SparseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

SparseMatrix sparse_identity(Eigen::Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

}  // namespace

MasterEquation::MasterEquation(const FockSpace& space, const LindbladTerms& terms)
    : dim_(space.dim()) {
  if (terms.h_eff.dim() != dim_) throw ModelError("lindblad terms do not match the space");
  h_eff_ = to_sparse(terms.h_eff.matrix);
  for (const auto& l : terms.jumps) {
    jumps_.push_back(to_sparse(l.matrix));
    jumps_adj_.push_back(to_sparse(l.matrix.adjoint()));
  }
  for (std::size_t j = 0; j < space.n_sites(); ++j) {
    const Matrix a = ladder_op(space, j).matrix;
    ladders_.push_back(to_sparse(a));
    raisers_.push_back(to_sparse(a.adjoint()));
  }
  weights_ = terms.dephasing_weights;
  if (weights_.size() == 0) weights_ = RealMatrix::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
  has_weights_ = weights_.cwiseAbs().maxCoeff() > 0.0;
  Matrix n = Matrix::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < dim_; ++i) {
    totals_.push_back(space.total_occupation(i));
    n(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = space.total_occupation(i);
  }
  number_ = to_sparse(n);
}

void MasterEquation::shift_frame(double delta) {
  h_eff_ = (h_eff_ - delta * number_).pruned();
}

SparseMatrix MasterEquation::hamiltonian(const Vector& drive) const {
  if (static_cast<std::size_t>(drive.size()) != ladders_.size()) {
    throw ModelError("drive coefficients do not match the number of sites");
  }
  SparseMatrix h = h_eff_;
  for (std::size_t j = 0; j < ladders_.size(); ++j) {
    const cplx c = drive(static_cast<Eigen::Index>(j));
    if (c == 0.0) continue;
    h += c * ladders_[j] + std::conj(c) * raisers_[j];
  }
  return h;
}

void MasterEquation::apply(const Vector& drive, const Matrix& rho, Matrix& out) const {
  if (static_cast<std::size_t>(drive.size()) != ladders_.size()) {
    throw ModelError("drive coefficients do not match the number of sites");
  }
  thread_local Matrix x, tmp;
  // x = -i (H_eff + H_d) rho, drive terms applied one ladder at a time.
  x.noalias() = h_eff_ * rho;
  for (std::size_t j = 0; j < ladders_.size(); ++j) {
    const cplx c = drive(static_cast<Eigen::Index>(j));
    if (c == 0.0) continue;
    x.noalias() += (c * ladders_[j]) * rho;
    x.noalias() += (std::conj(c) * raisers_[j]) * rho;
  }
  x *= -I;
  out = x + x.adjoint();
  for (std::size_t c = 0; c < jumps_.size(); ++c) {
    tmp.noalias() = jumps_[c] * rho;
    out.noalias() += tmp * jumps_adj_[c];
  }
  if (has_weights_) out.array() += weights_.array() * rho.array();
}

void MasterEquation::apply_adjoint(const Vector& drive, const Matrix& x, Matrix& out) const {
  const SparseMatrix h = drive.isZero(0.0) ? h_eff_ : hamiltonian(drive);
  // i (H^dag X - X H)
  const SparseMatrix h_adj = h.adjoint();
  Matrix y = h_adj * x;
  y *= I;
  Matrix z = x * h;
  z *= I;
  out = y - z;
  Matrix tmp;
  for (std::size_t c = 0; c < jumps_.size(); ++c) {
    tmp.noalias() = jumps_adj_[c] * x;
    out.noalias() += tmp * jumps_[c];
  }
  if (has_weights_) out.array() += weights_.array() * x.array();
}

SparseMatrix MasterEquation::liouvillian(const Vector& drive) const {
  const SparseMatrix h = hamiltonian(drive);
  const auto n = static_cast<Eigen::Index>(dim_);
  const SparseMatrix id = sparse_identity(n);
  SparseMatrix h_conj = h.conjugate();
  SparseMatrix l = kron(id, SparseMatrix(-I * h)) + kron(SparseMatrix(I * h_conj), id);
  for (const auto& j : jumps_) l += kron(SparseMatrix(j.conjugate()), j);
  if (has_weights_) {
    std::vector<Eigen::Triplet<cplx>> trip;
    for (Eigen::Index b = 0; b < n; ++b)
      for (Eigen::Index a = 0; a < n; ++a)
        if (weights_(a, b) != 0.0) trip.emplace_back(static_cast<int>(a + n * b), static_cast<int>(a + n * b), weights_(a, b));
    SparseMatrix w(n * n, n * n);
    w.setFromTriplets(trip.begin(), trip.end());
    l += w;
  }
  l.makeCompressed();
  return l;
}

void validate_density(const Matrix& rho, double tol) {
  if (rho.rows() != rho.cols()) throw ModelError("density matrix must be square");
  if (hermiticity_defect(rho) > 1e-10) throw ModelError("density matrix is not hermitian");
  if (std::abs(rho.trace() - 1.0) > tol) throw ModelError("density matrix trace differs from one");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian_part(rho), Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -tol) throw ModelError("density matrix has negative eigenvalues");
}

Matrix pure_state(const Vector& psi) {
  const Vector v = psi.normalized();
  return v * v.adjoint();
}

Observable population(const std::string& name, const Vector& psi) {
  const Vector v = psi.normalized();
  return {name, [v](double, const Matrix& rho) { return v.dot(rho * v).real(); }};
}

Observable purity_observable() {
  return {"purity", [](double, const Matrix& rho) { return rho.cwiseAbs2().sum(); }};
}

const std::vector<double>& SimResult::trace(const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == name) return values[k];
  throw ModelError("no observable named " + name);
}

namespace {

// Integrates between consecutive breakpoints so envelope kinks never fall
// inside a step. `on_sample(k, t, y)` fires for every requested sample.
template <typename Rhs, typename OnStep, typename OnSample>
IntegrationStats integrate_segments(Rhs&& f, Matrix& y, double t0, const std::vector<double>& samples,
                                    const std::vector<double>& breakpoints,
                                    const IntegratorSettings& settings, OnStep&& on_step,
                                    OnSample&& on_sample) {
  // Merge samples and interior breakpoints into one stop list.
  std::vector<double> stops;
  std::vector<long> sample_of;
  std::size_t bi = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    while (bi < breakpoints.size() && breakpoints[bi] < samples[k]) {
      if (breakpoints[bi] > t0 && (stops.empty() || breakpoints[bi] > stops.back())) {
        stops.push_back(breakpoints[bi]);
        sample_of.push_back(-1);
      }
      ++bi;
    }
    stops.push_back(samples[k]);
    sample_of.push_back(static_cast<long>(k));
  }
  // Each segment restarts the controller; stops inside a segment do not.
  IntegrationStats total;
  std::size_t begin = 0;
  double t = t0;
  while (begin < stops.size()) {
    std::size_t end = begin;
    while (end < stops.size() && sample_of[end] >= 0) ++end;
    if (end < stops.size()) ++end;  // include the breakpoint closing this segment
    const std::span<const double> seg(stops.data() + begin, end - begin);
    IntegratorSettings s = settings;
    if (total.last_step > 0) s.initial_step = total.last_step;
    const auto st = integrate_dopri5(f, y, t, seg, s, on_step, [&](std::size_t k, double tk, Matrix& yk) {
      const long which = sample_of[begin + k];
      if (which >= 0) on_sample(static_cast<std::size_t>(which), tk, yk);
    });
    total.accepted += st.accepted;
    total.rejected += st.rejected;
    total.rhs_evals += st.rhs_evals;
    if (st.last_step > 0) total.last_step = st.last_step;
    t = stops[end - 1];
    begin = end;
  }
  return total;
}

double positivity_tolerance(const IntegratorSettings& s) { return std::max(1e-8, 10.0 * s.rel_tol); }

}  // namespace

SimResult evolve(const Matrix& rho0, const PulseSequence& sequence, const MasterEquation& me,
                 const IntegratorSettings& settings, const std::vector<Observable>& observables,
                 const std::vector<double>& sample_times, double t0) {
  validate(settings);
  if (static_cast<std::size_t>(rho0.rows()) != me.dim()) throw ModelError("initial state does not match the space");
  validate_density(rho0, std::max(1e-8, positivity_tolerance(settings)));
  for (std::size_t k = 0; k < sample_times.size(); ++k) {
    if (sample_times[k] < t0 || (k > 0 && sample_times[k] <= sample_times[k - 1])) {
      throw ModelError("sample times must be increasing and not before the start time");
    }
  }

  SimResult res;
  res.times = sample_times;
  for (const auto& o : observables) {
    res.names.push_back(o.name);
    res.values.emplace_back(sample_times.size(), 0.0);
  }
  const std::size_t n_sites = me.n_sites();
  const double pos_tol = positivity_tolerance(settings);

  auto rhs = [&](double t, const Matrix& rho, Matrix& out) {
    if (sequence.empty()) {
      me.apply(Vector::Zero(static_cast<Eigen::Index>(n_sites)), rho, out);
    } else {
      me.apply(sequence.coefficients(t, n_sites), rho, out);
    }
  };
  std::size_t steps = 0;
  auto check_positive = [&](const Matrix& rho, double t) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(rho, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    res.min_eigenvalue = std::min(res.min_eigenvalue, lo);
    if (lo < -pos_tol) {
      std::ostringstream msg;
      msg << "density matrix lost positivity (eigenvalue " << lo << ") at t = " << t;
      throw NumericalError(msg.str());
    }
  };
  auto on_step = [&](double t, Matrix& rho) {
    const double drift = std::abs(rho.trace() - 1.0);
    res.max_trace_drift = std::max(res.max_trace_drift, drift);
    if (drift > 1e-6) {
      std::ostringstream msg;
      msg << "trace drifted by " << drift << " at t = " << t;
      throw NumericalError(msg.str());
    }
    if (++steps % 100 != 0) return false;
    res.max_hermiticity_defect = std::max(res.max_hermiticity_defect, hermiticity_defect(rho));
    rho = hermitian_part(rho);
    check_positive(rho, t);
    return true;
  };
  auto on_sample = [&](std::size_t k, double t, Matrix& rho) {
    res.max_hermiticity_defect = std::max(res.max_hermiticity_defect, hermiticity_defect(rho));
    rho = hermitian_part(rho);
    for (std::size_t o = 0; o < observables.size(); ++o) res.values[o][k] = observables[o].eval(t, rho);
  };

  Matrix rho = rho0;
  if (!sample_times.empty() && sample_times.front() == t0) {
    on_sample(0, t0, rho);
  }
  std::vector<double> samples = sample_times;
  std::size_t first = (!samples.empty() && samples.front() == t0) ? 1 : 0;
  std::vector<double> rest(samples.begin() + static_cast<long>(first), samples.end());
  res.stats = integrate_segments(rhs, rho, t0, rest, sequence.breakpoints(), settings, on_step,
                                 [&](std::size_t k, double t, Matrix& y) { on_sample(k + first, t, y); });
  check_positive(rho, sample_times.empty() ? t0 : sample_times.back());
  const double purity = rho.cwiseAbs2().sum();
  if (purity > 1.0 + pos_tol) throw NumericalError("purity exceeded one");
  res.final_state = rho;
  return res;
}

Matrix heisenberg_propagate(const Matrix& observable, const PulseSequence& sequence,
                            const MasterEquation& me, const IntegratorSettings& settings,
                            double t0, double t1) {
  if (!(t1 >= t0)) throw ModelError("heisenberg propagation needs t1 >= t0");
  const std::size_t n_sites = me.n_sites();
  // s = t1 - t runs forward while t runs backward.
  auto rhs = [&](double s, const Matrix& x, Matrix& out) {
    me.apply_adjoint(sequence.coefficients(t1 - s, n_sites), x, out);
  };
  std::vector<double> breaks;
  for (double b : sequence.breakpoints())
    if (b > t0 && b < t1) breaks.push_back(t1 - b);
  std::sort(breaks.begin(), breaks.end());
  Matrix x = observable;
  const std::vector<double> samples{t1 - t0};
  integrate_segments(rhs, x, 0.0, samples, breaks, settings, [](double, Matrix&) { return false; },
                     [](std::size_t, double, Matrix&) {});
  return hermitian_part(x);
}

Matrix steady_state(const MasterEquation& me, const Vector& drive, const IntegratorSettings& settings) {
  const auto n = static_cast<Eigen::Index>(me.dim());
  if (n * n <= 10000) {
    SparseMatrix l = me.liouvillian(drive);
    // Replace the equation for rho_00 by the trace condition.
    std::vector<Eigen::Triplet<cplx>> trip;
    for (int k = 0; k < l.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(l, k); it; ++it)
        if (it.row() != 0) trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (Eigen::Index a = 0; a < n; ++a) trip.emplace_back(0, static_cast<int>(a + n * a), 1.0);
    SparseMatrix m(n * n, n * n);
    m.setFromTriplets(trip.begin(), trip.end());
    m.makeCompressed();
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(m);
    if (lu.info() != Eigen::Success) throw NumericalError("steady-state factorization failed");
    Vector rhs = Vector::Zero(n * n);
    rhs(0) = 1.0;
    const Vector v = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw NumericalError("steady-state solve failed");
    return hermitian_part(Eigen::Map<const Matrix>(v.data(), n, n));
  }

  // Long-time integration from the ground state in windows until settled.
  Matrix rho = Matrix::Zero(n, n);
  rho(0, 0) = 1.0;
  PulseSequence none;
  double window = 1e-7;
  Matrix deriv(n, n);
  for (int round = 0; round < 200; ++round) {
    Matrix before = rho;
    auto rhs = [&](double, const Matrix& r, Matrix& out) { me.apply(drive, r, out); };
    const std::vector<double> stop{window};
    integrate_segments(rhs, rho, 0.0, stop, {}, settings, [](double, Matrix&) { return false; },
                       [](std::size_t, double, Matrix&) {});
    rho = hermitian_part(rho);
    const double change = max_abs(rho - before) / std::max(1e-300, max_abs(rho));
    if (change < 1e-8) return rho;
    window *= 1.5;
  }
  throw NumericalError("steady state did not settle");
}

double probe_phase(const SystemConfig& cfg, std::size_t j, double omega) {
  const double x = cfg.transmons.at(j).x;
  if (cfg.coupling_mode == CouplingMode::fixed_phase) {
    return cfg.fixed_phase * x / cfg.geometry.pair_separation;
  }
  return propagation_phase(cfg.geometry, omega, x);
}

std::vector<TransmissionPoint> transmission_spectrum(const SystemConfig& cfg,
                                                     const std::vector<double>& probe_omegas,
                                                     const TransmissionSettings& settings) {
  if (!(settings.probe_amplitude > 0)) throw ModelError("probe amplitude must be positive");
  if (probe_omegas.empty()) return {};
  validate(cfg);
  const FockSpace space(cfg.n_sites(), settings.levels_per_site, FockSpace::default_max_dim,
                        settings.max_excitations);
  // Assemble once in a reference frame; each probe point shifts it.
  double ref = 0.0;
  for (const auto& t : cfg.transmons) ref += t.omega;
  ref /= static_cast<double>(cfg.n_sites());
  SystemConfig framed = cfg;
  framed.frame = ref;
  const LindbladTerms terms = lindblad_terms(framed, space);
  const auto ops = number_ops(space);
  const double eps = settings.probe_amplitude;

  return parallel_map(probe_omegas.size(), settings.jobs, [&](std::size_t k) {
    const double w = probe_omegas[k];
    MasterEquation me(space, terms);
    me.shift_frame(w - ref);
    Vector c(static_cast<Eigen::Index>(cfg.n_sites()));
    Vector out_weights(static_cast<Eigen::Index>(cfg.n_sites()));
    for (std::size_t j = 0; j < cfg.n_sites(); ++j) {
      const double amp = std::sqrt(cfg.transmons[j].gamma / 2.0);
      const double phi = probe_phase(cfg, j, w);
      c(static_cast<Eigen::Index>(j)) = amp * eps * std::exp(-I * phi);
      out_weights(static_cast<Eigen::Index>(j)) = amp * std::exp(-I * phi);
    }
    const Matrix rho = steady_state(me, c);
    TransmissionPoint p;
    p.omega = w;
    cplx sum = 0.0;
    for (std::size_t j = 0; j < cfg.n_sites(); ++j) {
      const cplx a = (me.ladder(j) * rho).trace();
      sum += out_weights(static_cast<Eigen::Index>(j)) * a;
      p.max_occupation = std::max(p.max_occupation, (ops.site[j].matrix * rho).trace().real());
    }
    p.t = 1.0 - (I / eps) * sum;
    if (p.max_occupation >= settings.max_occupation) {
      std::ostringstream msg;
      msg << "probe saturates the emitters (max <n> = " << p.max_occupation << " at "
          << to_ghz(w) << " GHz); reduce the probe amplitude";
      throw ModelError(msg.str());
    }
    return p;
  });
}

}  // namespace wgqed
