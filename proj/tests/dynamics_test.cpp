#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "support.hpp"
#include "wgqed/dynamics.hpp"
#include "wgqed/linalg.hpp"

using namespace wgqed;

namespace {

SystemConfig single_emitter(double gamma, double gamma_nr = 0.0, double kappa = 0.0, double K = 0.0) {
  SystemConfig c;
  TransmonParams t;
  t.name = "Q";
  t.omega = ghz(7.0);
  t.anharmonicity = mhz(220);
  t.gamma = gamma;
  t.gamma_nr = gamma_nr;
  t.kappa_phi = kappa;
  c.transmons.push_back(t);
  c.K_phi = K;
  c.frame = t.omega;
  return c;
}

// Two-site pair a half wavelength apart with every incoherent channel on.
struct PairSetup {
  SystemConfig cfg;
  FockSpace space{2, 3};
  MasterEquation me;
  PairSetup()
      : cfg(rotating_frame(test::with_rates(select_sites(test::identical_device(), {0, 2}), khz(15), khz(100),
                                            khz(437)),
                           ghz(7.26))),
        me(space, lindblad_terms(cfg, space)) {}
};

Vector drive2() {
  Vector d(2);
  d << cplx(mhz(3), mhz(1)), cplx(-mhz(2), 0.0);
  return d;
}

}  // namespace

TEST_CASE("generator preserves trace and hermiticity") {
  PairSetup p;
  const Matrix rho = test::random_density(p.space.dim(), 3);
  Matrix out;
  p.me.apply(drive2(), rho, out);
  const double scale = max_abs(out);
  CHECK(std::abs(out.trace()) < 1e-12 * scale);
  CHECK(hermiticity_defect(out) < 1e-12 * scale);
}

TEST_CASE("Heisenberg generator is the adjoint") {
  PairSetup p;
  const Matrix rho = test::random_density(p.space.dim(), 5);
  const Matrix x = test::random_matrix(p.space.dim(), 6);
  Matrix lr, lx;
  p.me.apply(drive2(), rho, lr);
  p.me.apply_adjoint(drive2(), x, lx);
  const cplx lhs = (x.adjoint() * lr).trace();
  const cplx rhs = (lx.adjoint() * rho).trace();
  CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(lhs));
}

TEST_CASE("superoperator matches the matrix-free generator") {
  PairSetup p;
  const auto n = static_cast<Eigen::Index>(p.space.dim());
  const Matrix rho = test::random_density(p.space.dim(), 9);
  Matrix out;
  p.me.apply(drive2(), rho, out);
  const SparseMatrix l = p.me.liouvillian(drive2());
  const Vector v = l * Eigen::Map<const Vector>(rho.data(), n * n);
  CHECK(max_abs(Eigen::Map<const Matrix>(v.data(), n, n) - out) < 1e-10 * max_abs(out));
}

TEST_CASE("single emitter relaxation and coherence") {
  const double g = mhz(5), nr = khz(200), k = khz(300), K = khz(400);
  const auto cfg = single_emitter(g, nr, k, K);
  const FockSpace s(1, 3);
  const MasterEquation me(s, lindblad_terms(cfg, s));
  IntegratorSettings set{1e-10, 1e-12};
  std::vector<double> ts;
  for (int i = 0; i <= 10; ++i) ts.push_back(i * 20e-9);

  const auto r = evolve(pure_state(s.basis_state({1})), PulseSequence{}, me, set,
                        {population("P1", s.basis_state({1}))}, ts);
  for (std::size_t i = 0; i < ts.size(); ++i)
    CHECK(r.trace("P1")[i] == doctest::Approx(std::exp(-(g + nr) * ts[i])).epsilon(1e-7));
  CHECK(r.max_trace_drift < 1e-9);

  // Coherence between |0> and |1> decays at (gamma + gamma_nr + kappa + K) / 2.
  const Vector plus = (s.basis_state({0}) + s.basis_state({1})).normalized();
  const auto c = evolve(pure_state(plus), PulseSequence{}, me, set, {}, {100e-9});
  CHECK(std::abs(c.final_state(0, 1)) ==
        doctest::Approx(0.5 * std::exp(-(g + nr + k + K) / 2 * 100e-9)).epsilon(1e-7));
}

TEST_CASE("resonant Rabi oscillation of a two-level emitter") {
  const auto cfg = single_emitter(0.0);
  const FockSpace s(1, 2);
  const MasterEquation me(s, lindblad_terms(cfg, s));
  Pulse p;
  p.shape = EnvelopeShape::rectangular;
  p.duration = 1e-6;
  p.amplitude = 1.0;
  p.site_coefficients = Vector::Constant(1, cplx(0.0, mhz(2)));
  std::vector<double> ts;
  for (int i = 0; i <= 20; ++i) ts.push_back(i * 25e-9);
  const auto r = evolve(pure_state(s.basis_state({0})), PulseSequence({p}), me, IntegratorSettings{1e-10, 1e-12},
                        {population("P1", s.basis_state({1})), purity_observable()}, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    CHECK(r.trace("P1")[i] == doctest::Approx(std::pow(std::sin(mhz(2) * ts[i]), 2)).scale(1.0).epsilon(1e-7));
    CHECK(r.trace("purity")[i] == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("evolution keeps the density-matrix invariants") {
  PairSetup p;
  Pulse pulse;
  pulse.duration = 200e-9;
  pulse.amplitude = 1.0;
  pulse.site_coefficients = drive2();
  std::vector<double> ts;
  for (int i = 1; i <= 8; ++i) ts.push_back(i * 50e-9);
  const auto r = evolve(test::random_density(p.space.dim(), 11), PulseSequence({pulse}), p.me,
                        IntegratorSettings{1e-9, 1e-12}, {purity_observable()}, ts);
  CHECK(r.max_trace_drift < 1e-8);
  CHECK(r.min_eigenvalue > -1e-8);
  CHECK_NOTHROW(validate_density(r.final_state, 1e-7));
  for (double pur : r.trace("purity")) CHECK(pur <= 1.0 + 1e-9);
  CHECK_THROWS_AS(evolve(2.0 * pure_state(p.space.basis_state({0, 0})), PulseSequence{}, p.me, {}, {}, {1e-9}),
                  ModelError);
}

TEST_CASE("backward-propagated observables reproduce forward expectations") {
  PairSetup p;
  Pulse pulse;
  pulse.start = 30e-9;
  pulse.duration = 150e-9;
  pulse.amplitude = 1.0;
  pulse.site_coefficients = drive2();
  const PulseSequence seq({pulse});
  const IntegratorSettings set{1e-10, 1e-13};
  const Matrix x = pure_state(p.space.basis_state({0, 0}));
  const Matrix rho0 = test::random_density(p.space.dim(), 21);
  const double t1 = 260e-9;
  const auto fwd = evolve(rho0, seq, p.me, set, {}, {t1});
  const Matrix back = heisenberg_propagate(x, seq, p.me, set, 0.0, t1);
  const cplx a = (x * fwd.final_state).trace();
  const cplx b = (back * rho0).trace();
  CHECK(std::abs(a - b) < 1e-8);
}

TEST_CASE("steady state is a fixed point of the generator") {
  PairSetup p;
  const Matrix ss = steady_state(p.me, drive2());
  Matrix out;
  p.me.apply(drive2(), ss, out);
  CHECK(max_abs(out) < 1e-6 * mhz(1));
  CHECK(std::abs(ss.trace() - 1.0) < 1e-12);
}

TEST_CASE("weak-probe transmission of one emitter is the linear-response Lorentzian") {
  const double g = mhz(20), nr = khz(50), k = khz(100), K = khz(200);
  SystemConfig cfg = single_emitter(g, nr, k, K);
  cfg.frame = 0.0;
  TransmissionSettings ts;
  ts.probe_amplitude = std::sqrt(1e-6 * g);
  std::vector<double> ws;
  for (double d : {-60.0, -15.0, -3.0, 0.0, 4.0, 30.0}) ws.push_back(ghz(7.0) + mhz(d));
  const auto pts = transmission_spectrum(cfg, ws, ts);
  const double gamma2 = (g + nr + k + K) / 2;
  for (const auto& pt : pts) {
    const double delta = ghz(7.0) - pt.omega;
    const cplx expect = 1.0 - (g / 2) / (gamma2 + I * delta);
    CHECK(std::abs(pt.t - expect) < 1e-4);
  }
  // On resonance the dip nearly reaches the non-radiative floor.
  CHECK(std::abs(pts[3].t) < 0.02);
  ts.probe_amplitude = std::sqrt(g);
  CHECK_THROWS_AS(transmission_spectrum(cfg, {ghz(7.0)}, ts), ModelError);
}

TEST_CASE("pair transmission matches the one-excitation response") {
  SystemConfig cfg = test::with_rates(select_sites(test::identical_device(mhz(20)), {0, 2}), khz(15), khz(100),
                                      khz(437));
  cfg.transmons[1].omega += mhz(12);
  TransmissionSettings ts;
  ts.probe_amplitude = std::sqrt(1e-6 * mhz(20));
  const std::vector<double> ws{ghz(7.2671) - mhz(25), ghz(7.2671), ghz(7.2671) + mhz(9)};
  const auto pts = transmission_spectrum(cfg, ws, ts);
  const FockSpace s(2, 3);
  for (const auto& pt : pts) {
    const Matrix h = effective_hamiltonian(rotating_frame(cfg, pt.omega), s, true).matrix;
    // Basis order in the one-excitation block: |01> (site 1), |10> (site 0).
    const auto idx = s.manifold(1);
    Matrix h1(2, 2);
    for (int kk = 0; kk < 2; ++kk)
      for (int jj = 0; jj < 2; ++jj)
        h1(kk, jj) = h(static_cast<Eigen::Index>(idx[1 - kk]), static_cast<Eigen::Index>(idx[1 - jj]));
    Vector f(2), w(2);
    for (int j = 0; j < 2; ++j) {
      const double amp = std::sqrt(cfg.transmons[static_cast<std::size_t>(j)].gamma / 2);
      const double phi = probe_phase(cfg, static_cast<std::size_t>(j), pt.omega);
      f(j) = amp * ts.probe_amplitude * std::exp(I * phi);
      w(j) = amp * std::exp(-I * phi);
    }
    const Vector a = -h1.lu().solve(f);
    const cplx expect = 1.0 - (I / ts.probe_amplitude) * w.cwiseProduct(a).sum();
    CHECK(std::abs(pt.t - expect) < 1e-4);
  }
}

TEST_CASE("purity of states with complex coherences") {
  Vector psi(3);
  psi << 1.0, cplx(0.0, 1.0), cplx(0.5, -0.5);
  const auto p = purity_observable();
  CHECK(p.eval(0.0, pure_state(psi)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p.eval(0.0, Matrix::Identity(3, 3) / 3.0) == doctest::Approx(1.0 / 3));
}
