#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "wgqed/linalg.hpp"
#include "wgqed/model.hpp"
#include "wgqed/waveguide.hpp"

using namespace wgqed;

namespace {

// One-excitation block <1_k| H |1_j> written out from the textbook
// collective-decay formulas, independent of the operator assembly.
Matrix one_excitation_oracle(const SystemConfig& cfg, bool dephasing) {
  const auto n = static_cast<Eigen::Index>(cfg.n_sites());
  Matrix h = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& tj = cfg.transmons[static_cast<std::size_t>(j)];
      const auto& tk = cfg.transmons[static_cast<std::size_t>(k)];
      const double gj = std::sqrt(tj.gamma / (two_pi * tj.omega));
      const double gk = std::sqrt(tk.gamma / (two_pi * tk.omega));
      const double dist = std::abs(tj.x - tk.x);
      const double th = cfg.coupling_mode == CouplingMode::fixed_phase
                            ? cfg.fixed_phase * dist / cfg.geometry.pair_separation
                            : 0.0;
      const cplx g = pi * gj * gk * (tj.omega * std::exp(I * th) + tk.omega * std::exp(-I * th));
      const cplx jt = -I * (pi / 2) * gj * gk * (tj.omega * std::exp(I * th) - tk.omega * std::exp(-I * th));
      h(k, j) += jt - 0.5 * I * g;
      if (j != k) h(k, j) += cfg.coupling(static_cast<std::size_t>(std::min(j, k)), static_cast<std::size_t>(std::max(j, k)));
    }
    const auto& t = cfg.transmons[static_cast<std::size_t>(j)];
    h(j, j) += t.omega - cfg.frame - 0.5 * I * t.gamma_nr;
    if (dephasing) h(j, j) -= 0.5 * I * (t.kappa_phi + cfg.K_phi);
  }
  return h;
}

Matrix block(const Matrix& h, const FockSpace& s, int n) {
  const auto idx = s.manifold(n);
  Matrix b(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t c = 0; c < idx.size(); ++c)
      b(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          h(static_cast<Eigen::Index>(idx[r]), static_cast<Eigen::Index>(idx[c]));
  return b;
}

}  // namespace

TEST_CASE("correlated decay and exchange follow cos and sin of the phase") {
  SystemConfig cfg = test::identical_device(mhz(28), 0.0);
  cfg.fixed_phase = 1.0;
  const auto wc = waveguide_couplings(cfg);
  const double g = mhz(28);
  CHECK(wc.decay(0, 0).real() == doctest::Approx(g).epsilon(1e-12));
  CHECK(wc.decay(0, 1).real() == doctest::Approx(g).epsilon(1e-12));
  CHECK(wc.decay(0, 2).real() == doctest::Approx(g * std::cos(1.0)).epsilon(1e-12));
  CHECK(wc.exchange(0, 2).real() == doctest::Approx(0.5 * g * std::sin(1.0)).epsilon(1e-12));
  CHECK(std::abs(wc.exchange(0, 1)) < 1e-9 * g);
  CHECK(is_hermitian(wc.decay));
  CHECK(is_hermitian(wc.exchange));
  CHECK(wc.markov_parameter == 0.0);
}

TEST_CASE("exact delay at the decoherence-free frequency") {
  const double w = decoherence_free_frequency(WaveguideGeometry{});
  SystemConfig cfg = test::identical_device(mhz(28), 0.0, mhz(218), w);
  cfg.coupling_mode = CouplingMode::exact_delay;
  const auto wc = waveguide_couplings(cfg);
  CHECK(wc.decay(0, 2).real() == doctest::Approx(-mhz(28)).epsilon(1e-9));
  CHECK(std::abs(wc.exchange(0, 2)) < 1e-8 * mhz(28));
  // gamma * t over 46 mm is about 0.01: small, but enough to warrant a warning.
  CHECK(wc.markov_parameter > 0.005);
  CHECK(wc.markov_parameter < 0.05);
}

TEST_CASE("one-excitation block matches the written-out oracle") {
  const auto rc = load_config(test::fixture("paper_tableS1.cfg"));
  SystemConfig cfg = rotating_frame(rc.system, ghz(7.3));
  const FockSpace s(4, 3);
  for (bool deph : {false, true}) {
    const Matrix h = effective_hamiltonian(cfg, s, deph).matrix;
    const Matrix b = block(h, s, 1);
    // Site order inside the block follows the basis order: |0001>, |0010>, ...
    Matrix oracle = one_excitation_oracle(cfg, deph);
    Matrix reordered(4, 4);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) reordered(r, c) = oracle(3 - r, 3 - c);
    CHECK(max_abs(b - reordered) < 1e-6 * mhz(30));
  }
}

TEST_CASE("effective Hamiltonian conserves the excitation number") {
  auto cfg = test::with_rates(test::identical_device(), khz(15), khz(100), khz(437));
  cfg.coupling_mode = CouplingMode::exact_delay;
  const FockSpace s(4, 3);
  const Matrix h = effective_hamiltonian(cfg, s, true).matrix;
  const Matrix n = number_ops(s).total.matrix;
  CHECK(max_abs(commutator(h, n)) < 1e-12 * max_abs(h));
}

TEST_CASE("transmon ladder has the anharmonic second level") {
  SystemConfig cfg;
  TransmonParams t;
  t.omega = ghz(7.0);
  t.anharmonicity = mhz(220);
  t.gamma = mhz(10);
  cfg.transmons.push_back(t);
  const FockSpace s(1, 3);
  const Matrix h = transmon_hamiltonian(cfg, s).matrix;
  CHECK(h(1, 1).real() == doctest::Approx(ghz(7.0)));
  CHECK(h(2, 2).real() == doctest::Approx(2 * ghz(7.0) - mhz(220)));
}

TEST_CASE("validation rejects unphysical configurations") {
  auto strong = test::identical_device();
  strong.transmons[0].gamma = strong.transmons[0].omega;  // g ~ 0.4
  CHECK_THROWS_AS(validate(strong), ModelError);
  auto remote = test::identical_device();
  remote.set_coupling(0, 2, mhz(10));  // capacitive coupling across 46 mm
  CHECK_THROWS_AS(validate(remote), ModelError);
  auto negative = test::identical_device();
  negative.transmons[1].gamma_nr = -1.0;
  CHECK_THROWS_AS(validate(negative), ModelError);
  CHECK_NOTHROW(validate(test::identical_device()));
}

TEST_CASE("sideport drive selects dark or bright state by phase") {
  const FockSpace s(4, 3);
  const Vector g = s.basis_state({0, 0, 0, 0});
  const Vector d3 = (s.basis_state({1, 0, 0, 0}) + s.basis_state({0, 1, 0, 0}) + s.basis_state({0, 0, 1, 0}) +
                     s.basis_state({0, 0, 0, 1})) / 2.0;
  const Vector b4 = (-s.basis_state({1, 0, 0, 0}) - s.basis_state({0, 1, 0, 0}) + s.basis_state({0, 0, 1, 0}) +
                     s.basis_state({0, 0, 0, 1})) / 2.0;
  const double omega = mhz(1);
  for (double phi : {0.0, 0.7, pi, 4.0}) {
    DriveConfig d{omega, phi, 0.0, 0.0};
    const Matrix h = drive_hamiltonian(d, s).matrix;
    CHECK(is_hermitian(h));
    CHECK(std::abs(d3.dot(h * g)) == doctest::Approx(omega * std::abs(std::cos(phi / 2))).epsilon(1e-12));
    CHECK(std::abs(b4.dot(h * g)) == doctest::Approx(omega * std::abs(std::sin(phi / 2))).epsilon(1e-12));
  }
  CHECK(std::abs(b4.dot(drive_hamiltonian({omega, 0.0, 0.0, 0.0}, s).matrix * g)) < 1e-10 * omega);
  CHECK(std::abs(d3.dot(drive_hamiltonian({omega, pi, 0.0, 0.0}, s).matrix * g)) < 1e-10 * omega);
}

TEST_CASE("gradient sets the within-pair power ratio") {
  const double omega = mhz(1);
  const double grad = gradient_for_power_ratio(omega, 0.75);
  const auto c = drive_coefficients({omega, 0.0, grad, 0.0});
  CHECK(std::norm(c[1]) / std::norm(c[0]) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(std::norm(c[3]) / std::norm(c[2]) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(gradient_for_power_ratio(omega, 1.0) == 0.0);
  CHECK_THROWS_AS(gradient_for_power_ratio(omega, 0.0), ModelError);
  CHECK_THROWS_AS(drive_coefficients({omega, 0.0, 2 * omega, 0.0}), ModelError);
}

TEST_CASE("jump operators reproduce the decay matrix") {
  auto cfg = test::with_rates(test::identical_device(), khz(15), khz(100), khz(437));
  cfg.transmons[2].gamma = mhz(31);
  const FockSpace s(4, 3);
  const auto terms = lindblad_terms(cfg, s);
  Matrix sum = Matrix::Zero(81, 81);
  for (const auto& l : terms.jumps) sum += l.matrix.adjoint() * l.matrix;
  const Matrix b = block(sum, s, 1);
  const auto wc = waveguide_couplings(cfg);
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) {
      // Block rows run over |0001>, |0010>, |0100>, |1000>.
      cplx expect = wc.decay(j, k);
      if (j == k) expect += khz(15);
      CHECK(std::abs(b(3 - k, 3 - j) - expect) < 1e-9 * mhz(30));
    }
  // Sandwich weights on a one-excitation coherence: kappa + K.
  const auto one = s.index_of(std::vector<int>{1, 0, 0, 0});
  CHECK(terms.dephasing_weights(static_cast<Eigen::Index>(one), static_cast<Eigen::Index>(one)) ==
        doctest::Approx(khz(100) + khz(437)));
  CHECK(terms.dephasing_weights(static_cast<Eigen::Index>(one), 0) == 0.0);
}

TEST_CASE("site selection and frames") {
  const auto cfg = test::identical_device();
  const auto pair = select_sites(cfg, {0, 2});
  CHECK(pair.n_sites() == 2);
  CHECK(pair.direct.empty());
  const auto local = select_sites(cfg, {0, 1});
  CHECK(local.coupling(0, 1) == doctest::Approx(mhz(45)));
  const auto framed = rotating_frame(cfg, ghz(7.0));
  CHECK(frame_frequencies(framed)(0) == doctest::Approx(ghz(7.2671) - ghz(7.0)));
  CHECK_THROWS_AS(select_sites(cfg, {0, 7}), ModelError);
}
