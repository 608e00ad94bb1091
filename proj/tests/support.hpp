#pragma once

#include <filesystem>
#include <random>

#include "wgqed/config.hpp"
#include "wgqed/model.hpp"

namespace wgqed::test {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(WGQED_TEST_CONFIG_DIR) / name;
}

// Four identical transmons in two capacitively coupled pairs a half
// wavelength apart, the idealized layout most closed forms assume.
inline SystemConfig identical_device(double gamma = mhz(28), double J = mhz(45), double U = mhz(218),
                                     double omega = ghz(7.2671)) {
  SystemConfig c;
  const double xs[4] = {0.0, 0.0, 46e-3, 46e-3};
  for (int j = 0; j < 4; ++j) {
    TransmonParams t;
    t.name = "Q" + std::to_string(j + 1);
    t.omega = omega;
    t.anharmonicity = U;
    t.gamma = gamma;
    t.x = xs[j];
    t.pair = j / 2;
    c.transmons.push_back(t);
  }
  c.set_coupling(0, 1, J);
  c.set_coupling(2, 3, J);
  return c;
}

inline SystemConfig with_rates(SystemConfig c, double gamma_nr, double kappa, double K) {
  for (auto& t : c.transmons) {
    t.gamma_nr = gamma_nr;
    t.kappa_phi = kappa;
  }
  c.K_phi = K;
  return c;
}

inline Matrix random_density(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = cplx(n(rng), n(rng));
  Matrix rho = a * a.adjoint();
  return rho / rho.trace();
}

inline Matrix random_matrix(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = cplx(n(rng), n(rng));
  return a;
}

}  // namespace wgqed::test
