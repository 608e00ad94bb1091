#include "wgqed/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "wgqed/linalg.hpp"

namespace wgqed {

namespace {

std::string site_label(const SystemConfig& cfg, std::size_t j) {
  const auto& name = cfg.transmons[j].name;
  return name.empty() ? "transmon " + std::to_string(j) : name;
}

std::vector<Matrix> ladders(const FockSpace& space) {
  std::vector<Matrix> a;
  a.reserve(space.n_sites());
  for (std::size_t j = 0; j < space.n_sites(); ++j) a.push_back(ladder_op(space, j).matrix);
  return a;
}

void require_matching(const SystemConfig& cfg, const FockSpace& space) {
  if (space.n_sites() != cfg.n_sites()) {
    throw ModelError("config has " + std::to_string(cfg.n_sites()) + " transmons but the space has " +
                     std::to_string(space.n_sites()) + " sites");
  }
}

}  // namespace

double TransmonParams::dimensionless_coupling() const {
  if (!(omega > 0)) return 0.0;
  return std::sqrt(gamma / (two_pi * omega));
}

double SystemConfig::coupling(std::size_t j, std::size_t k) const {
  auto it = direct.find({std::min(j, k), std::max(j, k)});
  return it == direct.end() ? 0.0 : it->second;
}

void SystemConfig::set_coupling(std::size_t j, std::size_t k, double value) {
  if (j == k) throw ModelError("direct coupling needs two distinct sites");
  direct[{std::min(j, k), std::max(j, k)}] = value;
}

void validate(const SystemConfig& cfg) {
  if (cfg.transmons.empty()) throw ModelError("config has no transmons");
  for (std::size_t j = 0; j < cfg.n_sites(); ++j) {
    const auto& t = cfg.transmons[j];
    const std::string who = site_label(cfg, j);
    auto need = [&](bool ok, const char* what) {
      if (!ok) throw ModelError(who + ": " + what);
    };
    need(std::isfinite(t.omega) && t.omega > 0, "frequency must be positive");
    need(std::isfinite(t.anharmonicity) && t.anharmonicity >= 0, "anharmonicity must be >= 0");
    need(std::isfinite(t.gamma) && t.gamma >= 0, "gamma must be >= 0");
    need(std::isfinite(t.gamma_nr) && t.gamma_nr >= 0, "gamma_nr must be >= 0");
    need(std::isfinite(t.kappa_phi) && t.kappa_phi >= 0, "kappa_phi must be >= 0");
    need(std::isfinite(t.x), "position must be finite");
    if (t.dimensionless_coupling() >= 0.1) {
      std::ostringstream msg;
      msg << who << ": dimensionless coupling g = " << t.dimensionless_coupling()
          << " is outside the weak-coupling regime (g < 0.1)";
      throw ModelError(msg.str());
    }
  }
  if (!(std::isfinite(cfg.K_phi) && cfg.K_phi >= 0)) throw ModelError("K_phi must be >= 0");
  if (!std::isfinite(cfg.frame)) throw ModelError("frame frequency must be finite");
  if (cfg.coupling_mode == CouplingMode::fixed_phase && !std::isfinite(cfg.fixed_phase)) {
    throw ModelError("fixed_phase must be finite");
  }
  for (const auto& [key, value] : cfg.direct) {
    const auto [j, k] = key;
    if (j >= cfg.n_sites() || k >= cfg.n_sites() || j == k) {
      throw ModelError("direct coupling refers to invalid sites (" + std::to_string(j) + ", " +
                       std::to_string(k) + ")");
    }
    if (!std::isfinite(value)) throw ModelError("direct coupling must be finite");
    if (std::abs(cfg.transmons[j].x - cfg.transmons[k].x) > 1e-9) {
      throw ModelError("direct coupling between " + site_label(cfg, j) + " and " +
                       site_label(cfg, k) + " which sit at different positions");
    }
  }
}

SystemConfig select_sites(const SystemConfig& cfg, const std::vector<std::size_t>& sites) {
  SystemConfig out = cfg;
  out.transmons.clear();
  out.direct.clear();
  for (std::size_t s : sites) {
    if (s >= cfg.n_sites()) throw ModelError("selected site " + std::to_string(s) + " out of range");
    out.transmons.push_back(cfg.transmons[s]);
  }
  for (std::size_t a = 0; a < sites.size(); ++a) {
    for (std::size_t b = a + 1; b < sites.size(); ++b) {
      if (sites[a] == sites[b]) throw ModelError("site selected twice");
      const double J = cfg.coupling(sites[a], sites[b]);
      if (J != 0.0) out.set_coupling(a, b, J);
    }
  }
  return out;
}

SystemConfig rotating_frame(const SystemConfig& cfg, double omega_d) {
  if (!(omega_d > 0)) throw ModelError("drive frequency must be positive");
  SystemConfig out = cfg;
  out.frame = omega_d;
  return out;
}

RealVector frame_frequencies(const SystemConfig& cfg) {
  RealVector w(static_cast<Eigen::Index>(cfg.n_sites()));
  for (std::size_t j = 0; j < cfg.n_sites(); ++j) {
    w(static_cast<Eigen::Index>(j)) = cfg.transmons[j].omega - cfg.frame;
  }
  return w;
}

double coupling_phase(const SystemConfig& cfg, std::size_t j, std::size_t k) {
  const double dist = std::abs(cfg.transmons[j].x - cfg.transmons[k].x);
  if (dist == 0.0) return 0.0;
  if (cfg.coupling_mode == CouplingMode::fixed_phase) {
    if (!(cfg.geometry.pair_separation > 0)) {
      throw ModelError("fixed_phase mode needs a positive pair separation");
    }
    return cfg.fixed_phase * dist / cfg.geometry.pair_separation;
  }
  return propagation_phase(cfg.geometry, cfg.transmons[j].omega, dist);
}

WaveguideCouplings waveguide_couplings(const SystemConfig& cfg) {
  validate(cfg);
  const auto n = static_cast<Eigen::Index>(cfg.n_sites());
  Matrix exchange = Matrix::Zero(n, n);
  Matrix decay = Matrix::Zero(n, n);
  WaveguideCouplings out;
  double gamma_max = 0.0;
  for (const auto& t : cfg.transmons) gamma_max = std::max(gamma_max, t.gamma);

  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& tj = cfg.transmons[static_cast<std::size_t>(j)];
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& tk = cfg.transmons[static_cast<std::size_t>(k)];
      const double gg = tj.dimensionless_coupling() * tk.dimensionless_coupling();
      const double th_j = coupling_phase(cfg, static_cast<std::size_t>(j), static_cast<std::size_t>(k));
      const double th_k = coupling_phase(cfg, static_cast<std::size_t>(k), static_cast<std::size_t>(j));
      const cplx ej = tj.omega * std::exp(I * th_j);
      const cplx ek = tk.omega * std::exp(-I * th_k);
      decay(j, k) = pi * gg * (ej + ek);
      exchange(j, k) = -I * (pi / 2.0) * gg * (ej - ek);
      if (j != k && cfg.coupling_mode == CouplingMode::exact_delay) {
        const double t_jk = propagation_delay(cfg.geometry, tj.omega, std::abs(tj.x - tk.x));
        out.markov_parameter = std::max(out.markov_parameter, gamma_max * t_jk);
      }
    }
  }

  // Fold any anti-hermitian remainder of gamma into the exchange term.
  exchange += (decay - decay.adjoint()) / (4.0 * I);
  decay = hermitian_part(decay);
  exchange = hermitian_part(exchange);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(decay);
  RealVector lambda = eig.eigenvalues();
  const double floor = -1e-6 * gamma_max;
  for (Eigen::Index c = 0; c < lambda.size(); ++c) {
    if (lambda(c) < 0.0) {
      if (lambda(c) < floor) {
        std::ostringstream msg;
        msg << "correlated decay matrix has eigenvalue " << lambda(c) / gamma_max
            << " x max(gamma): the Markovian model is not valid for this geometry";
        throw ModelError(msg.str());
      }
      out.clipped_eigenvalue = std::min(out.clipped_eigenvalue, lambda(c));
      lambda(c) = 0.0;
    }
  }
  if (out.clipped_eigenvalue < 0.0) {
    const Matrix& v = eig.eigenvectors();
    decay = v * lambda.asDiagonal() * v.adjoint();
    decay = hermitian_part(decay);
  }
  out.exchange = std::move(exchange);
  out.decay = std::move(decay);
  return out;
}

ComplexOperator transmon_hamiltonian(const SystemConfig& cfg, const FockSpace& space) {
  require_matching(cfg, space);
  const auto dim = static_cast<Eigen::Index>(space.dim());
  const RealVector w = frame_frequencies(cfg);
  Matrix h = Matrix::Zero(dim, dim);
  for (std::size_t i = 0; i < space.dim(); ++i) {
    const Occupation& occ = space.occupation(i);
    double e = 0.0;
    for (std::size_t j = 0; j < occ.size(); ++j) {
      const double nj = occ[j];
      e += w(static_cast<Eigen::Index>(j)) * nj - 0.5 * cfg.transmons[j].anharmonicity * nj * (nj - 1.0);
    }
    h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = e;
  }
  if (!cfg.direct.empty()) {
    const auto a = ladders(space);
    for (const auto& [key, J] : cfg.direct) {
      const Matrix hop = a[key.first].adjoint() * a[key.second];
      h += J * (hop + hop.adjoint());
    }
  }
  return ComplexOperator(space, std::move(h), true);
}

ComplexOperator effective_hamiltonian(const SystemConfig& cfg, const FockSpace& space,
                                      bool include_dephasing) {
  ComplexOperator ht = transmon_hamiltonian(cfg, space);
  const WaveguideCouplings wc = waveguide_couplings(cfg);
  const auto a = ladders(space);
  const auto n = cfg.n_sites();
  Matrix h = std::move(ht.matrix);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      const auto jj = static_cast<Eigen::Index>(j);
      const auto kk = static_cast<Eigen::Index>(k);
      const cplx coeff = wc.exchange(jj, kk) - 0.5 * I * wc.decay(jj, kk);
      if (coeff == 0.0) continue;
      h.noalias() += coeff * (a[k].adjoint() * a[j]);
    }
  }
  // All remaining terms are diagonal in the Fock basis.
  for (std::size_t i = 0; i < space.dim(); ++i) {
    const Occupation& occ = space.occupation(i);
    double loss = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double nj = occ[j];
      loss += cfg.transmons[j].gamma_nr * nj;
      if (include_dephasing) loss += cfg.transmons[j].kappa_phi * nj * nj;
    }
    if (include_dephasing) {
      const double N = space.total_occupation(i);
      loss += cfg.K_phi * N * N;
    }
    h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) -= 0.5 * I * loss;
  }
  return ComplexOperator(space, std::move(h));
}

LindbladTerms lindblad_terms(const SystemConfig& cfg, const FockSpace& space) {
  LindbladTerms out;
  out.h_eff = effective_hamiltonian(cfg, space, true);
  const WaveguideCouplings wc = waveguide_couplings(cfg);
  const auto n = static_cast<Eigen::Index>(cfg.n_sites());

  Matrix rates = wc.decay;
  for (Eigen::Index j = 0; j < n; ++j) rates(j, j) += cfg.transmons[static_cast<std::size_t>(j)].gamma_nr;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(rates);
  const RealVector& lambda = eig.eigenvalues();
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  const auto a = ladders(space);
  for (Eigen::Index c = 0; c < n; ++c) {
    if (lambda(c) <= 1e-14 * scale) continue;
    Matrix L = Matrix::Zero(a[0].rows(), a[0].cols());
    for (Eigen::Index j = 0; j < n; ++j) {
      const cplx v = eig.eigenvectors()(j, c);
      if (v != 0.0) L += v * a[static_cast<std::size_t>(j)];
    }
    out.jumps.emplace_back(space, std::sqrt(lambda(c)) * L);
  }

  const auto dim = static_cast<Eigen::Index>(space.dim());
  out.dephasing_weights = RealMatrix::Zero(dim, dim);
  for (Eigen::Index p = 0; p < dim; ++p) {
    const Occupation& op = space.occupation(static_cast<std::size_t>(p));
    const double Np = space.total_occupation(static_cast<std::size_t>(p));
    for (Eigen::Index q = 0; q < dim; ++q) {
      const Occupation& oq = space.occupation(static_cast<std::size_t>(q));
      double w = cfg.K_phi * Np * space.total_occupation(static_cast<std::size_t>(q));
      for (std::size_t j = 0; j < cfg.n_sites(); ++j) {
        w += cfg.transmons[j].kappa_phi * op[j] * oq[j];
      }
      out.dephasing_weights(p, q) = w;
    }
  }
  return out;
}

void validate(const DriveConfig& drive) {
  if (!(drive.omega >= 0)) throw ModelError("drive amplitude must be >= 0");
  if (!(drive.gradient >= 0)) throw ModelError("drive gradient must be >= 0");
  if (drive.gradient > drive.omega) throw ModelError("drive gradient exceeds the drive amplitude");
  if (!std::isfinite(drive.phase)) throw ModelError("drive phase must be finite");
}

double gradient_for_power_ratio(double omega, double power_ratio) {
  if (!(power_ratio > 0 && power_ratio <= 1)) throw ModelError("power ratio must be in (0, 1]");
  // (Omega/2 - g/4) / (Omega/2 + g/4) = sqrt(power_ratio)
  const double r = std::sqrt(power_ratio);
  return 2.0 * omega * (1.0 - r) / (1.0 + r);
}

std::array<cplx, 4> drive_coefficients(const DriveConfig& drive) {
  validate(drive);
  const cplx ph = std::exp(I * drive.phase);
  const double strong = drive.omega / 2.0 + drive.gradient / 4.0;
  const double weak = drive.omega / 2.0 - drive.gradient / 4.0;
  return {ph * strong, ph * weak, cplx(strong), cplx(weak)};
}

ComplexOperator drive_operator(const FockSpace& space, const Vector& coefficients) {
  if (static_cast<std::size_t>(coefficients.size()) != space.n_sites()) {
    throw ModelError("drive needs one coefficient per site");
  }
  const auto dim = static_cast<Eigen::Index>(space.dim());
  Matrix h = Matrix::Zero(dim, dim);
  for (std::size_t j = 0; j < space.n_sites(); ++j) {
    const cplx c = coefficients(static_cast<Eigen::Index>(j));
    if (c == 0.0) continue;
    h += c * ladder_op(space, j).matrix;
  }
  h += h.adjoint().eval();
  return ComplexOperator(space, std::move(h), true);
}

ComplexOperator drive_hamiltonian(const DriveConfig& drive, const FockSpace& space) {
  if (space.n_sites() != 4) {
    throw ModelError("sideport drive is defined for the four-site layout only");
  }
  const auto c = drive_coefficients(drive);
  return drive_operator(space, Eigen::Map<const Vector>(c.data(), 4));
}

}  // namespace wgqed
