#include "wgqed/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "wgqed/linalg.hpp"
#include "wgqed/oracle.hpp"

namespace wgqed {

const char* to_string(Symmetry s) {
  switch (s) {
    case Symmetry::symmetric:
      return "symmetric";
    case Symmetry::antisymmetric:
      return "antisymmetric";
    case Symmetry::none:
      break;
  }
  return "none";
}

std::size_t EffectiveSpectrum::size() const {
  std::size_t n = 0;
  for (const auto& m : manifolds) n += m.size();
  return n;
}

std::vector<const EigenState*> EffectiveSpectrum::all() const {
  std::vector<const EigenState*> out;
  for (const auto& m : manifolds)
    for (const auto& s : m) out.push_back(&s);
  return out;
}

namespace {

void require_number_conserving(const Matrix& h, const FockSpace& space) {
  const double tol = 1e-12 * std::max(1.0, max_abs(h));
  for (Eigen::Index c = 0; c < h.cols(); ++c) {
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
      if (space.total_occupation(static_cast<std::size_t>(r)) !=
              space.total_occupation(static_cast<std::size_t>(c)) &&
          std::abs(h(r, c)) > tol) {
        throw ModelError("hamiltonian does not commute with the total occupation operator");
      }
    }
  }
}

Matrix block_of(const Matrix& h, std::span<const std::size_t> idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Matrix b(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c)
      b(r, c) = h(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]),
                  static_cast<Eigen::Index>(idx[static_cast<std::size_t>(c)]));
  return b;
}

}  // namespace

EffectiveSpectrum spectrum(const ComplexOperator& h_eff, const FockSpace& space) {
  if (h_eff.dim() != space.dim()) throw ModelError("hamiltonian does not match the space");
  require_number_conserving(h_eff.matrix, space);

  EffectiveSpectrum spec;
  spec.n_sites = space.n_sites();
  spec.levels_per_site = space.levels_per_site();
  spec.manifolds.resize(static_cast<std::size_t>(space.max_manifold() + 1));

  for (int n = 0; n <= space.max_manifold(); ++n) {
    const auto idx = space.manifold(n);
    Matrix block = block_of(h_eff.matrix, idx);
    // Shift by the mean bare energy so the solver works on O(U, gamma) numbers.
    const double shift = block.diagonal().real().mean();
    block.diagonal().array() -= shift;
    Eigen::ComplexEigenSolver<Matrix> eig(block);
    if (eig.info() != Eigen::Success) throw NumericalError("eigensolver failed on manifold " + std::to_string(n));

    const Matrix& v = eig.eigenvectors();
    Eigen::JacobiSVD<Matrix> svd(v);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    spec.worst_condition = std::max(spec.worst_condition, cond);

    auto& states = spec.manifolds[static_cast<std::size_t>(n)];
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
      EigenState s;
      s.manifold = n;
      s.eigenvalue = eig.eigenvalues()(k) + shift;
      s.energy = s.eigenvalue.real();
      s.decay = -2.0 * s.eigenvalue.imag();
      s.amplitudes = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
      const Vector col = v.col(k).normalized();
      for (std::size_t r = 0; r < idx.size(); ++r) {
        s.amplitudes(static_cast<Eigen::Index>(idx[r])) = col(static_cast<Eigen::Index>(r));
      }
      states.push_back(std::move(s));
    }
    const double scale = std::max(1.0, block.cwiseAbs().maxCoeff());
    std::sort(states.begin(), states.end(), [&](const EigenState& a, const EigenState& b) {
      if (std::abs(a.energy - b.energy) > 1e-9 * scale) return a.energy < b.energy;
      return a.decay < b.decay;
    });
    for (std::size_t k = 0; k < states.size(); ++k) states[k].index = k;
  }
  spec.ill_conditioned = spec.worst_condition > defective_condition;
  return spec;
}

DecayBudget decay_budget(const EffectiveSpectrum& spec, const ComplexOperator& h_eff,
                         const FockSpace& space, int manifold) {
  DecayBudget b;
  if (manifold < 0 || manifold >= static_cast<int>(spec.manifolds.size())) return b;
  for (const auto& s : spec.manifolds[static_cast<std::size_t>(manifold)]) b.sum_decay += s.decay;
  for (std::size_t i : space.manifold(manifold)) {
    b.trace_decay -= 2.0 * h_eff.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).imag();
  }
  return b;
}

SymmetryLabels classify_symmetry(const Vector& psi, const ComplexOperator& pair_swap,
                                 const ComplexOperator& within_swap, double eps) {
  auto label = [eps](double e) {
    if (e > 1.0 - eps) return Symmetry::symmetric;
    if (e < -(1.0 - eps)) return Symmetry::antisymmetric;
    return Symmetry::none;
  };
  SymmetryLabels out;
  out.pair_expectation = expectation(pair_swap.matrix, psi).real();
  out.within_pair_expectation = expectation(within_swap.matrix, psi).real();
  out.pair = label(out.pair_expectation);
  out.within_pair = label(out.within_pair_expectation);
  return out;
}

void label_symmetries(EffectiveSpectrum& spec, const FockSpace& space, double eps) {
  if (space.n_sites() != 4) return;
  const auto p = pair_exchange_permutation(space, PairExchange::pair_swap);
  const auto w = pair_exchange_permutation(space, PairExchange::within_pair_swap);
  for (auto& m : spec.manifolds) {
    for (auto& s : m) {
      const auto l = classify_symmetry(s.amplitudes, p, w, eps);
      s.pair_symmetry = l.pair;
      s.within_pair_symmetry = l.within_pair;
    }
  }
}

NamingReference naming_reference(const SystemConfig& cfg) {
  NamingReference r;
  if (cfg.transmons.empty()) return r;
  for (const auto& t : cfg.transmons) {
    r.gamma += t.gamma;
    r.U += t.anharmonicity;
  }
  r.gamma /= static_cast<double>(cfg.n_sites());
  r.U /= static_cast<double>(cfg.n_sites());
  double J = 0.0;
  for (const auto& [key, value] : cfg.direct) J += value;
  if (!cfg.direct.empty()) r.J = J / static_cast<double>(cfg.direct.size());
  return r;
}

namespace {

struct Cluster {
  std::vector<const EigenState*> states;
  Matrix basis;  // orthonormal span of the cluster's eigenvectors
  std::size_t assigned = 0;
};

std::vector<Cluster> cluster_manifold(const std::vector<EigenState>& states) {
  double scale = 1.0;
  for (const auto& s : states) scale = std::max(scale, std::abs(s.eigenvalue - states.front().eigenvalue));
  const double tol = 1e-7 * scale;
  std::vector<std::size_t> parent(states.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t a = 0; a < states.size(); ++a)
    for (std::size_t b = a + 1; b < states.size(); ++b)
      if (std::abs(states[a].eigenvalue - states[b].eigenvalue) < tol) parent[find(b)] = find(a);

  std::vector<Cluster> clusters;
  std::vector<long> slot(states.size(), -1);
  for (std::size_t a = 0; a < states.size(); ++a) {
    const std::size_t root = find(a);
    if (slot[root] < 0) {
      slot[root] = static_cast<long>(clusters.size());
      clusters.emplace_back();
    }
    clusters[static_cast<std::size_t>(slot[root])].states.push_back(&states[a]);
  }
  for (auto& c : clusters) {
    Matrix v(c.states.front()->amplitudes.size(), static_cast<Eigen::Index>(c.states.size()));
    for (std::size_t k = 0; k < c.states.size(); ++k) v.col(static_cast<Eigen::Index>(k)) = c.states[k]->amplitudes;
    Eigen::HouseholderQR<Matrix> qr(v);
    c.basis = qr.householderQ() * Matrix::Identity(v.rows(), v.cols());
  }
  return clusters;
}

NamedState match(const std::string& name, const Vector& reference, std::vector<Cluster>& clusters) {
  const Vector r = reference.normalized();
  std::vector<double> weight(clusters.size());
  for (std::size_t c = 0; c < clusters.size(); ++c) weight[c] = (clusters[c].basis.adjoint() * r).squaredNorm();
  std::vector<std::size_t> order(clusters.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return weight[a] > weight[b]; });

  const std::size_t best = order.front();
  if (order.size() > 1 && weight[best] - weight[order[1]] < 0.01) {
    std::ostringstream msg;
    msg << "ambiguous assignment for " << name << ": candidates at E/2pi = "
        << to_ghz(clusters[best].states.front()->energy) << " GHz and "
        << to_ghz(clusters[order[1]].states.front()->energy) << " GHz with overlaps "
        << weight[best] << " and " << weight[order[1]];
    throw ModelError(msg.str());
  }
  Cluster& c = clusters[best];
  if (c.assigned >= c.states.size()) {
    throw ModelError("state assignment is not injective: " + name +
                     " maps onto an already named eigenstate");
  }
  ++c.assigned;

  NamedState out;
  out.name = name;
  out.manifold = c.states.front()->manifold;
  out.energy = c.states.front()->energy;
  out.decay = c.states.front()->decay;
  out.overlap = weight[best];
  if (c.states.size() == 1) {
    Vector v = c.states.front()->amplitudes;
    const cplx ov = v.dot(r);
    if (std::abs(ov) > 0) v *= std::conj(ov) / std::abs(ov);
    out.amplitudes = v;
  } else {
    out.amplitudes = (c.basis * (c.basis.adjoint() * r)).normalized();
  }
  return out;
}

}  // namespace

std::map<std::string, NamedState> identify_named_states(const EffectiveSpectrum& spec,
                                                        const FockSpace& space,
                                                        const NamingReference& ref) {
  if (space.n_sites() != 4) throw ModelError("named states need the four-site layout");
  if (spec.manifolds.size() < 2) throw ModelError("spectrum lacks the one-excitation manifold");
  const CollectiveBasis basis = collective_states(space);
  std::map<std::string, NamedState> named;

  const auto& ground = spec.manifolds[0].front();
  named["G"] = NamedState{"G", 0, ground.energy, ground.decay, 1.0, ground.amplitudes};

  auto one = cluster_manifold(spec.manifolds[1]);
  for (const auto& [name, psi] : {std::pair<std::string, const Vector&>{"D1", basis.D1},
                                  {"D2", basis.D2},
                                  {"D3", basis.D3},
                                  {"B4", basis.B4}}) {
    named[name] = match(name, psi, one);
  }

  if (spec.manifolds.size() < 3 || space.levels_per_site() < 3 || ref.U == 0.0) return named;
  auto two = cluster_manifold(spec.manifolds[2]);
  const auto closed = two_excitation_states(basis, analytic_two_excitation(ref.gamma, ref.J, ref.U));
  for (const auto& [label, psi] : closed) {
    const std::string name = std::to_string(label);
    named[name] = match(name, psi, two);
  }
  // The omitted closed forms |6>, |13>, |14> are the remaining states by energy.
  std::vector<const EigenState*> rest;
  for (const auto& c : two)
    if (c.assigned == 0) rest.insert(rest.end(), c.states.begin(), c.states.end());
  if (rest.size() == 3) {
    std::sort(rest.begin(), rest.end(), [](auto* a, auto* b) { return a->energy < b->energy; });
    const char* names[] = {"6", "13", "14"};
    for (std::size_t k = 0; k < 3; ++k) {
      named[names[k]] = NamedState{names[k], 2, rest[k]->energy, rest[k]->decay, 1.0, rest[k]->amplitudes};
    }
  }
  return named;
}

}  // namespace wgqed
