#include "wgqed/fockspace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "wgqed/linalg.hpp"

namespace wgqed {

FockSpace::FockSpace(std::size_t n_sites, std::size_t levels_per_site, std::size_t max_dim,
                     int max_excitations)
    : n_sites_(n_sites), levels_(levels_per_site), max_excitations_(max_excitations) {
  if (n_sites < 1) throw ModelError("fock space needs at least one site");
  if (levels_per_site < 2) throw ModelError("fock space needs at least two levels per site");
  if (max_excitations < uncapped) throw ModelError("excitation cap must be >= 0");

  // The full product is enumerated even when capped; bound it separately.
  constexpr std::size_t enumeration_limit = std::size_t{1} << 22;
  std::size_t full = 1;
  for (std::size_t j = 0; j < n_sites; ++j) {
    const std::size_t limit = capped() ? enumeration_limit : max_dim;
    if (full > limit / levels_per_site) {
      throw ModelError("fock space dimension " + std::to_string(levels_per_site) + "^" +
                       std::to_string(n_sites) + " exceeds the cap of " +
                       std::to_string(limit) + "; reduce sites or levels_per_site");
    }
    full *= levels_per_site;
  }

  const int top = static_cast<int>(n_sites * (levels_per_site - 1));
  const int highest = capped() ? std::min(top, max_excitations) : top;
  manifolds_.resize(static_cast<std::size_t>(highest) + 1);
  full_to_index_.assign(full, -1);
  for (std::size_t index = 0; index < full; ++index) {
    Occupation occ(n_sites);
    std::size_t rest = index;
    for (std::size_t j = n_sites; j-- > 0;) {
      occ[j] = static_cast<int>(rest % levels_per_site);
      rest /= levels_per_site;
    }
    const int total = std::accumulate(occ.begin(), occ.end(), 0);
    if (total > highest) continue;
    full_to_index_[index] = static_cast<long>(occupations_.size());
    manifolds_[static_cast<std::size_t>(total)].push_back(occupations_.size());
    occupations_.push_back(std::move(occ));
    totals_.push_back(total);
  }
  if (occupations_.size() > max_dim) {
    throw ModelError("fock space dimension " + std::to_string(occupations_.size()) +
                     " exceeds the cap of " + std::to_string(max_dim) +
                     "; reduce sites, levels_per_site or the excitation cap");
  }
}

std::size_t FockSpace::index_of(std::span<const int> occupation) const {
  if (occupation.size() != n_sites_) throw ModelError("occupation tuple has wrong length");
  std::size_t full = 0;
  for (int n : occupation) {
    if (n < 0 || n >= static_cast<int>(levels_)) {
      throw ModelError("occupation " + std::to_string(n) + " outside truncation");
    }
    full = full * levels_ + static_cast<std::size_t>(n);
  }
  const long index = full_to_index_[full];
  if (index < 0) throw ModelError("occupation tuple exceeds the excitation cap");
  return static_cast<std::size_t>(index);
}

std::span<const std::size_t> FockSpace::manifold(int n) const {
  if (n < 0 || n > max_manifold()) return {};
  return manifolds_[static_cast<std::size_t>(n)];
}

std::vector<std::size_t> FockSpace::manifold_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(manifolds_.size());
  for (const auto& m : manifolds_) sizes.push_back(m.size());
  return sizes;
}

Vector FockSpace::basis_state(std::span<const int> occupation) const {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim()));
  v(static_cast<Eigen::Index>(index_of(occupation))) = 1.0;
  return v;
}

Vector FockSpace::basis_state(std::initializer_list<int> occupation) const {
  return basis_state(std::span<const int>(occupation.begin(), occupation.size()));
}

FockSpace build_space(std::size_t n_sites, std::size_t levels_per_site, std::size_t max_dim,
                      int max_excitations) {
  return FockSpace(n_sites, levels_per_site, max_dim, max_excitations);
}

ComplexOperator::ComplexOperator(const FockSpace& space, Matrix m, bool herm, bool diag)
    : matrix(std::move(m)), hermitian(herm), diagonal(diag) {
  const auto n = static_cast<Eigen::Index>(space.dim());
  if (matrix.rows() != n || matrix.cols() != n) {
    throw ModelError("operator shape does not match fock space dimension " +
                     std::to_string(space.dim()));
  }
  if (hermitian && !is_hermitian(matrix)) {
    throw ModelError("operator flagged hermitian is not");
  }
}

ComplexOperator ComplexOperator::adjoint() const {
  ComplexOperator out;
  out.matrix = matrix.adjoint();
  out.hermitian = hermitian;
  out.diagonal = diagonal;
  return out;
}

SparseMatrix ComplexOperator::sparse(double prune) const {
  return matrix.sparseView(1.0, prune);
}

ComplexOperator ladder_op(const FockSpace& space, std::size_t site) {
  if (site >= space.n_sites()) {
    throw ModelError("site index " + std::to_string(site) + " out of range for " +
                     std::to_string(space.n_sites()) + " sites");
  }
  const auto n = static_cast<Eigen::Index>(space.dim());
  Matrix a = Matrix::Zero(n, n);
  for (std::size_t col = 0; col < space.dim(); ++col) {
    Occupation occ = space.occupation(col);
    const int k = occ[site];
    if (k == 0) continue;
    occ[site] = k - 1;
    a(static_cast<Eigen::Index>(space.index_of(occ)), static_cast<Eigen::Index>(col)) =
        std::sqrt(static_cast<double>(k));
  }
  return ComplexOperator(space, std::move(a));
}

NumberOperators number_ops(const FockSpace& space) {
  const auto n = static_cast<Eigen::Index>(space.dim());
  NumberOperators ops;
  Matrix total = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < space.n_sites(); ++j) {
    Matrix nj = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < space.dim(); ++i) {
      nj(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = space.occupation(i)[j];
    }
    total += nj;
    ops.site.emplace_back(space, std::move(nj), true, true);
  }
  ops.total = ComplexOperator(space, std::move(total), true, true);
  return ops;
}

ComplexOperator pair_exchange_permutation(const FockSpace& space, PairExchange mode) {
  if (space.n_sites() != 4) {
    throw ModelError("pair exchange needs the four-site (1,2)|(3,4) layout, got " +
                     std::to_string(space.n_sites()) + " sites");
  }
  const std::array<std::size_t, 4> target = mode == PairExchange::pair_swap
                                                ? std::array<std::size_t, 4>{2, 3, 0, 1}
                                                : std::array<std::size_t, 4>{1, 0, 3, 2};
  const auto n = static_cast<Eigen::Index>(space.dim());
  Matrix p = Matrix::Zero(n, n);
  for (std::size_t col = 0; col < space.dim(); ++col) {
    const Occupation& occ = space.occupation(col);
    Occupation moved(4);
    for (std::size_t j = 0; j < 4; ++j) moved[target[j]] = occ[j];
    p(static_cast<Eigen::Index>(space.index_of(moved)), static_cast<Eigen::Index>(col)) = 1.0;
  }
  return ComplexOperator(space, std::move(p), true);
}

Matrix manifold_projector(const FockSpace& space, int n) {
  const auto dim = static_cast<Eigen::Index>(space.dim());
  Matrix p = Matrix::Zero(dim, dim);
  for (std::size_t i : space.manifold(n)) {
    p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
  }
  return p;
}

}  // namespace wgqed
