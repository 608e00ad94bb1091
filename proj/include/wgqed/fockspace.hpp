#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wgqed/types.hpp"

namespace wgqed {

using Occupation = std::vector<int>;

// Truncated Fock basis of n transmons with d levels each.
//
// Basis ordering is lexicographic in the occupation tuple with site 0 the
// most significant digit: index = sum_j n_j * d^(n_sites - 1 - j). For four
// three-level sites, index 0 is |0000>, index 1 is |0001>, index 27 is |1000>.
// An optional excitation cap keeps only states with total occupation
// <= max_excitations (same relative ordering), which is how the pulse
// experiments stay small. Instances are immutable after construction.
class FockSpace {
 public:
  static constexpr std::size_t default_max_dim = 4096;
  static constexpr int uncapped = -1;

  FockSpace(std::size_t n_sites, std::size_t levels_per_site,
            std::size_t max_dim = default_max_dim, int max_excitations = uncapped);

  std::size_t n_sites() const { return n_sites_; }
  std::size_t levels_per_site() const { return levels_; }
  std::size_t dim() const { return occupations_.size(); }
  int max_excitations() const { return max_excitations_; }
  bool capped() const { return max_excitations_ != uncapped; }

  const Occupation& occupation(std::size_t index) const { return occupations_.at(index); }
  std::size_t index_of(std::span<const int> occupation) const;
  int total_occupation(std::size_t index) const { return totals_.at(index); }

  // Largest total excitation number present in the truncated space.
  int max_manifold() const { return static_cast<int>(manifolds_.size()) - 1; }
  // Basis indices whose occupations sum to n (empty if n is out of range).
  std::span<const std::size_t> manifold(int n) const;
  std::vector<std::size_t> manifold_sizes() const;

  Vector basis_state(std::span<const int> occupation) const;
  Vector basis_state(std::initializer_list<int> occupation) const;

  bool operator==(const FockSpace& other) const {
    return n_sites_ == other.n_sites_ && levels_ == other.levels_ &&
           max_excitations_ == other.max_excitations_;
  }

 private:
  std::size_t n_sites_;
  std::size_t levels_;
  int max_excitations_;
  std::vector<Occupation> occupations_;
  std::vector<long> full_to_index_;  // -1 for states removed by the cap
  std::vector<int> totals_;
  std::vector<std::vector<std::size_t>> manifolds_;
};

FockSpace build_space(std::size_t n_sites, std::size_t levels_per_site,
                      std::size_t max_dim = FockSpace::default_max_dim,
                      int max_excitations = FockSpace::uncapped);

// Dense operator on a FockSpace. The flags are validated on construction.
struct ComplexOperator {
  Matrix matrix;
  bool hermitian = false;
  bool diagonal = false;

  ComplexOperator() = default;
  ComplexOperator(const FockSpace& space, Matrix m, bool herm = false, bool diag = false);

  std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }
  ComplexOperator adjoint() const;
  SparseMatrix sparse(double prune = 0.0) const;
};

// Annihilation operator of site j: <n-1|a|n> = sqrt(n) on site j.
// Throws if the occupation tuple lies outside the (capped) space.
ComplexOperator ladder_op(const FockSpace& space, std::size_t site);

struct NumberOperators {
  std::vector<ComplexOperator> site;
  ComplexOperator total;
};

NumberOperators number_ops(const FockSpace& space);

// Exchange symmetries of the four-site layout with pairs (1,2) | (3,4).
enum class PairExchange {
  pair_swap,         // 1<->3, 2<->4
  within_pair_swap,  // 1<->2, 3<->4
};

ComplexOperator pair_exchange_permutation(const FockSpace& space, PairExchange mode);

// Orthogonal projector onto the total-occupation manifold n.
Matrix manifold_projector(const FockSpace& space, int n);

}  // namespace wgqed
