#pragma once

#include <map>
#include <string>
#include <vector>

#include "wgqed/fockspace.hpp"
#include "wgqed/model.hpp"
#include "wgqed/types.hpp"

namespace wgqed {

enum class Symmetry { symmetric, antisymmetric, none };

const char* to_string(Symmetry s);

struct EigenState {
  std::size_t index = 0;  // energy ordinal inside its manifold
  int manifold = 0;
  cplx eigenvalue;        // lambda = E - i Gamma / 2
  double energy = 0.0;
  double decay = 0.0;
  Symmetry pair_symmetry = Symmetry::none;
  Symmetry within_pair_symmetry = Symmetry::none;
  Vector amplitudes;      // right eigenvector in the full Fock basis, unit norm
};

struct EffectiveSpectrum {
  std::vector<std::vector<EigenState>> manifolds;
  std::size_t n_sites = 0;
  std::size_t levels_per_site = 0;
  // Largest eigenvector-matrix condition number over all blocks.
  double worst_condition = 1.0;
  bool ill_conditioned = false;

  std::size_t size() const;
  std::vector<const EigenState*> all() const;
};

inline constexpr double defective_condition = 1e8;

// Blockwise diagonalization of H_eff per excitation manifold. States are
// sorted by energy, ties by decay. Requires [H, N] = 0.
EffectiveSpectrum spectrum(const ComplexOperator& h_eff, const FockSpace& space);

// Sum of Gamma over manifold n and the trace identity -2 Im Tr(H_n).
struct DecayBudget {
  double sum_decay = 0.0;
  double trace_decay = 0.0;
};
DecayBudget decay_budget(const EffectiveSpectrum& spec, const ComplexOperator& h_eff,
                         const FockSpace& space, int manifold);

struct SymmetryLabels {
  Symmetry pair = Symmetry::none;
  Symmetry within_pair = Symmetry::none;
  double pair_expectation = 0.0;
  double within_pair_expectation = 0.0;
};

SymmetryLabels classify_symmetry(const Vector& psi, const ComplexOperator& pair_swap,
                                 const ComplexOperator& within_swap, double eps);

// Fills the symmetry labels of every state (four-site spectra only).
void label_symmetries(EffectiveSpectrum& spec, const FockSpace& space, double eps);

inline constexpr double ideal_symmetry_eps = 1e-3;
inline constexpr double asymmetric_symmetry_eps = 0.1;

// Parameters of the identical-transmon closed forms used as naming references.
struct NamingReference {
  double gamma = 0.0;
  double J = 0.0;
  double U = 0.0;
};

NamingReference naming_reference(const SystemConfig& cfg);

struct NamedState {
  std::string name;
  int manifold = 0;
  double energy = 0.0;
  double decay = 0.0;
  double overlap = 0.0;  // |<reference|state>|^2 (or weight in a degenerate cluster)
  Vector amplitudes;
};

// Names G, D1, D2, D3, B4 and 5..14 by overlap with the collective and
// closed-form references. Degenerate clusters are matched by projection onto
// their eigenspace. Throws ModelError on an ambiguous assignment.
std::map<std::string, NamedState> identify_named_states(const EffectiveSpectrum& spec,
                                                        const FockSpace& space,
                                                        const NamingReference& ref);

}  // namespace wgqed
