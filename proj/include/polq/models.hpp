// polq/models.hpp — infinite-range Heisenberg model, phonon coupling, polaron frame.
//
// Hamiltonians are assembled in the hard-core-boson language (b† = S⁺, n = S^z + ½).
// The polaron frame is reached by the Lang-Firsov unitary e^S with
// S = −g Σ_i (n_i − ½)(a_i − a†_i); the transformed Hamiltonian splits into
// h_s (dressed system, hopping reduced by e^{−g²}), h_env = ω Σ a†a, and the
// residual interaction h_i built from pair displacement operators.
#pragma once

#include <vector>

#include "polq/hilbert.hpp"

namespace polq::models {

struct ModelParams {
  int n_sites = 2;
  double j_star = 0.1;     // total exchange; each pair carries J = j_star/(n_sites−1)
  double delta = 1.0;      // Ising anisotropy
  double g = 1.0;          // dimensionless spin-phonon coupling
  double omega = 1.0;      // phonon energy
  int phonon_cutoff = 0;   // per-site Fock cutoff M

  double j() const { return j_star / (n_sites - 1); }
  void validate() const;
  hilbert::CompositeSpace space() const;       // (n_sites, phonon_cutoff)
  hilbert::CompositeSpace spin_space() const;  // (n_sites, 0)
};

// e^S H_T e^{−S} = h_s + h_env + h_i, with h0 = h_s + h_env. The hard-core
// constraint turns the polaron binding energy into the c-number
// −g²ωN/4, which is kept inside h_s so the split is an exact matrix identity.
struct HamiltonianSplit {
  hilbert::OperatorMatrix h_total;  // untransformed H_T on the composite space
  hilbert::OperatorMatrix h0;      // h_s + h_env
  hilbert::OperatorMatrix h_s;
  hilbert::OperatorMatrix h_env;
  hilbert::OperatorMatrix h_i;
  double polaron_shift = 0.0;      // −g²ωN/4, included in h_s
};

struct ExcitationSpectrum {
  double epsilon_zero;  // uniform-mode energy of the dressed hopping term
  double epsilon_k;     // (N−1)-fold degenerate remainder
  double gap;           // epsilon_zero − epsilon_k = 0.5 J* (N/(N−1)) e^{−g²}
};

// J Σ_{i<j} [S_i·S_j + (Δ−1) S^z_i S^z_j] on the spin factor (phonon_cutoff ignored).
hilbert::OperatorMatrix build_irhm(const ModelParams& p);

// Full coupled Hamiltonian on the composite space:
// J Σ_{i<j} [(½ b†_i b_j + h.c.) + Δ(n_i−½)(n_j−½)] + ω Σ a†a + gω Σ (n_i−½)(a_i+a†_i).
hilbert::OperatorMatrix build_total_hamiltonian(const ModelParams& p);

hilbert::OperatorMatrix lf_generator(const ModelParams& p);
hilbert::OperatorMatrix lf_transform(const hilbert::OperatorMatrix& h,
                                     const hilbert::OperatorMatrix& s);

HamiltonianSplit build_split(const ModelParams& p);

ExcitationSpectrum hcb_excitation_spectrum(const ModelParams& p);

// The residual interaction as a lazily evaluated family of system-space blocks:
// h_i = Σ_{i≠j} ½ J e^{−g²} b†_i b_j ⊗ (B_ij − 1) with B_ij carrying the single-mode
// displacement product w = e^{g a†} e^{−g a} at site i and w† at site j.
// Blocks never materialize the composite matrix, so they stay usable at cutoffs
// where the dense h_i would not fit in memory.
class InteractionBlocks {
 public:
  explicit InteractionBlocks(const ModelParams& p);

  const hilbert::CompositeSpace& space() const { return space_; }

  // ⟨p_row|h_i|p_col⟩ as an operator on the spin factor.
  Matrix system_block(Eigen::Index p_row, Eigen::Index p_col) const;

  // Phonon indices p ≠ 0 with ⟨0|h_i|p⟩ ≠ 0 (support on at most two sites).
  std::vector<Eigen::Index> coupled_to_vacuum() const;

  // ⟨χ|h_i|χ⟩ for a product bath state χ given per site (each entry normalized).
  Matrix bath_average(const std::vector<Vector>& site_states) const;

 private:
  struct PairTerm {
    int site_i;
    int site_j;
    Matrix hop;  // ½ J e^{−g²} b†_i b_j on the spin factor
  };
  cplx pair_phonon_element(const PairTerm& t, Eigen::Index p_row, Eigen::Index p_col) const;

  hilbert::CompositeSpace space_;
  Matrix w_;  // single-mode e^{g a†} e^{−g a}
  std::vector<PairTerm> pairs_;
};

// Cutoff-convergence verification of the split identity. `windowed` compares the two
// sides restricted to per-site phonon occupation ≤ window_cap (states away from the
// Fock ceiling, where the truncated transform can converge); `full_space` is the raw
// whole-space ratio, which is dominated by ceiling states and plateaus near 1e-1.
struct SplitResidual {
  double windowed;
  double full_space;
};
SplitResidual split_transform_residual(const ModelParams& p, int window_cap);

}  // namespace polq::models
