// polq/analysis.hpp — labeled eigenbases, coherence tracking, and the two-qubit
// polaron-dressing element.
//
// The exchange model commutes with both the total S^z and the total S², so its
// eigenbasis is labeled by (energy, sz, S). Degenerate clusters are resolved by
// a fixed deterministic convention; coherence between labeled states is then a
// well-defined observable whose magnitude and unwrapped phase are tracked here.
#pragma once

#include <vector>

#include "polq/models.hpp"

namespace polq::analysis {

struct EigenLabel {
  double energy = 0.0;
  double sz_total = 0.0;
  double s_total = 0.0;
  int multiplet_index = 0;  // deterministic tie-breaker within an (sz, S) cluster
};

struct LabeledBasis {
  Matrix vectors;  // one column per label, same order as `labels`
  std::vector<EigenLabel> labels;
};

// Simultaneous eigenbasis of {H, S^z_total, S²_total} on the spin factor,
// built by restricting S² to each S^z sector and clustering its eigenvalues.
// Within a degenerate cluster the basis is canonicalized from the cluster
// projector: candidate vectors P e_j are orthonormalized in increasing j and
// phase-fixed so the largest-magnitude component is real positive. Labels are
// ordered by (energy, sz, S, multiplet_index); every labeled vector is verified
// against all three operators before being returned.
LabeledBasis irhm_eigenbasis(const models::ModelParams& p);

struct CoherenceSeries {
  std::vector<double> times;
  std::vector<double> magnitudes;
  std::vector<double> phases;  // nearest-branch unwrapped
  double ripple = 0.0;         // max − min of magnitudes
};

// ⟨bra|ρ(t)|ket⟩ magnitude and unwrapped phase over a trajectory of spin-factor
// density matrices. The phase is undefined when the magnitude vanishes, so any
// sample below 1e-13 is an error.
CoherenceSeries coherence_profile(const std::vector<double>& times,
                                  const std::vector<Matrix>& states, const Vector& bra,
                                  const Vector& ket);

// max_k |phase(t_k) − phase(t_0) + predicted_gap·(t_k − t_0)| on the unwrapped
// series. Requires |predicted_gap|·Δt < π for every sample step, otherwise the
// unwrap cannot be trusted and the call fails.
double phase_residual(const CoherenceSeries& series, double predicted_gap);

// Singlet–triplet element of a two-site joint density matrix in the original
// (untransformed) frame, computed two independent ways: `dressed_sum` expands
// the polaron-dressed singlet/triplet states with single-site displacement
// factors X = e^{(g/2)(a − a†)} and sums over phonon occupations; `lf_frame`
// transforms ρ with e^S and takes the element of the phonon-traced result.
struct PolaronElementRoutes {
  cplx dressed_sum;
  cplx lf_frame;
  double abs_difference = 0.0;
};
PolaronElementRoutes two_qubit_polaron_element(const models::ModelParams& p,
                                               const Matrix& rho_joint_original);

}  // namespace polq::analysis
