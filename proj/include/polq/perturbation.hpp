// polq/perturbation.hpp — effective spin Hamiltonians from phonon elimination.
//
// Eliminating the residual interaction h_i perturbatively around the dressed
// vacuum produces effective couplings on the spin factor. Second order gives an
// exchange Hamiltonian whose couplings are set by two entire series in g; third
// order reduces, through a family of hard-core operator identities, to a hopping
// term and an interaction term that are functions of the total occupation only,
// and therefore shares eigenstates with the bare exchange model.
#pragma once

#include <string>
#include <vector>

#include "polq/models.hpp"

namespace polq::perturbation {

// f1(g) = Σ_{n≥1} g^{2n}/(n·n!),  f2(g) = Σ_{n,m≥1} g^{2(n+m)}/(n!·m!·(n+m)).
// `value` carries the sum truncated where terms stop changing it; `tail_bound`
// is a geometric-ratio bound on everything dropped; `max_order` is the largest
// per-index order included.
struct SeriesValue {
  double value = 0.0;
  double tail_bound = 0.0;
  int max_order = 0;
};

SeriesValue f1_series(double g);
SeriesValue f2_series(double g);

// Partial sums with a fixed order cap (f2 keeps the full rectangle n,m ≤ max_order).
// These reproduce exactly what the explicit intermediate-state sum sees at a
// per-site phonon cutoff equal to max_order.
double f1_partial(double g, int max_order);
double f2_partial(double g, int max_order);

struct EffectiveCouplings {
  double j_perp;             // −(N−2) f1(g) J² e^{−2g²} / (2ω)
  double j_par;              // (2 f1(g) + f2(g)) J² e^{−2g²} / (2ω)
  double j_perp_asymptotic;  // f1 replaced by its large-g form e^{g²}/g²
  double j_par_asymptotic;   // 2f1 + f2 replaced by its large-g form e^{2g²}/(2g²)
};
EffectiveCouplings second_order_couplings(const models::ModelParams& p);

// Second-order effective Hamiltonian on the spin factor, closed form:
// Σ_{i<j} [ ½ j_perp (b†_i b_j + h.c.) − ½ j_par (n_i(1−n_j) + n_j(1−n_i)) ].
hilbert::OperatorMatrix build_h2_closed(const models::ModelParams& p);

// Same closed form with both series truncated at max_order, for cutoff-matched
// comparison against build_h2_sw.
hilbert::OperatorMatrix build_h2_closed_partial(const models::ModelParams& p, int max_order);

// Second order as the explicit sum −Σ_{m≠0} A_m A_m†/ω_m over intermediate
// phonon states at the cutoff in `p`, with A_m = ⟨0|h_i|m⟩ and ω_m the total
// phonon energy of |m⟩.
hilbert::OperatorMatrix build_h2_sw(const models::ModelParams& p);

// Third order: Σ_{m,n≠0} A_m ⟨m|h_i|n⟩ A_n† / (ω_m ω_n). Intermediate states
// are restricted to those actually coupled to the vacuum, which is exact.
hilbert::OperatorMatrix build_h3_sw(const models::ModelParams& p);

// Order-of-magnitude scales of the third-order coefficients.
struct CoefficientScales {
  double t_n;   // open-loop hopping, J³ e^{−g²}/(g²ω)²
  double v_n;   // closed-loop interaction, J³/(g²ω)²
  double t_cn;  // closed-loop hopping, J³ e^{−g²}/(gω)²
};
CoefficientScales coefficient_scales(const models::ModelParams& p);

// Hard-core operator identities behind the third-order reduction. Each named
// identity equates a summed string of six (or fewer) hopping operators with a
// closed polynomial in the total occupation times a single hop (T1..T6, TC1..TC3,
// acting between sites l ≠ i) or times a local number operator (V1..V3, at site i).
// Both sides have integer entries in the occupation basis, so agreement is exact.
struct IdentityReport {
  std::string name;
  int n_sites = 0;
  int particle_sector = -1;  // total occupation; -1 means the whole space
  double deviation = 0.0;    // max entrywise |lhs − rhs| over all site choices
  double scale = 0.0;        // max entrywise |rhs| over all site choices
  bool exact() const { return deviation == 0.0; }
};

std::vector<std::string> reduction_identity_names();

// One report per particle sector 0..n_sites. T-family names need n_sites ≥ 4,
// V-family n_sites ≥ 3, TC-family n_sites ≥ 2 (enough distinct summation sites).
std::vector<IdentityReport> check_reduction_identity(const std::string& name, int n_sites);

// Pairwise equalities between raw strings (T3=T2, T4=T2, T5=T4, V3=V2, TC2=TC1),
// reported on the whole space.
std::vector<IdentityReport> check_reduction_equalities(int n_sites);

}  // namespace polq::perturbation
