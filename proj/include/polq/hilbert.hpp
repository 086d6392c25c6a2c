// polq/hilbert.hpp — composite spin ⊗ phonon basis indexing and elementary operators.
//
// Conventions (fixed project-wide):
//   * flat index = spin_index * dim_phonon + phonon_index  (spin factor is the major one)
//   * within each factor site 0 is least significant: spin_index = Σ n_i 2^i,
//     phonon_index = Σ m_i (M+1)^i
//   * hard-core bosons carry no exchange string: b_i is σ⁻ at site i, identity elsewhere.
#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace polq {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

namespace hilbert {

struct BasisIndex {
  std::uint32_t spin_bits = 0;   // bit i = occupation of site i
  std::vector<int> phonon_occ;   // per-site occupation, each in [0, M]
};

// N sites, each carrying a spin-1/2 (equivalently one hard-core-boson orbital)
// and one phonon mode truncated at occupation M. M = 0 drops the phonon factor.
class CompositeSpace {
 public:
  CompositeSpace(int n_sites, int phonon_cutoff);

  int n_sites() const { return n_; }
  int phonon_cutoff() const { return m_; }
  Eigen::Index dim_spin() const { return dim_spin_; }
  Eigen::Index dim_phonon() const { return dim_phonon_; }
  Eigen::Index dim_total() const { return dim_spin_ * dim_phonon_; }

  Eigen::Index encode(const BasisIndex& b) const;
  BasisIndex decode(Eigen::Index flat) const;

  Eigen::Index spin_part(Eigen::Index flat) const { return flat / dim_phonon_; }
  Eigen::Index phonon_part(Eigen::Index flat) const { return flat % dim_phonon_; }
  int phonon_digit(Eigen::Index phonon_index, int site) const;
  int phonon_total_occupation(Eigen::Index phonon_index) const;

 private:
  int n_;
  int m_;
  Eigen::Index dim_spin_;
  Eigen::Index dim_phonon_;
};

// Dense complex operator with advisory structure flags. The flags are promises
// made by the producer; verify_flags checks them on demand.
struct OperatorMatrix {
  Matrix mat;
  bool hermitian = false;
  bool unitary = false;
};

bool verify_flags(const OperatorMatrix& op, double hermitian_tol = 1e-12,
                  double unitary_tol = 1e-10);

// Local operator to be embedded at one site of one tensor factor.
struct LocalOp {
  enum class Factor { spin, phonon };
  Factor factor = Factor::spin;
  int site = 0;
  Matrix op;
};

// ---- elementary operators (all returned on the composite space) ----

OperatorMatrix hcb_lowering(const CompositeSpace& space, int site);   // b_i
OperatorMatrix hcb_number(const CompositeSpace& space, int site);     // b†_i b_i
OperatorMatrix phonon_lowering(const CompositeSpace& space, int site);  // a_i, ⟨m-1|a|m⟩ = √m
OperatorMatrix phonon_number(const CompositeSpace& space, int site);    // a†_i a_i

// Kronecker embedding of local operators on distinct sites; empty list gives the identity.
OperatorMatrix embed_product(const CompositeSpace& space, const std::vector<LocalOp>& ops);

OperatorMatrix spin_half(const CompositeSpace& space, int site, char axis);  // S^x, S^y, S^z
OperatorMatrix total_sz(const CompositeSpace& space);
OperatorMatrix total_s_squared(const CompositeSpace& space);
OperatorMatrix total_hcb_number(const CompositeSpace& space);

// Normalized product of per-site coherent states on the phonon factor (dim_phonon vector).
Vector coherent_bath_state(const CompositeSpace& space, const std::vector<cplx>& alphas);

// Composite-space flat indices of states whose per-site phonon occupations are all ≤ cap.
std::vector<Eigen::Index> phonon_window_indices(const CompositeSpace& space, int cap);

// ---- small dense-matrix utilities ----

Matrix single_mode_lowering(int cutoff);                   // (cutoff+1)² truncated a
double commutator_norm(const Matrix& a, const Matrix& b);  // ‖AB − BA‖_F
Matrix expm(const Matrix& a);                              // scaling-and-squaring Padé
Matrix kron(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& a);

}  // namespace hilbert
}  // namespace polq
