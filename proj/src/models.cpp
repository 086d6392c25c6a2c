#include "polq/models.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace polq::models {

namespace {

// Dense composite matrices are quadratic in dim_total; refuse sizes where a
// single matrix would exceed a few hundred MB.
void require_dense(const hilbert::CompositeSpace& space, const char* who) {
  constexpr Eigen::Index kMaxDense = 4096;
  if (space.dim_total() > kMaxDense) {
    throw std::length_error(std::string(who) + ": composite dimension " +
                            std::to_string(space.dim_total()) + " exceeds dense limit " +
                            std::to_string(kMaxDense));
  }
}

// e^{g a†} e^{−g a} on one truncated mode. The raising factor only moves weight
// upward and the lowering factor only downward, so no matrix element of the
// product ever passes through states above the cutoff: every entry equals its
// untruncated value.
Matrix single_mode_displacement(int cutoff, double g) {
  const Matrix a = hilbert::single_mode_lowering(cutoff);
  return hilbert::expm(g * a.adjoint()) * hilbert::expm(-g * a);
}

}  // namespace

void ModelParams::validate() const {
  if (n_sites < 2) throw std::invalid_argument("ModelParams: n_sites must be at least 2");
  if (!std::isfinite(j_star)) throw std::invalid_argument("ModelParams: j_star must be finite");
  if (!std::isfinite(delta)) throw std::invalid_argument("ModelParams: delta must be finite");
  if (!std::isfinite(g) || g < 0.0)
    throw std::invalid_argument("ModelParams: g must be finite and non-negative");
  if (!std::isfinite(omega) || omega <= 0.0)
    throw std::invalid_argument("ModelParams: omega must be positive");
  if (phonon_cutoff < 0) throw std::invalid_argument("ModelParams: phonon_cutoff must be non-negative");
}

hilbert::CompositeSpace ModelParams::space() const {
  return hilbert::CompositeSpace(n_sites, phonon_cutoff);
}

hilbert::CompositeSpace ModelParams::spin_space() const {
  return hilbert::CompositeSpace(n_sites, 0);
}

hilbert::OperatorMatrix build_irhm(const ModelParams& p) {
  p.validate();
  const hilbert::CompositeSpace space = p.spin_space();
  const double j = p.j();
  Matrix h = Matrix::Zero(space.dim_total(), space.dim_total());
  for (int i = 0; i < p.n_sites; ++i) {
    for (int k = i + 1; k < p.n_sites; ++k) {
      for (char axis : {'x', 'y', 'z'}) {
        h += j * (hilbert::spin_half(space, i, axis).mat * hilbert::spin_half(space, k, axis).mat);
      }
      h += j * (p.delta - 1.0) *
           (hilbert::spin_half(space, i, 'z').mat * hilbert::spin_half(space, k, 'z').mat);
    }
  }
  return {.mat = std::move(h), .hermitian = true, .unitary = false};
}

hilbert::OperatorMatrix build_total_hamiltonian(const ModelParams& p) {
  p.validate();
  if (p.phonon_cutoff < 1)
    throw std::invalid_argument("build_total_hamiltonian: phonon_cutoff must be at least 1");
  const hilbert::CompositeSpace space = p.space();
  require_dense(space, "build_total_hamiltonian");
  const Eigen::Index d = space.dim_total();
  const double j = p.j();
  const Matrix id = Matrix::Identity(d, d);

  Matrix h = Matrix::Zero(d, d);
  for (int i = 0; i < p.n_sites; ++i) {
    for (int k = i + 1; k < p.n_sites; ++k) {
      const Matrix hop =
          hilbert::hcb_lowering(space, i).mat.adjoint() * hilbert::hcb_lowering(space, k).mat;
      h += j * 0.5 * (hop + hop.adjoint());
      h += j * p.delta * (hilbert::hcb_number(space, i).mat - 0.5 * id) *
           (hilbert::hcb_number(space, k).mat - 0.5 * id);
    }
  }
  for (int i = 0; i < p.n_sites; ++i) {
    const Matrix a = hilbert::phonon_lowering(space, i).mat;
    h += p.omega * hilbert::phonon_number(space, i).mat;
    h += p.g * p.omega * (hilbert::hcb_number(space, i).mat - 0.5 * id) * (a + a.adjoint());
  }
  return {.mat = std::move(h), .hermitian = true, .unitary = false};
}

hilbert::OperatorMatrix lf_generator(const ModelParams& p) {
  p.validate();
  if (p.phonon_cutoff < 1)
    throw std::invalid_argument("lf_generator: phonon_cutoff must be at least 1");
  const hilbert::CompositeSpace space = p.space();
  require_dense(space, "lf_generator");
  const Eigen::Index d = space.dim_total();
  const Matrix id = Matrix::Identity(d, d);

  Matrix s = Matrix::Zero(d, d);
  for (int i = 0; i < p.n_sites; ++i) {
    const Matrix a = hilbert::phonon_lowering(space, i).mat;
    s += -p.g * (hilbert::hcb_number(space, i).mat - 0.5 * id) * (a - a.adjoint());
  }
  return {.mat = std::move(s), .hermitian = false, .unitary = false};
}

hilbert::OperatorMatrix lf_transform(const hilbert::OperatorMatrix& h,
                                     const hilbert::OperatorMatrix& s) {
  if (h.mat.rows() != h.mat.cols() || s.mat.rows() != s.mat.cols() ||
      h.mat.rows() != s.mat.rows()) {
    throw std::invalid_argument("lf_transform: operator and generator dimensions disagree");
  }
  const double anti_defect = (s.mat + s.mat.adjoint()).norm();
  if (anti_defect > 1e-10 * std::max(1.0, s.mat.norm()))
    throw std::invalid_argument("lf_transform: generator must be anti-hermitian");
  const Matrix u = hilbert::expm(s.mat);
  return {.mat = u * h.mat * u.adjoint(), .hermitian = h.hermitian, .unitary = h.unitary};
}

HamiltonianSplit build_split(const ModelParams& p) {
  p.validate();
  if (p.phonon_cutoff < 1)
    throw std::invalid_argument("build_split: phonon_cutoff must be at least 1");
  const hilbert::CompositeSpace space = p.space();
  require_dense(space, "build_split");
  const Eigen::Index d = space.dim_total();
  const double j = p.j();
  const double dressing = std::exp(-p.g * p.g);
  const Matrix id = Matrix::Identity(d, d);

  HamiltonianSplit out;
  out.h_total = build_total_hamiltonian(p);
  out.polaron_shift = -0.25 * p.g * p.g * p.omega * p.n_sites;

  Matrix hs = Matrix::Zero(d, d);
  for (int i = 0; i < p.n_sites; ++i) {
    for (int k = i + 1; k < p.n_sites; ++k) {
      const Matrix hop =
          hilbert::hcb_lowering(space, i).mat.adjoint() * hilbert::hcb_lowering(space, k).mat;
      hs += j * 0.5 * dressing * (hop + hop.adjoint());
      hs += j * p.delta * (hilbert::hcb_number(space, i).mat - 0.5 * id) *
            (hilbert::hcb_number(space, k).mat - 0.5 * id);
    }
  }
  hs += out.polaron_shift * id;
  out.h_s = {.mat = std::move(hs), .hermitian = true, .unitary = false};

  Matrix henv = Matrix::Zero(d, d);
  for (int i = 0; i < p.n_sites; ++i) henv += p.omega * hilbert::phonon_number(space, i).mat;
  out.h_env = {.mat = std::move(henv), .hermitian = true, .unitary = false};

  out.h0 = {.mat = out.h_s.mat + out.h_env.mat, .hermitian = true, .unitary = false};

  const Matrix w = single_mode_displacement(p.phonon_cutoff, p.g);
  const double kappa = 0.5 * j * dressing;
  Matrix hi = Matrix::Zero(d, d);
  for (int i = 0; i < p.n_sites; ++i) {
    for (int k = 0; k < p.n_sites; ++k) {
      if (i == k) continue;
      const Matrix hop =
          hilbert::hcb_lowering(space, i).mat.adjoint() * hilbert::hcb_lowering(space, k).mat;
      const Matrix b_pair = hilbert::embed_product(
          space, {{hilbert::LocalOp::Factor::phonon, i, w},
                  {hilbert::LocalOp::Factor::phonon, k, w.adjoint()}}).mat;
      hi += kappa * hop * (b_pair - id);
    }
  }
  out.h_i = {.mat = std::move(hi), .hermitian = true, .unitary = false};
  return out;
}

ExcitationSpectrum hcb_excitation_spectrum(const ModelParams& p) {
  p.validate();
  const double dressing = std::exp(-p.g * p.g);
  ExcitationSpectrum s;
  s.epsilon_zero = 0.5 * p.j_star * dressing;
  s.epsilon_k = -0.5 * p.j() * dressing;
  s.gap = s.epsilon_zero - s.epsilon_k;
  return s;
}

InteractionBlocks::InteractionBlocks(const ModelParams& p) : space_((p.validate(), p.space())) {
  if (p.phonon_cutoff < 1)
    throw std::invalid_argument("InteractionBlocks: phonon_cutoff must be at least 1");
  w_ = single_mode_displacement(p.phonon_cutoff, p.g);

  const hilbert::CompositeSpace spin = p.spin_space();
  const double kappa = 0.5 * p.j() * std::exp(-p.g * p.g);
  for (int i = 0; i < p.n_sites; ++i) {
    for (int k = 0; k < p.n_sites; ++k) {
      if (i == k) continue;
      pairs_.push_back(
          {i, k,
           kappa * (hilbert::hcb_lowering(spin, i).mat.adjoint() *
                    hilbert::hcb_lowering(spin, k).mat)});
    }
  }
}

cplx InteractionBlocks::pair_phonon_element(const PairTerm& t, Eigen::Index p_row,
                                            Eigen::Index p_col) const {
  cplx elem(1.0, 0.0);
  for (int site = 0; site < space_.n_sites(); ++site) {
    const int r = space_.phonon_digit(p_row, site);
    const int c = space_.phonon_digit(p_col, site);
    if (site == t.site_i) {
      elem *= w_(r, c);
    } else if (site == t.site_j) {
      elem *= std::conj(w_(c, r));
    } else if (r != c) {
      return {};
    }
  }
  if (p_row == p_col) elem -= 1.0;
  return elem;
}

Matrix InteractionBlocks::system_block(Eigen::Index p_row, Eigen::Index p_col) const {
  if (p_row < 0 || p_row >= space_.dim_phonon() || p_col < 0 || p_col >= space_.dim_phonon())
    throw std::out_of_range("InteractionBlocks::system_block: phonon index out of range");
  Matrix block = Matrix::Zero(space_.dim_spin(), space_.dim_spin());
  for (const PairTerm& t : pairs_) {
    const cplx elem = pair_phonon_element(t, p_row, p_col);
    if (elem != cplx{}) block += elem * t.hop;
  }
  return block;
}

std::vector<Eigen::Index> InteractionBlocks::coupled_to_vacuum() const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index ph = 1; ph < space_.dim_phonon(); ++ph) {
    int occupied_sites = 0;
    for (int site = 0; site < space_.n_sites(); ++site) {
      if (space_.phonon_digit(ph, site) > 0) ++occupied_sites;
    }
    if (occupied_sites <= 2) out.push_back(ph);
  }
  return out;
}

Matrix InteractionBlocks::bath_average(const std::vector<Vector>& site_states) const {
  if (static_cast<int>(site_states.size()) != space_.n_sites())
    throw std::invalid_argument("InteractionBlocks::bath_average: need one state per site");
  std::vector<cplx> w_mean(site_states.size());
  for (std::size_t i = 0; i < site_states.size(); ++i) {
    const Vector& chi = site_states[i];
    if (chi.size() != w_.rows())
      throw std::invalid_argument("InteractionBlocks::bath_average: site state has wrong dimension");
    if (std::abs(chi.norm() - 1.0) > 1e-10)
      throw std::invalid_argument("InteractionBlocks::bath_average: site state must be normalized");
    w_mean[i] = chi.dot(w_ * chi);
  }
  Matrix avg = Matrix::Zero(space_.dim_spin(), space_.dim_spin());
  for (const PairTerm& t : pairs_)
    avg += (w_mean[t.site_i] * std::conj(w_mean[t.site_j]) - 1.0) * t.hop;
  return avg;
}

SplitResidual split_transform_residual(const ModelParams& p, int window_cap) {
  if (window_cap < 0 || window_cap > p.phonon_cutoff)
    throw std::invalid_argument(
        "split_transform_residual: window_cap must lie in [0, phonon_cutoff]");
  const HamiltonianSplit split = build_split(p);
  const hilbert::OperatorMatrix s = lf_generator(p);
  const Matrix lhs = lf_transform(split.h_total, s).mat;
  const Matrix diff = lhs - (split.h0.mat + split.h_i.mat);

  SplitResidual out;
  out.full_space = diff.norm() / split.h_total.mat.norm();

  const std::vector<Eigen::Index> window = hilbert::phonon_window_indices(p.space(), window_cap);
  const Eigen::Index nw = static_cast<Eigen::Index>(window.size());
  Matrix diff_w(nw, nw);
  Matrix ref_w(nw, nw);
  for (Eigen::Index r = 0; r < nw; ++r) {
    for (Eigen::Index c = 0; c < nw; ++c) {
      diff_w(r, c) = diff(window[r], window[c]);
      ref_w(r, c) = split.h_total.mat(window[r], window[c]);
    }
  }
  out.windowed = diff_w.norm() / ref_w.norm();
  return out;
}

}  // namespace polq::models
