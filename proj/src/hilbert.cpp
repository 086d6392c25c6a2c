// polq/hilbert.cpp — basis indexing, elementary operators, dense utilities.
#include "polq/hilbert.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace polq::hilbert {

namespace {

Eigen::Index ipow(Eigen::Index base, int exp) {
  Eigen::Index r = 1;
  for (int k = 0; k < exp; ++k) r *= base;
  return r;
}

}  // namespace

CompositeSpace::CompositeSpace(int n_sites, int phonon_cutoff)
    : n_(n_sites), m_(phonon_cutoff) {
  if (n_sites < 1 || n_sites > 20)
    throw std::invalid_argument("CompositeSpace: n_sites must be in [1, 20]");
  if (phonon_cutoff < 0)
    throw std::invalid_argument("CompositeSpace: phonon_cutoff must be >= 0");
  dim_spin_ = Eigen::Index(1) << n_;
  dim_phonon_ = ipow(m_ + 1, n_);
  if (dim_total() > (Eigen::Index(1) << 26))
    throw std::invalid_argument("CompositeSpace: composite dimension too large to materialize");
}

Eigen::Index CompositeSpace::encode(const BasisIndex& b) const {
  if (b.spin_bits >= std::uint32_t(dim_spin_))
    throw std::out_of_range("CompositeSpace::encode: spin_bits out of range");
  if (int(b.phonon_occ.size()) != n_)
    throw std::invalid_argument("CompositeSpace::encode: phonon_occ must have one entry per site");
  Eigen::Index ph = 0;
  for (int i = n_ - 1; i >= 0; --i) {
    if (b.phonon_occ[i] < 0 || b.phonon_occ[i] > m_)
      throw std::out_of_range("CompositeSpace::encode: phonon occupation out of range");
    ph = ph * (m_ + 1) + b.phonon_occ[i];
  }
  return Eigen::Index(b.spin_bits) * dim_phonon_ + ph;
}

BasisIndex CompositeSpace::decode(Eigen::Index flat) const {
  if (flat < 0 || flat >= dim_total())
    throw std::out_of_range("CompositeSpace::decode: index out of range");
  BasisIndex b;
  b.spin_bits = std::uint32_t(flat / dim_phonon_);
  b.phonon_occ.resize(n_);
  Eigen::Index ph = flat % dim_phonon_;
  for (int i = 0; i < n_; ++i) {
    b.phonon_occ[i] = int(ph % (m_ + 1));
    ph /= (m_ + 1);
  }
  return b;
}

int CompositeSpace::phonon_digit(Eigen::Index phonon_index, int site) const {
  if (site < 0 || site >= n_)
    throw std::out_of_range("CompositeSpace::phonon_digit: site out of range");
  return int((phonon_index / ipow(m_ + 1, site)) % (m_ + 1));
}

int CompositeSpace::phonon_total_occupation(Eigen::Index phonon_index) const {
  int total = 0;
  for (int i = 0; i < n_; ++i) total += phonon_digit(phonon_index, i);
  return total;
}

bool verify_flags(const OperatorMatrix& op, double hermitian_tol, double unitary_tol) {
  if (op.mat.rows() != op.mat.cols()) return false;
  if (op.hermitian) {
    const double scale = std::max(1.0, max_abs(op.mat));
    if (max_abs(op.mat - op.mat.adjoint()) > hermitian_tol * scale) return false;
  }
  if (op.unitary) {
    const Matrix gram = op.mat.adjoint() * op.mat;
    if (max_abs(gram - Matrix::Identity(op.mat.rows(), op.mat.cols())) > unitary_tol)
      return false;
  }
  return true;
}

namespace {

// Local 2x2 operator at a spin site, embedded in the spin factor (phonon identity).
Matrix embed_spin_local(const CompositeSpace& s, int site, const Matrix& local) {
  const Eigen::Index ds = s.dim_spin();
  const Eigen::Index dp = s.dim_phonon();
  Matrix out = Matrix::Zero(ds * dp, ds * dp);
  const std::uint32_t bit = 1u << site;
  for (Eigen::Index col = 0; col < ds; ++col) {
    const int cb = (col & bit) ? 1 : 0;
    for (int rb = 0; rb < 2; ++rb) {
      const cplx v = local(rb, cb);
      if (v == cplx(0.0)) continue;
      const Eigen::Index row = rb ? (col | bit) : (col & ~bit);
      for (Eigen::Index p = 0; p < dp; ++p)
        out(row * dp + p, col * dp + p) += v;
    }
  }
  return out;
}

// Local (M+1)x(M+1) operator at a phonon site, embedded in the phonon factor (spin identity).
Matrix embed_phonon_local(const CompositeSpace& s, int site, const Matrix& local) {
  const Eigen::Index ds = s.dim_spin();
  const Eigen::Index dp = s.dim_phonon();
  const int m1 = s.phonon_cutoff() + 1;
  const Eigen::Index stride = [&] {
    Eigen::Index r = 1;
    for (int k = 0; k < site; ++k) r *= m1;
    return r;
  }();
  Matrix out = Matrix::Zero(ds * dp, ds * dp);
  for (Eigen::Index pcol = 0; pcol < dp; ++pcol) {
    const int cd = int((pcol / stride) % m1);
    const Eigen::Index base = pcol - cd * stride;
    for (int rd = 0; rd < m1; ++rd) {
      const cplx v = local(rd, cd);
      if (v == cplx(0.0)) continue;
      const Eigen::Index prow = base + rd * stride;
      for (Eigen::Index sidx = 0; sidx < ds; ++sidx)
        out(sidx * dp + prow, sidx * dp + pcol) += v;
    }
  }
  return out;
}

Matrix sigma_minus() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}

}  // namespace

OperatorMatrix hcb_lowering(const CompositeSpace& space, int site) {
  if (site < 0 || site >= space.n_sites())
    throw std::out_of_range("hcb_lowering: site out of range");
  return {embed_spin_local(space, site, sigma_minus()), false, false};
}

OperatorMatrix hcb_number(const CompositeSpace& space, int site) {
  if (site < 0 || site >= space.n_sites())
    throw std::out_of_range("hcb_number: site out of range");
  Matrix n = Matrix::Zero(2, 2);
  n(1, 1) = 1.0;
  return {embed_spin_local(space, site, n), true, false};
}

OperatorMatrix phonon_lowering(const CompositeSpace& space, int site) {
  if (site < 0 || site >= space.n_sites())
    throw std::out_of_range("phonon_lowering: site out of range");
  if (space.phonon_cutoff() < 1)
    throw std::invalid_argument("phonon_lowering: phonon_cutoff must be >= 1");
  return {embed_phonon_local(space, site, single_mode_lowering(space.phonon_cutoff())), false,
          false};
}

OperatorMatrix phonon_number(const CompositeSpace& space, int site) {
  if (site < 0 || site >= space.n_sites())
    throw std::out_of_range("phonon_number: site out of range");
  if (space.phonon_cutoff() < 1)
    throw std::invalid_argument("phonon_number: phonon_cutoff must be >= 1");
  const int m1 = space.phonon_cutoff() + 1;
  Matrix n = Matrix::Zero(m1, m1);
  for (int m = 0; m < m1; ++m) n(m, m) = double(m);
  return {embed_phonon_local(space, site, n), true, false};
}

OperatorMatrix embed_product(const CompositeSpace& space, const std::vector<LocalOp>& ops) {
  std::vector<bool> used_spin(space.n_sites(), false);
  std::vector<bool> used_phonon(space.n_sites(), false);
  for (const auto& o : ops) {
    if (o.site < 0 || o.site >= space.n_sites())
      throw std::out_of_range("embed_product: site out of range");
    const bool is_spin = (o.factor == LocalOp::Factor::spin);
    const Eigen::Index want = is_spin ? 2 : space.phonon_cutoff() + 1;
    if (o.op.rows() != want || o.op.cols() != want)
      throw std::invalid_argument("embed_product: local operator dimension does not match factor");
    auto& used = is_spin ? used_spin : used_phonon;
    if (used[o.site])
      throw std::invalid_argument("embed_product: sites must be distinct within a factor");
    used[o.site] = true;
  }
  Matrix out = Matrix::Identity(space.dim_total(), space.dim_total());
  for (const auto& o : ops) {
    const Matrix f = (o.factor == LocalOp::Factor::spin)
                         ? embed_spin_local(space, o.site, o.op)
                         : embed_phonon_local(space, o.site, o.op);
    out = f * out;
  }
  return {std::move(out), false, false};
}

OperatorMatrix spin_half(const CompositeSpace& space, int site, char axis) {
  if (site < 0 || site >= space.n_sites())
    throw std::out_of_range("spin_half: site out of range");
  Matrix s = Matrix::Zero(2, 2);
  switch (axis) {
    case 'x': s(0, 1) = 0.5; s(1, 0) = 0.5; break;
    case 'y': s(0, 1) = cplx(0, 0.5); s(1, 0) = cplx(0, -0.5); break;
    case 'z': s(0, 0) = -0.5; s(1, 1) = 0.5; break;
    default: throw std::invalid_argument("spin_half: axis must be one of x, y, z");
  }
  return {embed_spin_local(space, site, s), true, false};
}

OperatorMatrix total_sz(const CompositeSpace& space) {
  Matrix out = Matrix::Zero(space.dim_total(), space.dim_total());
  for (int i = 0; i < space.n_sites(); ++i) out += spin_half(space, i, 'z').mat;
  return {std::move(out), true, false};
}

OperatorMatrix total_s_squared(const CompositeSpace& space) {
  const Eigen::Index d = space.dim_total();
  Matrix out = Matrix::Zero(d, d);
  for (char axis : {'x', 'y', 'z'}) {
    Matrix comp = Matrix::Zero(d, d);
    for (int i = 0; i < space.n_sites(); ++i) comp += spin_half(space, i, axis).mat;
    out += comp * comp;
  }
  return {std::move(out), true, false};
}

OperatorMatrix total_hcb_number(const CompositeSpace& space) {
  Matrix out = Matrix::Zero(space.dim_total(), space.dim_total());
  for (int i = 0; i < space.n_sites(); ++i) out += hcb_number(space, i).mat;
  return {std::move(out), true, false};
}

Vector coherent_bath_state(const CompositeSpace& space, const std::vector<cplx>& alphas) {
  if (int(alphas.size()) != space.n_sites())
    throw std::invalid_argument("coherent_bath_state: one displacement per site required");
  if (space.phonon_cutoff() < 1)
    throw std::invalid_argument("coherent_bath_state: phonon_cutoff must be >= 1");
  const int m1 = space.phonon_cutoff() + 1;
  std::vector<Vector> site_states;
  for (const cplx& alpha : alphas) {
    Vector v(m1);
    cplx amp = 1.0;
    for (int m = 0; m < m1; ++m) {
      if (m > 0) amp *= alpha / std::sqrt(double(m));
      v(m) = amp;
    }
    v.normalize();
    site_states.push_back(std::move(v));
  }
  Vector out(space.dim_phonon());
  for (Eigen::Index p = 0; p < space.dim_phonon(); ++p) {
    cplx amp = 1.0;
    for (int i = 0; i < space.n_sites(); ++i)
      amp *= site_states[i](space.phonon_digit(p, i));
    out(p) = amp;
  }
  return out;
}

std::vector<Eigen::Index> phonon_window_indices(const CompositeSpace& space, int cap) {
  if (cap < 0) throw std::invalid_argument("phonon_window_indices: cap must be >= 0");
  std::vector<Eigen::Index> ph_keep;
  for (Eigen::Index p = 0; p < space.dim_phonon(); ++p) {
    bool ok = true;
    for (int i = 0; i < space.n_sites() && ok; ++i)
      ok = space.phonon_digit(p, i) <= cap;
    if (ok) ph_keep.push_back(p);
  }
  std::vector<Eigen::Index> out;
  out.reserve(ph_keep.size() * space.dim_spin());
  for (Eigen::Index s = 0; s < space.dim_spin(); ++s)
    for (Eigen::Index p : ph_keep) out.push_back(s * space.dim_phonon() + p);
  return out;
}

Matrix single_mode_lowering(int cutoff) {
  if (cutoff < 1) throw std::invalid_argument("single_mode_lowering: cutoff must be >= 1");
  Matrix a = Matrix::Zero(cutoff + 1, cutoff + 1);
  for (int m = 1; m <= cutoff; ++m) a(m - 1, m) = std::sqrt(double(m));
  return a;
}

double commutator_norm(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw std::invalid_argument("commutator_norm: operands must be square with equal dims");
  return (a * b - b * a).norm();
}

Matrix expm(const Matrix& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("expm: matrix must be square");
  return a.exp();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

double max_abs(const Matrix& a) {
  return a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace polq::hilbert
