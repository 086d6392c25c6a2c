#include "polq/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "polq/dynamics.hpp"

namespace polq::analysis {

namespace {

// Gathers the principal submatrix on a sector index set.
Matrix restrict_to(const Matrix& m, const std::vector<Eigen::Index>& idx) {
  const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
  Matrix out(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) out(r, c) = m(idx[r], idx[c]);
  return out;
}

// Multiplies by a unit phase so the largest-magnitude component (lowest index
// on ties) comes out real positive.
void fix_phase(Vector& v) {
  Eigen::Index arg_max = 0;
  double best = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > best + 1e-12) {
      best = std::abs(v(i));
      arg_max = i;
    }
  }
  v *= std::conj(v(arg_max)) / std::abs(v(arg_max));
}

// Deterministic orthonormal basis of the column span of projector `proj`:
// seed vectors P e_j are taken in increasing j and Gram-Schmidt accepted when
// they keep enough independent weight.
std::vector<Vector> canonical_cluster_basis(const Matrix& proj, int cluster_dim) {
  std::vector<Vector> basis;
  for (Eigen::Index j = 0; j < proj.cols() && static_cast<int>(basis.size()) < cluster_dim; ++j) {
    Vector candidate = proj.col(j);
    for (const Vector& b : basis) candidate -= b.dot(candidate) * b;
    if (candidate.norm() > 1e-6) {
      candidate /= candidate.norm();
      fix_phase(candidate);
      basis.push_back(std::move(candidate));
    }
  }
  if (static_cast<int>(basis.size()) != cluster_dim)
    throw std::runtime_error("irhm_eigenbasis: cluster basis extraction failed");
  return basis;
}

}  // namespace

LabeledBasis irhm_eigenbasis(const models::ModelParams& p) {
  p.validate();
  if (p.n_sites > 6)
    throw std::invalid_argument("irhm_eigenbasis: n_sites capped at 6 for dense labeling");
  const hilbert::CompositeSpace spin = p.spin_space();
  const Eigen::Index d = spin.dim_total();
  const Matrix h = models::build_irhm(p).mat;
  const Matrix s2 = hilbert::total_s_squared(spin).mat;

  struct Entry {
    EigenLabel label;
    Vector vec;
  };
  std::vector<Entry> entries;

  for (int q = 0; q <= p.n_sites; ++q) {
    const double sz = q - 0.5 * p.n_sites;
    std::vector<Eigen::Index> sector;
    for (Eigen::Index i = 0; i < d; ++i)
      if (std::popcount(static_cast<unsigned long long>(i)) == q) sector.push_back(i);
    const Eigen::Index ns = static_cast<Eigen::Index>(sector.size());

    const Matrix s2_sector = restrict_to(s2, sector);
    const Matrix h_sector = restrict_to(h, sector);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(s2_sector);
    const Eigen::VectorXd evals = solver.eigenvalues();
    const Matrix& evecs = solver.eigenvectors();

    Eigen::Index col = 0;
    while (col < ns) {
      // half-integer total spin from the S² eigenvalue s(s+1)
      const double s_raw = 0.5 * (std::sqrt(1.0 + 4.0 * evals(col)) - 1.0);
      const double s_val = std::round(2.0 * s_raw) / 2.0;
      Eigen::Index end = col;
      while (end < ns && std::abs(0.5 * (std::sqrt(1.0 + 4.0 * evals(end)) - 1.0) - s_val) < 0.25)
        ++end;
      const int cluster_dim = static_cast<int>(end - col);

      Matrix proj = Matrix::Zero(ns, ns);
      for (Eigen::Index c = col; c < end; ++c)
        proj += evecs.col(c) * evecs.col(c).adjoint();

      int mult = 0;
      for (Vector& w : canonical_cluster_basis(proj, cluster_dim)) {
        const double energy = std::real(w.dot(h_sector * w));
        if ((h_sector * w - energy * w).norm() > 1e-9 * std::max(1.0, h_sector.norm()))
          throw std::runtime_error("irhm_eigenbasis: labeled vector is not an energy eigenvector");
        if ((s2_sector * w - s_val * (s_val + 1.0) * w).norm() > 1e-9 * std::max(1.0, s2_sector.norm()))
          throw std::runtime_error("irhm_eigenbasis: labeled vector is not a spin eigenvector");

        Vector full = Vector::Zero(d);
        for (Eigen::Index r = 0; r < ns; ++r) full(sector[r]) = w(r);
        entries.push_back({{energy, sz, s_val, mult++}, std::move(full)});
      }
      col = end;
    }
  }

  // Degenerate levels come back from different sectors with rounding-level
  // energy spread, so sorting on raw energies would order them arbitrarily.
  // Cluster the energies first and sort on the cluster index.
  std::vector<double> sorted_energies;
  sorted_energies.reserve(entries.size());
  for (const Entry& e : entries) sorted_energies.push_back(e.label.energy);
  std::sort(sorted_energies.begin(), sorted_energies.end());
  const double degeneracy_tol =
      1e-9 * std::max(1.0, std::abs(sorted_energies.back() - sorted_energies.front()));
  std::vector<double> cluster_floor;
  for (std::size_t i = 0; i < sorted_energies.size(); ++i) {
    if (i == 0 || sorted_energies[i] - sorted_energies[i - 1] > degeneracy_tol)
      cluster_floor.push_back(sorted_energies[i]);
  }
  auto cluster_of = [&](double e) {
    auto it = std::upper_bound(cluster_floor.begin(), cluster_floor.end(), e);
    return static_cast<int>(it - cluster_floor.begin()) - 1;
  };

  std::sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
    return std::make_tuple(cluster_of(a.label.energy), a.label.sz_total, a.label.s_total,
                           a.label.multiplet_index) <
           std::make_tuple(cluster_of(b.label.energy), b.label.sz_total, b.label.s_total,
                           b.label.multiplet_index);
  });

  LabeledBasis basis;
  basis.vectors.resize(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    basis.vectors.col(k) = entries[k].vec;
    basis.labels.push_back(entries[k].label);
  }
  return basis;
}

CoherenceSeries coherence_profile(const std::vector<double>& times,
                                  const std::vector<Matrix>& states, const Vector& bra,
                                  const Vector& ket) {
  if (times.empty() || times.size() != states.size())
    throw std::invalid_argument("coherence_profile: times and states must match and be non-empty");
  if (bra.size() != states.front().rows() || ket.size() != states.front().cols())
    throw std::invalid_argument("coherence_profile: bra/ket dimensions do not match states");

  CoherenceSeries series;
  series.times = times;
  double previous_phase = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const cplx value = bra.dot(states[k] * ket);
    const double magnitude = std::abs(value);
    if (magnitude < 1e-13)
      throw std::domain_error("coherence_profile: coherence magnitude below 1e-13, phase undefined");
    double phase = std::arg(value);
    if (k > 0)
      phase += 2.0 * std::numbers::pi *
               std::round((previous_phase - phase) / (2.0 * std::numbers::pi));
    previous_phase = phase;
    series.magnitudes.push_back(magnitude);
    series.phases.push_back(phase);
  }
  const auto [lo, hi] = std::minmax_element(series.magnitudes.begin(), series.magnitudes.end());
  series.ripple = *hi - *lo;
  return series;
}

double phase_residual(const CoherenceSeries& series, double predicted_gap) {
  if (series.times.empty() || series.times.size() != series.phases.size())
    throw std::invalid_argument("phase_residual: series is empty or inconsistent");
  for (std::size_t k = 1; k < series.times.size(); ++k) {
    const double dt = series.times[k] - series.times[k - 1];
    if (std::abs(predicted_gap) * dt >= std::numbers::pi)
      throw std::invalid_argument(
          "phase_residual: sampling too coarse for the predicted gap (per-step phase advance "
          "reaches pi)");
  }
  double residual = 0.0;
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    const double expected_drop = predicted_gap * (series.times[k] - series.times[0]);
    residual = std::max(residual, std::abs(series.phases[k] - series.phases[0] + expected_drop));
  }
  return residual;
}

PolaronElementRoutes two_qubit_polaron_element(const models::ModelParams& p,
                                               const Matrix& rho_joint_original) {
  p.validate();
  if (p.n_sites != 2)
    throw std::invalid_argument("two_qubit_polaron_element: defined for n_sites = 2");
  if (p.phonon_cutoff < 1)
    throw std::invalid_argument("two_qubit_polaron_element: phonon_cutoff must be at least 1");
  const hilbert::CompositeSpace space = p.space();
  const Eigen::Index dt = space.dim_total();
  if (rho_joint_original.rows() != dt || rho_joint_original.cols() != dt)
    throw std::invalid_argument("two_qubit_polaron_element: density dimension mismatch");
  const Eigen::Index dp = space.dim_phonon();

  const Matrix a = hilbert::single_mode_lowering(p.phonon_cutoff);
  const Matrix x = hilbert::expm((p.g / 2.0) * (a - a.adjoint()));
  // site 0 is the minor factor of the phonon index
  const Matrix x0_x1dag = hilbert::kron(x.adjoint(), x);
  const Matrix x1_x0dag = hilbert::kron(x, x.adjoint());

  // spin indices: 1 = particle on site 0, 2 = particle on site 1
  cplx dressed_sum = 0.0;
  for (Eigen::Index m = 0; m < dp; ++m) {
    Vector ket = Vector::Zero(dt);
    Vector bra = Vector::Zero(dt);
    for (Eigen::Index k = 0; k < dp; ++k) {
      ket(1 * dp + k) += x0_x1dag(k, m);
      ket(2 * dp + k) += x1_x0dag(k, m);
      bra(1 * dp + k) += x0_x1dag(k, m);
      bra(2 * dp + k) -= x1_x0dag(k, m);
    }
    dressed_sum += 0.5 * bra.dot(rho_joint_original * ket);
  }

  const Matrix u = hilbert::expm(models::lf_generator(p).mat);
  const Matrix rho_s =
      dynamics::partial_trace_phonons(space, Matrix(u * rho_joint_original * u.adjoint()));
  Vector singlet = Vector::Zero(space.dim_spin());
  Vector triplet = Vector::Zero(space.dim_spin());
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  singlet(1) = inv_sqrt2;
  singlet(2) = -inv_sqrt2;
  triplet(1) = inv_sqrt2;
  triplet(2) = inv_sqrt2;
  const cplx lf_frame = singlet.dot(rho_s * triplet);

  return {dressed_sum, lf_frame, std::abs(dressed_sum - lf_frame)};
}

}  // namespace polq::analysis
