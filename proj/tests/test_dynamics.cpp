#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "polq/analysis.hpp"
#include "polq/dynamics.hpp"
#include "polq/hilbert.hpp"
#include "polq/models.hpp"
#include "polq/perturbation.hpp"

using namespace polq;

TEST_CASE("time grid validation and sampling") {
  dynamics::TimeGrid grid;
  grid.t_start = 0.0;
  grid.t_end = 10.0;
  grid.n_steps = 100;
  grid.sample_stride = 10;
  grid.validate();
  CHECK(grid.step() == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(grid.n_samples() == 11);
  auto times = grid.sample_times();
  REQUIRE(int(times.size()) == grid.n_samples());
  CHECK(times.front() == 0.0);
  CHECK(times.back() == doctest::Approx(10.0).epsilon(1e-15));

  dynamics::TimeGrid bad = grid;
  bad.t_end = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = grid;
  bad.n_steps = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = grid;
  bad.sample_stride = 3;  // does not divide 100
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("bath specification is zero-temperature only") {
  dynamics::BathSpec bath;
  bath.validate();
  hilbert::CompositeSpace space(2, 3);
  Vector chi = bath.bath_state(space);
  REQUIRE(chi.size() == space.dim_phonon());
  CHECK(std::abs(chi(0) - cplx(1.0, 0.0)) == 0.0);
  CHECK(chi.tail(chi.size() - 1).norm() == 0.0);

  bath.temperature = 0.3;
  CHECK_THROWS_AS(bath.validate(), std::domain_error);
}

TEST_CASE("density matrix monitors report the advertised quantities") {
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 0.75;
  rho(1, 1) = 0.25;
  rho(0, 1) = cplx(0.1, 0.05);
  rho(1, 0) = std::conj(rho(0, 1));
  dynamics::DensityMatrix dm{rho};
  CHECK(dm.trace_error() < 1e-15);
  CHECK(dm.hermiticity_error() < 1e-15);
  CHECK(dm.min_eigenvalue() > 0.0);

  dm.rho(1, 1) = 0.30;
  CHECK(dm.trace_error() == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("generator routes agree at a converged cutoff") {
  models::ModelParams p;
  p.n_sites = 3;
  p.j_star = 0.1;
  p.g = 1.0;
  p.phonon_cutoff = 10;
  Matrix closed = dynamics::markovian_generator(p, dynamics::GeneratorRoute::closed_form).mat;
  Matrix summed = dynamics::markovian_generator(p, dynamics::GeneratorRoute::sw_sum).mat;
  CHECK(hilbert::max_abs(closed - summed) / hilbert::max_abs(closed) < 1e-7);

  // The generator is the negated second-order correction.
  Matrix h2 = perturbation::build_h2_closed(p).mat;
  CHECK(hilbert::max_abs(closed + h2) == 0.0);
}

TEST_CASE("labeled energies follow the spin-label formula") {
  // E⁽²⁾(S, sz) = j_perp/2·[S(S+1) − sz² + sz − n] − j_par/2·n(N − n), n = sz + N/2.
  for (int n_sites : {2, 3, 4}) {
    models::ModelParams p;
    p.n_sites = n_sites;
    p.j_star = 0.1;
    p.g = 1.0;
    perturbation::EffectiveCouplings c = perturbation::second_order_couplings(p);
    Matrix h2 = perturbation::build_h2_closed(p).mat;

    analysis::LabeledBasis basis = analysis::irhm_eigenbasis(p);
    for (std::size_t k = 0; k < basis.labels.size(); ++k) {
      const auto& label = basis.labels[k];
      Vector v = basis.vectors.col(Eigen::Index(k));
      double measured = v.dot(h2 * v).real();
      double occ = label.sz_total + n_sites / 2.0;
      double expected =
          0.5 * c.j_perp *
              (label.s_total * (label.s_total + 1.0) - label.sz_total * label.sz_total +
               label.sz_total - occ) -
          0.5 * c.j_par * occ * (n_sites - occ);
      CHECK(measured == doctest::Approx(expected).epsilon(1e-11).scale(1e-3));
    }
  }
}

TEST_CASE("markovian evolution is pure phase rotation in the generator eigenbasis") {
  models::ModelParams p;
  p.n_sites = 3;
  p.j_star = 0.1;
  p.g = 1.0;
  hilbert::OperatorMatrix k_op =
      dynamics::markovian_generator(p, dynamics::GeneratorRoute::closed_form);

  analysis::LabeledBasis basis = analysis::irhm_eigenbasis(p);
  Vector psi = basis.vectors.rowwise().sum();
  psi /= psi.norm();
  dynamics::DensityMatrix rho0{psi * psi.adjoint()};

  dynamics::TimeGrid grid;
  grid.t_end = 50.0;
  grid.n_steps = 5000;
  grid.sample_stride = 50;
  dynamics::PhaseEvolutionCheck check = dynamics::markovian_phase_check(k_op, rho0, grid);
  CHECK(check.magnitude_drift < 1e-8);
  CHECK(check.phase_residual < 1e-6);
}

TEST_CASE("markovian integrator enforces its stability guard") {
  models::ModelParams p;
  p.n_sites = 2;
  p.j_star = 50.0;  // large generator norm forces a tiny stable step
  p.g = 1.0;
  hilbert::OperatorMatrix k_op =
      dynamics::markovian_generator(p, dynamics::GeneratorRoute::closed_form);
  Vector psi = Vector::Zero(4);
  psi(1) = 1.0;
  dynamics::DensityMatrix rho0{psi * psi.adjoint()};
  dynamics::TimeGrid grid;
  grid.t_end = 100.0;
  grid.n_steps = 10;
  CHECK_THROWS_AS(dynamics::evolve_markovian(k_op, rho0, grid), std::invalid_argument);
}

TEST_CASE("markovian integrator rejects a non-density initial state") {
  models::ModelParams p;
  p.n_sites = 2;
  hilbert::OperatorMatrix k_op =
      dynamics::markovian_generator(p, dynamics::GeneratorRoute::closed_form);
  dynamics::DensityMatrix not_normalized{2.0 * Matrix::Identity(4, 4)};
  dynamics::TimeGrid grid;
  CHECK_THROWS_AS(dynamics::evolve_markovian(k_op, not_normalized, grid),
                  std::invalid_argument);
}

TEST_CASE("exact evolution revives the bare two-site coherence") {
  models::ModelParams p;
  p.n_sites = 2;
  p.j_star = 0.1;
  p.g = 0.0;
  p.phonon_cutoff = 1;
  hilbert::CompositeSpace space = p.space();
  hilbert::OperatorMatrix h = models::build_total_hamiltonian(p);

  Vector psi0 = Vector::Zero(space.dim_total());
  psi0(1 * space.dim_phonon() + 0) = 1.0;  // excitation on the first site, vacuum bath

  // At g = 0 the spin precesses freely: the singlet/triplet gap is J, so the
  // reduced state returns to itself after t = 2π/J.
  dynamics::TimeGrid grid;
  grid.t_end = 2.0 * M_PI / p.j();
  grid.n_steps = 400;
  grid.sample_stride = 400;
  dynamics::ExactTrajectory traj = dynamics::evolve_exact(psi0, h, grid);
  CHECK(traj.max_norm_error < 1e-12);

  Matrix rho_start = dynamics::partial_trace_phonons(space, traj.states.front());
  Matrix rho_end = dynamics::partial_trace_phonons(space, traj.states.back());
  CHECK(hilbert::max_abs(rho_end - rho_start) < 1e-10);
}

TEST_CASE("vector and density exact evolution agree") {
  models::ModelParams p;
  p.n_sites = 2;
  p.g = 0.6;
  p.phonon_cutoff = 3;
  hilbert::CompositeSpace space = p.space();
  hilbert::OperatorMatrix h = models::build_total_hamiltonian(p);

  Vector psi0 = Vector::Zero(space.dim_total());
  psi0(1 * space.dim_phonon()) = std::sqrt(0.5);
  psi0(2 * space.dim_phonon()) = std::sqrt(0.5);

  dynamics::TimeGrid grid;
  grid.t_end = 7.0;
  grid.n_steps = 70;
  grid.sample_stride = 70;
  dynamics::ExactTrajectory traj = dynamics::evolve_exact(psi0, h, grid);
  dynamics::ExactDensityTrajectory rho_traj =
      dynamics::evolve_exact(dynamics::DensityMatrix{psi0 * psi0.adjoint()}, h, grid);
  CHECK(rho_traj.max_trace_error < 1e-12);

  Matrix from_vector = traj.states.back() * traj.states.back().adjoint();
  CHECK(hilbert::max_abs(from_vector - rho_traj.states.back()) < 1e-11);
}

TEST_CASE("partial trace reduces product states exactly") {
  hilbert::CompositeSpace space(2, 2);
  Vector psi_spin = Vector::Zero(space.dim_spin());
  psi_spin(0) = std::sqrt(0.3);
  psi_spin(3) = cplx(0.0, std::sqrt(0.7));
  Vector chi = Vector::Zero(space.dim_phonon());
  chi(2) = std::sqrt(0.5);
  chi(5) = std::sqrt(0.5);

  Vector joint = Vector::Zero(space.dim_total());
  for (Eigen::Index s = 0; s < space.dim_spin(); ++s) {
    for (Eigen::Index m = 0; m < space.dim_phonon(); ++m) {
      joint(s * space.dim_phonon() + m) = psi_spin(s) * chi(m);
    }
  }
  Matrix rho_s = dynamics::partial_trace_phonons(space, joint);
  Matrix expected = psi_spin * psi_spin.adjoint();
  CHECK(hilbert::max_abs(rho_s - expected) < 1e-14);
  CHECK(std::abs(rho_s.trace() - cplx(1.0, 0.0)) < 1e-14);

  Matrix rho_joint = joint * joint.adjoint();
  Matrix rho_s2 = dynamics::partial_trace_phonons(space, rho_joint);
  CHECK(hilbert::max_abs(rho_s2 - expected) < 1e-14);
}

TEST_CASE("regulated bath integrals approach the principal-value limit") {
  const double omega_n = 2.0;
  double previous_gap = 1e300;
  for (double eta : {1.0, 0.1, 0.01}) {
    dynamics::EtaIntegrals integrals = dynamics::finite_eta_integrals(omega_n, eta);
    // forward + backward is purely real (the decay part), conjugate symmetry.
    CHECK(std::abs(integrals.forward - std::conj(integrals.backward)) < 1e-15);
    double gap = std::abs(integrals.forward.imag() + 1.0 / omega_n);
    CHECK(gap < previous_gap);
    previous_gap = gap;
  }
  // η² suppression: at η = 0.01 the residue term is ~(η/ω)²/ω.
  CHECK(previous_gap < 2.0 * 0.01 * 0.01 / (omega_n * omega_n * omega_n));
  CHECK_THROWS_AS(dynamics::finite_eta_integrals(0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(dynamics::finite_eta_integrals(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("first-order bath average vanishes for the vacuum only") {
  models::ModelParams p;
  p.n_sites = 2;
  p.j_star = 0.1;
  p.g = 1.0;
  p.phonon_cutoff = 8;
  CHECK(dynamics::first_order_term_check(p) < 1e-14);

  hilbert::CompositeSpace one_site(1, p.phonon_cutoff);
  Vector vac = hilbert::coherent_bath_state(one_site, {cplx(0.0, 0.0)});
  Vector displaced = hilbert::coherent_bath_state(one_site, {cplx(0.0, 0.5)});
  double control = dynamics::first_order_term_check(p, {displaced, vac});
  CHECK(control > 1e-3);
  CHECK(control == doctest::Approx(0.025).epsilon(0.2));
}
