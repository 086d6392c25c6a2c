#include "polq/dynamics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "polq/perturbation.hpp"

namespace polq::dynamics {

void TimeGrid::validate() const {
  if (!std::isfinite(t_start) || !std::isfinite(t_end) || t_end <= t_start)
    throw std::invalid_argument("TimeGrid: need finite t_start < t_end");
  if (n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be positive");
  if (sample_stride < 1 || n_steps % sample_stride != 0)
    throw std::invalid_argument("TimeGrid: sample_stride must be positive and divide n_steps");
}

std::vector<double> TimeGrid::sample_times() const {
  validate();
  std::vector<double> times;
  times.reserve(n_samples());
  const double h = step();
  for (int k = 0; k <= n_steps; k += sample_stride) times.push_back(t_start + k * h);
  return times;
}

void BathSpec::validate() const {
  if (temperature != 0.0)
    throw std::domain_error(
        "BathSpec: finite temperature is out of scope; only the zero-temperature "
        "phonon vacuum is supported");
}

Vector BathSpec::bath_state(const hilbert::CompositeSpace& space) const {
  validate();
  Vector vac = Vector::Zero(space.dim_phonon());
  vac(0) = 1.0;
  return vac;
}

double DensityMatrix::trace_error() const { return std::abs(rho.trace() - cplx(1.0, 0.0)); }

double DensityMatrix::hermiticity_error() const { return (rho - rho.adjoint()).norm(); }

double DensityMatrix::min_eigenvalue() const {
  const Matrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

hilbert::OperatorMatrix markovian_generator(const models::ModelParams& p, GeneratorRoute route) {
  p.validate();
  const hilbert::OperatorMatrix h2 = route == GeneratorRoute::closed_form
                                         ? perturbation::build_h2_closed(p)
                                         : perturbation::build_h2_sw(p);
  return {.mat = -h2.mat, .hermitian = true, .unitary = false};
}

namespace {

void require_density(const DensityMatrix& rho0, Eigen::Index dim, const char* who) {
  if (rho0.rho.rows() != dim || rho0.rho.cols() != dim)
    throw std::invalid_argument(std::string(who) + ": density matrix has wrong dimension");
  if (rho0.trace_error() > 1e-10)
    throw std::invalid_argument(std::string(who) + ": density matrix trace must be 1");
  if (rho0.hermiticity_error() > 1e-10)
    throw std::invalid_argument(std::string(who) + ": density matrix must be hermitian");
}

}  // namespace

MarkovianRun evolve_markovian(const hilbert::OperatorMatrix& generator, const DensityMatrix& rho0,
                              const TimeGrid& grid) {
  grid.validate();
  const Matrix& k = generator.mat;
  if (k.rows() != k.cols()) throw std::invalid_argument("evolve_markovian: generator not square");
  if ((k - k.adjoint()).norm() > 1e-10 * std::max(1.0, k.norm()))
    throw std::invalid_argument("evolve_markovian: generator must be hermitian");
  require_density(rho0, k.rows(), "evolve_markovian");

  const double h = grid.step();
  const double k_norm = k.norm();
  if (h * k_norm >= 0.1) {
    const int suggested = static_cast<int>(std::ceil((grid.t_end - grid.t_start) * k_norm / 0.1));
    throw std::invalid_argument(
        "evolve_markovian: step too large for stability (h*|K| = " + std::to_string(h * k_norm) +
        " >= 0.1); increase n_steps to at least " + std::to_string(suggested + 1));
  }

  const cplx im(0.0, 1.0);
  auto deriv = [&](const Matrix& rho) { return Matrix(im * (k * rho - rho * k)); };

  MarkovianRun run;
  run.min_eigenvalue = std::numeric_limits<double>::infinity();
  Matrix rho = rho0.rho;

  auto record = [&](double t) {
    run.times.push_back(t);
    run.states.push_back(rho);
    const double lo = DensityMatrix{rho}.min_eigenvalue();
    run.min_eigenvalue = std::min(run.min_eigenvalue, lo);
    if (lo < -1e-8)
      throw std::runtime_error("evolve_markovian: positivity lost (min eigenvalue " +
                               std::to_string(lo) + ")");
  };

  record(grid.t_start);
  for (int s = 1; s <= grid.n_steps; ++s) {
    const Matrix k1 = deriv(rho);
    const Matrix k2 = deriv(rho + 0.5 * h * k1);
    const Matrix k3 = deriv(rho + 0.5 * h * k2);
    const Matrix k4 = deriv(rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = 0.5 * (rho + rho.adjoint().eval());

    const double trace_err = std::abs(rho.trace() - cplx(1.0, 0.0));
    run.max_trace_error = std::max(run.max_trace_error, trace_err);
    if (trace_err > 1e-10)
      throw std::runtime_error("evolve_markovian: trace drifted by " + std::to_string(trace_err));
    if (s % grid.sample_stride == 0) record(grid.t_start + s * h);
  }
  return run;
}

PhaseEvolutionCheck markovian_phase_check(const hilbert::OperatorMatrix& generator,
                                          const DensityMatrix& rho0, const TimeGrid& grid) {
  const MarkovianRun run = evolve_markovian(generator, rho0, grid);

  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (generator.mat + generator.mat.adjoint()));
  const Eigen::VectorXd lambda = solver.eigenvalues();
  const Matrix& v = solver.eigenvectors();
  const Matrix rho0_eig = v.adjoint() * rho0.rho * v;
  const Eigen::Index d = rho0_eig.rows();

  PhaseEvolutionCheck check;
  for (std::size_t s = 0; s < run.states.size(); ++s) {
    const double t = run.times[s] - grid.t_start;
    const Matrix rho_eig = v.adjoint() * run.states[s] * v;
    for (Eigen::Index n = 0; n < d; ++n) {
      for (Eigen::Index m = 0; m < d; ++m) {
        const cplx initial = rho0_eig(n, m);
        const cplx evolved = rho_eig(n, m);
        check.magnitude_drift =
            std::max(check.magnitude_drift, std::abs(std::abs(evolved) - std::abs(initial)));
        if (std::abs(initial) > 1e-12) {
          const cplx analytic = std::exp(cplx(0.0, (lambda(n) - lambda(m)) * t)) * initial;
          const double phase_gap = std::abs(std::arg(evolved * std::conj(analytic)));
          check.phase_residual = std::max(check.phase_residual, phase_gap);
        }
      }
    }
  }
  return check;
}

EtaIntegrals finite_eta_integrals(double omega_n, double eta) {
  if (!(omega_n > 0.0) || !std::isfinite(omega_n))
    throw std::invalid_argument("finite_eta_integrals: omega_n must be positive");
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw std::invalid_argument("finite_eta_integrals: eta must be positive");
  return {.forward = 1.0 / cplx(eta, omega_n), .backward = 1.0 / cplx(eta, -omega_n)};
}

namespace {

struct Spectral {
  Eigen::VectorXd evals;
  Matrix evecs;
};

Spectral decompose_hermitian(const hilbert::OperatorMatrix& h, const char* who) {
  const Matrix& m = h.mat;
  if (m.rows() != m.cols()) throw std::invalid_argument(std::string(who) + ": operator not square");
  if ((m - m.adjoint()).norm() > 1e-10 * std::max(1.0, m.norm()))
    throw std::invalid_argument(std::string(who) + ": operator must be hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.adjoint()));
  return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace

ExactTrajectory evolve_exact(const Vector& psi0, const hilbert::OperatorMatrix& h,
                             const TimeGrid& grid) {
  grid.validate();
  if (psi0.size() != h.mat.rows())
    throw std::invalid_argument("evolve_exact: state dimension does not match operator");
  if (std::abs(psi0.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("evolve_exact: initial state must be normalized");
  const Spectral spec = decompose_hermitian(h, "evolve_exact");
  const Vector coeffs = spec.evecs.adjoint() * psi0;

  ExactTrajectory traj;
  for (double t : grid.sample_times()) {
    Vector phases(coeffs.size());
    for (Eigen::Index n = 0; n < coeffs.size(); ++n)
      phases(n) = std::exp(cplx(0.0, -spec.evals(n) * t)) * coeffs(n);
    Vector psi = spec.evecs * phases;
    traj.max_norm_error = std::max(traj.max_norm_error, std::abs(psi.norm() - 1.0));
    traj.times.push_back(t);
    traj.states.push_back(std::move(psi));
  }
  if (traj.max_norm_error > 1e-10)
    throw std::runtime_error("evolve_exact: unitarity lost beyond 1e-10");
  return traj;
}

ExactDensityTrajectory evolve_exact(const DensityMatrix& rho0, const hilbert::OperatorMatrix& h,
                                    const TimeGrid& grid) {
  grid.validate();
  require_density(rho0, h.mat.rows(), "evolve_exact");
  const Spectral spec = decompose_hermitian(h, "evolve_exact");
  const Matrix rho_eig = spec.evecs.adjoint() * rho0.rho * spec.evecs;
  const Eigen::Index d = rho_eig.rows();

  ExactDensityTrajectory traj;
  for (double t : grid.sample_times()) {
    Matrix phased(d, d);
    for (Eigen::Index n = 0; n < d; ++n)
      for (Eigen::Index m = 0; m < d; ++m)
        phased(n, m) = std::exp(cplx(0.0, -(spec.evals(n) - spec.evals(m)) * t)) * rho_eig(n, m);
    Matrix rho = spec.evecs * phased * spec.evecs.adjoint();
    traj.max_trace_error =
        std::max(traj.max_trace_error, std::abs(rho.trace() - cplx(1.0, 0.0)));
    traj.times.push_back(t);
    traj.states.push_back(std::move(rho));
  }
  return traj;
}

Matrix partial_trace_phonons(const hilbert::CompositeSpace& space, const Vector& joint_state) {
  if (joint_state.size() != space.dim_total())
    throw std::invalid_argument("partial_trace_phonons: state dimension mismatch");
  const Eigen::Index ds = space.dim_spin();
  const Eigen::Index dp = space.dim_phonon();
  Matrix rho = Matrix::Zero(ds, ds);
  for (Eigen::Index s = 0; s < ds; ++s)
    for (Eigen::Index t = 0; t < ds; ++t)
      for (Eigen::Index m = 0; m < dp; ++m)
        rho(s, t) += joint_state(s * dp + m) * std::conj(joint_state(t * dp + m));
  return rho;
}

Matrix partial_trace_phonons(const hilbert::CompositeSpace& space, const Matrix& joint_density) {
  if (joint_density.rows() != space.dim_total() || joint_density.cols() != space.dim_total())
    throw std::invalid_argument("partial_trace_phonons: density dimension mismatch");
  const Eigen::Index ds = space.dim_spin();
  const Eigen::Index dp = space.dim_phonon();
  Matrix rho = Matrix::Zero(ds, ds);
  for (Eigen::Index s = 0; s < ds; ++s)
    for (Eigen::Index t = 0; t < ds; ++t)
      for (Eigen::Index m = 0; m < dp; ++m)
        rho(s, t) += joint_density(s * dp + m, t * dp + m);
  return rho;
}

double first_order_term_check(const models::ModelParams& p) {
  const models::InteractionBlocks blocks(p);
  return blocks.system_block(0, 0).norm();
}

double first_order_term_check(const models::ModelParams& p,
                              const std::vector<Vector>& site_states) {
  const models::InteractionBlocks blocks(p);
  return blocks.bath_average(site_states).norm();
}

}  // namespace polq::dynamics
