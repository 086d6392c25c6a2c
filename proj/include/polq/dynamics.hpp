// polq/dynamics.hpp — master-equation and exact time evolution.
//
// At zero temperature the memoryless master equation for the dressed system
// reduces to a purely Hamiltonian generator: ρ̇ = i[K, ρ] with K = −H⁽²⁾, so the
// reduced dynamics is a phase evolution with no decay. The exact joint evolution
// on the composite space serves as the oracle this claim is checked against.
#pragma once

#include <vector>

#include "polq/models.hpp"

namespace polq::dynamics {

// Uniform integration grid: step h = (t_end − t_start)/n_steps, states recorded
// every sample_stride steps (t_start included), so n_steps must be a multiple
// of sample_stride.
struct TimeGrid {
  double t_start = 0.0;
  double t_end = 50.0;
  int n_steps = 5000;
  int sample_stride = 1;

  void validate() const;
  double step() const { return (t_end - t_start) / n_steps; }
  int n_samples() const { return n_steps / sample_stride + 1; }
  std::vector<double> sample_times() const;
};

// Phonon reservoir specification. Only the zero-temperature bath (vacuum
// projector) is supported; any other temperature is rejected as out of scope.
struct BathSpec {
  double temperature = 0.0;

  void validate() const;
  Vector bath_state(const hilbert::CompositeSpace& space) const;  // phonon-factor vector
};

struct DensityMatrix {
  Matrix rho;

  double trace_error() const;        // |tr ρ − 1|
  double hermiticity_error() const;  // ‖ρ − ρ†‖_F
  double min_eigenvalue() const;     // of the hermitized matrix
};

enum class GeneratorRoute { closed_form, sw_sum };

// K on the spin factor with ρ̇ = i[K, ρ]; K = −H⁽²⁾. The sw_sum route needs the
// phonon cutoff in `p`; the closed-form route ignores it.
hilbert::OperatorMatrix markovian_generator(const models::ModelParams& p, GeneratorRoute route);

struct MarkovianRun {
  std::vector<double> times;
  std::vector<Matrix> states;
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;  // smallest eigenvalue seen at any sample
};

// Fixed-step RK4 on ρ̇ = i[K, ρ] with stability guard h·‖K‖_F < 0.1. The state is
// re-hermitized each step; trace is monitored each step and positivity at sample
// times, both failing loudly rather than silently.
MarkovianRun evolve_markovian(const hilbert::OperatorMatrix& generator, const DensityMatrix& rho0,
                              const TimeGrid& grid);

// Integrated check against the analytic solution in the generator eigenbasis:
// ρ̃_nm(t) = e^{i(λ_n−λ_m)t} ρ̃_nm(0). magnitude_drift is the worst |ρ̃_nm| change;
// phase_residual the worst branch-safe phase distance to the analytic element,
// over entries with non-negligible initial magnitude.
struct PhaseEvolutionCheck {
  double magnitude_drift = 0.0;
  double phase_residual = 0.0;
};
PhaseEvolutionCheck markovian_phase_check(const hilbert::OperatorMatrix& generator,
                                          const DensityMatrix& rho0, const TimeGrid& grid);

// ∫₀^∞ e^{−i(ω_n ∓ iη)τ} dτ at finite regulator η > 0: forward = 1/(η + iω_n),
// backward its conjugate. As η → 0⁺ the imaginary parts approach ∓1/ω_n.
struct EtaIntegrals {
  cplx forward;
  cplx backward;
};
EtaIntegrals finite_eta_integrals(double omega_n, double eta);

struct ExactTrajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  double max_norm_error = 0.0;
};

struct ExactDensityTrajectory {
  std::vector<double> times;
  std::vector<Matrix> states;
  double max_trace_error = 0.0;
};

// Evolution under a Hermitian h by one-time spectral decomposition, exact at
// every sample time (no integrator error).
ExactTrajectory evolve_exact(const Vector& psi0, const hilbert::OperatorMatrix& h,
                             const TimeGrid& grid);
ExactDensityTrajectory evolve_exact(const DensityMatrix& rho0, const hilbert::OperatorMatrix& h,
                                    const TimeGrid& grid);

// ρ_s = Σ_m ⟨m_ph|ρ_T|m_ph⟩ on the spin factor; trace preserved exactly.
Matrix partial_trace_phonons(const hilbert::CompositeSpace& space, const Vector& joint_state);
Matrix partial_trace_phonons(const hilbert::CompositeSpace& space, const Matrix& joint_density);

// ‖⟨0_ph|h_i|0_ph⟩‖_F — the first-order term of the master equation, which
// vanishes for the vacuum bath. The overload evaluates the same average in an
// arbitrary product bath state (negative control: displaced states make it
// nonzero).
double first_order_term_check(const models::ModelParams& p);
double first_order_term_check(const models::ModelParams& p,
                              const std::vector<Vector>& site_states);

}  // namespace polq::dynamics
