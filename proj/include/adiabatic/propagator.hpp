#pragma once

#include <optional>

#include "adiabatic/linalg.hpp"
#include "adiabatic/model.hpp"
#include "adiabatic/spectral.hpp"

namespace adiabatic {

/// One-step schemes. Both apply exact exponentials of Hermitian matrices, so
/// every step is unitary to round-off.
enum class Integrator {
  /// ψ <- exp(-i T Δs H(s_mid)) ψ, second order.
  Midpoint,
  /// Two exponentials of Gauss-node combinations of H per step, fourth order
  /// (commutator-free Magnus).
  Magnus4,
};

struct EvolveOptions {
  /// Convergence threshold on the final amplitude magnitudes.
  double tol = 1e-10;
  /// Explicit initial state; defaults to the transferred eigenvector at s = 0.
  std::optional<Vector> initial;
  /// Track index to start from when no explicit state is given.
  int initial_track = 0;
  long max_steps = 1L << 24;
  /// First resolution tried; 0 picks a power of two from T and the spectral width.
  long min_steps = 0;
  Integrator scheme = Integrator::Magnus4;
};

struct PropagationDiagnostics {
  long steps = 0;
  /// max |Δ|a_v|| between the last two resolutions.
  double estimated_error = 0.0;
  int doublings = 0;
};

struct EvolutionResult {
  double T = 0.0;
  Vector state;           // ψ at s = 1
  Vector overlaps;        // a_v = <v(1)|ψ>, track-ordered
  Vector error_components;  // E_v = a_v for v != 0, with E_0 = 0
  double error_norm = 0.0;  // sqrt(1 - |a_0|^2), summed over v != 0
  PropagationDiagnostics diagnostics;
};

/// ψ(1) from a fixed number of steps. 2x2 models use the closed-form
/// exponential, larger ones an eigendecomposition.
Vector propagate_fixed(const HamiltonianModel& model, double T, const Vector& initial, long steps,
                       Integrator scheme = Integrator::Magnus4);

/// Time-dependent Schrödinger propagation over s ∈ [0,1] with duration T.
/// The step count doubles until the final amplitude magnitudes |<v(1)|ψ>|
/// change by less than `tol`. Throws NumericError when `max_steps` is reached.
EvolutionResult evolve(const HamiltonianModel& model, const SpectralTrajectory& traj, double T,
                       const EvolveOptions& options = {});

}  // namespace adiabatic
