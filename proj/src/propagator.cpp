#include "adiabatic/propagator.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace adiabatic {

namespace {

// exp(-i τ H) applied to (c0, c1) in closed form. The identity part of H only
// contributes a global phase, which is accumulated separately.
void apply_two_level(const Matrix& h, double tau, Complex& c0, Complex& c1, double& phase) {
  const double h00 = h(0, 0).real();
  const double h11 = h(1, 1).real();
  const Complex h01 = 0.5 * (h(0, 1) + std::conj(h(1, 0)));
  const double mean = 0.5 * (h00 + h11);
  const double hz = 0.5 * (h00 - h11);
  const double radius = std::sqrt(hz * hz + std::norm(h01));
  phase += tau * mean;
  const double angle = tau * radius;
  const double cs = std::cos(angle);
  // sin(x)/r written to stay finite as r -> 0
  const double sinc = radius > 0.0 ? std::sin(angle) / radius : tau;
  const Complex minus_i_sinc(0.0, -sinc);
  // U = cos I - i sin/r (H - mean I)
  const Complex u00 = cs + minus_i_sinc * hz;
  const Complex u11 = cs - minus_i_sinc * hz;
  const Complex u01 = minus_i_sinc * h01;
  const Complex u10 = minus_i_sinc * std::conj(h01);
  const Complex n0 = u00 * c0 + u01 * c1;
  const Complex n1 = u10 * c0 + u11 * c1;
  c0 = n0;
  c1 = n1;
}

using LongComplex = std::complex<long double>;
using LongMatrix = Eigen::Matrix<LongComplex, Eigen::Dynamic, Eigen::Dynamic>;
using LongVector = Eigen::Matrix<LongComplex, Eigen::Dynamic, 1>;

// The state and the step operator are carried in long double. Consecutive
// steps see nearly the same eigenbasis, so its O(eps) non-orthogonality
// biases every step the same way and the norm drifts linearly in double.
void apply_dense(Eigen::SelfAdjointEigenSolver<Matrix>& solver, const Matrix& h, double tau,
                 LongVector& psi) {
  solver.compute(h);
  const long n = h.rows();
  const LongMatrix raw = solver.eigenvectors().cast<LongComplex>();
  // Newton-Schulz step towards the nearest unitary
  const LongMatrix v = raw * (1.5L * LongMatrix::Identity(n, n) - 0.5L * (raw.adjoint() * raw));
  LongVector coords = v.adjoint() * psi;
  for (long j = 0; j < n; ++j) {
    coords(j) *= std::polar(1.0L, -static_cast<long double>(tau) * solver.eigenvalues()(j));
  }
  psi = v * coords;
}

// Gauss nodes and weights of the two-exponential fourth-order scheme.
const double kSqrt3 = std::sqrt(3.0);
const double kNode1 = 0.5 - kSqrt3 / 6.0;
const double kNode2 = 0.5 + kSqrt3 / 6.0;
const double kWeightA = 0.25 + kSqrt3 / 6.0;
const double kWeightB = 0.25 - kSqrt3 / 6.0;

template <typename Apply>
void march(const HamiltonianModel& model, double T, long steps, Integrator scheme, Apply apply) {
  const double ds = 1.0 / static_cast<double>(steps);
  const double tau = T * ds;
  const int n = model.dimension();
  Matrix h(n, n);
  if (scheme == Integrator::Midpoint) {
    for (long j = 0; j < steps; ++j) {
      model.evaluate((static_cast<double>(j) + 0.5) * ds, h);
      apply(h, tau);
    }
    return;
  }
  Matrix h1(n, n), h2(n, n);
  for (long j = 0; j < steps; ++j) {
    const double s0 = static_cast<double>(j) * ds;
    model.evaluate(s0 + kNode1 * ds, h1);
    model.evaluate(s0 + kNode2 * ds, h2);
    h = kWeightA * h1 + kWeightB * h2;
    apply(h, tau);
    h = kWeightB * h1 + kWeightA * h2;
    apply(h, tau);
  }
}

Vector propagate_two_level(const HamiltonianModel& model, double T, const Vector& initial,
                           long steps, Integrator scheme) {
  Complex c0 = initial(0);
  Complex c1 = initial(1);
  double phase = 0.0;
  march(model, T, steps, scheme,
        [&](const Matrix& h, double tau) { apply_two_level(h, tau, c0, c1, phase); });
  const Complex global = std::polar(1.0, -phase);
  Vector out(2);
  out << global * c0, global * c1;
  return out;
}

Vector propagate_dense(const HamiltonianModel& model, double T, const Vector& initial,
                       long steps, Integrator scheme) {
  LongVector psi = initial.cast<LongComplex>();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(model.dimension());
  march(model, T, steps, scheme,
        [&](const Matrix& h, double tau) { apply_dense(solver, h, tau, psi); });
  return psi.cast<Complex>();
}

long initial_resolution(const SpectralTrajectory& traj, double T) {
  double width = 0.0;
  for (int k = 0; k <= traj.intervals(); ++k) {
    const RealVector& e = traj.energies(k);
    width = std::max(width, e.maxCoeff() - e.minCoeff());
  }
  const double wanted = std::max(64.0, 4.0 * T * width);
  long steps = 64;
  while (static_cast<double>(steps) < wanted) steps *= 2;
  return steps;
}

}  // namespace

Vector propagate_fixed(const HamiltonianModel& model, double T, const Vector& initial, long steps,
                       Integrator scheme) {
  if (!(T > 0.0)) throw ValidationError("evolve: T must be positive");
  if (steps < 1) throw ValidationError("evolve: need at least one step");
  if (initial.size() != model.dimension()) throw ValidationError("evolve: initial state has wrong size");
  if (model.dimension() == 2) return propagate_two_level(model, T, initial, steps, scheme);
  return propagate_dense(model, T, initial, steps, scheme);
}

EvolutionResult evolve(const HamiltonianModel& model, const SpectralTrajectory& traj, double T,
                       const EvolveOptions& options) {
  if (!(T > 0.0)) throw ValidationError("evolve: T must be positive");
  if (!(options.tol >= 1e-12)) throw ValidationError("evolve: tol must be at least 1e-12");
  if (traj.dimension() != model.dimension()) {
    throw ValidationError("evolve: trajectory and model dimensions differ");
  }
  Vector initial;
  if (options.initial) {
    initial = *options.initial;
    if (initial.size() != model.dimension()) throw ValidationError("evolve: initial state has wrong size");
    const double norm = initial.norm();
    if (!(norm > 0.0)) throw ValidationError("evolve: initial state is zero");
    initial /= norm;
  } else {
    if (options.initial_track < 0 || options.initial_track >= traj.dimension()) {
      throw ValidationError("evolve: initial track out of range");
    }
    initial = traj.vector(options.initial_track, 0);
  }

  const Matrix& final_basis = traj.vectors(traj.intervals());
  long steps = options.min_steps > 0 ? options.min_steps : initial_resolution(traj, T);
  Vector psi = propagate_fixed(model, T, initial, steps, options.scheme);
  Vector overlaps = final_basis.adjoint() * psi;
  PropagationDiagnostics diag;
  while (true) {
    if (steps * 2 > options.max_steps) {
      std::ostringstream msg;
      msg << "evolve: no convergence to tol=" << options.tol << " within " << options.max_steps
          << " steps at T=" << T << " (last change " << diag.estimated_error << ")";
      throw NumericError(msg.str());
    }
    steps *= 2;
    ++diag.doublings;
    const Vector refined = propagate_fixed(model, T, initial, steps, options.scheme);
    const Vector refined_overlaps = final_basis.adjoint() * refined;
    diag.estimated_error =
        (refined_overlaps.cwiseAbs() - overlaps.cwiseAbs()).cwiseAbs().maxCoeff();
    psi = refined;
    overlaps = refined_overlaps;
    if (diag.estimated_error < options.tol) break;
  }
  diag.steps = steps;

  EvolutionResult result;
  result.T = T;
  result.state = psi;
  result.overlaps = overlaps;
  result.error_components = overlaps;
  result.error_components(0) = 0.0;
  // Σ_{v≠0} |a_v|^2 equals 1 - |a_0|^2 for a unitary step, without the
  // cancellation that would floor small error norms near 1e-8.
  result.error_norm = result.error_components.norm();
  result.diagnostics = diag;
  return result;
}

}  // namespace adiabatic
