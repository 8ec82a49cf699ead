#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "adiabatic/errors.hpp"
#include "adiabatic/linalg.hpp"
#include "adiabatic/model.hpp"

namespace adiabatic {

struct Eigensystem {
  RealVector energies;  // ascending
  Matrix vectors;       // orthonormal columns, same order as energies
};

/// Cyclic complex Jacobi eigensolver for dense Hermitian matrices.
/// Throws ValidationError when the input is not Hermitian within 1e-10 and
/// NumericError when 100 sweeps do not converge.
Eigensystem diagonalize(const Matrix& h);

using Diagonalizer = std::function<Eigensystem(const Matrix&)>;

struct TrajectoryOptions {
  int intervals = 1024;
  /// |E_v - E_0| at or below this counts as a degeneracy.
  double degeneracy_tol = 1e-12;
  /// Defaults to `diagonalize`. Tests swap in wrappers that scramble phases.
  Diagonalizer diagonalizer;
};

/// Instantaneous eigensystem on a uniform s-grid, labelled by continuity.
///
/// Tracks are followed by maximal-overlap assignment between neighbouring
/// grid points; within each (near-)degenerate cluster the basis is rotated to
/// the one closest to its neighbour (polar factor of the overlap matrix). This
/// is the discrete form of parallel transport, so <v(s_k)|v(s_{k+1})> is real
/// and positive for every track. Tracks are numbered by their energy order at
/// s = 0, after which the model's transferred state is moved to index 0.
class SpectralTrajectory {
 public:
  SpectralTrajectory(std::vector<RealVector> energies, std::vector<Matrix> vectors);

  int intervals() const { return static_cast<int>(energies_.size()) - 1; }
  int dimension() const { return static_cast<int>(energies_.front().size()); }
  double step() const { return 1.0 / intervals(); }
  double s(int k) const { return static_cast<double>(k) / intervals(); }

  /// Grid index of s; throws ValidationError if s is not a grid point.
  int grid_index(double s) const;

  double energy(int track, int k) const { return energies_[k](track); }
  const RealVector& energies(int k) const { return energies_[k]; }
  const Matrix& vectors(int k) const { return vectors_[k]; }
  Vector vector(int track, int k) const { return vectors_[k].col(track); }

  /// E_track(s_k) - E_0(s_k) along the grid.
  std::vector<double> gap(int track) const;

  /// Copy with track v multiplied by phases[v] at every grid point.
  SpectralTrajectory rephased(const std::vector<Complex>& phases) const;

 private:
  std::vector<RealVector> energies_;
  std::vector<Matrix> vectors_;
};

SpectralTrajectory build_trajectory(const HamiltonianModel& model,
                                    const TrajectoryOptions& options = {});

inline SpectralTrajectory build_trajectory(const HamiltonianModel& model, int intervals) {
  TrajectoryOptions options;
  options.intervals = intervals;
  return build_trajectory(model, options);
}

struct GapIntegral {
  double value = 0.0;
  /// |S(h) - S(2h)| / 15, the Richardson estimate of the Simpson error.
  double error_estimate = 0.0;
};

/// ∫_0^1 [E_track(s) - E_0(s)] ds by composite Simpson (3/8 rule on the last
/// three intervals when the interval count is odd). A precision warning is
/// recorded when the error estimate exceeds `tolerance`.
GapIntegral gap_integral(const SpectralTrajectory& traj, int track,
                         std::optional<double> tolerance = std::nullopt,
                         Warnings* warnings = nullptr);

/// Composite Simpson on uniformly spaced samples; exposed for testing.
double composite_simpson(const std::vector<double>& values, double step);

/// Running integral ∫_0^{s_k} [E_track - E_0] ds at every grid point.
std::vector<double> cumulative_gap_integral(const SpectralTrajectory& traj, int track);

/// <v|dH/ds|u> / (E_v - E_u) at a grid point, or 0 when |E_v - E_u| <= degeneracy_tol.
Complex coupling_beta(const HamiltonianModel& model, const SpectralTrajectory& traj, int nu,
                      int mu, double s, double degeneracy_tol = 1e-12);

/// CSV with columns s, E_0..E_{N-1}, gap_integral_partial (running integral of track 1).
void write_trajectory_csv(std::ostream& out, const SpectralTrajectory& traj);

}  // namespace adiabatic
