#include "adiabatic/spectral.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

namespace adiabatic {

namespace {

// Eigenvalues closer than this (relative to the spectral scale) share a cluster
// whose basis is fixed by alignment rather than by the eigensolver.
constexpr double kClusterTolerance = 1e-10;

struct Cluster {
  int begin;  // first sorted index
  int size;
};

std::vector<Cluster> find_clusters(const RealVector& energies) {
  const int n = static_cast<int>(energies.size());
  const double scale = std::max(1.0, energies.cwiseAbs().maxCoeff());
  std::vector<Cluster> clusters;
  int begin = 0;
  for (int i = 1; i <= n; ++i) {
    if (i == n || energies(i) - energies(i - 1) > kClusterTolerance * scale) {
      clusters.push_back({begin, i - begin});
      begin = i;
    }
  }
  return clusters;
}

// Basis of span(V) that depends only on the subspace: pivoted Gram-Schmidt on
// the projections of the standard basis vectors, largest projection first.
// Each resulting vector has a real positive entry at its pivot.
Matrix canonical_basis(const Matrix& v) {
  const Eigen::Index n = v.rows();
  const Eigen::Index c = v.cols();
  Matrix coords = v.adjoint();  // column i = V^dagger e_i
  Matrix q(c, c);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (Eigen::Index j = 0; j < c; ++j) {
    double best = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!used[i]) best = std::max(best, coords.col(i).squaredNorm());
    }
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!used[i] && coords.col(i).squaredNorm() >= best * (1.0 - 1e-8)) {
        pivot = i;
        break;
      }
    }
    used[pivot] = true;
    const Vector direction = coords.col(pivot) / coords.col(pivot).norm();
    q.col(j) = direction;
    coords -= direction * (direction.adjoint() * coords);
  }
  return v * q;
}

// Rotates `cluster` (orthonormal columns) to the basis closest to `reference`
// in the Frobenius sense: V Q with Q the unitary polar factor of V^dagger R.
Matrix align_to(const Matrix& cluster, const Matrix& reference) {
  const Matrix overlap = cluster.adjoint() * reference;
  if (overlap.rows() == 1) {
    const Complex m = overlap(0, 0);
    const double mag = std::abs(m);
    return mag > 0.0 ? Matrix(cluster * (m / mag)) : cluster;
  }
  Eigen::JacobiSVD<Matrix> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return cluster * (svd.matrixU() * svd.matrixV().adjoint());
}

struct GridPoint {
  Eigensystem raw;
  std::vector<Cluster> clusters;
  Matrix vectors;        // track-ordered
  RealVector energies;   // track-ordered
  std::vector<int> cluster_of_track;
};

// Assigns the previous point's tracks to clusters of `point` by maximal
// overlap, then aligns each cluster to the tracks it received.
void follow(GridPoint& point, const Matrix& reference, const Matrix& h) {
  const int n = static_cast<int>(reference.cols());
  const int nc = static_cast<int>(point.clusters.size());
  struct Candidate {
    double weight;
    int cluster;
    int track;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(nc) * n);
  for (int ci = 0; ci < nc; ++ci) {
    const Cluster& c = point.clusters[ci];
    const Matrix proj = point.raw.vectors.middleCols(c.begin, c.size).adjoint() * reference;
    for (int j = 0; j < n; ++j) candidates.push_back({proj.col(j).squaredNorm(), ci, j});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.weight > b.weight; });
  std::vector<int> remaining(static_cast<std::size_t>(nc));
  for (int ci = 0; ci < nc; ++ci) remaining[ci] = point.clusters[ci].size;
  std::vector<int> owner(static_cast<std::size_t>(n), -1);
  for (const Candidate& cand : candidates) {
    if (owner[cand.track] >= 0 || remaining[cand.cluster] == 0) continue;
    owner[cand.track] = cand.cluster;
    --remaining[cand.cluster];
  }
  for (int j = 0; j < n; ++j) {
    if (owner[j] < 0) throw NumericError("trajectory: track assignment is not a permutation");
  }

  point.vectors.resize(reference.rows(), n);
  point.energies.resize(n);
  point.cluster_of_track = owner;
  for (int ci = 0; ci < nc; ++ci) {
    std::vector<int> tracks;
    for (int j = 0; j < n; ++j) {
      if (owner[j] == ci) tracks.push_back(j);
    }
    const Cluster& c = point.clusters[ci];
    Matrix ref(reference.rows(), static_cast<Eigen::Index>(tracks.size()));
    for (std::size_t t = 0; t < tracks.size(); ++t) ref.col(t) = reference.col(tracks[t]);
    const Matrix aligned = align_to(point.raw.vectors.middleCols(c.begin, c.size), ref);
    for (std::size_t t = 0; t < tracks.size(); ++t) {
      point.vectors.col(tracks[t]) = aligned.col(t);
      point.energies(tracks[t]) = (aligned.col(t).adjoint() * h * aligned.col(t))(0, 0).real();
    }
  }
}

}  // namespace

SpectralTrajectory::SpectralTrajectory(std::vector<RealVector> energies,
                                       std::vector<Matrix> vectors)
    : energies_(std::move(energies)), vectors_(std::move(vectors)) {
  if (energies_.size() < 2 || energies_.size() != vectors_.size()) {
    throw ValidationError("trajectory needs matching energy and vector samples");
  }
}

int SpectralTrajectory::grid_index(double s) const {
  const double u = s * intervals();
  const long k = std::lround(u);
  if (k < 0 || k > intervals() || std::abs(u - static_cast<double>(k)) > 1e-9) {
    throw ValidationError("s=" + std::to_string(s) + " is not on the trajectory grid");
  }
  return static_cast<int>(k);
}

std::vector<double> SpectralTrajectory::gap(int track) const {
  if (track < 0 || track >= dimension()) throw ValidationError("track index out of range");
  std::vector<double> values(energies_.size());
  for (std::size_t k = 0; k < energies_.size(); ++k) {
    values[k] = energies_[k](track) - energies_[k](0);
  }
  return values;
}

SpectralTrajectory SpectralTrajectory::rephased(const std::vector<Complex>& phases) const {
  if (static_cast<int>(phases.size()) != dimension()) {
    throw ValidationError("rephased: need one phase per track");
  }
  std::vector<Matrix> vectors = vectors_;
  for (Matrix& v : vectors) {
    for (int j = 0; j < dimension(); ++j) v.col(j) *= phases[j];
  }
  return SpectralTrajectory(energies_, std::move(vectors));
}

SpectralTrajectory build_trajectory(const HamiltonianModel& model,
                                    const TrajectoryOptions& options) {
  const int intervals = options.intervals;
  if (intervals < 16) throw ValidationError("trajectory grid needs at least 16 intervals");
  const Diagonalizer solve = options.diagonalizer ? options.diagonalizer : Diagonalizer(diagonalize);
  const int n = model.dimension();

  std::vector<GridPoint> points(static_cast<std::size_t>(intervals) + 1);
  std::vector<Matrix> hamiltonians(points.size());
  for (int k = 0; k <= intervals; ++k) {
    hamiltonians[k] = model(static_cast<double>(k) / intervals);
    points[k].raw = solve(hamiltonians[k]);
    points[k].clusters = find_clusters(points[k].raw.energies);
  }

  // Start from the least degenerate point (closest to the middle on ties).
  int anchor = 0;
  for (int k = 0; k <= intervals; ++k) {
    const auto better = points[k].clusters.size() > points[anchor].clusters.size();
    const auto tie = points[k].clusters.size() == points[anchor].clusters.size() &&
                     std::abs(2 * k - intervals) < std::abs(2 * anchor - intervals);
    if (better || tie) anchor = k;
  }
  {
    GridPoint& a = points[anchor];
    a.vectors.resize(n, n);
    a.energies.resize(n);
    a.cluster_of_track.assign(static_cast<std::size_t>(n), 0);
    for (std::size_t ci = 0; ci < a.clusters.size(); ++ci) {
      const Cluster& c = a.clusters[ci];
      const Matrix basis = canonical_basis(a.raw.vectors.middleCols(c.begin, c.size));
      for (int j = 0; j < c.size; ++j) {
        const int track = c.begin + j;
        a.vectors.col(track) = basis.col(j);
        a.energies(track) =
            (basis.col(j).adjoint() * hamiltonians[anchor] * basis.col(j))(0, 0).real();
        a.cluster_of_track[track] = static_cast<int>(ci);
      }
    }
  }
  for (int k = anchor + 1; k <= intervals; ++k) {
    follow(points[k], points[k - 1].vectors, hamiltonians[k]);
  }
  for (int k = anchor - 1; k >= 0; --k) {
    follow(points[k], points[k + 1].vectors, hamiltonians[k]);
  }

  // Number tracks by energy order at s = 0 (cluster order, then anchor order),
  // then move the transferred state to the front.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const std::vector<int>& start_cluster = points[0].cluster_of_track;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return start_cluster[a] < start_cluster[b]; });
  const int transferred = order[model.transferred_index()];
  order.erase(order.begin() + model.transferred_index());
  order.insert(order.begin(), transferred);

  std::vector<RealVector> energies(points.size(), RealVector(n));
  std::vector<Matrix> vectors(points.size(), Matrix(n, n));
  for (std::size_t k = 0; k < points.size(); ++k) {
    for (int t = 0; t < n; ++t) {
      energies[k](t) = points[k].energies(order[t]);
      vectors[k].col(t) = points[k].vectors.col(order[t]);
    }
  }

  // Coupled tracks must stay away from the transferred energy.
  for (std::size_t k = 0; k < points.size(); ++k) {
    Matrix dh;
    bool have_dh = false;
    for (int t = 1; t < n; ++t) {
      if (std::abs(energies[k](t) - energies[k](0)) > options.degeneracy_tol) continue;
      if (!have_dh) {
        dh = hamiltonian_derivative(model, static_cast<double>(k) / intervals, 1);
        have_dh = true;
      }
      const Complex coupling = (vectors[k].col(t).adjoint() * dh * vectors[k].col(0))(0, 0);
      if (std::abs(coupling) > 1e-10) {
        throw DegeneracyError("trajectory: track " + std::to_string(t) +
                              " is degenerate with the transferred state at s=" +
                              std::to_string(static_cast<double>(k) / intervals) +
                              " while coupled to it");
      }
    }
  }
  return SpectralTrajectory(std::move(energies), std::move(vectors));
}

double composite_simpson(const std::vector<double>& values, double step) {
  const std::size_t intervals = values.size() - 1;
  if (values.size() < 2) return 0.0;
  if (intervals == 1) return 0.5 * step * (values[0] + values[1]);
  std::size_t simpson_end = intervals;
  double tail = 0.0;
  if (intervals % 2 == 1) {
    // Simpson 3/8 on the last three intervals
    simpson_end = intervals - 3;
    const std::size_t j = simpson_end;
    tail = 3.0 * step / 8.0 * (values[j] + 3.0 * values[j + 1] + 3.0 * values[j + 2] + values[j + 3]);
  }
  double sum = 0.0;
  for (std::size_t j = 0; j + 2 <= simpson_end; j += 2) {
    sum += values[j] + 4.0 * values[j + 1] + values[j + 2];
  }
  return step / 3.0 * sum + tail;
}

GapIntegral gap_integral(const SpectralTrajectory& traj, int track,
                         std::optional<double> tolerance, Warnings* warnings) {
  if (track == 0) throw ValidationError("gap integral needs an excited track (v != 0)");
  const std::vector<double> values = traj.gap(track);
  const double h = traj.step();
  const std::size_t intervals = values.size() - 1;
  GapIntegral result;
  result.value = composite_simpson(values, h);

  // Richardson estimate on the longest even-length prefix; any leftover last
  // interval is integrated identically at both resolutions and cancels.
  const std::size_t even_end = intervals - intervals % 2;
  const std::vector<double> prefix(values.begin(), values.begin() + even_end + 1);
  std::vector<double> coarse;
  for (std::size_t j = 0; j <= even_end; j += 2) coarse.push_back(values[j]);
  if (coarse.size() >= 2) {
    const double fine = composite_simpson(prefix, h);
    const double rough = composite_simpson(coarse, 2.0 * h);
    result.error_estimate = std::abs(fine - rough) / 15.0;
  }
  if (tolerance && result.error_estimate > *tolerance) {
    warn(warnings, "gap integral error estimate " + std::to_string(result.error_estimate) +
                       " exceeds tolerance " + std::to_string(*tolerance));
  }
  return result;
}

std::vector<double> cumulative_gap_integral(const SpectralTrajectory& traj, int track) {
  const std::vector<double> f = traj.gap(track);
  const double h = traj.step();
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t k = 2; k < f.size(); k += 2) {
    out[k] = out[k - 2] + h / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
  }
  for (std::size_t k = 1; k < f.size(); k += 2) {
    // quadratic through (k-1, k, k+1), or (k-2, k-1, k) at the right end
    if (k + 1 < f.size()) {
      out[k] = out[k - 1] + h / 12.0 * (5.0 * f[k - 1] + 8.0 * f[k] - f[k + 1]);
    } else if (k >= 2) {
      out[k] = out[k - 1] + h / 12.0 * (-f[k - 2] + 8.0 * f[k - 1] + 5.0 * f[k]);
    } else {
      out[k] = 0.5 * h * (f[0] + f[1]);
    }
  }
  return out;
}

Complex coupling_beta(const HamiltonianModel& model, const SpectralTrajectory& traj, int nu,
                      int mu, double s, double degeneracy_tol) {
  const int k = traj.grid_index(s);
  const double gap = traj.energy(nu, k) - traj.energy(mu, k);
  if (std::abs(gap) <= degeneracy_tol) return {0.0, 0.0};
  const Matrix dh = hamiltonian_derivative(model, traj.s(k), 1);
  const Complex numerator = (traj.vectors(k).col(nu).adjoint() * dh * traj.vectors(k).col(mu))(0, 0);
  return numerator / gap;
}

void write_trajectory_csv(std::ostream& out, const SpectralTrajectory& traj) {
  const int n = traj.dimension();
  out << "s";
  for (int v = 0; v < n; ++v) out << ",E_" << v;
  out << ",gap_integral_partial\n";
  const std::vector<double> partial =
      n > 1 ? cumulative_gap_integral(traj, 1) : std::vector<double>(traj.intervals() + 1, 0.0);
  out << std::setprecision(17);
  for (int k = 0; k <= traj.intervals(); ++k) {
    out << traj.s(k);
    for (int v = 0; v < n; ++v) out << ',' << traj.energy(v, k);
    out << ',' << partial[k] << '\n';
  }
}

}  // namespace adiabatic
