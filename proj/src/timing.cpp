#include "adiabatic/timing.hpp"

#include <algorithm>
#include <cmath>

namespace adiabatic {

namespace {
constexpr double kBoundaryGapTolerance = 1e-12;
}

BoundaryQuantity boundary_quantity(const HamiltonianModel& model, const SpectralTrajectory& traj,
                                   int nu, int m) {
  if (nu <= 0 || nu >= traj.dimension()) throw ValidationError("boundary quantity: bad track index");
  if (m < 0) throw ValidationError("boundary quantity: m must be non-negative");
  BoundaryQuantity bq;
  bq.m = m;
  bq.nu = nu;
  const int last = traj.intervals();
  auto evaluate = [&](int k, double& gap_out) {
    const double s = traj.s(k);
    const double gap = traj.energy(nu, k) - traj.energy(0, k);
    gap_out = gap;
    if (std::abs(gap) <= kBoundaryGapTolerance) {
      throw DegeneracyError("boundary quantity: gap vanishes at s=" + std::to_string(s));
    }
    const Matrix deriv = hamiltonian_derivative(model, s, m + 1);
    const Complex element = (traj.vectors(k).col(nu).adjoint() * deriv * traj.vectors(k).col(0))(0, 0);
    return element / std::pow(gap, m + 2);
  };
  bq.at_start = evaluate(0, bq.gap_start);
  bq.at_end = evaluate(last, bq.gap_end);
  return bq;
}

double estimate_theta(const BoundaryQuantity& bq) {
  if (std::abs(bq.at_start) == 0.0 || std::abs(bq.at_end) == 0.0) {
    throw UndefinedPhaseError("θ is undefined: a boundary quantity vanishes");
  }
  const double theta = std::arg(bq.at_end / bq.at_start);
  // std::arg returns [-π, π]; fold -π onto π
  return theta <= -M_PI ? M_PI : theta;
}

double symmetry_defect(const BoundaryQuantity& bq, double theta) {
  return std::abs(bq.at_end - bq.at_start * std::polar(1.0, theta));
}

const char* parity_name(Parity p) { return p == Parity::Even ? "even" : "odd"; }

TimingTable optimal_times(double g, double theta, long n_first, long n_last, int nu,
                          Warnings* warnings) {
  if (!(g > 0.0)) throw ValidationError("optimal times need a positive gap integral");
  if (n_last < n_first) throw ValidationError("optimal times: empty n range");
  TimingTable table;
  table.nu = nu;
  table.theta = theta;
  table.gap_integral = g;
  for (long n = n_first; n <= n_last; ++n) {
    const double T = optimal_time(g, theta, n);
    if (!(T > 0.0)) {
      warn(warnings, "n=" + std::to_string(n) + " gives a nonpositive duration; row skipped");
      continue;
    }
    table.rows.push_back({n, T, parity_of(n)});
  }
  return table;
}

double gap_defect(double g_true, double theta, long n, double T) {
  if (!(T > 0.0)) throw ValidationError("gap defect needs T > 0");
  return std::abs(g_true - (static_cast<double>(n) * M_PI - theta) / T);
}

double timing_defect(double T_ideal, double T_actual) {
  if (!(T_actual > 0.0) || !(T_ideal > 0.0)) throw ValidationError("timing defect needs T > 0");
  return std::abs(T_ideal - T_actual);
}

BeatRefinement refine_time_by_beats(const std::vector<SeriesPoint>& series, double g_trial,
                                    double theta, long n_request, const AmplitudeProbe& probe) {
  if (!(g_trial > 0.0)) throw ValidationError("beat refinement needs a positive gap integral");
  std::vector<SeriesPoint> even;
  for (const SeriesPoint& p : series) {
    if (p.n % 2 == 0) even.push_back(p);
  }
  std::sort(even.begin(), even.end(),
            [](const SeriesPoint& a, const SeriesPoint& b) { return a.n < b.n; });
  if (even.size() < 3) throw InsufficientDataError("beat refinement needs at least three even-n samples");

  std::vector<double> amplitudes;
  for (const SeriesPoint& p : even) amplitudes.push_back(p.amplitude);
  std::vector<double> sorted = amplitudes;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];

  BeatRefinement out;
  for (std::size_t i = 1; i + 1 < even.size(); ++i) {
    const double a = amplitudes[i];
    if (a < amplitudes[i - 1] && a < amplitudes[i + 1] && a <= median / 3.0) {
      out.cusps.push_back(even[i].n);
    }
  }
  if (out.cusps.empty()) {
    out.converged = true;
    out.g_corrected = g_trial;
    out.T_corrected = optimal_time(g_trial, theta, n_request);
    return out;
  }
  if (out.cusps.size() == 1) {
    throw InsufficientDataError("beat refinement found a single cusp; extend the series");
  }
  if (!probe) throw ValidationError("beat refinement needs an amplitude probe to fix the sign");

  // spacing in n, halved to count even-n samples
  out.beat_period = static_cast<double>(out.cusps.back() - out.cusps.front()) /
                    static_cast<double>(out.cusps.size() - 1) / 2.0;
  const double delta = 1.0 / out.beat_period;

  // Probe at the even n with the largest amplitudes: far from cusps, where the
  // wrong sign doubles the phase error and the right one removes it.
  std::vector<std::size_t> idx(even.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return amplitudes[a] > amplitudes[b]; });
  const std::size_t probes = std::min<std::size_t>(3, idx.size());
  double best_score = 0.0;
  for (int sign : {+1, -1}) {
    const double g = g_trial * (1.0 + sign * delta);
    double score = 0.0;
    for (std::size_t j = 0; j < probes; ++j) {
      score += probe(optimal_time(g, theta, even[idx[j]].n));
    }
    if (sign == +1 || score < best_score) {
      best_score = score;
      out.g_corrected = g;
      out.correction_factor = 1.0 + sign * delta;
    }
  }
  out.T_corrected = optimal_time(out.g_corrected, theta, n_request);
  return out;
}

SuppressionTolerance half_suppression_tolerance(long n_even, double theta) {
  if (n_even % 2 != 0) throw ValidationError("half-suppression tolerance needs an even n");
  const double even_phase = static_cast<double>(n_even) * M_PI - theta;
  const double odd_phase = static_cast<double>(n_even + 1) * M_PI - theta;
  if (!(even_phase > 0.0)) throw ValidationError("half-suppression tolerance needs T > 0");
  SuppressionTolerance tol;
  // even amplitude ≈ |B|·g·ΔT/T against half the odd amplitude |B|/T_odd
  tol.relative_timing = 1.0 / odd_phase;
  // even amplitude ≈ ΔS/T against |B|/T_odd
  tol.relative_symmetry = even_phase / odd_phase;
  return tol;
}

}  // namespace adiabatic
