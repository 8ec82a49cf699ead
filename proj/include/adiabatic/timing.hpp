#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "adiabatic/errors.hpp"
#include "adiabatic/linalg.hpp"
#include "adiabatic/model.hpp"
#include "adiabatic/spectral.hpp"

namespace adiabatic {

/// <v|H^{(m+1)}|0> / (E_v - E_0)^{m+2} at both ends of the path, in the
/// trajectory's parallel-transport gauge.
struct BoundaryQuantity {
  Complex at_start;  // s = 0
  Complex at_end;    // s = 1
  int m = 0;
  int nu = 1;
  double gap_start = 0.0;
  double gap_end = 0.0;
};

BoundaryQuantity boundary_quantity(const HamiltonianModel& model, const SpectralTrajectory& traj,
                                   int nu, int m);

/// θ ∈ (-π, π] with value(1) = value(0)·e^{iθ}. With this orientation the
/// cancelling durations are T = (nπ - θ)/g for even n (the sign of the
/// interference phase e^{iTg} follows from g = ∫(E_v - E_0) ds > 0).
/// Throws UndefinedPhaseError if either endpoint vanishes.
double estimate_theta(const BoundaryQuantity& bq);

/// ΔS = |value(1) - value(0)·e^{iθ}|.
double symmetry_defect(const BoundaryQuantity& bq, double theta);

enum class Parity { Even, Odd };

inline Parity parity_of(long n) { return (n % 2 == 0) ? Parity::Even : Parity::Odd; }
const char* parity_name(Parity p);

struct TimingRow {
  long n;
  double T;
  Parity parity;
};

struct TimingTable {
  int nu = 1;
  double theta = 0.0;
  double gap_integral = 0.0;
  std::vector<TimingRow> rows;  // sorted by n, all T > 0
};

/// T_{n,v} = (nπ - θ)/g for n in [n_first, n_last]. Rows with T <= 0 are
/// skipped with a warning.
TimingTable optimal_times(double g, double theta, long n_first, long n_last, int nu = 1,
                          Warnings* warnings = nullptr);

inline double optimal_time(double g, double theta, long n) {
  return (static_cast<double>(n) * M_PI - theta) / g;
}

/// ΔG = |g_true - (nπ - θ)/T|.
double gap_defect(double g_true, double theta, long n, double T);
/// ΔT = |T_ideal - T|.
double timing_defect(double T_ideal, double T_actual);

/// One sample of an amplitude-vs-n series measured at trial durations.
struct SeriesPoint {
  long n;
  double T;
  double amplitude;
};

struct BeatRefinement {
  bool converged = false;    // no cusps: the input g already cancels
  double g_corrected = 0.0;
  double correction_factor = 1.0;
  double beat_period = 0.0;  // Δn, in even-n samples between cusps
  std::vector<long> cusps;
  double T_corrected = 0.0;  // for the requested n
};

/// Amplitude probe used to decide the sign of the correction.
using AmplitudeProbe = std::function<double(double T)>;

/// Corrects a mis-stated gap integral from the beats of the even-n series.
///
/// `series` holds |E_v| at the trial durations T = (nπ - θ)/g_trial. A cusp is
/// a strict local minimum of the even-n series at least 3x below its median;
/// Δn is the mean spacing between consecutive cusps counted in even-n samples,
/// which gives |g_true/g_trial - 1| ≈ 1/Δn. The sign is chosen by probing both
/// candidates at a few even n and keeping the one with smaller amplitudes.
/// Throws InsufficientDataError when exactly one cusp is found.
BeatRefinement refine_time_by_beats(const std::vector<SeriesPoint>& series, double g_trial,
                                    double theta, long n_request, const AmplitudeProbe& probe);

/// First-order tolerances under which the even-n amplitude at T_{n} stays below
/// half the odd-n amplitude at T_{n+1}.
struct SuppressionTolerance {
  double relative_timing = 0.0;    // max ΔT / T  (equivalently ΔG / g)
  double relative_symmetry = 0.0;  // max ΔS / |value(0)|
};

SuppressionTolerance half_suppression_tolerance(long n_even, double theta);

}  // namespace adiabatic
