#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adiabatic/errors.hpp"
#include "adiabatic/linalg.hpp"
#include "adiabatic/model.hpp"
#include "adiabatic/propagator.hpp"
#include "adiabatic/spectral.hpp"
#include "adiabatic/timing.hpp"

namespace adiabatic {

/// Leading-order prediction of |E_v| at duration T.
struct Prediction {
  int nu = 1;
  int m = 0;
  double T = 0.0;
  double amplitude = 0.0;
  /// |B(0)| and |B(1)|, the boundary quantities of order m (not divided by T^{m+1}).
  double boundary_start = 0.0;
  double boundary_end = 0.0;
  /// |e^{-i(θ + T g)} - 1| ∈ [0, 2].
  double interference_factor = 0.0;
  /// |B(1) e^{iTg} - B(0)| / T^{m+1}; equals `amplitude` when the boundary
  /// quantities satisfy B(1) = B(0) e^{iθ}.
  double two_boundary_amplitude = 0.0;
};

/// max_k ||H'(s_k)|| / min_{v≠0} |E_v(s_k) - E_0(s_k)|^2 with the spectral norm.
/// The adiabatic-criterion estimate at duration T is this value divided by T.
double standard_bound(const HamiltonianModel& model, const SpectralTrajectory& traj);

double interference_factor(double theta, double T, double g);

/// First-order prediction for a schedule without vanishing boundary derivatives:
/// |<v|H'|0>(0)| / (T γ_v(0)^2) · |e^{-i(θ + Tg)} - 1|.
Prediction predict_amplitude_m0(const HamiltonianModel& model, const SpectralTrajectory& traj,
                                int nu, double T, double theta, double g);

/// |B(1) e^{iTg} - B(0)| / T^{m+1} with B the order-m boundary quantities.
/// Throws PreconditionError if some H^{(p)}, 1 <= p <= m, does not vanish at a
/// boundary (spectral norm above 1e-8).
Prediction predict_amplitude_general(const HamiltonianModel& model, const SpectralTrajectory& traj,
                                     int nu, double T, int m, double theta, double g);

/// E_v = <v(1)|ψ(T)> for every v != 0, phases in the trajectory's gauge.
std::map<int, Complex> transition_amplitudes(const EvolutionResult& result,
                                             const SpectralTrajectory& traj);

struct FitWindow {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double T) const { return T >= lo && T <= hi; }
};

struct ScalingFit {
  std::vector<std::pair<double, double>> data;  // (T, |E|) points used
  FitWindow window;
  double exponent = 0.0;   // slope of log|E| against log T
  double intercept = 0.0;  // log|E| at T = 1
  double residual_rms = 0.0;
};

/// Least squares on log-log data inside `window`. Points with |E| = 0 are
/// dropped with a warning; fewer than five remaining points is an
/// InsufficientDataError.
ScalingFit fit_power_law(const std::vector<std::pair<double, double>>& series,
                         const FitWindow& window = {}, Warnings* warnings = nullptr);

/// Injected defect for tolerance sweeps. The defect magnitude at duration T is
/// scale · T^{-alpha}.
struct DefectSpec {
  enum class Kind { Timing, Gap, Symmetry, Derivative };
  Kind kind = Kind::Timing;
  int order = 1;  // p for derivative defects
  double alpha = 1.0;
  double scale = 1.0;
  std::uint64_t seed = 1;

  /// `timing`, `gap`, `symmetry`, or `derivative:p=<int>`.
  static DefectSpec parse(std::string_view text);
  std::string to_string() const;
  double magnitude(double T) const;
};

struct ToleranceSpec {
  DefectSpec defect;
  int m = 0;
  int nu = 1;
  long n_first = 100;
  long n_last = 400;
  long stride = 1;  // every stride-th even n in [n_first, n_last]
  double tol = 1e-10;
  int intervals = 1024;
  Integrator scheme = Integrator::Magnus4;
};

struct ToleranceRow {
  long n;
  double T;       // duration actually evolved
  double defect;  // injected magnitude
  double amplitude;
  double integrator_error;
};

struct ToleranceResult {
  DefectSpec defect;
  int m = 0;
  double theta = 0.0;
  double gap_integral = 0.0;
  std::vector<ToleranceRow> rows;
  ScalingFit fit;
  /// The order-(m+2) even-n scaling survives when the fitted exponent is at most -(m+2) + 0.2.
  bool survived = false;
};

/// Random Hermitian matrix with unit spectral norm, reproducible from `seed`.
Matrix random_hermitian_direction(int dimension, std::uint64_t seed);

/// Evolves the even-n series of `base` with the defect injected at every T and
/// fits the resulting exponent. Durations come from the unperturbed model's g
/// and θ; amplitudes are measured against the perturbed model's eigenbasis.
/// Symmetry defects add ε·s^{m+1}(1-s)^{m+2}/(m+1)!·V, which changes B(0) only;
/// derivative(p) defects add ε·s^p(1-s)^p/p!·V, which sets H^{(p)} off by ε at
/// both ends.
ToleranceResult tolerance_sweep(const HamiltonianModel& base, const ToleranceSpec& spec,
                                Warnings* warnings = nullptr);

/// Keeps points whose amplitude is at least `factor` times the integrator's
/// own error estimate, so round-off does not bend the fitted slope.
std::vector<std::pair<double, double>> above_noise_floor(
    const std::vector<std::pair<double, double>>& series, const std::vector<double>& noise,
    double factor = 100.0);

}  // namespace adiabatic
