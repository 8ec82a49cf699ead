#include "adiabatic/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace adiabatic {

namespace {

constexpr double kVanishingThreshold = 1e-8;

double spectral_norm(const Matrix& h) {
  if (h.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

void check_track(const SpectralTrajectory& traj, int nu) {
  if (nu <= 0 || nu >= traj.dimension()) throw ValidationError("prediction: bad track index");
}

Prediction assemble(const BoundaryQuantity& bq, int nu, int m, double T, double theta, double g) {
  if (!(T > 0.0)) throw ValidationError("prediction needs T > 0");
  Prediction p;
  p.nu = nu;
  p.m = m;
  p.T = T;
  p.boundary_start = std::abs(bq.at_start);
  p.boundary_end = std::abs(bq.at_end);
  p.interference_factor = interference_factor(theta, T, g);
  const double scale = std::pow(T, m + 1);
  p.two_boundary_amplitude = std::abs(bq.at_end * std::polar(1.0, T * g) - bq.at_start) / scale;
  return p;
}

}  // namespace

double standard_bound(const HamiltonianModel& model, const SpectralTrajectory& traj) {
  if (traj.dimension() < 2) return 0.0;
  double best = 0.0;
  for (int k = 0; k <= traj.intervals(); ++k) {
    const double norm = spectral_norm(hamiltonian_derivative(model, traj.s(k), 1));
    if (norm == 0.0) continue;
    double min_gap = std::numeric_limits<double>::infinity();
    for (int v = 1; v < traj.dimension(); ++v) {
      min_gap = std::min(min_gap, std::abs(traj.energy(v, k) - traj.energy(0, k)));
    }
    if (min_gap == 0.0) return std::numeric_limits<double>::infinity();
    best = std::max(best, norm / (min_gap * min_gap));
  }
  return best;
}

double interference_factor(double theta, double T, double g) {
  return std::abs(std::polar(1.0, -(theta + T * g)) - 1.0);
}

Prediction predict_amplitude_m0(const HamiltonianModel& model, const SpectralTrajectory& traj,
                                int nu, double T, double theta, double g) {
  check_track(traj, nu);
  const BoundaryQuantity bq = boundary_quantity(model, traj, nu, 0);
  Prediction p = assemble(bq, nu, 0, T, theta, g);
  p.amplitude = p.boundary_start / T * p.interference_factor;
  return p;
}

Prediction predict_amplitude_general(const HamiltonianModel& model, const SpectralTrajectory& traj,
                                     int nu, double T, int m, double theta, double g) {
  check_track(traj, nu);
  if (m < 0) throw ValidationError("prediction: m must be non-negative");
  for (int p = 1; p <= m; ++p) {
    for (double s : {0.0, 1.0}) {
      const double norm = spectral_norm(hamiltonian_derivative(model, s, p));
      if (norm > kVanishingThreshold) {
        std::ostringstream msg;
        msg << "prediction for m=" << m << ": derivative of order " << p << " is " << norm
            << " at s=" << s << ", not zero";
        throw PreconditionError(msg.str());
      }
    }
  }
  const BoundaryQuantity bq = boundary_quantity(model, traj, nu, m);
  Prediction p = assemble(bq, nu, m, T, theta, g);
  p.amplitude = p.two_boundary_amplitude;
  return p;
}

std::map<int, Complex> transition_amplitudes(const EvolutionResult& result,
                                             const SpectralTrajectory& traj) {
  if (result.state.size() != traj.dimension()) {
    throw ValidationError("transition amplitudes: state and trajectory dimensions differ");
  }
  const Vector overlaps = traj.vectors(traj.intervals()).adjoint() * result.state;
  std::map<int, Complex> out;
  for (int v = 1; v < traj.dimension(); ++v) out[v] = overlaps(v);
  return out;
}

ScalingFit fit_power_law(const std::vector<std::pair<double, double>>& series,
                         const FitWindow& window, Warnings* warnings) {
  ScalingFit fit;
  fit.window = window;
  for (const auto& [T, amp] : series) {
    if (!window.contains(T)) continue;
    if (!(T > 0.0)) throw ValidationError("power-law fit needs T > 0");
    if (amp == 0.0) {
      std::ostringstream msg;
      msg << "dropped zero amplitude at T=" << T;
      warn(warnings, msg.str());
      continue;
    }
    if (!(amp > 0.0)) throw ValidationError("power-law fit needs non-negative amplitudes");
    fit.data.emplace_back(T, amp);
  }
  if (fit.data.size() < 5) {
    throw InsufficientDataError("power-law fit needs at least 5 points in the window, got " +
                                std::to_string(fit.data.size()));
  }
  const double count = static_cast<double>(fit.data.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [T, amp] : fit.data) {
    mx += std::log(T);
    my += std::log(amp);
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [T, amp] : fit.data) {
    const double dx = std::log(T) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(amp) - my);
  }
  if (sxx == 0.0) throw InsufficientDataError("power-law fit needs distinct T values");
  fit.exponent = sxy / sxx;
  fit.intercept = my - fit.exponent * mx;
  double ss = 0.0;
  for (const auto& [T, amp] : fit.data) {
    const double r = std::log(amp) - (fit.intercept + fit.exponent * std::log(T));
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / count);
  return fit;
}

std::vector<std::pair<double, double>> above_noise_floor(
    const std::vector<std::pair<double, double>>& series, const std::vector<double>& noise,
    double factor) {
  if (series.size() != noise.size()) throw ValidationError("noise floor: size mismatch");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].second >= factor * noise[i]) out.push_back(series[i]);
  }
  return out;
}

}  // namespace adiabatic
