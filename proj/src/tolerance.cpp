#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <sstream>

#include "adiabatic/analysis.hpp"

namespace adiabatic {

namespace {

// w(s) = s^a (1-s)^b / c stored as monomial coefficients.
struct ProfilePolynomial {
  std::vector<double> coefficients;

  ProfilePolynomial(int a, int b, double c) : coefficients(static_cast<std::size_t>(a + b + 1), 0.0) {
    double binom = 1.0;
    for (int j = 0; j <= b; ++j) {
      coefficients[static_cast<std::size_t>(a + j)] = ((j % 2 == 0) ? binom : -binom) / c;
      binom = binom * (b - j) / (j + 1);
    }
  }

  double derivative(double s, int p) const {
    double total = 0.0;
    for (int k = static_cast<int>(coefficients.size()) - 1; k >= p; --k) {
      double falling = 1.0;
      for (int i = 0; i < p; ++i) falling *= (k - i);
      total = total * s + coefficients[static_cast<std::size_t>(k)] * falling;
    }
    return total;
  }
};

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

DefectSpec DefectSpec::parse(std::string_view text) {
  DefectSpec spec;
  if (text == "timing") {
    spec.kind = Kind::Timing;
  } else if (text == "gap") {
    spec.kind = Kind::Gap;
  } else if (text == "symmetry") {
    spec.kind = Kind::Symmetry;
  } else if (text.rfind("derivative:p=", 0) == 0) {
    spec.kind = Kind::Derivative;
    const std::string digits(text.substr(13));
    std::size_t used = 0;
    int p = 0;
    try {
      p = std::stoi(digits, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != digits.size() || p < 1) {
      throw ValidationError("defect: bad derivative order in '" + std::string(text) + "'");
    }
    spec.order = p;
  } else {
    throw ValidationError("unknown defect type '" + std::string(text) +
                          "' (expected timing, gap, symmetry, derivative:p=<int>)");
  }
  return spec;
}

std::string DefectSpec::to_string() const {
  switch (kind) {
    case Kind::Timing: return "timing";
    case Kind::Gap: return "gap";
    case Kind::Symmetry: return "symmetry";
    case Kind::Derivative: return "derivative:p=" + std::to_string(order);
  }
  return "unknown";
}

double DefectSpec::magnitude(double T) const { return scale * std::pow(T, -alpha); }

Matrix random_hermitian_direction(int dimension, std::uint64_t seed) {
  if (dimension < 1) throw ValidationError("direction needs a positive dimension");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix v(dimension, dimension);
  for (int i = 0; i < dimension; ++i) {
    v(i, i) = normal(rng);
    for (int j = i + 1; j < dimension; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      v(i, j) = Complex(re, im);
      v(j, i) = Complex(re, -im);
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(v, Eigen::EigenvaluesOnly);
  const double norm = solver.eigenvalues().cwiseAbs().maxCoeff();
  if (norm == 0.0) throw NumericError("random direction vanished");
  return v / norm;
}

ToleranceResult tolerance_sweep(const HamiltonianModel& base, const ToleranceSpec& spec,
                                Warnings* warnings) {
  if (spec.m < 0) throw ValidationError("tolerance sweep: m must be non-negative");
  if (spec.n_last < spec.n_first) throw ValidationError("tolerance sweep: empty n range");
  if (spec.stride < 1) throw ValidationError("tolerance sweep: stride must be positive");
  if (!(spec.defect.scale >= 0.0)) throw ValidationError("tolerance sweep: scale must be >= 0");

  const SpectralTrajectory traj = build_trajectory(base, spec.intervals);
  ToleranceResult result;
  result.defect = spec.defect;
  result.m = spec.m;
  result.gap_integral = gap_integral(traj, spec.nu).value;
  result.theta = estimate_theta(boundary_quantity(base, traj, spec.nu, spec.m));

  const DefectSpec& defect = spec.defect;
  std::optional<ProfilePolynomial> profile;
  if (defect.kind == DefectSpec::Kind::Symmetry) {
    profile.emplace(spec.m + 1, spec.m + 2, factorial(spec.m + 1));
  } else if (defect.kind == DefectSpec::Kind::Derivative) {
    profile.emplace(defect.order, defect.order, factorial(defect.order));
  }
  Matrix direction;
  if (profile) direction = random_hermitian_direction(base.dimension(), defect.seed);

  EvolveOptions options;
  options.tol = spec.tol;
  options.scheme = spec.scheme;

  long first_even = spec.n_first + (spec.n_first % 2 != 0 ? 1 : 0);
  long index = 0;
  for (long n = first_even; n <= spec.n_last; n += 2, ++index) {
    if (index % spec.stride != 0) continue;
    const double T_ideal = optimal_time(result.gap_integral, result.theta, n);
    if (!(T_ideal > 0.0)) {
      warn(warnings, "tolerance sweep: n=" + std::to_string(n) + " has T <= 0; skipped");
      continue;
    }
    ToleranceRow row{n, T_ideal, defect.magnitude(T_ideal), 0.0, 0.0};
    EvolutionResult evolved;
    switch (defect.kind) {
      case DefectSpec::Kind::Timing:
        row.T = T_ideal + row.defect;
        evolved = evolve(base, traj, row.T, options);
        break;
      case DefectSpec::Kind::Gap:
        row.T = optimal_time(result.gap_integral + row.defect, result.theta, n);
        evolved = evolve(base, traj, row.T, options);
        break;
      case DefectSpec::Kind::Symmetry:
      case DefectSpec::Kind::Derivative: {
        const ProfilePolynomial& w = *profile;
        const HamiltonianModel perturbed = perturbed_model(
            base, direction, row.defect, [w](double s) { return w.derivative(s, 0); },
            [w](double s, int p) { return w.derivative(s, p); },
            base.label() + "+" + defect.to_string());
        const SpectralTrajectory perturbed_traj = build_trajectory(perturbed, spec.intervals);
        evolved = evolve(perturbed, perturbed_traj, row.T, options);
        break;
      }
    }
    row.amplitude = std::abs(evolved.overlaps(spec.nu));
    row.integrator_error = evolved.diagnostics.estimated_error;
    result.rows.push_back(row);
  }

  std::vector<std::pair<double, double>> series;
  std::vector<double> noise;
  for (const ToleranceRow& row : result.rows) {
    series.emplace_back(row.T, row.amplitude);
    noise.push_back(row.integrator_error);
  }
  result.fit = fit_power_law(above_noise_floor(series, noise), {}, warnings);
  result.survived = result.fit.exponent <= -(spec.m + 2) + 0.2;
  return result;
}

}  // namespace adiabatic
