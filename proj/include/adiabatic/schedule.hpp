#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace adiabatic {

/// Interpolation φ: [0,1] -> [0,1] with φ(0) = 0 and φ(1) = 1.
///
/// Three families are supported:
///  - Linear:          φ(s) = s
///  - LocalAdiabatic:  φ(s) = (c - tan(atan(c)(1 - 2s))) / (2c),  c = sqrt(N - 1)
///  - Beta(m):         φ(s) = ∫_0^s x^m (1-x)^m dx / ∫_0^1 x^m (1-x)^m dx
///
/// The Beta family is stored as an exact polynomial of degree 2m+1; its first
/// m derivatives vanish at both ends. Schedules are immutable values.
class Schedule {
 public:
  enum class Kind { Linear, LocalAdiabatic, Beta };

  static Schedule linear();
  /// `dimension` is the Hilbert-space dimension N (N >= 2).
  static Schedule local_adiabatic(int dimension);
  static Schedule beta(int order);

  /// Parses `linear`, `local:N=<int>`, or `beta:m=<int>`.
  static Schedule parse(std::string_view text);

  Kind kind() const { return kind_; }
  /// N for LocalAdiabatic, m for Beta, 0 for Linear.
  int parameter() const { return parameter_; }
  /// ∫_0^1 x^m (1-x)^m dx for Beta; 1 otherwise.
  double normalization() const { return normalization_; }

  /// Number of derivatives known to vanish at both boundaries (m for Beta).
  int vanishing_boundary_derivatives() const {
    return kind_ == Kind::Beta ? parameter_ : 0;
  }

  /// φ(s). Throws DomainError for s outside [0,1].
  double operator()(double s) const;
  double eval(double s) const { return (*this)(s); }

  /// φ^{(p)}(s) for p >= 1. LocalAdiabatic supports p <= 2 only and throws
  /// CapabilityError above that.
  double derivative(double s, int p) const;

  std::string to_string() const;

  friend bool operator==(const Schedule& a, const Schedule& b) {
    return a.kind_ == b.kind_ && a.parameter_ == b.parameter_;
  }

 private:
  Schedule(Kind kind, int parameter);

  double beta_polynomial(double s, int p) const;

  Kind kind_;
  int parameter_;
  double normalization_ = 1.0;
  // φ(s) = Σ_j coefficients_[j] s^j for the Beta family.
  std::vector<double> coefficients_;
  // Local schedule constants: c = sqrt(N-1), a = atan(c).
  double local_c_ = 0.0;
  double local_a_ = 0.0;
};

inline double eval_schedule(const Schedule& schedule, double s) {
  return schedule(s);
}

inline double schedule_derivative(const Schedule& schedule, double s, int p) {
  return schedule.derivative(s, p);
}

}  // namespace adiabatic
