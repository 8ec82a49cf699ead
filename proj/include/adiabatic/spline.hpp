#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "adiabatic/errors.hpp"

namespace adiabatic {

/// Not-a-knot cubic spline on a uniform grid, generic over any value type with
/// vector-space operations (double, complex, Eigen matrices).
///
/// With 2 knots it degenerates to linear interpolation, with 3 to the
/// interpolating parabola.
template <typename T>
class UniformCubicSpline {
 public:
  UniformCubicSpline(double x0, double step, std::vector<T> values)
      : x0_(x0), h_(step), y_(std::move(values)) {
    if (y_.size() < 2) throw FormatError("spline needs at least two knots");
    if (!(h_ > 0.0)) throw FormatError("spline step must be positive");
    const std::size_t n = y_.size() - 1;  // intervals
    const T zero = y_[0] - y_[0];
    m_.assign(n + 1, zero);
    if (n == 1) return;
    auto rhs = [&](std::size_t k) -> T {
      return (6.0 / (h_ * h_)) * (y_[k - 1] - 2.0 * y_[k] + y_[k + 1]);
    };
    if (n == 2) {
      const T curvature = rhs(1) / 6.0;
      m_.assign(3, curvature);
      return;
    }
    // Not-a-knot on a uniform grid eliminates to M_1 = rhs_1 / 6 (and
    // symmetrically at the right end); the rest is a (1,4,1) tridiagonal system.
    m_[1] = rhs(1) / 6.0;
    m_[n - 1] = rhs(n - 1) / 6.0;
    if (n >= 4) {
      const std::size_t first = 2, last = n - 2;
      const std::size_t count = last - first + 1;
      std::vector<double> c(count);
      std::vector<T> d(count, zero);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t k = first + i;
        T r = rhs(k);
        if (k == first) r = r - m_[1];
        if (k == last) r = r - m_[n - 1];
        if (i == 0) {
          c[i] = 1.0 / 4.0;
          d[i] = r / 4.0;
        } else {
          const double denom = 4.0 - c[i - 1];
          c[i] = 1.0 / denom;
          d[i] = (r - d[i - 1]) / denom;
        }
      }
      m_[last] = d[count - 1];
      for (std::size_t i = count - 1; i-- > 0;) {
        m_[first + i] = d[i] - c[i] * m_[first + i + 1];
      }
    }
    m_[0] = 2.0 * m_[1] - m_[2];
    m_[n] = 2.0 * m_[n - 1] - m_[n - 2];
  }

  std::size_t knots() const { return y_.size(); }

  /// p-th derivative (p = 0..3; higher orders vanish for a piecewise cubic).
  T evaluate(double x, int p = 0) const {
    const std::size_t n = y_.size() - 1;
    const double u = (x - x0_) / h_;
    std::size_t k = u <= 0.0 ? 0 : static_cast<std::size_t>(std::floor(u));
    k = std::min(k, n - 1);
    const double a = x0_ + (k + 1) * h_ - x;  // distance to right knot
    const double b = x - (x0_ + k * h_);      // distance to left knot
    const T& mk = m_[k];
    const T& mk1 = m_[k + 1];
    switch (p) {
      case 0:
        return (a * a * a / (6.0 * h_)) * mk + (b * b * b / (6.0 * h_)) * mk1 +
               (a / h_) * (y_[k] - (h_ * h_ / 6.0) * mk) +
               (b / h_) * (y_[k + 1] - (h_ * h_ / 6.0) * mk1);
      case 1:
        return (-a * a / (2.0 * h_)) * mk + (b * b / (2.0 * h_)) * mk1 +
               (1.0 / h_) * (y_[k + 1] - y_[k]) - (h_ / 6.0) * (mk1 - mk);
      case 2:
        return (a / h_) * mk + (b / h_) * mk1;
      case 3:
        return (1.0 / h_) * (mk1 - mk);
      default:
        return mk - mk;
    }
  }

 private:
  double x0_;
  double h_;
  std::vector<T> y_;
  std::vector<T> m_;  // second derivatives at the knots
};

}  // namespace adiabatic
