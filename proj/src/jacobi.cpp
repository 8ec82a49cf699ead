#include <algorithm>
#include <cmath>
#include <numeric>

#include "adiabatic/spectral.hpp"

namespace adiabatic {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kHermitianTolerance = 1e-10;

double off_diagonal_norm2(const Matrix& a) {
  double sum = 0.0;
  const Eigen::Index n = a.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i != j) sum += std::norm(a(i, j));
    }
  }
  return sum;
}

}  // namespace

Eigensystem diagonalize(const Matrix& h) {
  const Eigen::Index n = h.rows();
  if (h.cols() != n) throw ValidationError("diagonalize: matrix must be square");
  if (n == 0) return {RealVector(), Matrix()};
  const double scale = std::max(1.0, max_abs(h));
  if (hermiticity_defect(h) > kHermitianTolerance * scale) {
    throw ValidationError("diagonalize: matrix is not Hermitian");
  }

  Matrix a = 0.5 * (h + h.adjoint());
  Matrix v = Matrix::Identity(n, n);
  const double frob2 = a.squaredNorm();
  // off-diagonal mass at or below (1e-14 ||A||_F)^2
  const double target = 1e-28 * frob2 + 1e-300;

  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm2(a) <= target) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        // Rotation G = [[c, s e^{iα}], [-s e^{-iα}, c]] on the (p,q) plane
        // annihilates a(p,q) when t = s/c solves t^2 + 2τt - 1 = 0.
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const Complex phase = apq / mag;  // e^{iα}
        const Complex s_phase = s * phase;
        const Complex s_phase_conj = s * std::conj(phase);

        // A <- A G (columns p, q)
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = c * akp - s_phase_conj * akq;
          a(k, q) = s_phase * akp + c * akq;
        }
        // A <- G^dagger A (rows p, q)
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = c * apk - s_phase * aqk;
          a(q, k) = s_phase_conj * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex vkp = v(k, p);
          const Complex vkq = v(k, q);
          v(k, p) = c * vkp - s_phase_conj * vkq;
          v(k, q) = s_phase * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == kMaxSweeps && off_diagonal_norm2(a) > target) {
    throw NumericError("diagonalize: Jacobi iteration did not converge in 100 sweeps");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return a(i, i).real() < a(j, j).real();
  });
  Eigensystem result{RealVector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    result.energies(k) = a(order[k], order[k]).real();
    result.vectors.col(k) = v.col(order[k]);
  }
  return result;
}

}  // namespace adiabatic
