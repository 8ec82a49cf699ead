#include "adiabatic/schedule.hpp"

#include <charconv>
#include <cmath>

#include "adiabatic/errors.hpp"

namespace adiabatic {

namespace {

constexpr int kMaxBetaOrder = 20;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void check_domain(double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw DomainError("schedule evaluated outside [0,1] at s=" + std::to_string(s));
  }
}

int parse_int_field(std::string_view text, std::string_view prefix) {
  if (text.substr(0, prefix.size()) != prefix) {
    throw ValidationError("schedule: expected '" + std::string(prefix) + "<int>' in '" +
                          std::string(text) + "'");
  }
  auto digits = text.substr(prefix.size());
  int value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw ValidationError("schedule: bad integer in '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

Schedule::Schedule(Kind kind, int parameter) : kind_(kind), parameter_(parameter) {
  switch (kind_) {
    case Kind::Linear:
      break;
    case Kind::LocalAdiabatic:
      if (parameter_ < 2) throw ValidationError("local schedule needs N >= 2");
      local_c_ = std::sqrt(static_cast<double>(parameter_ - 1));
      local_a_ = std::atan(local_c_);
      break;
    case Kind::Beta: {
      const int m = parameter_;
      if (m < 0 || m > kMaxBetaOrder) {
        throw ValidationError("beta schedule order must be in [0, " +
                              std::to_string(kMaxBetaOrder) + "]");
      }
      // 1/B = (2m+1) * C(2m, m), an integer.
      const double inverse_norm = (2.0 * m + 1.0) * binomial(2 * m, m);
      normalization_ = 1.0 / inverse_norm;
      coefficients_.assign(2 * m + 2, 0.0);
      for (int k = 0; k <= m; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        coefficients_[m + k + 1] = inverse_norm * sign * binomial(m, k) / (m + k + 1);
      }
      break;
    }
  }
}

Schedule Schedule::linear() { return Schedule(Kind::Linear, 0); }

Schedule Schedule::local_adiabatic(int dimension) {
  return Schedule(Kind::LocalAdiabatic, dimension);
}

Schedule Schedule::beta(int order) { return Schedule(Kind::Beta, order); }

Schedule Schedule::parse(std::string_view text) {
  if (text == "linear") return linear();
  if (text.substr(0, 6) == "local:") return local_adiabatic(parse_int_field(text.substr(6), "N="));
  if (text.substr(0, 5) == "beta:") return beta(parse_int_field(text.substr(5), "m="));
  throw ValidationError("unknown schedule '" + std::string(text) +
                        "' (expected linear, local:N=<int>, beta:m=<int>)");
}

std::string Schedule::to_string() const {
  switch (kind_) {
    case Kind::Linear:
      return "linear";
    case Kind::LocalAdiabatic:
      return "local:N=" + std::to_string(parameter_);
    case Kind::Beta:
      return "beta:m=" + std::to_string(parameter_);
  }
  return {};
}

// p-th derivative of the Beta polynomial, evaluated on [0, 1/2] where the
// alternating coefficients lose the least precision.
double Schedule::beta_polynomial(double s, int p) const {
  const int degree = static_cast<int>(coefficients_.size()) - 1;
  if (p > degree) return 0.0;
  double acc = 0.0;
  for (int j = degree; j >= p; --j) {
    double c = coefficients_[j];
    for (int q = 0; q < p; ++q) c *= (j - q);
    acc = acc * s + c;
  }
  return acc;
}

double Schedule::operator()(double s) const {
  check_domain(s);
  switch (kind_) {
    case Kind::Linear:
      return s;
    case Kind::LocalAdiabatic: {
      if (s == 0.0) return 0.0;
      if (s == 1.0) return 1.0;
      return (local_c_ - std::tan(local_a_ * (1.0 - 2.0 * s))) / (2.0 * local_c_);
    }
    case Kind::Beta:
      if (s <= 0.5) return beta_polynomial(s, 0);
      return 1.0 - beta_polynomial(1.0 - s, 0);
  }
  return 0.0;
}

double Schedule::derivative(double s, int p) const {
  check_domain(s);
  if (p < 1) throw ValidationError("schedule derivative order must be >= 1");
  switch (kind_) {
    case Kind::Linear:
      return p == 1 ? 1.0 : 0.0;
    case Kind::LocalAdiabatic: {
      if (p > 2) {
        throw CapabilityError("local schedule has closed-form derivatives up to order 2; "
                              "use numeric differentiation for order " + std::to_string(p));
      }
      const double t = std::tan(local_a_ * (1.0 - 2.0 * s));
      const double sec2 = 1.0 + t * t;
      if (p == 1) return local_a_ / local_c_ * sec2;
      return -4.0 * local_a_ * local_a_ / local_c_ * t * sec2;
    }
    case Kind::Beta: {
      if (s <= 0.5) return beta_polynomial(s, p);
      // φ(s) = 1 - φ(1-s)  =>  φ^{(p)}(s) = (-1)^{p+1} φ^{(p)}(1-s)
      const double mirrored = beta_polynomial(1.0 - s, p);
      return (p % 2 == 1) ? mirrored : -mirrored;
    }
  }
  return 0.0;
}

}  // namespace adiabatic
