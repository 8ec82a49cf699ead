#include <doctest.h>

#include <cmath>

#include "adiabatic/errors.hpp"
#include "adiabatic/schedule.hpp"
#include "oracles.hpp"

using adiabatic::Schedule;

TEST_CASE("linear schedule is the identity with unit slope") {
  const Schedule lin = Schedule::linear();
  for (double s : {0.0, 0.125, 0.5, 0.9, 1.0}) {
    CHECK(lin(s) == s);
    CHECK(lin.derivative(s, 1) == 1.0);
    CHECK(lin.derivative(s, 2) == 0.0);
  }
  CHECK(lin.to_string() == "linear");
  CHECK(lin.vanishing_boundary_derivatives() == 0);
}

TEST_CASE("local schedule matches the closed form and its endpoints are exact") {
  const Schedule local = Schedule::local_adiabatic(16);
  CHECK(local(0.0) == 0.0);
  CHECK(local(1.0) == 1.0);
  CHECK(local(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  for (double s : {0.01, 0.2, 0.37, 0.5, 0.81, 0.99}) {
    CHECK(local(s) == doctest::Approx(oracle::local_schedule(16, s)).epsilon(1e-14));
  }
}

TEST_CASE("local schedule derivatives agree with finite differences") {
  const Schedule local = Schedule::local_adiabatic(16);
  auto f = [](double x) { return oracle::local_schedule(16, x); };
  for (double s : {0.1, 0.3, 0.5, 0.77}) {
    CHECK(local.derivative(s, 1) == doctest::Approx(oracle::derivative(f, s, 1, 2e-4)).epsilon(1e-10));
    CHECK(local.derivative(s, 2) == doctest::Approx(oracle::derivative(f, s, 2, 1e-3)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(local.derivative(0.3, 3), adiabatic::CapabilityError);
}

TEST_CASE("local schedule slows down where the search gap is small") {
  // dφ/ds ∝ γ(φ)^2 is the defining property of the local schedule
  const Schedule local = Schedule::local_adiabatic(16);
  const double ratio0 = local.derivative(0.2, 1) / std::pow(oracle::search_gap(16, local(0.2)), 2);
  for (double s : {0.05, 0.4, 0.5, 0.6, 0.95}) {
    const double ratio = local.derivative(s, 1) / std::pow(oracle::search_gap(16, local(s)), 2);
    CHECK(ratio == doctest::Approx(ratio0).epsilon(1e-12));
  }
}

TEST_CASE("beta schedule matches direct quadrature") {
  for (int m : {1, 2, 3, 5}) {
    const Schedule beta = Schedule::beta(m);
    for (double s : {0.0, 0.1, 0.33, 0.5, 0.62, 0.9, 1.0}) {
      CHECK(beta(s) == doctest::Approx(oracle::beta_schedule(m, s)).epsilon(1e-12));
    }
  }
}

TEST_CASE("beta normalization is the Beta function B(m+1, m+1)") {
  CHECK(Schedule::beta(0).normalization() == 1.0);
  CHECK(Schedule::beta(1).normalization() == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(Schedule::beta(2).normalization() == doctest::Approx(1.0 / 30.0).epsilon(1e-15));
  CHECK(Schedule::beta(3).normalization() == doctest::Approx(1.0 / 140.0).epsilon(1e-15));
}

TEST_CASE("beta derivatives vanish at the boundaries up to order m") {
  for (int m = 1; m <= 6; ++m) {
    const Schedule beta = Schedule::beta(m);
    CHECK(beta.vanishing_boundary_derivatives() == m);
    for (int p = 1; p <= m; ++p) {
      CHECK(std::abs(beta.derivative(0.0, p)) < 1e-12);
      CHECK(std::abs(beta.derivative(1.0, p)) < 1e-12);
    }
    CHECK(std::abs(beta.derivative(0.0, m + 1)) > 1.0);
  }
}

TEST_CASE("first nonvanishing beta derivatives at s=0") {
  // φ^{(m+1)}(0) = m! / B(m+1, m+1)
  CHECK(Schedule::beta(1).derivative(0.0, 2) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(Schedule::beta(2).derivative(0.0, 3) == doctest::Approx(60.0).epsilon(1e-14));
  CHECK(Schedule::beta(1).derivative(1.0, 2) == doctest::Approx(-6.0).epsilon(1e-14));
  CHECK(Schedule::beta(2).derivative(1.0, 3) == doctest::Approx(60.0).epsilon(1e-14));
}

TEST_CASE("beta derivatives agree with finite differences of the quadrature oracle") {
  for (int m : {1, 2, 4}) {
    const Schedule beta = Schedule::beta(m);
    auto f = [m](double x) { return oracle::beta_schedule(m, x); };
    for (double s : {0.2, 0.45, 0.7}) {
      CHECK(beta.derivative(s, 1) == doctest::Approx(oracle::derivative(f, s, 1, 1e-3)).epsilon(1e-8));
      CHECK(beta.derivative(s, 2) == doctest::Approx(oracle::derivative(f, s, 2, 1e-3)).epsilon(1e-5));
    }
  }
}

TEST_CASE("beta m=0 is the linear schedule") {
  const Schedule b0 = Schedule::beta(0);
  const Schedule lin = Schedule::linear();
  for (int k = 0; k <= 1000; ++k) {
    const double s = k / 1000.0;
    CHECK(std::abs(b0(s) - lin(s)) <= 1e-14);
    CHECK(std::abs(b0.derivative(s, 1) - lin.derivative(s, 1)) <= 1e-14);
  }
}

TEST_CASE("schedules are monotone and antisymmetric about s = 1/2") {
  for (const char* text : {"linear", "local:N=16", "local:N=4", "beta:m=1", "beta:m=2", "beta:m=7"}) {
    const Schedule sched = Schedule::parse(text);
    double previous = -1.0;
    for (int k = 0; k <= 200; ++k) {
      const double s = k / 200.0;
      const double value = sched(s);
      CHECK(value >= previous);
      CHECK(value + sched(1.0 - s) == doctest::Approx(1.0).epsilon(1e-13));
      previous = value;
    }
  }
}

TEST_CASE("schedule strings round-trip") {
  for (const char* text : {"linear", "local:N=16", "beta:m=0", "beta:m=3"}) {
    CHECK(Schedule::parse(text).to_string() == text);
  }
  CHECK(Schedule::parse("beta:m=2") == Schedule::beta(2));
  CHECK_FALSE(Schedule::parse("beta:m=2") == Schedule::beta(1));
  CHECK(Schedule::parse("local:N=16").parameter() == 16);
}

TEST_CASE("bad schedule strings and arguments are rejected") {
  CHECK_THROWS_AS(Schedule::parse("cubic"), adiabatic::ValidationError);
  CHECK_THROWS_AS(Schedule::parse("beta:m=x"), adiabatic::ValidationError);
  CHECK_THROWS_AS(Schedule::parse("beta:m=2 "), adiabatic::ValidationError);
  CHECK_THROWS_AS(Schedule::parse("beta:k=2"), adiabatic::ValidationError);
  CHECK_THROWS_AS(Schedule::parse("beta:m=-1"), adiabatic::ValidationError);
  CHECK_THROWS_AS(Schedule::parse("beta:m=21"), adiabatic::ValidationError);
  CHECK_THROWS_AS(Schedule::parse("local:N=1"), adiabatic::ValidationError);
  CHECK_THROWS_AS(Schedule::linear()(1.5), adiabatic::DomainError);
  CHECK_THROWS_AS(Schedule::beta(2)(-1e-9), adiabatic::DomainError);
  CHECK_THROWS_AS(Schedule::linear().derivative(0.5, 0), adiabatic::ValidationError);
}
