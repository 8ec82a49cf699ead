#include <doctest.h>

#include <cmath>

#include "adiabatic/propagator.hpp"
#include "adiabatic/timing.hpp"
#include "oracles.hpp"

using namespace adiabatic;

namespace {

struct Search2 {
  HamiltonianModel model;
  SpectralTrajectory traj;
};

Search2 search2(const char* schedule, int intervals = 512) {
  HamiltonianModel model = reduce_search_to_2level(search_hamiltonian(4, Schedule::parse(schedule)));
  SpectralTrajectory traj = build_trajectory(model, intervals);
  return {std::move(model), std::move(traj)};
}

// Leading-order amplitude for a given boundary pair.
double interference_amplitude(Complex b0, Complex b1, double T, double g) {
  return std::abs(b1 * std::polar(1.0, T * g) - b0) / T;
}

}  // namespace

TEST_CASE("linear search boundary values") {
  const auto [model, traj] = search2("linear");
  const BoundaryQuantity bq = boundary_quantity(model, traj, 1, 0);
  // |<1|(|+><+| - |0><0|)|+>| at s=0 and the mirror element at s=1, gap 1 at both ends
  const double expected = std::sqrt(15.0) / 16.0;
  CHECK(std::abs(bq.at_start) == doctest::Approx(expected).epsilon(1e-13));
  CHECK(std::abs(bq.at_end) == doctest::Approx(expected).epsilon(1e-13));
  CHECK(bq.gap_start == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(bq.gap_end == doctest::Approx(1.0).epsilon(1e-14));
  const double theta = estimate_theta(bq);
  CHECK(std::abs(theta) < 1e-12);
  CHECK(symmetry_defect(bq, theta) < 1e-13);
}

TEST_CASE("beta boundary values carry phi^{(m+1)} at the ends") {
  const double base = std::sqrt(15.0) / 16.0;
  {
    const auto [model, traj] = search2("beta:m=1");
    const BoundaryQuantity bq = boundary_quantity(model, traj, 1, 1);
    CHECK(std::abs(bq.at_start) == doctest::Approx(6.0 * base).epsilon(1e-12));
    CHECK(std::abs(bq.at_start) == doctest::Approx(1.4523687548277813).epsilon(1e-12));
    CHECK(std::abs(bq.at_end) == doctest::Approx(6.0 * base).epsilon(1e-12));
    CHECK(std::abs(std::abs(estimate_theta(bq)) - M_PI) < 1e-12);
    CHECK(estimate_theta(bq) > 0.0);
    CHECK(symmetry_defect(bq, estimate_theta(bq)) < 1e-12);
  }
  {
    const auto [model, traj] = search2("beta:m=2");
    const BoundaryQuantity bq = boundary_quantity(model, traj, 1, 2);
    CHECK(std::abs(bq.at_start) == doctest::Approx(60.0 * base).epsilon(1e-12));
    CHECK(std::abs(estimate_theta(bq)) < 1e-12);
  }
}

TEST_CASE("theta on synthetic boundary values") {
  BoundaryQuantity bq;
  bq.at_end = Complex(0.3, 0.1);
  bq.at_start = bq.at_end * std::polar(1.0, -M_PI / 2.0);
  CHECK(estimate_theta(bq) == doctest::Approx(M_PI / 2.0).epsilon(1e-14));
  bq.at_start = bq.at_end;
  CHECK(std::abs(estimate_theta(bq)) < 1e-15);
}

TEST_CASE("boundary quantity is gauge independent in magnitude and theta") {
  const auto [model, traj] = search2("local:N=16");
  const BoundaryQuantity a = boundary_quantity(model, traj, 1, 0);
  const BoundaryQuantity b =
      boundary_quantity(model, traj.rephased({std::polar(1.0, 1.1), std::polar(1.0, -0.3)}), 1, 0);
  CHECK(std::abs(a.at_start) == doctest::Approx(std::abs(b.at_start)).epsilon(1e-14));
  CHECK(estimate_theta(a) == doctest::Approx(estimate_theta(b)).epsilon(1e-13));
}

TEST_CASE("theta is undefined when a boundary value vanishes") {
  const auto [model, traj] = search2("beta:m=1");
  const BoundaryQuantity bq = boundary_quantity(model, traj, 1, 0);
  CHECK_THROWS_AS(estimate_theta(bq), UndefinedPhaseError);
  CHECK_THROWS_AS(boundary_quantity(model, traj, 0, 0), ValidationError);
  CHECK_THROWS_AS(boundary_quantity(model, traj, 1, -1), ValidationError);
}

TEST_CASE("optimal times") {
  const double g = 0.5665971450314967;
  Warnings w;
  const TimingTable table = optimal_times(g, 0.0, 1, 6, 1, &w);
  CHECK(w.empty());
  REQUIRE(table.rows.size() == 6);
  for (const TimingRow& row : table.rows) {
    CHECK(row.T == doctest::Approx(row.n * M_PI / g).epsilon(1e-15));
    CHECK(row.parity == parity_of(row.n));
  }
  CHECK(parity_name(Parity::Even) == std::string("even"));
  CHECK(optimal_time(g, M_PI, 1) == 0.0);

  Warnings skipped;
  const TimingTable shifted = optimal_times(g, M_PI, 0, 3, 1, &skipped);
  CHECK(shifted.rows.size() == 2);
  CHECK(shifted.rows.front().n == 2);
  CHECK(skipped.messages.size() == 2);
  CHECK_THROWS_AS(optimal_times(0.0, 0.0, 1, 2), ValidationError);
  CHECK_THROWS_AS(optimal_times(g, 0.0, 5, 2), ValidationError);
}

TEST_CASE("timing and gap defects") {
  const double g = 0.5;
  const double T = optimal_time(g, 0.3, 40);
  CHECK(gap_defect(g, 0.3, 40, T) < 1e-15);
  CHECK(gap_defect(g, 0.3, 40, T * 1.01) == doctest::Approx(g * (1.0 - 1.0 / 1.01)).epsilon(1e-12));
  CHECK(timing_defect(T, T + 2.5) == doctest::Approx(2.5));
  CHECK_THROWS_AS(gap_defect(g, 0.3, 40, 0.0), ValidationError);
  CHECK_THROWS_AS(timing_defect(-1.0, 2.0), ValidationError);
}

TEST_CASE("half-suppression tolerances hold to first order") {
  const Complex b(0.24, 0.0);
  const double g = 0.56;
  for (double theta : {0.0, 1.0, M_PI}) {
    const long n = 200;
    const SuppressionTolerance tol = half_suppression_tolerance(n, theta);
    const double odd = interference_amplitude(b, b * std::polar(1.0, theta), optimal_time(g, theta, n + 1), g);
    // timing: even-n amplitude at T_n (1 + r)
    const double T = optimal_time(g, theta, n) * (1.0 + tol.relative_timing);
    const double even = interference_amplitude(b, b * std::polar(1.0, theta), T, g);
    CHECK(even / odd == doctest::Approx(0.5).epsilon(2e-2));
    // symmetry: |B(1) - B(0)e^{iθ}| = r |B(0)|
    const double T_even = optimal_time(g, theta, n);
    const Complex b1 = b * std::polar(1.0, theta) + std::abs(b) * tol.relative_symmetry;
    const double even_s = interference_amplitude(b, b1, T_even, g);
    CHECK(even_s / odd == doctest::Approx(0.5).epsilon(2e-2));
  }
  CHECK_THROWS_AS(half_suppression_tolerance(3, 0.0), ValidationError);
}

namespace {

// Even and odd amplitudes with a smooth next-order background, sampled at
// durations computed from a trial gap integral.
std::vector<SeriesPoint> synthetic_series(double g_true, double g_trial, double theta, long n1, long n2) {
  std::vector<SeriesPoint> series;
  for (long n = n1; n <= n2; ++n) {
    const double T = optimal_time(g_trial, theta, n);
    const double a = std::abs(std::polar(1.0, -(theta + T * g_true)) - 1.0) * 0.24 / T + 1.0 / (T * T);
    series.push_back({n, T, a});
  }
  return series;
}

}  // namespace

TEST_CASE("beat refinement recovers a mis-stated gap integral") {
  const double g = 0.5665971450314967;
  const double theta = 0.0;
  auto probe = [&](double T) {
    return std::abs(std::polar(1.0, -(theta + T * g)) - 1.0) * 0.24 / T + 1.0 / (T * T);
  };
  for (double factor : {1.005, 0.995}) {
    const auto series = synthetic_series(g, factor * g, theta, 100, 1300);
    const BeatRefinement r = refine_time_by_beats(series, factor * g, theta, 500, probe);
    CHECK_FALSE(r.converged);
    CHECK(r.cusps.size() >= 2);
    CHECK(std::abs(r.g_corrected / g - 1.0) < 5e-4);
    CHECK(r.T_corrected == doctest::Approx(optimal_time(g, theta, 500)).epsilon(5e-4));
  }
  // exact g: no cusps, nothing to correct
  const BeatRefinement exact = refine_time_by_beats(synthetic_series(g, g, theta, 100, 1300), g, theta, 10, probe);
  CHECK(exact.converged);
  CHECK(exact.g_corrected == g);
  // a window holding only one beat cannot fix the period
  CHECK_THROWS_AS(refine_time_by_beats(synthetic_series(g, 1.005 * g, theta, 300, 600), 1.005 * g, theta, 10, probe),
                  InsufficientDataError);
}

TEST_CASE("evolved amplitude follows the e^{+iTg} interference orientation") {
  // Bloch vector precessing on a cone: constant unit gap, complex theta.
  const double alpha = 1.0, omega = 2.0;
  auto evaluator = [=](double s, Matrix& out) {
    const double x = std::sin(alpha) * std::cos(omega * s), y = std::sin(alpha) * std::sin(omega * s),
                 z = std::cos(alpha);
    out.resize(2, 2);
    out << 0.5 * (1.0 + z), Complex(0.5 * x, -0.5 * y), Complex(0.5 * x, 0.5 * y), 0.5 * (1.0 - z);
  };
  const HamiltonianModel model(2, evaluator, {}, 0, "cone");
  const SpectralTrajectory traj = build_trajectory(model, 1024);
  const BoundaryQuantity bq = boundary_quantity(model, traj, 1, 0);
  const double theta = estimate_theta(bq);
  REQUIRE(std::abs(std::sin(theta)) > 0.3);
  const double g = gap_integral(traj, 1).value;
  CHECK(g == doctest::Approx(1.0).epsilon(1e-12));

  int separated = 0;
  for (double T : {60.0, 71.3, 85.9, 97.0, 118.4, 133.3, 150.0}) {
    EvolveOptions options;
    options.tol = 1e-11;
    const EvolutionResult r = evolve(model, traj, T, options);
    const double measured = std::abs(r.overlaps(1));
    const double plus = interference_amplitude(bq.at_start, bq.at_end, T, g);
    const double minus = std::abs(bq.at_end * std::polar(1.0, -T * g) - bq.at_start) / T;
    CHECK(measured == doctest::Approx(plus).epsilon(0.05));
    if (std::abs(minus / measured - 1.0) > 0.2) ++separated;
  }
  CHECK(separated >= 3);
}
