#include <doctest.h>

#include <cmath>
#include <random>

#include "adiabatic/propagator.hpp"
#include "adiabatic/timing.hpp"
#include "oracles.hpp"

using namespace adiabatic;

namespace {

Vector exp_apply(const Matrix& h, double t, const Vector& psi) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Vector phases(h.rows());
  for (int j = 0; j < h.rows(); ++j) phases(j) = std::polar(1.0, -t * es.eigenvalues()(j));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint() * psi;
}

// H(s) = A + sB + s^2 C with fixed random Hermitian A, B, C.
HamiltonianModel quadratic_model(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Matrix a = oracle::random_hermitian(n, rng);
  const Matrix b = oracle::random_hermitian(n, rng);
  const Matrix c = oracle::random_hermitian(n, rng);
  return HamiltonianModel(n, [=](double s, Matrix& out) { out = a + s * b + s * s * c; });
}

Vector unit_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Vector v(n);
  for (int j = 0; j < n; ++j) v(j) = Complex(d(rng), d(rng));
  return v / v.norm();
}

}  // namespace

TEST_CASE("constant Hamiltonian propagates exactly") {
  std::mt19937_64 rng(5);
  for (int n : {2, 3, 6}) {
    const Matrix h = oracle::random_hermitian(n, rng);
    const HamiltonianModel model(n, [h](double, Matrix& out) { out = h; });
    const Vector psi = unit_vector(n, 9);
    const Vector expected = exp_apply(h, 7.5, psi);
    for (Integrator scheme : {Integrator::Midpoint, Integrator::Magnus4}) {
      CHECK((propagate_fixed(model, 7.5, psi, 3, scheme) - expected).norm() < 1e-12);
    }
  }
}

TEST_CASE("fixed-step propagation agrees with an RK4 oracle") {
  for (int n : {2, 4}) {
    const HamiltonianModel model = quadratic_model(n, 21 + n);
    const Vector psi = unit_vector(n, 4);
    const Vector reference = oracle::rk4([&](double s) { return model(s); }, 20.0, psi, 40000);
    CHECK((propagate_fixed(model, 20.0, psi, 4096) - reference).norm() < 1e-9);
    CHECK((propagate_fixed(model, 20.0, psi, 65536, Integrator::Midpoint) - reference).norm() < 1e-7);
  }
}

TEST_CASE("observed convergence orders") {
  const HamiltonianModel model = quadratic_model(3, 8);
  const Vector psi = unit_vector(3, 1);
  const Vector reference = propagate_fixed(model, 15.0, psi, 1 << 16);
  auto order = [&](Integrator scheme, long coarse) {
    const double e1 = (propagate_fixed(model, 15.0, psi, coarse, scheme) - reference).norm();
    const double e2 = (propagate_fixed(model, 15.0, psi, 2 * coarse, scheme) - reference).norm();
    return std::log2(e1 / e2);
  };
  CHECK(order(Integrator::Midpoint, 256) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(order(Integrator::Magnus4, 128) == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("propagation is unitary and time reversible") {
  const SearchModel full = search_hamiltonian(4, Schedule::local_adiabatic(16));
  const Vector psi = unit_vector(16, 2);
  const double T = 300.0;
  for (Integrator scheme : {Integrator::Midpoint, Integrator::Magnus4}) {
    const Vector out = propagate_fixed(full.model, T, psi, 4000, scheme);
    CHECK(std::abs(out.norm() - 1.0) < 1e-12);
    // running -H(1-s) undoes the evolution step by step
    const HamiltonianModel back(16, [&](double s, Matrix& m) { m = -full.model(1.0 - s); });
    CHECK((propagate_fixed(back, T, out, 4000, scheme) - psi).norm() < 1e-11);
  }
}

TEST_CASE("evolve: completeness, convergence and error norm") {
  const HamiltonianModel reduced = reduce_search_to_2level(search_hamiltonian(4, Schedule::linear()));
  const SpectralTrajectory traj = build_trajectory(reduced, 1024);
  EvolveOptions options;
  options.tol = 1e-11;
  const EvolutionResult r = evolve(reduced, traj, 150.0, options);
  CHECK(r.T == 150.0);
  CHECK(r.overlaps.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.error_components(0) == Complex(0.0));
  CHECK(r.error_norm == doctest::Approx(std::abs(r.overlaps(1))).epsilon(1e-14));
  CHECK(r.error_norm == doctest::Approx(std::sqrt(1.0 - std::norm(r.overlaps(0)))).epsilon(1e-6));
  CHECK(r.diagnostics.estimated_error <= options.tol);
  CHECK(r.diagnostics.doublings >= 1);
  // an independent much finer run agrees within the reported tolerance
  const Vector fine = propagate_fixed(reduced, 150.0, traj.vector(0, 0), 8 * r.diagnostics.steps);
  const double fine_amp = std::abs((traj.vector(1, traj.intervals()).adjoint() * fine)(0, 0));
  CHECK(std::abs(fine_amp - std::abs(r.overlaps(1))) < 10.0 * options.tol);
  // and the ground-state error matches an Eigen projection of the final state
  CHECK(oracle::error_norm_against_ground(reduced(1.0), r.state) ==
        doctest::Approx(r.error_norm).epsilon(1e-8));
}

TEST_CASE("two-level reduction reproduces the full search dynamics") {
  for (int q : {2, 3, 4}) {
    const SearchModel full = search_hamiltonian(q, Schedule::local_adiabatic(1 << q));
    const HamiltonianModel reduced = reduce_search_to_2level(full);
    const SpectralTrajectory traj_full = build_trajectory(full.model, 256);
    const SpectralTrajectory traj_red = build_trajectory(reduced, 256);
    EvolveOptions options;
    options.tol = 1e-11;
    const EvolutionResult a = evolve(full.model, traj_full, 25.0, options);
    const EvolutionResult b = evolve(reduced, traj_red, 25.0, options);
    CHECK(std::abs(a.error_norm - b.error_norm) < 1e-7);
    CHECK(std::abs(std::abs(a.overlaps(1)) - std::abs(b.overlaps(1))) < 1e-7);
    CHECK(a.error_components.tail((1 << q) - 2).norm() < 1e-9);
  }
}

TEST_CASE("odd-n amplitude approaches twice the single-boundary term") {
  const HamiltonianModel reduced = reduce_search_to_2level(search_hamiltonian(4, Schedule::linear()));
  const SpectralTrajectory traj = build_trajectory(reduced, 1024);
  const double g = gap_integral(traj, 1).value;
  const double b = std::sqrt(15.0) / 16.0;
  for (long n : {301, 401}) {
    const double T = optimal_time(g, 0.0, n);
    const EvolutionResult r = evolve(reduced, traj, T);
    CHECK(std::abs(r.overlaps(1)) == doctest::Approx(2.0 * b / T).epsilon(0.2));
  }
}

TEST_CASE("evolve argument checks") {
  const HamiltonianModel reduced = reduce_search_to_2level(search_hamiltonian(2, Schedule::linear()));
  const SpectralTrajectory traj = build_trajectory(reduced, 64);
  CHECK_THROWS_AS(evolve(reduced, traj, 0.0), ValidationError);
  CHECK_THROWS_AS(evolve(reduced, traj, -3.0), ValidationError);
  EvolveOptions tight;
  tight.tol = 1e-13;
  CHECK_THROWS_AS(evolve(reduced, traj, 10.0, tight), ValidationError);
  EvolveOptions capped;
  capped.tol = 1e-12;
  capped.min_steps = 4;
  capped.max_steps = 16;
  CHECK_THROWS_AS(evolve(reduced, traj, 500.0, capped), NumericError);
  EvolveOptions bad_state;
  bad_state.initial = Vector::Zero(2);
  CHECK_THROWS_AS(evolve(reduced, traj, 10.0, bad_state), ValidationError);
  CHECK_THROWS_AS(propagate_fixed(reduced, 1.0, Vector::Ones(3), 10), ValidationError);
  EvolveOptions excited;
  excited.initial_track = 1;
  const EvolutionResult r = evolve(reduced, traj, 80.0, excited);
  CHECK(std::abs(r.overlaps(1)) > 0.99);
}
