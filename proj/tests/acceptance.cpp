// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "adiabatic/analysis.hpp"
#include "adiabatic/harness.hpp"
#include "adiabatic/propagator.hpp"
#include "adiabatic/timing.hpp"

using namespace adiabatic;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

bool within(double x, double lo, double hi) { return x >= lo && x <= hi; }

std::map<std::string, SweepResult> sweeps;

const SweepResult& sweep(const std::string& name) {
  auto it = sweeps.find(name);
  if (it != sweeps.end()) return it->second;
  SweepSpec spec = SweepSpec::from_file(std::string(ADIA_SOURCE_DIR "/configs/") + name + ".json");
  return sweeps.emplace(name, run_sweep(spec, resolve_jobs(std::nullopt))).first->second;
}

std::vector<std::pair<double, double>> series(const SweepResult& r, Parity parity, long n_min = 0) {
  std::vector<std::pair<double, double>> out;
  std::vector<double> noise;
  for (const SweepRow& row : r.rows) {
    if (!row.n || parity_of(*row.n) != parity || *row.n < n_min) continue;
    out.emplace_back(row.T, row.amp_abs);
    noise.push_back(row.integrator_err);
  }
  return above_noise_floor(out, noise);
}

double exponent(const SweepResult& r, Parity parity, long n_min = 0) {
  return fit_power_law(series(r, parity, n_min)).exponent;
}

Outcome exponent_windows(const std::string& name, double even_lo, double even_hi, double odd_lo,
                         double odd_hi, long diagnostic_n) {
  const SweepResult& r = sweep(name);
  const double even = exponent(r, Parity::Even);
  const double odd = exponent(r, Parity::Odd);
  const bool pass = within(even, even_lo, even_hi) && within(odd, odd_lo, odd_hi);
  std::string detail = fmt("even %.3f in [%.1f, %.1f], ", even, even_lo, even_hi) +
                       fmt("odd %.3f in [%.1f, %.1f]", odd, odd_lo, odd_hi);
  if (!pass && diagnostic_n > 0) {
    detail += fmt("; restricted to n >= %.0f: even %.3f, odd %.3f", double(diagnostic_n),
                  exponent(r, Parity::Even, diagnostic_n), exponent(r, Parity::Odd, diagnostic_n));
  }
  return {pass, detail};
}

// Log-log interpolation of a series sorted by T.
double interpolate(const std::vector<std::pair<double, double>>& s, double T) {
  auto hi = std::lower_bound(s.begin(), s.end(), T,
                             [](const auto& p, double t) { return p.first < t; });
  if (hi == s.begin()) return hi->second;
  if (hi == s.end()) return s.back().second;
  auto lo = hi - 1;
  const double w = std::log(T / lo->first) / std::log(hi->first / lo->first);
  return std::exp((1 - w) * std::log(lo->second) + w * std::log(hi->second));
}

Outcome cross_order() {
  std::string detail;
  bool pass = true;
  const std::pair<const char*, const char*> pairs[] = {{"fig3_m0", "fig3_m1"}, {"fig3_m1", "fig3_m2"}};
  for (const auto& [lower, higher] : pairs) {
    const auto even = series(sweep(lower), Parity::Even);
    const auto odd = series(sweep(higher), Parity::Odd);
    const double lo = std::max(even.front().first, odd.front().first);
    const double hi = std::min(even.back().first, odd.back().first);
    double worst = 1.0;
    int compared = 0;
    for (const auto& [T, a] : odd) {
      if (T < lo || T > hi) continue;
      const double ratio = interpolate(even, T) / a;
      worst = std::max({worst, ratio, 1.0 / ratio});
      ++compared;
    }
    if (compared == 0 || worst > 3.0) pass = false;
    detail += std::string(detail.empty() ? "" : "; ") + lower + " even vs " + higher +
              fmt(" odd: worst ratio %.2f over %.0f points, T in [%.0f, %.0f]", worst, compared, lo, hi);
  }
  return {pass, detail};
}

Outcome predictor_agreement() {
  std::string detail;
  bool pass = true;
  for (const char* name : {"fig1", "fig3_m1", "fig3_m2"}) {
    const SweepResult& r = sweep(name);
    double worst = 0.0;
    double T_worst = 0.0;
    double T_from = 0.0;  // agreement holds for every odd row from here on
    for (const SweepRow& row : r.rows) {
      if (!row.n || parity_of(*row.n) != Parity::Odd || row.T < r.summary.asymptotic_T) continue;
      const double rel = std::abs(row.amp_abs - row.amp_pred) / row.amp_pred;
      if (rel > worst) {
        worst = rel;
        T_worst = row.T;
      }
      if (rel > 0.25) T_from = 0.0;
      else if (T_from == 0.0) T_from = row.T;
    }
    if (worst > 0.25) pass = false;
    detail += std::string(detail.empty() ? "" : "; ") + name +
              fmt(" m=%.0f worst %.3f at T=%.0f", r.m, worst, T_worst);
    if (worst > 0.25) detail += fmt(" (within 25%% for T >= %.0f)", T_from);
  }
  return {pass, detail + "; window T >= 10/min_gap"};
}

Outcome exact_identities() {
  bool pass = true;
  std::string detail;

  double factor = 0.0;
  for (const char* name : {"fig1", "fig2", "fig3_m1", "fig3_m2"}) {
    const SweepResult& r = sweep(name);
    for (long n = 2; n <= 1200; n += 2) {
      factor = std::max(factor, interference_factor(r.summary.theta,
                                                    optimal_time(r.summary.gap_integral, r.summary.theta, n),
                                                    r.summary.gap_integral));
    }
  }
  pass = pass && factor <= 1e-12;
  detail += fmt("even-n interference factor max %.1e", factor);

  // completeness and unitarity on the full 16-level model
  const SearchModel full = search_hamiltonian(4, Schedule::linear());
  const SpectralTrajectory traj = build_trajectory(full.model, 1024);
  double completeness = 0.0;
  double drift = 0.0;
  double gauge = 0.0;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::vector<Complex> phases;
  for (int v = 0; v < 16; ++v) phases.push_back(std::polar(1.0, angle(rng)));
  const SpectralTrajectory moved = traj.rephased(phases);
  for (double T : {40.0, 221.8, 505.0, 1000.0}) {
    const EvolutionResult r = evolve(full.model, traj, T);
    double total = std::norm(r.overlaps(0));
    const auto amps = transition_amplitudes(r, traj);
    for (const auto& [v, a] : amps) total += std::norm(a);
    completeness = std::max(completeness, std::abs(total - 1.0));
    drift = std::max(drift, std::abs(r.state.norm() - 1.0));
    const EvolutionResult m = evolve(full.model, moved, T);
    const auto moved_amps = transition_amplitudes(m, moved);
    for (const auto& [v, a] : amps) gauge = std::max(gauge, std::abs(std::abs(moved_amps.at(v)) - std::abs(a)));
  }
  // a long fixed-step run for drift
  const Vector long_run = propagate_fixed(full.model, 2000.0, traj.vector(0, 0), 1 << 20);
  drift = std::max(drift, std::abs(long_run.norm() - 1.0));
  pass = pass && completeness <= 1e-10 && drift <= 1e-12 && gauge <= 1e-10;
  detail += fmt(", completeness %.1e, norm drift %.1e, gauge %.1e", completeness, drift, gauge);

  double beta0 = 0.0;
  const Schedule b0 = Schedule::beta(0), lin = Schedule::linear();
  for (int k = 0; k <= 10000; ++k) {
    const double s = k / 10000.0;
    beta0 = std::max({beta0, std::abs(b0(s) - lin(s)), std::abs(b0.derivative(s, 1) - lin.derivative(s, 1))});
  }
  pass = pass && beta0 <= 1e-14;
  detail += fmt(", beta(0) vs linear %.1e", beta0);
  return {pass, detail};
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> duration(10.0, 300.0);
  const char* schedules[] = {"linear", "local", "beta:m=1", "beta:m=2"};
  double worst = 0.0;
  int pairs = 0;
  for (int q : {2, 3, 4}) {
    for (int i = 0; i < 10; ++i) {
      std::string name = schedules[rng() % 4];
      if (name == "local") name = "local:N=" + std::to_string(1 << q);
      const double T = duration(rng);
      const SearchModel full = search_hamiltonian(q, Schedule::parse(name));
      const HamiltonianModel reduced = reduce_search_to_2level(full);
      EvolveOptions options;
      options.tol = 1e-11;
      const double a = evolve(full.model, build_trajectory(full.model, 256), T, options).error_norm;
      const double b = evolve(reduced, build_trajectory(reduced, 256), T, options).error_norm;
      worst = std::max(worst, std::abs(a - b));
      ++pairs;
    }
  }
  return {worst <= 1e-7, fmt("max |error norm difference| %.1e over %.0f (schedule, T) pairs, N in {4, 8, 16}", worst, pairs)};
}

ToleranceResult tolerance_run(const char* name) {
  std::ifstream in(std::string(ADIA_SOURCE_DIR "/configs/") + name + ".json");
  std::stringstream text;
  text << in.rdbuf();
  const ToleranceConfig config = ToleranceConfig::from_json(text.str());
  const ModelSelection selection = select_model(config.model, config.schedule);
  ToleranceSpec spec = config.spec;
  spec.m = config.m.value_or(selection.default_m);
  return tolerance_sweep(selection.model, spec);
}

Outcome tolerance_model() {
  const double timing = tolerance_run("tolerance_timing").fit.exponent;
  const double gap = tolerance_run("tolerance_gap").fit.exponent;
  const double derivative = tolerance_run("tolerance_derivative").fit.exponent;
  const bool pass = timing <= -1.8 && gap >= -1.3 && derivative <= -2.8;
  return {pass, fmt("timing T^-1: %.3f <= -1.8, constant gap: %.3f >= -1.3, derivative T^-2 (m=1): %.3f <= -2.8",
                    timing, gap, derivative)};
}

Outcome beat_refinement() {
  const HamiltonianModel model = reduce_search_to_2level(search_hamiltonian(4, Schedule::linear()));
  const SpectralTrajectory traj = build_trajectory(model, 1024);
  const double g = gap_integral(traj, 1).value;
  const double theta = estimate_theta(boundary_quantity(model, traj, 1, 0));
  auto predicted = [&](double T) { return predict_amplitude_m0(model, traj, 1, T, theta, g).amplitude; };
  bool pass = true;
  std::string detail;
  for (double factor : {1.005, 0.995}) {
    std::vector<SeriesPoint> s;
    for (long n = 100; n <= 1300; ++n) {
      const double T = optimal_time(factor * g, theta, n);
      s.push_back({n, T, predicted(T)});
    }
    const BeatRefinement r = refine_time_by_beats(s, factor * g, theta, 400, predicted);
    const double error = std::abs(r.g_corrected / g - 1.0);
    pass = pass && error <= 5e-4;
    detail += std::string(detail.empty() ? "" : ", ") +
              fmt("g x %.3f -> relative error %.1e (%.0f cusps)", factor, error, double(r.cusps.size()));
  }
  return {pass, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"fig1_linear_exponents", [] { return exponent_windows("fig1", -2.2, -1.8, -1.1, -0.9, 100); }},
      {"fig2_local_exponents", [] { return exponent_windows("fig2", -2.2, -1.8, -1.1, -0.9, 100); }},
      {"fig3_beta1_exponents", [] { return exponent_windows("fig3_m1", -3.3, -2.7, -2.2, -1.8, 0); }},
      {"fig3_beta2_exponents", [] { return exponent_windows("fig3_m2", -4.4, -3.6, -3.3, -2.7, 0); }},
      {"cross_order_coincidence", cross_order},
      {"predictor_agreement", predictor_agreement},
      {"exact_identities", exact_identities},
      {"oracle_equivalence", oracle_equivalence},
      {"tolerance_model", tolerance_model},
      {"beat_refinement", beat_refinement},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = check();
    } catch (const std::exception& e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!outcome.pass) ++failures;
    std::printf("%s %s: %s [%.1fs]\n", outcome.pass ? "PASS" : "FAIL", name.c_str(), outcome.detail.c_str(),
                seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
