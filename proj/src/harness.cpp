#include "adiabatic/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "adiabatic/timing.hpp"

namespace adiabatic {

namespace {

using nlohmann::json;

long parse_long(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long value = 0;
  try {
    value = std::stol(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ValidationError("bad " + what + " '" + text + "'");
  return value;
}

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw ValidationError("bad " + what + " '" + text + "'");
  return value;
}

std::pair<std::string, std::string> split_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw ValidationError("expected a range a..b, got '" + text + "'");
  return {text.substr(0, dots), text.substr(dots + 2)};
}

std::string fmt(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string short_fmt(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

template <typename T>
T get_checked(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("config key '") + key + "': " + e.what());
  }
}

// Rethrows with the row context prepended, keeping the error family.
[[noreturn]] void rethrow_with_context(const std::exception_ptr& error, const std::string& context) {
  try {
    std::rethrow_exception(error);
  } catch (const NumericError& e) {
    throw NumericError(context + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(context + ": " + e.what());
  } catch (const std::exception& e) {
    throw NumericError(context + ": " + e.what());
  }
}

struct SweepPoint {
  std::optional<long> n;
  double T;
};

}  // namespace

ModelSelection select_model(const std::string& model_spec, const std::string& schedule_spec) {
  auto qubits_from = [&](const std::string& prefix) {
    return static_cast<int>(parse_long(model_spec.substr(prefix.size()), "qubit count in model spec"));
  };
  if (model_spec.rfind("search:n=", 0) == 0) {
    const Schedule schedule = Schedule::parse(schedule_spec);
    const SearchModel search = search_hamiltonian(qubits_from("search:n="), schedule);
    return {model_spec, schedule.to_string(),
            reduce_search_to_2level(search).with_label(model_spec),
            schedule.vanishing_boundary_derivatives()};
  }
  if (model_spec.rfind("search-full:n=", 0) == 0) {
    const Schedule schedule = Schedule::parse(schedule_spec);
    const SearchModel search = search_hamiltonian(qubits_from("search-full:n="), schedule);
    return {model_spec, schedule.to_string(), search.model.with_label(model_spec),
            schedule.vanishing_boundary_derivatives()};
  }
  if (model_spec.rfind("tabulated:", 0) == 0) {
    const std::string path = model_spec.substr(10);
    if (path.empty()) throw ValidationError("tabulated model spec needs a path");
    return {model_spec, "-", tabulated_model(path).with_label(model_spec), 0};
  }
  throw ValidationError("unknown model spec '" + model_spec +
                        "' (expected search:n=<int>, search-full:n=<int>, tabulated:<path>)");
}

ParityFilter parse_parity(const std::string& text) {
  if (text == "both") return ParityFilter::Both;
  if (text == "even") return ParityFilter::Even;
  if (text == "odd") return ParityFilter::Odd;
  throw ValidationError("parity must be even, odd or both, got '" + text + "'");
}

Integrator parse_integrator(const std::string& text) {
  if (text == "magnus4") return Integrator::Magnus4;
  if (text == "midpoint") return Integrator::Midpoint;
  throw ValidationError("integrator must be magnus4 or midpoint, got '" + text + "'");
}

const char* integrator_name(Integrator scheme) {
  return scheme == Integrator::Magnus4 ? "magnus4" : "midpoint";
}

std::pair<long, long> parse_integer_range(const std::string& text) {
  const auto [a, b] = split_range(text);
  const std::pair<long, long> range{parse_long(a, "range start"), parse_long(b, "range end")};
  if (range.second < range.first) throw ValidationError("range '" + text + "' is empty");
  return range;
}

FitWindow parse_window(const std::string& text) {
  const auto [a, b] = split_range(text);
  FitWindow w{parse_double(a, "window start"), parse_double(b, "window end")};
  if (!(w.lo < w.hi)) throw ValidationError("fit window must satisfy lo < hi");
  return w;
}

SweepSpec SweepSpec::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("config must be a JSON object");
  static const std::set<std::string> known = {
      "model", "schedule", "m", "nu", "n_range", "parity", "stride", "T_list", "tol",
      "intervals", "output", "seed", "integrator", "fit_window", "asymptotic_factor"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw FormatError("unknown config key '" + item.key() + "'");
  }
  SweepSpec spec;
  if (j.contains("model")) spec.model = get_checked<std::string>(j, "model");
  if (j.contains("schedule")) spec.schedule = get_checked<std::string>(j, "schedule");
  if (j.contains("m")) spec.m = get_checked<int>(j, "m");
  if (j.contains("nu")) spec.nu = get_checked<int>(j, "nu");
  if (j.contains("n_range")) {
    const auto range = get_checked<std::vector<long>>(j, "n_range");
    if (range.size() != 2) throw FormatError("n_range must be [first, last]");
    spec.n_range = std::make_pair(range[0], range[1]);
  }
  if (j.contains("parity")) spec.parity = parse_parity(get_checked<std::string>(j, "parity"));
  if (j.contains("stride")) spec.stride = get_checked<long>(j, "stride");
  if (j.contains("T_list")) spec.T_list = get_checked<std::vector<double>>(j, "T_list");
  if (j.contains("tol")) spec.tol = get_checked<double>(j, "tol");
  if (j.contains("intervals")) spec.intervals = get_checked<int>(j, "intervals");
  if (j.contains("output")) spec.output = get_checked<std::string>(j, "output");
  if (j.contains("seed")) spec.seed = get_checked<std::uint64_t>(j, "seed");
  if (j.contains("integrator")) spec.scheme = parse_integrator(get_checked<std::string>(j, "integrator"));
  if (j.contains("fit_window")) {
    const auto w = get_checked<std::vector<double>>(j, "fit_window");
    if (w.size() != 2 || !(w[0] < w[1])) throw FormatError("fit_window must be [lo, hi] with lo < hi");
    spec.fit_window = FitWindow{w[0], w[1]};
  }
  if (j.contains("asymptotic_factor")) spec.asymptotic_factor = get_checked<double>(j, "asymptotic_factor");
  return spec;
}

SweepSpec SweepSpec::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

void SweepSpec::validate() const {
  if (n_range.has_value() == !T_list.empty()) {
    throw ValidationError("sweep needs exactly one of n_range and T_list");
  }
  if (n_range && n_range->second < n_range->first) throw ValidationError("n_range is empty");
  for (double T : T_list) {
    if (!(T > 0.0)) throw ValidationError("T_list entries must be positive");
  }
  if (!(tol >= 1e-12)) throw ValidationError("tol must be at least 1e-12");
  if (stride < 1) throw ValidationError("stride must be at least 1");
  if (nu < 1) throw ValidationError("nu must be at least 1");
  if (m && *m < 0) throw ValidationError("m must be non-negative");
  if (!(asymptotic_factor > 0.0)) throw ValidationError("asymptotic_factor must be positive");
}

int resolve_jobs(std::optional<int> requested) {
  if (requested) {
    if (*requested < 1) throw ValidationError("--jobs must be at least 1");
    return *requested;
  }
  if (const char* env = std::getenv("ADIA_JOBS"); env != nullptr && *env != '\0') {
    const long value = parse_long(env, "ADIA_JOBS");
    if (value < 1) throw ValidationError("ADIA_JOBS must be at least 1");
    return static_cast<int>(value);
  }
  const unsigned cores = std::thread::hardware_concurrency();
  return cores == 0 ? 1 : static_cast<int>(cores);
}

SweepResult run_sweep(const SweepSpec& spec, int jobs) {
  spec.validate();
  if (jobs < 1) throw ValidationError("jobs must be at least 1");
  const ModelSelection selection = select_model(spec.model, spec.schedule);
  const HamiltonianModel& model = selection.model;

  SweepResult result;
  result.spec = spec;
  result.schedule_label = selection.schedule_spec;
  result.m = spec.m.value_or(selection.default_m);
  if (spec.nu >= model.dimension()) throw ValidationError("nu exceeds the model dimension");

  const SpectralTrajectory traj = build_trajectory(model, spec.intervals);
  SweepSummary& summary = result.summary;
  summary.gap_integral = gap_integral(traj, spec.nu, 1e-9, &result.warnings).value;
  const BoundaryQuantity bq = boundary_quantity(model, traj, spec.nu, result.m);
  summary.theta = estimate_theta(bq);
  const double delta_S = symmetry_defect(bq, summary.theta);
  const std::vector<double> gaps = traj.gap(spec.nu);
  summary.min_gap = *std::min_element(gaps.begin(), gaps.end());
  summary.bound_coefficient = standard_bound(model, traj);
  summary.asymptotic_T = spec.asymptotic_factor / summary.min_gap;
  const double g = summary.gap_integral;
  const double theta = summary.theta;
  // checks the vanishing-derivative precondition once for the whole sweep
  predict_amplitude_general(model, traj, spec.nu, 1.0, result.m, theta, g);

  std::vector<SweepPoint> points;
  if (spec.n_range) {
    long kept = 0;
    for (long n = spec.n_range->first; n <= spec.n_range->second; ++n) {
      const bool even = n % 2 == 0;
      if ((spec.parity == ParityFilter::Even && !even) || (spec.parity == ParityFilter::Odd && even)) {
        continue;
      }
      if (kept++ % spec.stride != 0) continue;
      const double T = optimal_time(g, theta, n);
      if (!(T > 0.0)) {
        warn(&result.warnings, "n=" + std::to_string(n) + " gives T <= 0; skipped");
        continue;
      }
      points.push_back({n, T});
    }
  } else {
    for (double T : spec.T_list) {
      const long n = std::lround((T * g + theta) / M_PI);
      const bool even = n % 2 == 0;
      if ((spec.parity == ParityFilter::Even && !even) || (spec.parity == ParityFilter::Odd && even)) {
        continue;
      }
      std::optional<long> nearest;
      if (optimal_time(g, theta, n) > 0.0) nearest = n;
      points.push_back({nearest, T});
    }
  }
  if (points.empty()) throw ValidationError("sweep has no durations left after filtering");
  std::sort(points.begin(), points.end(),
            [](const SweepPoint& a, const SweepPoint& b) { return a.T < b.T; });

  EvolveOptions options;
  options.tol = spec.tol;
  options.scheme = spec.scheme;
  std::vector<EvolutionResult> evolved(points.size());
  std::vector<std::exception_ptr> failures(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        evolved[i] = evolve(model, traj, points[i].T, options);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(jobs, static_cast<int>(points.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (failures[i]) {
      std::ostringstream context;
      context << "row T=" << fmt(points[i].T);
      if (points[i].n) context << " (n=" << *points[i].n << ")";
      rethrow_with_context(failures[i], context.str());
    }
  }

  for (std::size_t i = 0; i < points.size(); ++i) {
    const EvolutionResult& r = evolved[i];
    SweepRow row;
    row.n = points[i].n;
    row.T = points[i].T;
    row.err_norm = r.error_norm;
    row.amp_abs = std::abs(r.overlaps(spec.nu));
    row.amp_pred = predict_amplitude_general(model, traj, spec.nu, row.T, result.m, theta, g).amplitude;
    row.bound_eq1 = summary.bound_coefficient / row.T;
    row.delta_S = delta_S;
    if (row.n) {
      row.delta_G = gap_defect(g, theta, *row.n, row.T);
      row.delta_T = timing_defect(optimal_time(g, theta, *row.n), row.T);
    }
    row.integrator_steps = r.diagnostics.steps;
    row.integrator_err = r.diagnostics.estimated_error;
    result.rows.push_back(row);
  }

  for (Parity parity : {Parity::Even, Parity::Odd}) {
    std::vector<std::pair<double, double>> series;
    std::vector<double> noise;
    for (const SweepRow& row : result.rows) {
      if (!row.n || parity_of(*row.n) != parity) continue;
      series.emplace_back(row.T, row.amp_abs);
      noise.push_back(row.integrator_err);
    }
    if (series.size() < 5) continue;  // single points and short lists carry no exponent
    try {
      ScalingFit fit = fit_power_law(above_noise_floor(series, noise),
                                     spec.fit_window.value_or(FitWindow{}), &result.warnings);
      (parity == Parity::Even ? summary.even_fit : summary.odd_fit) = std::move(fit);
    } catch (const InsufficientDataError& e) {
      warn(&result.warnings, std::string(parity_name(parity)) + "-n fit skipped: " + e.what());
    }
  }
  return result;
}

const char* const kSweepColumns =
    "model,schedule,m,nu,n,parity,T,err_norm,amp_abs,amp_pred,bound_eq1,delta_S,delta_G,delta_T,"
    "integrator_steps,integrator_err";

void write_sweep_csv(std::ostream& out, const SweepResult& result, bool timestamp) {
  const SweepSpec& spec = result.spec;
  const SweepSummary& summary = result.summary;
  if (timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out << "# generated_at=" << buf << "\n";
  }
  out << "# tol=" << fmt(spec.tol) << " intervals=" << spec.intervals
      << " integrator=" << integrator_name(spec.scheme) << " seed=" << spec.seed << "\n";
  out << "# gap_integral=" << fmt(summary.gap_integral) << " theta=" << fmt(summary.theta)
      << " min_gap=" << fmt(summary.min_gap) << " bound_coefficient=" << fmt(summary.bound_coefficient)
      << " asymptotic_T=" << fmt(summary.asymptotic_T) << "\n";
  out << kSweepColumns << "\n";
  for (const SweepRow& row : result.rows) {
    out << spec.model << ',' << result.schedule_label << ',' << result.m << ',' << spec.nu << ',';
    if (row.n) {
      out << *row.n << ',' << parity_name(parity_of(*row.n));
    } else {
      out << ",";
    }
    out << ',' << fmt(row.T) << ',' << fmt(row.err_norm) << ',' << fmt(row.amp_abs) << ','
        << fmt(row.amp_pred) << ',' << fmt(row.bound_eq1) << ',' << fmt(row.delta_S) << ','
        << fmt(row.delta_G) << ',' << fmt(row.delta_T) << ',' << row.integrator_steps << ','
        << fmt(row.integrator_err) << "\n";
  }
}

void write_sweep_summary(std::ostream& out, const SweepResult& result) {
  const SweepSummary& s = result.summary;
  out << "model " << result.spec.model << " schedule " << result.schedule_label << " m=" << result.m
      << " nu=" << result.spec.nu << " rows=" << result.rows.size() << "\n";
  out << "gap_integral=" << short_fmt(s.gap_integral) << " theta=" << short_fmt(s.theta)
      << " min_gap=" << short_fmt(s.min_gap) << "\n";
  out << "bound_eq1(T) = " << short_fmt(s.bound_coefficient) << " / T\n";
  out << "asymptotic window: T >= " << short_fmt(s.asymptotic_T) << " ("
      << short_fmt(result.spec.asymptotic_factor) << " / min_gap)\n";
  auto line = [&](const char* name, const std::optional<ScalingFit>& fit) {
    out << name << " exponent ";
    if (!fit) {
      out << "n/a\n";
      return;
    }
    out << short_fmt(fit->exponent) << " (points " << fit->data.size() << ", T in ["
        << short_fmt(fit->data.front().first) << ", " << short_fmt(fit->data.back().first)
        << "], residual_rms " << short_fmt(fit->residual_rms) << ")\n";
  };
  line("even", s.even_fit);
  line("odd", s.odd_fit);
  for (const std::string& w : result.warnings.messages) out << "warning: " << w << "\n";
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw ValidationError("CSV has no column '" + name + "'");
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  auto split = [](const std::string& text) {
    std::vector<std::string> cells;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!text.empty() && text.back() == ',') cells.emplace_back();
    return cells;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (table.header.empty()) {
      table.header = split(line);
      continue;
    }
    auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw FormatError("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) throw FormatError("CSV has no header");
  return table;
}

ToleranceConfig ToleranceConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("config must be a JSON object");
  static const std::set<std::string> known = {"model", "schedule", "m", "nu", "n_range", "stride",
                                              "tol", "intervals", "integrator", "defect"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw FormatError("unknown config key '" + item.key() + "'");
  }
  ToleranceConfig config;
  if (j.contains("model")) config.model = get_checked<std::string>(j, "model");
  if (j.contains("schedule")) config.schedule = get_checked<std::string>(j, "schedule");
  if (j.contains("m")) config.m = get_checked<int>(j, "m");
  if (j.contains("nu")) config.spec.nu = get_checked<int>(j, "nu");
  if (j.contains("n_range")) {
    const auto range = get_checked<std::vector<long>>(j, "n_range");
    if (range.size() != 2) throw FormatError("n_range must be [first, last]");
    config.spec.n_first = range[0];
    config.spec.n_last = range[1];
  }
  if (j.contains("stride")) config.spec.stride = get_checked<long>(j, "stride");
  if (j.contains("tol")) config.spec.tol = get_checked<double>(j, "tol");
  if (j.contains("intervals")) config.spec.intervals = get_checked<int>(j, "intervals");
  if (j.contains("integrator")) {
    config.spec.scheme = parse_integrator(get_checked<std::string>(j, "integrator"));
  }
  if (!j.contains("defect")) throw FormatError("tolerance config needs a defect block");
  const json& d = j.at("defect");
  if (!d.is_object()) throw FormatError("defect must be an object");
  for (const auto& item : d.items()) {
    static const std::set<std::string> defect_keys = {"type", "alpha", "scale", "seed"};
    if (!defect_keys.count(item.key())) throw FormatError("unknown defect key '" + item.key() + "'");
  }
  config.spec.defect = DefectSpec::parse(get_checked<std::string>(d, "type"));
  if (d.contains("alpha")) config.spec.defect.alpha = get_checked<double>(d, "alpha");
  if (d.contains("scale")) config.spec.defect.scale = get_checked<double>(d, "scale");
  if (d.contains("seed")) config.spec.defect.seed = get_checked<std::uint64_t>(d, "seed");
  return config;
}

}  // namespace adiabatic
