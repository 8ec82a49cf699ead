#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "adiabatic/harness.hpp"
#include "adiabatic/timing.hpp"

namespace adiabatic {

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitUsage = 64;

const char* const kUsage =
    "usage: adia <command> [options]\n"
    "\n"
    "commands:\n"
    "  timings    cancelling durations T_n = (n*pi - theta)/g as CSV\n"
    "  evolve     one evolution, printed as a sweep CSV row\n"
    "  predict    leading-order amplitude predictions\n"
    "  sweep      evolve a series of durations and fit the even/odd exponents\n"
    "  tolerance  inject a defect and fit the resulting even-n exponent\n"
    "  fit        power-law fit of a sweep CSV column\n"
    "\n"
    "run 'adia <command> --help' for the options of a command\n";

struct ModelArgs {
  std::string model = "search:n=4";
  std::string schedule = "linear";
  int nu = 1;
  std::optional<int> m;
  int intervals = 1024;
};

void add_model_options(CLI::App& app, ModelArgs& args) {
  app.add_option("--model", args.model, "search:n=<q>, search-full:n=<q> or tabulated:<path>");
  app.add_option("--schedule", args.schedule, "linear, local:N=<int> or beta:m=<int>");
  app.add_option("--nu", args.nu, "excited track");
  app.add_option("--m", args.m, "boundary order (defaults to the schedule's)");
  app.add_option("--intervals", args.intervals, "trajectory grid intervals K");
}

struct Context {
  ModelSelection selection;
  SpectralTrajectory traj;
  int m;
  double g;
  double theta;
  BoundaryQuantity bq;
};

Context make_context(const ModelArgs& args, Warnings* warnings) {
  ModelSelection selection = select_model(args.model, args.schedule);
  if (args.nu < 1 || args.nu >= selection.model.dimension()) {
    throw ValidationError("nu is out of range for this model");
  }
  SpectralTrajectory traj = build_trajectory(selection.model, args.intervals);
  const int m = args.m.value_or(selection.default_m);
  const double g = gap_integral(traj, args.nu, 1e-9, warnings).value;
  BoundaryQuantity bq = boundary_quantity(selection.model, traj, args.nu, m);
  const double theta = estimate_theta(bq);
  return {std::move(selection), std::move(traj), m, g, theta, bq};
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

void print_warnings(std::ostream& err, const Warnings& warnings) {
  for (const std::string& w : warnings.messages) err << "warning: " << w << "\n";
}

// Writes to --output when given, to `out` otherwise.
template <typename Writer>
void emit(const std::string& path, std::ostream& out, Writer writer) {
  if (path.empty()) {
    writer(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw ValidationError("cannot write '" + path + "'");
  writer(file);
  if (!file) throw ValidationError("write to '" + path + "' failed");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

int cmd_timings(CLI::App& app, std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  ModelArgs model;
  std::string range;
  std::string output;
  add_model_options(app, model);
  app.add_option("--n", range, "n range a..b")->required();
  app.add_option("--output", output, "CSV path (stdout if omitted)");
  app.parse(args);

  Warnings warnings;
  const Context ctx = make_context(model, &warnings);
  const auto [first, last] = parse_integer_range(range);
  const TimingTable table = optimal_times(ctx.g, ctx.theta, first, last, model.nu, &warnings);
  const double delta_S = symmetry_defect(ctx.bq, ctx.theta);
  emit(output, out, [&](std::ostream& o) {
    o << "nu,n,parity,T,theta,gap_integral,delta_S\n";
    for (const TimingRow& row : table.rows) {
      o << table.nu << ',' << row.n << ',' << parity_name(row.parity) << ',' << fmt(row.T) << ','
        << fmt(table.theta) << ',' << fmt(table.gap_integral) << ',' << fmt(delta_S) << "\n";
    }
  });
  print_warnings(err, warnings);
  return 0;
}

int cmd_evolve(CLI::App& app, std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  ModelArgs model;
  std::optional<double> T;
  std::optional<long> n;
  double tol = 1e-10;
  std::string integrator = "magnus4";
  add_model_options(app, model);
  auto* t_opt = app.add_option("--T", T, "duration");
  auto* n_opt = app.add_option("--n", n, "use the cancelling duration T_n");
  t_opt->excludes(n_opt);
  app.add_option("--tol", tol, "amplitude tolerance (>= 1e-12)");
  app.add_option("--integrator", integrator, "magnus4 or midpoint");
  app.parse(args);
  if (!T && !n) throw ValidationError("evolve needs --T or --n");

  SweepSpec spec;
  spec.model = model.model;
  spec.schedule = model.schedule;
  spec.m = model.m;
  spec.nu = model.nu;
  spec.intervals = model.intervals;
  spec.tol = tol;
  spec.scheme = parse_integrator(integrator);
  if (T) {
    spec.T_list = {*T};
  } else {
    spec.n_range = std::make_pair(*n, *n);
  }
  const SweepResult result = run_sweep(spec, 1);
  write_sweep_csv(out, result, false);
  print_warnings(err, result.warnings);
  return 0;
}

int cmd_predict(CLI::App& app, std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  ModelArgs model;
  std::string range;
  std::vector<double> durations;
  std::string output;
  add_model_options(app, model);
  auto* n_opt = app.add_option("--n", range, "n range a..b");
  auto* t_opt = app.add_option("--T", durations, "durations")->delimiter(',');
  n_opt->excludes(t_opt);
  app.add_option("--output", output, "CSV path (stdout if omitted)");
  app.parse(args);
  if (range.empty() && durations.empty()) throw ValidationError("predict needs --n or --T");

  Warnings warnings;
  const Context ctx = make_context(model, &warnings);
  std::vector<std::pair<std::optional<long>, double>> points;
  if (!range.empty()) {
    const auto [first, last] = parse_integer_range(range);
    for (const TimingRow& row : optimal_times(ctx.g, ctx.theta, first, last, model.nu, &warnings).rows) {
      points.emplace_back(row.n, row.T);
    }
  } else {
    for (double T : durations) points.emplace_back(std::nullopt, T);
  }
  const double bound = standard_bound(ctx.selection.model, ctx.traj);
  emit(output, out, [&](std::ostream& o) {
    o << "nu,m,n,T,amp_pred,boundary_start,boundary_end,interference_factor,bound_eq1\n";
    for (const auto& [n, T] : points) {
      const Prediction p =
          predict_amplitude_general(ctx.selection.model, ctx.traj, model.nu, T, ctx.m, ctx.theta, ctx.g);
      o << model.nu << ',' << ctx.m << ',';
      if (n) o << *n;
      o << ',' << fmt(T) << ',' << fmt(p.amplitude) << ',' << fmt(p.boundary_start) << ','
        << fmt(p.boundary_end) << ',' << fmt(p.interference_factor) << ',' << fmt(bound / T) << "\n";
    }
  });
  print_warnings(err, warnings);
  return 0;
}

int cmd_sweep(CLI::App& app, std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::string config;
  std::optional<std::string> model, schedule, range, parity, output, integrator, window;
  std::optional<int> m, nu, intervals, jobs;
  std::optional<long> stride;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::vector<double> durations;
  app.add_option("--config", config, "JSON sweep spec");
  app.add_option("--model", model, "model spec");
  app.add_option("--schedule", schedule, "schedule spec");
  app.add_option("--m", m, "boundary order");
  app.add_option("--nu", nu, "excited track");
  app.add_option("--n", range, "n range a..b");
  app.add_option("--parity", parity, "even, odd or both");
  app.add_option("--stride", stride, "keep every stride-th n after the parity filter");
  app.add_option("--T", durations, "explicit durations")->delimiter(',');
  app.add_option("--tol", tol, "amplitude tolerance");
  app.add_option("--intervals", intervals, "trajectory grid intervals K");
  app.add_option("--output", output, "CSV path (stdout if empty)");
  app.add_option("--seed", seed, "seed recorded with the run");
  app.add_option("--integrator", integrator, "magnus4 or midpoint");
  app.add_option("--window", window, "fit window lo..hi in T");
  app.add_option("--jobs", jobs, "worker threads (default ADIA_JOBS, then core count)");
  app.parse(args);

  SweepSpec spec = config.empty() ? SweepSpec{} : SweepSpec::from_file(config);
  if (model) spec.model = *model;
  if (schedule) spec.schedule = *schedule;
  if (m) spec.m = *m;
  if (nu) spec.nu = *nu;
  if (range) {
    spec.n_range = parse_integer_range(*range);
    spec.T_list.clear();
  }
  if (!durations.empty()) {
    spec.T_list = durations;
    spec.n_range.reset();
  }
  if (parity) spec.parity = parse_parity(*parity);
  if (stride) spec.stride = *stride;
  if (tol) spec.tol = *tol;
  if (intervals) spec.intervals = *intervals;
  if (output) spec.output = *output;
  if (seed) spec.seed = *seed;
  if (integrator) spec.scheme = parse_integrator(*integrator);
  if (window) spec.fit_window = parse_window(*window);

  const SweepResult result = run_sweep(spec, resolve_jobs(jobs));
  if (spec.output.empty()) {
    write_sweep_csv(out, result);
    write_sweep_summary(err, result);
  } else {
    emit(spec.output, out, [&](std::ostream& o) { write_sweep_csv(o, result); });
    out << "wrote " << result.rows.size() << " rows to " << spec.output << "\n";
    write_sweep_summary(out, result);
  }
  return 0;
}

int cmd_tolerance(CLI::App& app, std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::string config;
  std::optional<std::string> model, schedule, range, defect, integrator;
  std::optional<int> m, nu, intervals;
  std::optional<long> stride;
  std::optional<double> tol, alpha, scale;
  std::optional<std::uint64_t> seed;
  std::string output;
  app.add_option("--config", config, "JSON tolerance spec");
  app.add_option("--model", model, "model spec");
  app.add_option("--schedule", schedule, "schedule spec");
  app.add_option("--m", m, "boundary order");
  app.add_option("--nu", nu, "excited track");
  app.add_option("--n", range, "n range a..b (even n are used)");
  app.add_option("--stride", stride, "every stride-th even n");
  app.add_option("--tol", tol, "amplitude tolerance");
  app.add_option("--intervals", intervals, "trajectory grid intervals K");
  app.add_option("--integrator", integrator, "magnus4 or midpoint");
  app.add_option("--defect", defect, "timing, gap, symmetry or derivative:p=<int>");
  app.add_option("--alpha", alpha, "defect magnitude scale * T^-alpha");
  app.add_option("--scale", scale, "defect magnitude prefactor");
  app.add_option("--seed", seed, "seed of the perturbation direction");
  app.add_option("--output", output, "CSV path (stdout if omitted)");
  app.parse(args);

  ToleranceConfig cfg;
  if (!config.empty()) {
    cfg = ToleranceConfig::from_json(read_file(config));
  } else if (!defect) {
    throw ValidationError("tolerance needs --config or --defect");
  }
  if (model) cfg.model = *model;
  if (schedule) cfg.schedule = *schedule;
  if (m) cfg.m = *m;
  if (nu) cfg.spec.nu = *nu;
  if (range) std::tie(cfg.spec.n_first, cfg.spec.n_last) = parse_integer_range(*range);
  if (stride) cfg.spec.stride = *stride;
  if (tol) cfg.spec.tol = *tol;
  if (intervals) cfg.spec.intervals = *intervals;
  if (integrator) cfg.spec.scheme = parse_integrator(*integrator);
  if (defect) {
    const DefectSpec parsed = DefectSpec::parse(*defect);
    cfg.spec.defect.kind = parsed.kind;
    cfg.spec.defect.order = parsed.order;
  }
  if (alpha) cfg.spec.defect.alpha = *alpha;
  if (scale) cfg.spec.defect.scale = *scale;
  if (seed) cfg.spec.defect.seed = *seed;

  const ModelSelection selection = select_model(cfg.model, cfg.schedule);
  cfg.spec.m = cfg.m.value_or(selection.default_m);
  Warnings warnings;
  const ToleranceResult result = tolerance_sweep(selection.model, cfg.spec, &warnings);
  const DefectSpec& d = result.defect;
  emit(output, out, [&](std::ostream& o) {
    o << "defect,alpha,scale,m,n,T,defect_magnitude,amplitude,integrator_err\n";
    for (const ToleranceRow& row : result.rows) {
      o << d.to_string() << ',' << fmt(d.alpha) << ',' << fmt(d.scale) << ',' << result.m << ','
        << row.n << ',' << fmt(row.T) << ',' << fmt(row.defect) << ',' << fmt(row.amplitude) << ','
        << fmt(row.integrator_error) << "\n";
    }
  });
  std::ostream& summary = output.empty() ? err : out;
  summary << "defect " << d.to_string() << " magnitude " << short_fmt(d.scale) << "*T^-"
          << short_fmt(d.alpha) << " m=" << result.m << ": even exponent "
          << short_fmt(result.fit.exponent) << " (points " << result.fit.data.size()
          << ", residual_rms " << short_fmt(result.fit.residual_rms) << "), order "
          << (result.survived ? "survives" : "degraded") << "\n";
  print_warnings(err, warnings);
  return 0;
}

int cmd_fit(CLI::App& app, std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::string input;
  std::string parity = "both";
  std::string window_text;
  std::string column = "amp_abs";
  app.add_option("--input", input, "sweep CSV")->required();
  app.add_option("--parity", parity, "even, odd or both");
  app.add_option("--window", window_text, "fit window lo..hi in T");
  app.add_option("--column", column, "amplitude column");
  app.parse(args);

  const ParityFilter filter = parse_parity(parity);
  std::ifstream in(input);
  if (!in) throw ValidationError("cannot open '" + input + "'");
  const CsvTable table = read_csv(in);
  const int t_col = table.column("T");
  const int a_col = table.column(column);
  const int p_col = table.column("parity");
  int noise_col = -1;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == "integrator_err") noise_col = static_cast<int>(i);
  }
  std::vector<std::pair<double, double>> series;
  std::vector<double> noise;
  for (const auto& row : table.rows) {
    const std::string& p = row[static_cast<std::size_t>(p_col)];
    if ((filter == ParityFilter::Even && p != "even") || (filter == ParityFilter::Odd && p != "odd")) {
      continue;
    }
    try {
      series.emplace_back(std::stod(row[static_cast<std::size_t>(t_col)]),
                          std::stod(row[static_cast<std::size_t>(a_col)]));
      noise.push_back(noise_col >= 0 ? std::stod(row[static_cast<std::size_t>(noise_col)]) : 0.0);
    } catch (const std::exception&) {
      throw FormatError("non-numeric value in '" + input + "'");
    }
  }
  const FitWindow window = window_text.empty() ? FitWindow{} : parse_window(window_text);
  Warnings warnings;
  const ScalingFit fit = fit_power_law(above_noise_floor(series, noise), window, &warnings);
  out << "exponent=" << short_fmt(fit.exponent) << " intercept=" << short_fmt(fit.intercept)
      << " residual_rms=" << short_fmt(fit.residual_rms) << " points=" << fit.data.size()
      << " T_range=" << short_fmt(fit.data.front().first) << ".." << short_fmt(fit.data.back().first)
      << "\n";
  print_warnings(err, warnings);
  return 0;
}

using Command = int (*)(CLI::App&, std::vector<std::string>&, std::ostream&, std::ostream&);

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  static const std::vector<std::pair<std::string, Command>> commands = {
      {"timings", cmd_timings}, {"evolve", cmd_evolve},       {"predict", cmd_predict},
      {"sweep", cmd_sweep},     {"tolerance", cmd_tolerance}, {"fit", cmd_fit}};
  if (args.empty() || args[0] == "--help" || args[0] == "-h") {
    (args.empty() ? err : out) << kUsage;
    return args.empty() ? kExitUsage : 0;
  }
  const auto found = std::find_if(commands.begin(), commands.end(),
                                  [&](const auto& c) { return c.first == args[0]; });
  if (found == commands.end()) {
    err << "unknown command '" << args[0] << "'\n\n" << kUsage;
    return kExitUsage;
  }
  CLI::App app("adia " + found->first, "adia " + found->first);
  // CLI11 consumes its argument vector from the back
  std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
  try {
    return found->second(app, rest, out, err);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace adiabatic
