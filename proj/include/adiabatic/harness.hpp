#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "adiabatic/analysis.hpp"
#include "adiabatic/errors.hpp"
#include "adiabatic/model.hpp"
#include "adiabatic/propagator.hpp"

namespace adiabatic {

/// A model chosen by its config strings.
///  - `search:n=<qubits>`       search Hamiltonian restricted to its 2D invariant subspace
///  - `search-full:n=<qubits>`  the same Hamiltonian in the full 2^n space
///  - `tabulated:<path>`        a tabulated model file (schedule is ignored)
struct ModelSelection {
  std::string model_spec;
  std::string schedule_spec;  // "-" for tabulated models
  HamiltonianModel model;
  /// Vanishing boundary derivatives of the schedule, 0 for tabulated models.
  int default_m = 0;
};

ModelSelection select_model(const std::string& model_spec, const std::string& schedule_spec);

enum class ParityFilter { Both, Even, Odd };

ParityFilter parse_parity(const std::string& text);
Integrator parse_integrator(const std::string& text);
const char* integrator_name(Integrator scheme);

/// Inclusive "a..b" range of integers or reals.
std::pair<long, long> parse_integer_range(const std::string& text);
FitWindow parse_window(const std::string& text);

/// Everything needed to reproduce a sweep. Exactly one of the n-range and the
/// explicit T list is set.
struct SweepSpec {
  std::string model = "search:n=4";
  std::string schedule = "linear";
  std::optional<int> m;  // defaults to the schedule's vanishing order
  int nu = 1;
  std::optional<std::pair<long, long>> n_range;
  ParityFilter parity = ParityFilter::Both;
  long stride = 1;
  std::vector<double> T_list;
  double tol = 1e-10;
  int intervals = 1024;
  std::string output;
  std::uint64_t seed = 0;
  Integrator scheme = Integrator::Magnus4;
  /// Optional window for the summary fits; the full series otherwise.
  std::optional<FitWindow> fit_window;
  /// Predictor checks treat T >= asymptotic_factor / g_min as asymptotic.
  double asymptotic_factor = 10.0;

  /// Reads the JSON schema documented in docs/config.md. Unknown keys are errors.
  static SweepSpec from_json(const std::string& text);
  static SweepSpec from_file(const std::string& path);
  void validate() const;
};

struct SweepRow {
  std::optional<long> n;  // nearest cancelling index for explicit T; absent if that T_n <= 0
  double T = 0.0;
  double err_norm = 0.0;
  double amp_abs = 0.0;
  double amp_pred = 0.0;
  double bound_eq1 = 0.0;
  double delta_S = 0.0;
  double delta_G = 0.0;
  double delta_T = 0.0;
  long integrator_steps = 0;
  double integrator_err = 0.0;
};

struct SweepSummary {
  double gap_integral = 0.0;
  double theta = 0.0;
  double min_gap = 0.0;
  double bound_coefficient = 0.0;
  double asymptotic_T = 0.0;  // asymptotic_factor / min_gap
  std::optional<ScalingFit> even_fit;
  std::optional<ScalingFit> odd_fit;
};

struct SweepResult {
  SweepSpec spec;
  std::string schedule_label;
  int m = 0;
  std::vector<SweepRow> rows;  // ascending T
  SweepSummary summary;
  Warnings warnings;
};

/// Degree of parallelism: explicit value, then ADIA_JOBS, then the core count.
int resolve_jobs(std::optional<int> requested);

/// Builds the model and trajectory, evolves every requested T on `jobs`
/// threads, and fits the even and odd series. Rows are merged in T order, so
/// the output does not depend on `jobs`.
SweepResult run_sweep(const SweepSpec& spec, int jobs = 1);

/// Column contract of the sweep CSV.
extern const char* const kSweepColumns;

/// `timestamp` adds the single non-deterministic comment line.
void write_sweep_csv(std::ostream& out, const SweepResult& result, bool timestamp = true);
void write_sweep_summary(std::ostream& out, const SweepResult& result);

/// A parsed CSV with '#' comment lines skipped.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);

/// Tolerance sweep configuration: a SweepSpec-style model plus a defect block.
struct ToleranceConfig {
  std::string model = "search:n=4";
  std::string schedule = "linear";
  std::optional<int> m;
  ToleranceSpec spec;

  static ToleranceConfig from_json(const std::string& text);
};

/// CLI entry point. Returns 0, 2 (validation), 3 (numeric) or 64 (usage).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adiabatic
