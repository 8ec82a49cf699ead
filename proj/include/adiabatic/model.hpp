#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "adiabatic/errors.hpp"
#include "adiabatic/linalg.hpp"
#include "adiabatic/schedule.hpp"

namespace adiabatic {

/// A time-dependent Hermitian Hamiltonian H(s) on s ∈ [0,1] (ħ = 1, dimensionless).
///
/// The evaluator writes H(s) into a caller-owned matrix so hot loops can reuse
/// storage. An optional analytic derivative evaluator returns false for orders
/// it does not cover, in which case `hamiltonian_derivative` falls back to
/// Richardson-extrapolated finite differences.
class HamiltonianModel {
 public:
  using Evaluator = std::function<void(double s, Matrix& out)>;
  using DerivativeEvaluator = std::function<bool(double s, int p, Matrix& out)>;

  HamiltonianModel(int dimension, Evaluator evaluator, DerivativeEvaluator derivative = {},
                   int transferred_index = 0, std::string label = "model");

  int dimension() const { return dimension_; }
  int transferred_index() const { return transferred_index_; }
  const std::string& label() const { return label_; }
  bool has_analytic_derivative() const { return static_cast<bool>(derivative_); }

  void evaluate(double s, Matrix& out) const;
  Matrix operator()(double s) const;

  /// Analytic derivative if the model provides one for this order.
  bool analytic_derivative(double s, int p, Matrix& out) const;

  HamiltonianModel with_label(std::string label) const;
  HamiltonianModel with_transferred_index(int index) const;

 private:
  int dimension_;
  Evaluator evaluator_;
  DerivativeEvaluator derivative_;
  int transferred_index_;
  std::string label_;
};

/// H^{(p)}(s). Uses the model's analytic derivative when available, otherwise
/// central differences (one-sided near the boundaries) with step
/// h = 1e-3 * max(1, p) and two Richardson levels. Orders above 6 on the
/// numeric path add a precision warning.
Matrix hamiltonian_derivative(const HamiltonianModel& model, double s, int p,
                              Warnings* warnings = nullptr);

/// Numeric path only; exposed so it can be checked against analytic derivatives.
Matrix numeric_hamiltonian_derivative(const HamiltonianModel& model, double s, int p,
                                      Warnings* warnings = nullptr);

/// The adiabatic search Hamiltonian H = I - (1-φ)|+..+><+..+| - φ|0..0><0..0|.
struct SearchModel {
  int n_qubits;
  Schedule schedule;
  HamiltonianModel model;

  int dimension() const { return model.dimension(); }
  operator const HamiltonianModel&() const { return model; }
};

constexpr int kMaxDenseQubits = 12;

SearchModel search_hamiltonian(int n_qubits, const Schedule& schedule);

/// Restriction of the search Hamiltonian to span{|0..0>, |+..+>}, written in the
/// orthonormal basis (|0..0>, normalized remainder of |+..+>). The transferred
/// state never leaves this subspace, so dynamics match the full model.
HamiltonianModel reduce_search_to_2level(const SearchModel& model);

/// Loads a tabulated model. See docs/tabulated_model.md for the JSON schema.
HamiltonianModel tabulated_model(const std::filesystem::path& path);
HamiltonianModel tabulated_model_from_json(const std::string& json_text);

/// Samples H(s) on `intervals`+1 uniform points as a dense-mode tabulated file.
std::string tabulate_model_json(const HamiltonianModel& model, int intervals);

/// H(s) + ε·w(s)·V where w is a fixed polynomial profile. Used to inject
/// derivative and symmetry defects; `profile_derivative(s, p)` must return w^{(p)}(s).
HamiltonianModel perturbed_model(const HamiltonianModel& base, const Matrix& direction,
                                 double epsilon, std::function<double(double)> profile,
                                 std::function<double(double, int)> profile_derivative,
                                 std::string label);

}  // namespace adiabatic
