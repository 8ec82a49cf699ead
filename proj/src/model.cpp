#include "adiabatic/model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace adiabatic {

HamiltonianModel::HamiltonianModel(int dimension, Evaluator evaluator,
                                   DerivativeEvaluator derivative, int transferred_index,
                                   std::string label)
    : dimension_(dimension),
      evaluator_(std::move(evaluator)),
      derivative_(std::move(derivative)),
      transferred_index_(transferred_index),
      label_(std::move(label)) {
  if (dimension_ < 1) throw ValidationError("model dimension must be positive");
  if (!evaluator_) throw ValidationError("model needs an evaluator");
  if (transferred_index_ < 0 || transferred_index_ >= dimension_) {
    throw ValidationError("transferred index out of range");
  }
}

void HamiltonianModel::evaluate(double s, Matrix& out) const {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw DomainError("Hamiltonian evaluated outside [0,1] at s=" + std::to_string(s));
  }
  if (out.rows() != dimension_ || out.cols() != dimension_) out.resize(dimension_, dimension_);
  evaluator_(s, out);
}

Matrix HamiltonianModel::operator()(double s) const {
  Matrix h(dimension_, dimension_);
  evaluate(s, h);
  return h;
}

bool HamiltonianModel::analytic_derivative(double s, int p, Matrix& out) const {
  if (!derivative_) return false;
  if (out.rows() != dimension_ || out.cols() != dimension_) out.resize(dimension_, dimension_);
  return derivative_(s, p, out);
}

HamiltonianModel HamiltonianModel::with_label(std::string label) const {
  HamiltonianModel copy = *this;
  copy.label_ = std::move(label);
  return copy;
}

HamiltonianModel HamiltonianModel::with_transferred_index(int index) const {
  return HamiltonianModel(dimension_, evaluator_, derivative_, index, label_);
}

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

enum class Stencil { Central, Forward, Backward };

// Plain p-th order difference quotient on the chosen stencil.
Matrix difference(const HamiltonianModel& model, double s, int p, double h, Stencil stencil) {
  const int n = model.dimension();
  Matrix acc = Matrix::Zero(n, n);
  Matrix value(n, n);
  for (int k = 0; k <= p; ++k) {
    double point = 0.0;
    double weight = binomial(p, k) * (((p - k) % 2 == 0) ? 1.0 : -1.0);
    switch (stencil) {
      case Stencil::Central:
        point = s + (k - 0.5 * p) * h;
        break;
      case Stencil::Forward:
        point = s + k * h;
        break;
      case Stencil::Backward:
        point = s - (p - k) * h;
        break;
    }
    point = std::clamp(point, 0.0, 1.0);
    model.evaluate(point, value);
    acc += weight * value;
  }
  return acc / std::pow(h, p);
}

}  // namespace

Matrix numeric_hamiltonian_derivative(const HamiltonianModel& model, double s, int p,
                                      Warnings* warnings) {
  if (p < 1) throw ValidationError("derivative order must be >= 1");
  if (p > 6) {
    warn(warnings, "numeric derivative of order " + std::to_string(p) +
                       " loses most significant digits to cancellation");
  }
  const double h = 1e-3 * std::max(1, p);
  const double reach = 0.5 * p * h;
  Stencil stencil = Stencil::Central;
  if (s - reach < 0.0) {
    stencil = Stencil::Forward;
  } else if (s + reach > 1.0) {
    stencil = Stencil::Backward;
  }
  const Matrix d0 = difference(model, s, p, h, stencil);
  const Matrix d1 = difference(model, s, p, h / 2, stencil);
  const Matrix d2 = difference(model, s, p, h / 4, stencil);
  if (stencil == Stencil::Central) {
    // error series in even powers of h
    const Matrix r0 = (4.0 * d1 - d0) / 3.0;
    const Matrix r1 = (4.0 * d2 - d1) / 3.0;
    return (16.0 * r1 - r0) / 15.0;
  }
  const Matrix r0 = 2.0 * d1 - d0;
  const Matrix r1 = 2.0 * d2 - d1;
  return (4.0 * r1 - r0) / 3.0;
}

Matrix hamiltonian_derivative(const HamiltonianModel& model, double s, int p,
                              Warnings* warnings) {
  if (p < 1) throw ValidationError("derivative order must be >= 1");
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("derivative requested outside [0,1]");
  Matrix out(model.dimension(), model.dimension());
  if (model.analytic_derivative(s, p, out)) return out;
  return numeric_hamiltonian_derivative(model, s, p, warnings);
}

// ---------------------------------------------------------------------------
// Search Hamiltonian

SearchModel search_hamiltonian(int n_qubits, const Schedule& schedule) {
  if (n_qubits < 1) throw ValidationError("search model needs at least one qubit");
  if (n_qubits > kMaxDenseQubits) {
    throw CapacityError("search model limited to " + std::to_string(kMaxDenseQubits) +
                        " qubits in dense storage");
  }
  const int dim = 1 << n_qubits;
  // P+ - P0 is the only matrix direction H moves along.
  auto direction = std::make_shared<Matrix>(Matrix::Constant(dim, dim, Complex(1.0 / dim, 0.0)));
  (*direction)(0, 0) -= 1.0;

  auto evaluator = [schedule, dim](double s, Matrix& out) {
    const double phi = schedule(s);
    out.setConstant(Complex(-(1.0 - phi) / dim, 0.0));
    for (int i = 0; i < dim; ++i) out(i, i) += 1.0;
    out(0, 0) -= phi;
  };
  auto derivative = [schedule, direction](double s, int p, Matrix& out) {
    double dphi = 0.0;
    try {
      dphi = schedule.derivative(s, p);
    } catch (const CapabilityError&) {
      return false;
    }
    out = dphi * (*direction);
    return true;
  };
  std::string label = "search:n=" + std::to_string(n_qubits);
  return SearchModel{n_qubits, schedule,
                     HamiltonianModel(dim, std::move(evaluator), std::move(derivative), 0,
                                      std::move(label))};
}

HamiltonianModel reduce_search_to_2level(const SearchModel& search) {
  const double dim = static_cast<double>(search.dimension());
  const double a = 1.0 / std::sqrt(dim);    // <0..0|+..+>
  const double b = std::sqrt(1.0 - 1.0 / dim);
  const Schedule schedule = search.schedule;

  // Basis (|m>, |r>) with |+..+> = a|m> + b|r>.
  Eigen::Matrix2cd direction;
  direction << a * a - 1.0, a * b, a * b, b * b;

  auto evaluator = [schedule, a, b](double s, Matrix& out) {
    const double phi = schedule(s);
    const double w = 1.0 - phi;
    out(0, 0) = 1.0 - w * a * a - phi;
    out(0, 1) = -w * a * b;
    out(1, 0) = -w * a * b;
    out(1, 1) = 1.0 - w * b * b;
  };
  auto derivative = [schedule, direction](double s, int p, Matrix& out) {
    double dphi = 0.0;
    try {
      dphi = schedule.derivative(s, p);
    } catch (const CapabilityError&) {
      return false;
    }
    out = dphi * direction;
    return true;
  };
  return HamiltonianModel(2, std::move(evaluator), std::move(derivative), 0,
                          search.model.label() + ":reduced");
}

HamiltonianModel perturbed_model(const HamiltonianModel& base, const Matrix& direction,
                                 double epsilon, std::function<double(double)> profile,
                                 std::function<double(double, int)> profile_derivative,
                                 std::string label) {
  if (direction.rows() != base.dimension() || direction.cols() != base.dimension()) {
    throw ValidationError("perturbation direction has the wrong dimension");
  }
  if (hermiticity_defect(direction) > 1e-13) {
    throw ValidationError("perturbation direction must be Hermitian");
  }
  auto evaluator = [base, direction, epsilon, profile](double s, Matrix& out) {
    base.evaluate(s, out);
    out += (epsilon * profile(s)) * direction;
  };
  HamiltonianModel::DerivativeEvaluator derivative;
  if (base.has_analytic_derivative()) {
    derivative = [base, direction, epsilon, profile_derivative](double s, int p, Matrix& out) {
      if (!base.analytic_derivative(s, p, out)) return false;
      out += (epsilon * profile_derivative(s, p)) * direction;
      return true;
    };
  }
  return HamiltonianModel(base.dimension(), std::move(evaluator), std::move(derivative),
                          base.transferred_index(), std::move(label));
}

}  // namespace adiabatic
