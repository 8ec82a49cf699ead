#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "adiabatic/model.hpp"
#include "adiabatic/spline.hpp"

namespace adiabatic {

namespace {

using nlohmann::json;

constexpr double kHermitianInputTolerance = 1e-8;
constexpr double kGridTolerance = 1e-9;
constexpr int kTransportSubsteps = 32;

Complex parse_complex(const json& value, const std::string& where) {
  if (value.is_number()) return {value.get<double>(), 0.0};
  if (value.is_array() && value.size() == 2 && value[0].is_number() && value[1].is_number()) {
    return {value[0].get<double>(), value[1].get<double>()};
  }
  throw FormatError(where + ": expected a number or a [re, im] pair");
}

// Checks that the grid is sorted, uniform, and spans [0, 1].
double parse_grid(const json& doc, std::vector<double>& grid) {
  if (!doc.contains("s_grid") || !doc["s_grid"].is_array()) {
    throw FormatError("tabulated model: missing array 's_grid'");
  }
  for (const auto& v : doc["s_grid"]) {
    if (!v.is_number()) throw FormatError("tabulated model: 's_grid' must hold numbers");
    grid.push_back(v.get<double>());
  }
  if (grid.size() < 2) {
    throw FormatError("tabulated model: at least two grid points are needed to interpolate");
  }
  const double step = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
  if (!(step > 0.0)) throw FormatError("tabulated model: 's_grid' must be increasing");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double d = grid[k] - grid[k - 1];
    if (!(d > 0.0)) throw FormatError("tabulated model: 's_grid' is not sorted");
    if (std::abs(d - step) > kGridTolerance) {
      throw FormatError("tabulated model: 's_grid' is not uniform");
    }
  }
  if (std::abs(grid.front()) > kGridTolerance || std::abs(grid.back() - 1.0) > kGridTolerance) {
    throw FormatError("tabulated model: 's_grid' must start at 0 and end at 1");
  }
  return step;
}

HamiltonianModel spline_model(std::vector<Matrix> samples, double step, int transferred,
                              std::string label) {
  const int dim = static_cast<int>(samples.front().rows());
  auto spline = std::make_shared<const UniformCubicSpline<Matrix>>(0.0, step, std::move(samples));
  auto evaluator = [spline](double s, Matrix& out) {
    out = spline->evaluate(s, 0);
    // splined entries stay Hermitian up to round-off; restore exactly
    out = (0.5 * (out + out.adjoint())).eval();
  };
  auto derivative = [spline](double s, int p, Matrix& out) {
    out = spline->evaluate(s, p);
    out = (0.5 * (out + out.adjoint())).eval();
    return true;
  };
  return HamiltonianModel(dim, std::move(evaluator), std::move(derivative), transferred,
                          std::move(label));
}

std::vector<Matrix> parse_dense(const json& data, std::size_t points) {
  if (!data.is_array() || data.size() != points) {
    throw FormatError("tabulated model: dense 'data' needs one matrix per grid point");
  }
  std::vector<Matrix> samples;
  samples.reserve(points);
  int dim = -1;
  for (std::size_t k = 0; k < points; ++k) {
    const json& rows = data[k];
    if (!rows.is_array() || rows.empty()) throw FormatError("tabulated model: empty matrix");
    const int n = static_cast<int>(rows.size());
    if (dim < 0) dim = n;
    if (n != dim) throw FormatError("tabulated model: matrix dimension changes along the grid");
    Matrix h(n, n);
    for (int i = 0; i < n; ++i) {
      if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != n) {
        throw FormatError("tabulated model: matrix rows must be square");
      }
      for (int j = 0; j < n; ++j) {
        h(i, j) = parse_complex(rows[i][j], "tabulated model: entry");
      }
    }
    const double defect = hermiticity_defect(h);
    if (defect > kHermitianInputTolerance) {
      std::ostringstream msg;
      msg << "tabulated model: matrix at grid index " << k << " is not Hermitian (defect "
          << defect << ")";
      throw ValidationError(msg.str());
    }
    samples.push_back(0.5 * (h + h.adjoint()));
  }
  return samples;
}

// Spectral mode: energies E_v(s) and couplings <v|dH/ds|0>(s). Rebuilds a
// lab-frame H(s) = W(s) diag(E(s)) W(s)^dagger whose parallel-transported
// eigenbasis W obeys dW/ds = W Γ, Γ_{v0} = <v|H'|0>/(E_0 - E_v), Γ_{0v} = -conj(Γ_{v0}).
// Couplings among excited states are taken to be zero.
std::vector<Matrix> parse_spectral(const json& data, std::size_t points, double step) {
  if (!data.is_object() || !data.contains("energies") || !data.contains("couplings")) {
    throw FormatError("tabulated model: spectral 'data' needs 'energies' and 'couplings'");
  }
  const json& energies = data["energies"];
  const json& couplings = data["couplings"];
  if (!energies.is_array() || energies.size() != points || !couplings.is_array() ||
      couplings.size() != points) {
    throw FormatError("tabulated model: spectral arrays need one entry per grid point");
  }
  const int dim = static_cast<int>(energies[0].size());
  if (dim < 2) throw FormatError("tabulated model: spectral mode needs at least two levels");

  std::vector<RealVector> e_samples;
  std::vector<Vector> c_samples;
  for (std::size_t k = 0; k < points; ++k) {
    if (!energies[k].is_array() || static_cast<int>(energies[k].size()) != dim) {
      throw FormatError("tabulated model: energy rows must all have the same length");
    }
    if (!couplings[k].is_array() || static_cast<int>(couplings[k].size()) != dim - 1) {
      throw FormatError("tabulated model: couplings need N-1 entries (levels 1..N-1)");
    }
    RealVector e(dim);
    for (int v = 0; v < dim; ++v) {
      if (!energies[k][v].is_number()) throw FormatError("tabulated model: energy not a number");
      e(v) = energies[k][v].get<double>();
    }
    Vector c = Vector::Zero(dim);
    for (int v = 1; v < dim; ++v) c(v) = parse_complex(couplings[k][v - 1], "coupling");
    e_samples.push_back(e);
    c_samples.push_back(c);
  }
  const UniformCubicSpline<RealVector> e_spline(0.0, step, e_samples);
  const UniformCubicSpline<Vector> c_spline(0.0, step, c_samples);

  auto generator = [&](double s) {
    const RealVector e = e_spline.evaluate(s);
    const Vector c = c_spline.evaluate(s);
    Matrix gamma = Matrix::Zero(dim, dim);
    for (int v = 1; v < dim; ++v) {
      const double gap = e(0) - e(v);
      if (std::abs(gap) <= 1e-12) {
        if (std::abs(c(v)) > 1e-12) {
          throw ValidationError("tabulated model: coupled level degenerate with level 0");
        }
        continue;
      }
      gamma(v, 0) = c(v) / gap;
      gamma(0, v) = -std::conj(gamma(v, 0));
    }
    return gamma;
  };

  std::vector<Matrix> samples;
  samples.reserve(points);
  Matrix basis = Matrix::Identity(dim, dim);
  Eigen::SelfAdjointEigenSolver<Matrix> solver;
  for (std::size_t k = 0; k < points; ++k) {
    if (k > 0) {
      const double h = step / kTransportSubsteps;
      for (int j = 0; j < kTransportSubsteps; ++j) {
        const double mid = std::min(1.0, (k - 1) * step + (j + 0.5) * h);
        // Γ is anti-Hermitian, so iΓ is Hermitian and exp(hΓ) = V exp(-i h λ) V^dagger
        const Matrix hermitian = Complex(0.0, 1.0) * generator(mid);
        solver.compute(hermitian);
        const Vector phases =
            (Complex(0.0, -h) * solver.eigenvalues().cast<Complex>()).array().exp();
        basis = basis * (solver.eigenvectors() * phases.asDiagonal() *
                         solver.eigenvectors().adjoint());
      }
    }
    const RealVector& e = e_samples[k];
    samples.push_back(basis * e.cast<Complex>().asDiagonal() * basis.adjoint());
  }
  return samples;
}

}  // namespace

HamiltonianModel tabulated_model_from_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("tabulated model: invalid JSON: ") + e.what());
  }
  std::vector<double> grid;
  const double step = parse_grid(doc, grid);
  const std::string mode = doc.value("mode", std::string("dense"));
  if (!doc.contains("data")) throw FormatError("tabulated model: missing 'data'");
  const int transferred = doc.value("transferred_index", 0);
  std::string label = doc.value("label", std::string("tabulated"));

  std::vector<Matrix> samples;
  if (mode == "dense") {
    samples = parse_dense(doc["data"], grid.size());
  } else if (mode == "spectral") {
    if (transferred != 0) {
      throw FormatError("tabulated model: spectral mode couples to level 0; transferred_index must be 0");
    }
    samples = parse_spectral(doc["data"], grid.size(), step);
  } else {
    throw FormatError("tabulated model: unknown mode '" + mode + "'");
  }
  if (transferred < 0 || transferred >= samples.front().rows()) {
    throw FormatError("tabulated model: transferred_index out of range");
  }
  return spline_model(std::move(samples), step, transferred, std::move(label));
}

HamiltonianModel tabulated_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open tabulated model file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return tabulated_model_from_json(buffer.str());
}

std::string tabulate_model_json(const HamiltonianModel& model, int intervals) {
  if (intervals < 1) throw ValidationError("tabulation needs at least one interval");
  json doc;
  doc["label"] = model.label();
  doc["mode"] = "dense";
  doc["transferred_index"] = model.transferred_index();
  json grid = json::array();
  json data = json::array();
  for (int k = 0; k <= intervals; ++k) {
    const double s = static_cast<double>(k) / intervals;
    grid.push_back(s);
    const Matrix h = model(s);
    json rows = json::array();
    for (int i = 0; i < h.rows(); ++i) {
      json row = json::array();
      for (int j = 0; j < h.cols(); ++j) row.push_back({h(i, j).real(), h(i, j).imag()});
      rows.push_back(row);
    }
    data.push_back(rows);
  }
  doc["s_grid"] = grid;
  doc["data"] = data;
  return doc.dump();
}

}  // namespace adiabatic
