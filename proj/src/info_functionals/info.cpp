#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "jdi/error.hpp"
#include "jdi/info.hpp"

namespace jdi {

void write_terms_csv(std::ostream& out, const std::vector<TermValue>& terms) {
  out << "term,value,clamp_mass,notes\n";
  for (const auto& t : terms) {
    std::string notes = t.notes;
    std::replace(notes.begin(), notes.end(), ',', ';');
    std::replace(notes.begin(), notes.end(), '\n', ' ');
    fmt::print(out, "{},{},{},{}\n", t.name, t.value, t.clamp_mass, notes);
  }
}

double entropy(const DensityField& p) {
  const Grid& g = p.grid();
  double h = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = p[i];
    if (v == 0.0) continue;
    h -= g.weight(i) * v * std::log(std::max(v, 1e-300));
  }
  return h;
}

namespace {

void check_b(std::span<const double> b, std::size_t n) {
  if (b.size() != n) throw NumericalContractError(fmt::format("b_field has {} entries for {} nodes", b.size(), n));
  for (std::size_t i = 0; i < n; ++i)
    if (b[i] < 0.0 || !std::isfinite(b[i]))
      throw EvaluationError(fmt::format("b_field must be finite and non-negative, got {} at node {}", b[i], i));
}

// Fisher-type integral of one (possibly unnormalised) row; p' by central differences.
double fisher_row(std::span<const double> p, const Grid& g, std::span<const double> b) {
  const std::size_t n = g.size();
  const double floor = kFloorRatio * *std::max_element(p.begin(), p.end());
  const double inv2dx = 1.0 / (2.0 * g.dx());
  double J = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] < floor || p[i] <= 0.0 || b[i] == 0.0) continue;
    const double left = i ? p[i - 1] : 0.0;
    const double right = i + 1 < n ? p[i + 1] : 0.0;
    const double d = (right - left) * inv2dx;
    J += g.weight(i) * b[i] * d * d / p[i];
  }
  return J;
}

double clamp_small_negative(double v) { return (v < 0.0 && v >= -1e-6) ? 0.0 : v; }

void check_joint(const JointDensity& joint) {
  const double m = joint.total_mass();
  if (std::fabs(m - 1.0) > 1e-5)
    throw NumericalContractError(fmt::format("marginal mismatch: joint mass is {} (expected 1 within 1e-5)", m));
}

}  // namespace

double fisher_type(const DensityField& p, std::span<const double> b_field) {
  check_b(b_field, p.grid().size());
  return fisher_row(p.values(), p.grid(), b_field);
}

double mutual_information(const JointDensity& joint) {
  check_joint(joint);
  const Grid& g0 = joint.grid0();
  const Grid& gt = joint.grid_t();
  const auto r = joint.row_masses();
  const auto m = joint.marginal_xt();
  double I = 0.0;
  for (std::size_t i = 0; i < joint.rows(); ++i) {
    if (!(r[i] > 0.0)) continue;
    auto row = joint.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < joint.cols(); ++j) {
      const double v = row[j];
      if (v <= 0.0 || m[j] <= 0.0) continue;
      // separate logs: r_i * m_j can underflow where the joint is still positive
      acc += gt.weight(j) * v * (std::log(v) - std::log(r[i]) - std::log(m[j]));
    }
    I += g0.weight(i) * acc;
  }
  return clamp_small_negative(I);
}

double mutual_fisher(const JointDensity& joint, std::span<const double> b_field) {
  check_b(b_field, joint.cols());
  const Grid& g0 = joint.grid0();
  const auto r = joint.row_masses();
  double conditional = 0.0;
  for (std::size_t i = 0; i < joint.rows(); ++i) {
    if (!(r[i] > 0.0)) continue;
    // J of the normalised row is J(row) / r_i; weighted by w_i r_i it is w_i J(row)
    conditional += g0.weight(i) * fisher_row(joint.row(i), joint.grid_t(), b_field);
  }
  const auto m = joint.marginal_xt();
  return clamp_small_negative(conditional - fisher_row(m.values(), joint.grid_t(), b_field));
}

Matrix score_field(const JointDensity& joint) {
  const std::size_t R = joint.rows(), C = joint.cols();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Matrix phi(R, C, nan);
  const double inv2dx = 1.0 / (2.0 * joint.grid_t().dx());
  for (std::size_t i = 0; i < R; ++i) {
    auto row = joint.row(i);
    const double floor = kFloorRatio * *std::max_element(row.begin(), row.end());
    if (!(floor > 0.0)) continue;
    for (std::size_t j = 1; j + 1 < C; ++j) {
      if (row[j - 1] < floor || row[j] < floor || row[j + 1] < floor) continue;
      // the row's normalisation cancels in the log difference
      phi(i, j) = (std::log(row[j + 1]) - std::log(row[j - 1])) * inv2dx;
    }
  }
  return phi;
}

double generalized_mmse(const JointDensity& joint, std::span<const double> b_field, const Matrix& target) {
  check_b(b_field, joint.cols());
  if (target.rows() != joint.rows() || target.cols() != joint.cols())
    throw NumericalContractError("target matrix shape does not match the joint density");
  const Grid& g0 = joint.grid0();
  const Grid& gt = joint.grid_t();
  double total = 0.0;
  for (std::size_t j = 0; j < joint.cols(); ++j) {
    double mass = 0.0, valid = 0.0, first = 0.0;
    for (std::size_t i = 0; i < joint.rows(); ++i) {
      const double w = g0.weight(i) * joint(i, j);
      mass += w;
      if (w > 0.0 && std::isfinite(target(i, j))) {
        valid += w;
        first += w * target(i, j);
      }
    }
    if (mass <= 0.0 || b_field[j] == 0.0) continue;
    if (valid <= 0.0) {
      if (mass >= 1e-10)
        throw NumericalContractError(fmt::format("empty support column at xt={} (mass {})", gt.x(j), mass));
      continue;
    }
    const double mean = first / valid;
    double var = 0.0;
    for (std::size_t i = 0; i < joint.rows(); ++i) {
      const double w = g0.weight(i) * joint(i, j);
      if (w > 0.0 && std::isfinite(target(i, j))) {
        const double d = target(i, j) - mean;
        var += w * d * d;
      }
    }
    total += gt.weight(j) * b_field[j] * var;
  }
  return total;
}

double mmse_x0(const JointDensity& joint) {
  Matrix target(joint.rows(), joint.cols());
  for (std::size_t i = 0; i < joint.rows(); ++i)
    for (std::size_t j = 0; j < joint.cols(); ++j) target(i, j) = joint.grid0().x(i);
  std::vector<double> ones(joint.cols(), 1.0);
  return generalized_mmse(joint, ones, target);
}

}  // namespace jdi
