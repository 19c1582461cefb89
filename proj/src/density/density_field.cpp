#include "jdi/density_field.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "jdi/error.hpp"

namespace jdi {

DensityField::DensityField(Grid grid, std::vector<double> values, double time)
    : grid_(std::move(grid)), values_(std::move(values)), time_(time) {
  if (values_.size() != grid_.size())
    throw NumericalContractError(fmt::format("density has {} values for a grid of {} nodes", values_.size(), grid_.size()));
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0)
      throw NumericalContractError(fmt::format("density value {} at node {} is negative or non-finite", values_[i], i));
    mass_ += grid_.weight(i) * values_[i];
  }
}

double DensityField::max_value() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double DensityField::interpolate(double x) const {
  if (x < grid_.x_min() || x > grid_.x_max()) return 0.0;
  const double s = (x - grid_.x_min()) / grid_.dx();
  auto i = static_cast<std::size_t>(s);
  if (i + 1 >= grid_.size()) return values_.back();
  const double f = s - static_cast<double>(i);
  return (1.0 - f) * values_[i] + f * values_[i + 1];
}

DensityField DensityField::normalized() const {
  if (!(mass_ > 0.0)) throw NumericalContractError("cannot normalize a density with zero mass");
  std::vector<double> v(values_);
  for (auto& y : v) y /= mass_;
  return DensityField(grid_, std::move(v), time_);
}

void DensityField::write_csv(std::ostream& out) const {
  out << "x,p\n";
  for (std::size_t i = 0; i < values_.size(); ++i) fmt::print(out, "{},{}\n", grid_.x(i), values_[i]);
}

JointDensity::JointDensity(Grid grid0, Grid grid_t, std::vector<double> values, double time, double mollifier_std)
    : grid0_(std::move(grid0)),
      grid_t_(std::move(grid_t)),
      values_(std::move(values)),
      time_(time),
      mollifier_std_(mollifier_std) {
  if (values_.size() != grid0_.size() * grid_t_.size())
    throw NumericalContractError("joint density size does not match its grids");
  for (double v : values_)
    if (!std::isfinite(v) || v < 0.0) throw NumericalContractError("joint density has a negative or non-finite entry");
}

std::vector<double> JointDensity::row_masses() const {
  std::vector<double> m(rows(), 0.0);
  for (std::size_t i = 0; i < rows(); ++i) {
    auto r = row(i);
    for (std::size_t j = 0; j < cols(); ++j) m[i] += grid_t_.weight(j) * r[j];
  }
  return m;
}

double JointDensity::total_mass() const {
  auto m = row_masses();
  double s = 0.0;
  for (std::size_t i = 0; i < rows(); ++i) s += grid0_.weight(i) * m[i];
  return s;
}

DensityField JointDensity::marginal_x0() const { return DensityField(grid0_, row_masses(), time_); }

DensityField JointDensity::marginal_xt() const {
  std::vector<double> m(cols(), 0.0);
  for (std::size_t i = 0; i < rows(); ++i) {
    const double w = grid0_.weight(i);
    auto r = row(i);
    for (std::size_t j = 0; j < cols(); ++j) m[j] += w * r[j];
  }
  return DensityField(grid_t_, std::move(m), time_);
}

void JointDensity::write_csv(std::ostream& out) const {
  out << "x0,xt,p\n";
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < cols(); ++j) fmt::print(out, "{},{},{}\n", grid0_.x(i), grid_t_.x(j), (*this)(i, j));
}

double l1_distance(const DensityField& p, const DensityField& q) {
  if (!(p.grid() == q.grid())) throw NumericalContractError("l1_distance needs densities on the same grid");
  double s = 0.0;
  for (std::size_t i = 0; i < p.grid().size(); ++i) s += p.grid().weight(i) * std::fabs(p[i] - q[i]);
  return s;
}

}  // namespace jdi
