#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "jdi/grid.hpp"

namespace jdi {

/// p(x, t) on a grid, values >= 0, with its trapezoid mass cached.
class DensityField {
 public:
  DensityField() = default;
  DensityField(Grid grid, std::vector<double> values, double time);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double time() const noexcept { return time_; }
  double mass() const noexcept { return mass_; }
  double max_value() const;

  /// Linear interpolation, zero outside the grid.
  double interpolate(double x) const;
  DensityField normalized() const;

  void write_csv(std::ostream& out) const;

 private:
  Grid grid_;
  std::vector<double> values_;
  double time_ = 0.0;
  double mass_ = 0.0;
};

/// p(x0, xt) as a |grid0| x |grid_t| row-major matrix. Row i is p0(x0_i) p(xt | x0_i).
class JointDensity {
 public:
  JointDensity() = default;
  JointDensity(Grid grid0, Grid grid_t, std::vector<double> values, double time, double mollifier_std);

  const Grid& grid0() const noexcept { return grid0_; }
  const Grid& grid_t() const noexcept { return grid_t_; }
  std::size_t rows() const noexcept { return grid0_.size(); }
  std::size_t cols() const noexcept { return grid_t_.size(); }
  double time() const noexcept { return time_; }
  double mollifier_std() const noexcept { return mollifier_std_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> row(std::size_t i) const noexcept { return {values_.data() + i * cols(), cols()}; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols() + j]; }

  double total_mass() const;
  /// Per-row trapezoid mass over xt, i.e. the x0 marginal at each node.
  std::vector<double> row_masses() const;
  /// x0 marginal as a density on grid0.
  DensityField marginal_x0() const;
  /// xt marginal as a density on grid_t.
  DensityField marginal_xt() const;

  void write_csv(std::ostream& out) const;

 private:
  Grid grid0_, grid_t_;
  std::vector<double> values_;
  double time_ = 0.0;
  double mollifier_std_ = 0.0;
};

/// Sum |p - q| dx by trapezoid; both fields must share a grid.
double l1_distance(const DensityField& p, const DensityField& q);

}  // namespace jdi
