#pragma once

#include <cstddef>
#include <string>

namespace jdi {

/// Uniform node grid on [x_min, x_max] with n nodes (ends included).
class Grid {
 public:
  Grid() = default;
  Grid(double x_min, double x_max, std::size_t n);

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  std::size_t size() const noexcept { return n_; }
  double dx() const noexcept { return dx_; }
  double x(std::size_t i) const noexcept { return i + 1 == n_ ? x_max_ : x_min_ + static_cast<double>(i) * dx_; }
  /// Trapezoid weight of node i.
  double weight(std::size_t i) const noexcept { return (i == 0 || i + 1 == n_) ? 0.5 * dx_ : dx_; }

  bool operator==(const Grid& o) const { return x_min_ == o.x_min_ && x_max_ == o.x_max_ && n_ == o.n_; }
  std::string describe() const;

 private:
  double x_min_ = 0.0;
  double x_max_ = 1.0;
  std::size_t n_ = 0;
  double dx_ = 0.0;
};

}  // namespace jdi
