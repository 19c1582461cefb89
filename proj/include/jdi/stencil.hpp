#pragma once

#include <span>
#include <vector>

namespace jdi {

/// Minimal-width central difference for the n-th derivative (1 <= n <= 8), unit spacing.
/// Even n: delta^n. Odd n: the centred first difference applied to delta^(n-1).
/// Coefficients run over offsets -radius .. radius.
struct Stencil {
  int order = 0;
  int radius = 0;
  std::vector<double> coeffs;
};

Stencil central_stencil(int n);

/// n-th derivative of f on a uniform grid, treating f as zero outside the grid.
std::vector<double> derivative_zero_extended(std::span<const double> f, int n, double dx);

/// n-th derivative where the stencil fits; NaN at nodes within `radius` of an end.
std::vector<double> derivative_interior(std::span<const double> f, int n, double dx);

/// First and second derivatives of a smooth field, second-order one-sided at the ends.
std::vector<double> first_derivative(std::span<const double> f, double dx);
std::vector<double> second_derivative(std::span<const double> f, double dx);

}  // namespace jdi
