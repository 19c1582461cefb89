#include "jdi/stencil.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

#include "jdi/error.hpp"

namespace jdi {

Stencil central_stencil(int n) {
  if (n < 1 || n > 8) throw NumericalContractError(fmt::format("derivative order {} outside 1..8", n));
  const int even = n - (n % 2);
  // delta^even: alternating binomial coefficients on offsets -even/2 .. even/2
  std::vector<double> d(even + 1);
  for (int k = 0; k <= even; ++k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (even - k + i) / i;
    d[k] = (k % 2 == 0 ? 1.0 : -1.0) * c;
  }
  Stencil s;
  s.order = n;
  if (n % 2 == 0) {
    s.radius = even / 2;
    s.coeffs = std::move(d);
    return s;
  }
  s.radius = even / 2 + 1;
  s.coeffs.assign(2 * s.radius + 1, 0.0);
  // (D0 g)_i = (g_{i+1} - g_{i-1}) / 2
  for (int k = 0; k <= even; ++k) {
    s.coeffs[k + 2] += 0.5 * d[k];
    s.coeffs[k] -= 0.5 * d[k];
  }
  return s;
}

std::vector<double> derivative_zero_extended(std::span<const double> f, int n, double dx) {
  const Stencil s = central_stencil(n);
  const long N = static_cast<long>(f.size());
  const double scale = 1.0 / std::pow(dx, n);
  std::vector<double> out(f.size(), 0.0);
  for (long i = 0; i < N; ++i) {
    double acc = 0.0;
    for (int k = -s.radius; k <= s.radius; ++k) {
      const long j = i + k;
      if (j >= 0 && j < N) acc += s.coeffs[k + s.radius] * f[j];
    }
    out[i] = acc * scale;
  }
  return out;
}

std::vector<double> derivative_interior(std::span<const double> f, int n, double dx) {
  const Stencil s = central_stencil(n);
  const long N = static_cast<long>(f.size());
  const double scale = 1.0 / std::pow(dx, n);
  std::vector<double> out(f.size(), std::numeric_limits<double>::quiet_NaN());
  for (long i = s.radius; i + s.radius < N; ++i) {
    double acc = 0.0;
    for (int k = -s.radius; k <= s.radius; ++k) acc += s.coeffs[k + s.radius] * f[i + k];
    out[i] = acc * scale;
  }
  return out;
}

std::vector<double> first_derivative(std::span<const double> f, double dx) {
  const std::size_t n = f.size();
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
  return d;
}

std::vector<double> second_derivative(std::span<const double> f, double dx) {
  const std::size_t n = f.size();
  std::vector<double> d(n);
  const double h2 = dx * dx;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
  d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
  d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
  return d;
}

}  // namespace jdi
