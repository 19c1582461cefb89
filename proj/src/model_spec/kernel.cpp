#include "jdi/kernel.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

#include "jdi/error.hpp"

namespace jdi {

namespace {

constexpr double kTruncationScales = 8.0;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// E[(mu + c)^n] from the central moments of c.
template <class Central>
double shifted_moment(double mu, int n, Central central) {
  double sum = 0.0;
  for (int m = 0; m <= n; ++m) {
    const double cm = central(m);
    if (cm == 0.0) continue;
    sum += binomial(n, m) * std::pow(mu, n - m) * cm;
  }
  return sum;
}

}  // namespace

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "gaussian") return KernelFamily::gaussian;
  if (name == "laplace") return KernelFamily::laplace;
  if (name == "uniform") return KernelFamily::uniform;
  throw ConfigError(fmt::format("unknown jump kernel family '{}' (expected gaussian, laplace or uniform)", name));
}

std::string_view to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::laplace: return "laplace";
    case KernelFamily::uniform: return "uniform";
  }
  return "?";
}

double KernelShape::pdf(double xi) const {
  switch (family) {
    case KernelFamily::gaussian: {
      const double z = (xi - p1) / p2;
      return std::exp(-0.5 * z * z) / (p2 * std::sqrt(2.0 * std::numbers::pi));
    }
    case KernelFamily::laplace: return std::exp(-std::fabs(xi - p1) / p2) / (2.0 * p2);
    case KernelFamily::uniform: return (xi >= p1 && xi <= p2) ? 1.0 / (p2 - p1) : 0.0;
  }
  return 0.0;
}

double KernelShape::cdf(double xi) const {
  switch (family) {
    case KernelFamily::gaussian: return 0.5 * std::erfc(-(xi - p1) / (p2 * std::numbers::sqrt2));
    case KernelFamily::laplace:
      return xi < p1 ? 0.5 * std::exp((xi - p1) / p2) : 1.0 - 0.5 * std::exp(-(xi - p1) / p2);
    case KernelFamily::uniform:
      if (xi <= p1) return 0.0;
      if (xi >= p2) return 1.0;
      return (xi - p1) / (p2 - p1);
  }
  return 0.0;
}

double KernelShape::moment(int n) const {
  if (n < 0) throw EvaluationError("negative moment order");
  switch (family) {
    case KernelFamily::gaussian:
      return shifted_moment(p1, n, [s = p2](int m) {
        if (m % 2) return 0.0;
        double df = 1.0;  // (m-1)!!
        for (int k = m - 1; k > 1; k -= 2) df *= k;
        return df * std::pow(s, m);
      });
    case KernelFamily::laplace:
      return shifted_moment(p1, n, [s = p2](int m) {
        if (m % 2) return 0.0;
        double f = 1.0;
        for (int k = 2; k <= m; ++k) f *= k;
        return f * std::pow(s, m);
      });
    case KernelFamily::uniform: {
      // (hi^{n+1} - lo^{n+1}) / ((n+1)(hi-lo)) written as a sum to avoid cancellation
      double sum = 0.0;
      for (int k = 0; k <= n; ++k) sum += std::pow(p2, k) * std::pow(p1, n - k);
      return sum / (n + 1);
    }
  }
  return 0.0;
}

std::complex<double> KernelShape::characteristic(double k) const {
  using namespace std::complex_literals;
  switch (family) {
    case KernelFamily::gaussian: return std::exp(-1i * k * p1 - 0.5 * p2 * p2 * k * k);
    case KernelFamily::laplace: return std::exp(-1i * k * p1) / (1.0 + p2 * p2 * k * k);
    case KernelFamily::uniform: {
      const double h = 0.5 * (p2 - p1);
      const double c = 0.5 * (p1 + p2);
      const double a = k * h;
      const double sinc = std::fabs(a) < 1e-4 ? 1.0 - a * a / 6.0 : std::sin(a) / a;
      return std::exp(-1i * k * c) * sinc;
    }
  }
  return 0.0;
}

std::pair<double, double> KernelShape::support() const {
  if (family == KernelFamily::uniform) return {p1, p2};
  return {p1 - kTruncationScales * p2, p1 + kTruncationScales * p2};
}

double KernelShape::tail_mass() const {
  if (family == KernelFamily::uniform) return 0.0;
  auto [lo, hi] = support();
  return cdf(lo) + (1.0 - cdf(hi));
}

double KernelShape::sample(double u, double z) const {
  switch (family) {
    case KernelFamily::gaussian: return p1 + p2 * z;
    case KernelFamily::laplace: {
      const double v = u - 0.5;
      return p1 - p2 * std::copysign(1.0, v) * std::log1p(-2.0 * std::fabs(v));
    }
    case KernelFamily::uniform: return p1 + (p2 - p1) * u;
  }
  return 0.0;
}

JumpKernel::JumpKernel(KernelFamily family, ScalarField p1, ScalarField p2)
    : family_(family), p1_(std::move(p1)), p2_(std::move(p2)) {}

KernelShape JumpKernel::at(double x, double t) const {
  KernelShape k{family_, p1_(x, t), p2_(x, t)};
  if (family_ == KernelFamily::uniform) {
    if (!(k.p2 > k.p1))
      throw EvaluationError(fmt::format("uniform kernel needs hi > lo, got lo={} hi={} at x={} t={}", k.p1, k.p2, x, t));
  } else if (!(k.p2 > 0.0)) {
    throw EvaluationError(fmt::format("{} kernel scale must be > 0, got {} at x={} t={}", to_string(family_), k.p2, x, t));
  }
  return k;
}

}  // namespace jdi
