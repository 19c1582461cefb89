#include <fmt/format.h>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

#include "fft.hpp"
#include "jdi/density.hpp"
#include "jdi/error.hpp"

namespace jdi {

namespace {

using cplx = std::complex<double>;

// Adaptive Simpson on a complex integrand.
cplx simpson(const std::function<cplx(double)>& f, double a, double b, cplx fa, cplx fm, cplx fb, cplx whole,
             double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const cplx flm = f(lm), frm = f(rm);
  const cplx left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const cplx right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const cplx diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

cplx integrate(const std::function<cplx(double)>& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const cplx fa = f(a), fm = f(m), fb = f(b);
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40);
}

}  // namespace

DensityField additive_closed_form(const ChannelModel& model, const DensityField& p0, double t,
                                  const SpectralOptions& options) {
  const Grid& g = p0.grid();
  const double t0 = p0.time();
  if (!(t >= t0)) throw ConfigError(fmt::format("spectral solve needs t >= t0 ({} < {})", t, t0));
  std::string why;
  if (!is_state_homogeneous(model, g, {t0, 0.5 * (t0 + t), t}, &why))
    throw ModelError({"spectral solver needs a state-homogeneous model: " + why});

  const std::size_t n = g.size();
  const std::size_t N = detail::next_pow2(2 * n);
  const double dx = g.dx();
  const double x0 = g.x(0);
  const bool jumps = !model.jump_free();

  std::vector<cplx> data(N, 0.0);
  for (std::size_t j = 0; j < n; ++j) data[j] = g.weight(j) * p0[j];
  detail::complex_dft(data, -1);

  // exponent of the generator's symbol integrated over [t0, t]
  auto symbol = [&](double k, double tau) {
    const double a = model.drift(x0, tau), b = model.diffusion(x0, tau);
    cplx s = cplx(-0.5 * b * k * k, -a * k);
    if (jumps) {
      const double lambda = model.jump_rate(x0, tau);
      if (lambda != 0.0) s += lambda * (model.kernel.at(x0, tau).characteristic(k) - 1.0);
    }
    return s;
  };
  const double span = t - t0;
  for (std::size_t m = 0; m < N; ++m) {
    const double idx = m < N / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(N);
    const double k = 2.0 * std::numbers::pi * idx / (static_cast<double>(N) * dx);
    cplx E;
    if (span == 0.0) E = 0.0;
    else if (!model.time_dependent()) E = span * symbol(k, t0);
    else E = integrate([&](double tau) { return symbol(k, tau); }, t0, t, options.quadrature_tolerance);
    data[m] *= std::exp(E);
  }
  detail::complex_dft(data, +1);

  std::vector<double> v(n);
  double wrapped = 0.0;
  const double scale = 1.0 / (static_cast<double>(N) * dx);
  for (std::size_t m = 0; m < N; ++m) {
    const double y = data[m].real() * scale;
    if (m < n) v[m] = y;
    else wrapped += dx * std::fabs(y);
  }
  // mass near either boundary or beyond it means the periodic image is no longer negligible
  const std::size_t edge = std::max<std::size_t>(1, n / 20);
  double tail = wrapped;
  for (std::size_t j = 0; j < edge; ++j) tail += g.weight(j) * std::fabs(v[j]) + g.weight(n - 1 - j) * std::fabs(v[n - 1 - j]);
  if (tail > options.aliasing_limit)
    throw NumericalContractError(
        fmt::format("aliasing check failed: {} of the mass sits within 5% of the boundary or wrapped around", tail));
  for (auto& y : v) y = std::max(y, 0.0);
  return DensityField(g, std::move(v), t).normalized();
}

}  // namespace jdi
