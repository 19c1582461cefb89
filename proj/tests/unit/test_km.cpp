#include <cmath>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "jdi/error.hpp"
#include "jdi/kramers_moyal.hpp"
#include "jdi/stencil.hpp"

using testing::model;

namespace {

std::vector<double> schedule(double dt, std::size_t steps) {
  std::vector<double> s(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) s[k] = k * dt;
  return s;
}

}  // namespace

TEST_CASE("central stencils differentiate polynomials exactly") {
  for (int n = 1; n <= 8; ++n) {
    const auto s = jdi::central_stencil(n);
    CHECK(static_cast<int>(s.coeffs.size()) == 2 * s.radius + 1);
    // sum_k c_k k^m = n! for m = n, 0 for m < n
    for (int m = 0; m <= n; ++m) {
      double acc = 0.0;
      for (int k = -s.radius; k <= s.radius; ++k) acc += s.coeffs[k + s.radius] * std::pow(k, m);
      double fact = 1.0;
      for (int i = 2; i <= n; ++i) fact *= i;
      CHECK(acc == doctest::Approx(m == n ? fact : 0.0).epsilon(1e-12));
    }
  }
  CHECK_THROWS(jdi::central_stencil(9));
}

TEST_CASE("derivatives of smooth fields") {
  jdi::Grid g(-3, 3, 601);
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::sin(g.x(i));
  auto d1 = jdi::first_derivative(f, g.dx());
  auto d2 = jdi::second_derivative(f, g.dx());
  auto d3 = jdi::derivative_interior(f, 3, g.dx());
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(d1[i] == doctest::Approx(std::cos(g.x(i))).epsilon(1e-3).scale(1));
    CHECK(d2[i] == doctest::Approx(-std::sin(g.x(i))).epsilon(1e-3).scale(1));
  }
  CHECK(std::isnan(d3[0]));
  CHECK(d3[300] == doctest::Approx(-std::cos(0.0)).epsilon(1e-3));
}

TEST_CASE("pure drift increments are exact") {
  auto e = jdi::simulate_ensemble(model("1", "0", "0"), schedule(1e-3, 20), 2000, 1e-3, 3);
  auto pm = jdi::estimate_km(e, 2, 8, 0, 20);
  for (std::size_t b = 0; b < pm.bins(); ++b) {
    if (!pm.usable[b]) continue;
    CHECK(std::fabs(pm.estimate(b, 1) - 1.0) <= 1e-9);
    CHECK(pm.estimate(b, 2) == doctest::Approx(1e-3).epsilon(1e-6));
  }
}

TEST_CASE("Brownian increments recover b and the fourth-moment scaling") {
  auto e = jdi::simulate_ensemble(model("0", "1", "0"), schedule(1e-3, 1), 100000, 1e-3, 4);
  auto pm = jdi::estimate_km(e, 4, 8, 0);
  const auto cb = pm.central_bin();
  REQUIRE(pm.usable[cb]);
  CHECK(pm.estimate(cb, 2) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(pm.estimate(cb, 4) <= 0.01);
  CHECK(pm.dt_used == doctest::Approx(1e-3));
}

TEST_CASE("pure jump model recovers B_3") {
  auto e = jdi::simulate_ensemble(model("0", "0", "3", "gaussian", "1", "2"), schedule(1e-3, 100), 100000, 1e-3, 5);
  auto pm = jdi::estimate_km(e, 3, 8, 0, 100);
  const auto cb = pm.central_bin();
  CHECK(pm.estimate(cb, 3) == doctest::Approx(39.0).epsilon(0.15));
}

TEST_CASE("spurious third moments of a diffusion shrink with dt") {
  // E[dX^3]/dt = 3 a b dt + O(dt^2): a pure finite-dt artefact
  const auto m = model("1", "1", "0");
  auto coarse = jdi::simulate_ensemble(m, schedule(1e-3, 50), 100000, 1e-3, 6);
  auto fine = jdi::simulate_ensemble(m, schedule(2.5e-4, 50), 100000, 2.5e-4, 6);
  auto pc = jdi::estimate_km(coarse, 3, 8, 0, 50);
  auto pf = jdi::estimate_km(fine, 3, 8, 0, 50);
  CHECK(std::fabs(pc.estimate(pc.central_bin(), 3)) >= 3.0 * std::fabs(pf.estimate(pf.central_bin(), 3)));
}

TEST_CASE("estimator preconditions") {
  auto e = jdi::simulate_ensemble(model("0", "1", "0"), {0.0, 0.01, 0.03}, 500, 1e-3, 7);
  CHECK_THROWS_AS(jdi::estimate_km(e, 2, 4, 0), jdi::ConfigError);
  CHECK_THROWS_AS(jdi::estimate_km(e, 7, 8, 0), jdi::ConfigError);
  CHECK_THROWS_AS(jdi::estimate_km(e, 2, 8, 0, 2), jdi::ConfigError);  // 0.01 then 0.02 spacing
  CHECK_THROWS_AS(jdi::estimate_km(e, 2, 8, 2), jdi::ConfigError);
  auto few = jdi::simulate_ensemble(model("0", "1", "0"), {0.0, 0.01}, 100, 1e-3, 7);
  CHECK_THROWS_AS(jdi::estimate_km(few, 2, 8, 0), jdi::NumericalContractError);
  // 500 Gaussian starts over 8 equal-width bins: the outer bins fall below 50 samples
  auto pm = jdi::estimate_km(e, 2, 8, 0);
  std::size_t unusable = 0;
  for (std::size_t b = 0; b < pm.bins(); ++b) {
    CHECK(pm.usable[b] == (pm.counts[b] >= 50));
    if (!pm.usable[b]) {
      ++unusable;
      CHECK(std::isnan(pm.estimate(b, 1)));
    } else {
      CHECK(std::isfinite(pm.estimate(b, 1)));
    }
  }
  CHECK(unusable >= 2);
  CHECK(pm.edge.front());
  CHECK(pm.edge.back());
  std::ostringstream os;
  pm.write_csv(os);
  CHECK(os.str().rfind("bin_center,order,estimate,stderr,count\n", 0) == 0);
  CHECK(os.str().find("nan") != std::string::npos);
}

TEST_CASE("series right-hand side: diffusion-only collapse and the Gaussian value") {
  jdi::Grid g(-12, 12, 1024);
  auto p = testing::gaussian_field(g, 0.0, 2.0);
  const auto m = model("0", "1", "0");
  auto r2 = jdi::km_series_rhs(p, m, 2, 0.0);
  auto r6 = jdi::km_series_rhs(p, m, 6, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(r2[i] == r6[i]);
  const std::size_t mid = 511;  // nearest node to 0
  const double x = g.x(mid);
  const double exact = 0.5 * (x * x / 4.0 - 0.5) * testing::normal_pdf(x, 0, 2);
  CHECK(r2[mid] == doctest::Approx(exact).epsilon(1e-4));
  CHECK(exact == doctest::Approx(-0.0705).epsilon(1e-2));
}

TEST_CASE("series right-hand side conserves mass and converges in the order") {
  jdi::Grid g(-12, 12, 1024);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    v[i] = 0.6 * testing::normal_pdf(g.x(i), -1.0, 0.5) + 0.4 * testing::normal_pdf(g.x(i), 1.5, 0.8);
  jdi::DensityField p(g, v, 0.0);
  const auto m = model("0.3", "1", "1", "gaussian", "0.2", "0.3");
  auto r4 = jdi::km_series_rhs(p, m, 4, 0.0);
  auto r6 = jdi::km_series_rhs(p, m, 6, 0.0);
  auto r8 = jdi::km_series_rhs(p, m, 8, 0.0);
  double mass = 0.0, d46 = 0.0, d68 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    mass += g.weight(i) * r6[i];
    d46 += g.dx() * std::fabs(r4[i] - r6[i]);
    d68 += g.dx() * std::fabs(r6[i] - r8[i]);
  }
  CHECK(std::fabs(mass) <= 1e-8);
  // omitted orders 5 and 6 evaluated directly bound the order-4 truncation
  double omitted = 0.0;
  for (int n = 5; n <= 6; ++n) {
    double fact = 1.0;
    for (int k = 2; k <= n; ++k) fact *= k;
    std::vector<double> bp(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) bp[i] = jdi::analytic_km_coefficient(m, n, g.x(i), 0.0) * v[i];
    auto d = jdi::derivative_zero_extended(bp, n, g.dx());
    for (std::size_t i = 0; i < g.size(); ++i) omitted += g.dx() * std::fabs(d[i]) / fact;
  }
  CHECK(d46 <= omitted * (1 + 1e-12));
  CHECK(d68 < d46);
  CHECK_THROWS(jdi::km_series_rhs(p, m, 9, 0.0));
  CHECK_THROWS(jdi::km_series_rhs(p, m, 1, 0.0));
  jdi::Grid small(-1, 1, 16);
  CHECK_THROWS(jdi::km_series_rhs(testing::gaussian_field(small, 0, 1), m, 6, 0.0));
}
