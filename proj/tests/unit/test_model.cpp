#include <cmath>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "jdi/error.hpp"
#include "jdi/model.hpp"

using testing::model;

namespace {

// Brute-force raw moment by trapezoid quadrature on a wide fine grid.
double quadrature_moment(const jdi::KernelShape& k, int n) {
  const double lo = k.family == jdi::KernelFamily::uniform ? k.p1 : k.p1 - 40.0 * k.p2;
  const double hi = k.family == jdi::KernelFamily::uniform ? k.p2 : k.p1 + 40.0 * k.p2;
  const int N = 400000;
  const double h = (hi - lo) / N;
  double s = 0.0;
  for (int i = 0; i <= N; ++i) {
    const double xi = lo + i * h;
    s += (i == 0 || i == N ? 0.5 : 1.0) * std::pow(xi, n) * k.pdf(xi);
  }
  return s * h;
}

}  // namespace

TEST_CASE("pure Brownian model builds") {
  auto m = model("0", "1", "0");
  CHECK(m.jump_free());
  CHECK_FALSE(m.differential_free());
  CHECK_FALSE(m.time_dependent());
  CHECK(m.structurally_homogeneous());
}

TEST_CASE("negative diffusion is rejected with the field and node named") {
  try {
    model("0", "-1", "0");
    FAIL("expected a model error");
  } catch (const jdi::ModelError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("diffusion b") != std::string::npos);
    CHECK(msg.find("node") != std::string::npos);
    CHECK_FALSE(e.violations().empty());
  }
}

TEST_CASE("kernel scale that vanishes on the grid is rejected") {
  CHECK_THROWS_AS(model("0", "1", "1", "gaussian", "0", "x"), jdi::ModelError);
  CHECK_THROWS_AS(model("0", "1", "1", "uniform", "1", "0"), jdi::ModelError);
  CHECK_THROWS_AS(model("0", "1", "-0.5"), jdi::ModelError);
  CHECK_THROWS_AS(model("xi", "1", "0"), jdi::ModelError);
  CHECK_THROWS_AS(model("0", "1", "1", "cauchy", "0", "1"), jdi::ModelError);
}

TEST_CASE("jump moments match the closed forms and brute-force quadrature") {
  CHECK(jdi::jump_moment(model("0", "1", "1", "gaussian", "0", "2"), 2, 0, 0) == doctest::Approx(4.0));
  CHECK(jdi::jump_moment(model("0", "1", "1", "gaussian", "1", "2"), 3, 0, 0) == doctest::Approx(13.0));
  CHECK(jdi::jump_moment(model("0", "1", "1", "uniform", "0", "1"), 1, 0, 0) == doctest::Approx(0.5));
  for (auto fam : {jdi::KernelFamily::gaussian, jdi::KernelFamily::laplace, jdi::KernelFamily::uniform}) {
    jdi::KernelShape k{fam, fam == jdi::KernelFamily::uniform ? -0.5 : 0.7,
                       fam == jdi::KernelFamily::uniform ? 1.5 : 0.6};
    for (int n = 1; n <= 6; ++n) {
      INFO("family " << jdi::to_string(fam) << " n=" << n);
      CHECK(k.moment(n) == doctest::Approx(quadrature_moment(k, n)).epsilon(1e-7));
    }
  }
}

TEST_CASE("kernel cdf, tails and characteristic function") {
  for (auto fam : {jdi::KernelFamily::gaussian, jdi::KernelFamily::laplace, jdi::KernelFamily::uniform}) {
    jdi::KernelShape k{fam, fam == jdi::KernelFamily::uniform ? -1.0 : 0.4, fam == jdi::KernelFamily::uniform ? 2.0 : 0.8};
    auto [lo, hi] = k.support();
    CHECK(k.cdf(hi) - k.cdf(lo) + k.tail_mass() == doctest::Approx(1.0).epsilon(1e-14));
    const double kk = 1.3;
    // E[exp(-i k xi)] by quadrature
    const int N = 200000;
    const double a = fam == jdi::KernelFamily::uniform ? lo : k.p1 - 40 * k.p2;
    const double b = fam == jdi::KernelFamily::uniform ? hi : k.p1 + 40 * k.p2;
    const double h = (b - a) / N;
    double re = 0, im = 0;
    for (int i = 0; i <= N; ++i) {
      const double xi = a + i * h, w = (i == 0 || i == N ? 0.5 : 1.0) * k.pdf(xi) * h;
      re += w * std::cos(kk * xi);
      im -= w * std::sin(kk * xi);
    }
    auto c = k.characteristic(kk);
    CHECK(c.real() == doctest::Approx(re).epsilon(1e-6));
    CHECK(c.imag() == doctest::Approx(im).epsilon(1e-6));
  }
}

TEST_CASE("analytic Kramers-Moyal coefficients") {
  auto m = model("1", "2", "3", "gaussian", "1", "2");
  CHECK(jdi::analytic_km_coefficient(m, 1, 0, 0) == doctest::Approx(4.0));
  CHECK(jdi::analytic_km_coefficient(m, 2, 0, 0) == doctest::Approx(17.0));
  CHECK(jdi::analytic_km_coefficient(m, 3, 0, 0) == doctest::Approx(39.0));
  auto d = model("-x", "1+x^2", "0");
  CHECK(jdi::analytic_km_coefficient(d, 1, 2.0, 0) == -2.0);
  CHECK(jdi::analytic_km_coefficient(d, 2, 2.0, 0) == 5.0);
  for (int n = 3; n <= 6; ++n) CHECK(jdi::analytic_km_coefficient(d, n, 2.0, 0) == 0.0);
  auto j = model("0", "0", "1", "gaussian", "0", "1");
  CHECK(jdi::analytic_km_coefficient(j, 1, 0, 0) == 0.0);
  CHECK(jdi::analytic_km_coefficient(j, 2, 0, 0) == doctest::Approx(1.0));
  CHECK(jdi::analytic_km_coefficient(j, 4, 0, 0) == doctest::Approx(3.0));
}

TEST_CASE("B_n equals lambda times w_n exactly for n >= 3") {
  auto m = model("sin(x)", "1+0.5*cos(t)", "0.5+0.1*x^2", "laplace", "0.1*x", "0.5+0.1*t^2");
  for (double x : {-3.0, 0.0, 1.7})
    for (int n = 3; n <= 6; ++n)
      CHECK(jdi::analytic_km_coefficient(m, n, x, 0.3) == m.jump_rate(x, 0.3) * jdi::jump_moment(m, n, x, 0.3));
}

TEST_CASE("state homogeneity check") {
  jdi::Grid g(-5, 5, 64);
  CHECK(jdi::is_state_homogeneous(model("0.2", "0.5", "1", "gaussian", "0", "0.7"), g, {0.0, 1.0}));
  std::string why;
  CHECK_FALSE(jdi::is_state_homogeneous(model("-x", "1", "0.5"), g, {0.0, 1.0}, &why));
  CHECK(why.find("drift") != std::string::npos);
  CHECK(jdi::is_state_homogeneous(model("sin(t)", "1", "0"), g, {0.0, 1.0}));
}

TEST_CASE("initial law validation") {
  auto c = testing::channel("0", "1");
  c.initial_kind = "gaussian";
  c.initial_std = 0.0;
  CHECK_THROWS_AS(jdi::build_model(c), jdi::ModelError);
  c.initial_kind = "density";
  c.initial_density = "0*x";
  CHECK_THROWS_AS(jdi::build_model(c), jdi::ModelError);
  c.initial_density = "exp(-x^2)";
  CHECK_NOTHROW(jdi::build_model(c));
  c.initial_kind = "spline";
  CHECK_THROWS_AS(jdi::build_model(c), jdi::ModelError);
}

TEST_CASE("grid invariants") {
  CHECK_THROWS_AS(jdi::Grid(0, 1, 8), jdi::ConfigError);
  CHECK_THROWS_AS(jdi::Grid(1, 1, 64), jdi::ConfigError);
  jdi::Grid g(-12, 12, 1024);
  CHECK(g.dx() == doctest::Approx(24.0 / 1023.0));
  CHECK(g.x(1023) == 12.0);
}
