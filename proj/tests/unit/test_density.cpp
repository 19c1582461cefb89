#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "jdi/density.hpp"
#include "jdi/error.hpp"
#include "jdi/info.hpp"
#include "jdi/simulate.hpp"

using testing::gaussian_field;
using testing::model;

namespace {

std::vector<double> values(const jdi::DensityField& p) { return {p.values().begin(), p.values().end()}; }

double l1_to(const jdi::DensityField& p, double mean, double var) {
  return jdi::l1_distance(p, gaussian_field(p.grid(), mean, var, p.time()));
}

}  // namespace

TEST_CASE("density fields validate their values") {
  jdi::Grid g(-1, 1, 16);
  std::vector<double> v(16, 1.0);
  v[3] = -1e-3;
  CHECK_THROWS(jdi::DensityField(g, v, 0.0));
  v[3] = std::nan("");
  CHECK_THROWS(jdi::DensityField(g, v, 0.0));
  jdi::DensityField p(g, std::vector<double>(16, 0.5), 0.0);
  CHECK(p.mass() == doctest::Approx(1.0));
  CHECK(p.interpolate(5.0) == 0.0);
  std::ostringstream os;
  p.write_csv(os);
  CHECK(os.str().rfind("x,p\n", 0) == 0);
}

TEST_CASE("frozen dynamics leave the density unchanged") {
  jdi::Grid g(-12, 12, 512);
  const auto m = model("0", "0", "0");
  auto p0 = jdi::initial_density(m, g);
  jdi::SolverStats st;
  auto p1 = jdi::evolve_density(m, p0, 0.0, 1.0, 1e-2, &st);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(p1[i] == doctest::Approx(p0[i]).epsilon(1e-14));
  CHECK(st.jump_evaluations == 0);
  CHECK(st.stencil_evaluations == 0);
}

TEST_CASE("heat equation from N(0,1) reaches N(0,2)") {
  jdi::Grid g(-12, 12, 1024);
  const auto m = model("0", "1", "0");
  jdi::SolverStats st;
  auto p = jdi::evolve_density(m, jdi::initial_density(m, g), 0.0, 1.0, 1e-3, &st);
  CHECK(l1_to(p, 0.0, 2.0) <= 1e-3);
  CHECK(st.jump_evaluations == 0);
  CHECK(st.stencil_evaluations > 0);
  CHECK(st.max_mass_drift <= 1e-8);
  CHECK(st.max_clipped_mass <= 1e-9);
}

TEST_CASE("OU stationary law is preserved") {
  jdi::Grid g(-12, 12, 1024);
  const auto m = model("-x", "2", "0");
  auto p = jdi::evolve_density(m, jdi::initial_density(m, g), 0.0, 1.0, 1e-3);
  CHECK(l1_to(p, 0.0, 1.0) <= 1e-3);
}

TEST_CASE("pure jump dynamics never touch the differential stencil") {
  jdi::Grid g(-12, 12, 512);
  const auto m = model("0", "0", "1", "gaussian", "0", "0.5");
  jdi::SolverStats st;
  auto p = jdi::evolve_density(m, jdi::initial_density(m, g), 0.0, 0.5, 1e-2, &st);
  CHECK(st.stencil_evaluations == 0);
  CHECK(st.jump_evaluations > 0);
  // variance grows by lambda t w_2 = 0.5 * 0.25
  double m2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) m2 += g.weight(i) * g.x(i) * g.x(i) * p[i];
  CHECK(m2 == doctest::Approx(1.125).epsilon(2e-3));
}

TEST_CASE("jump operator conserves mass and FFT matches direct quadrature") {
  jdi::Grid g(-12, 12, 1024);
  const auto m = model("0", "1", "0.7", "laplace", "0.2", "0.4");
  auto p0 = jdi::initial_density(m, g);
  jdi::SolverOptions direct, fft;
  direct.jump_method = jdi::JumpMethod::direct;
  fft.jump_method = jdi::JumpMethod::fft;
  jdi::KolmogorovSolver sd(m, g, direct), sf(m, g, fft);
  auto pd = sd.plan(0.0, 1e-3, false);
  auto pf = sf.plan(0.0, 1e-3, false);
  auto wd = sd.make_workspace();
  auto wf = sf.make_workspace();
  std::vector<double> rd(g.size()), rf(g.size());
  sd.jump_rate_of_change(*pd, p0.values(), rd, *wd);
  sf.jump_rate_of_change(*pf, p0.values(), rf, *wf);
  double total = 0.0, scale = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    total += g.weight(i) * rd[i];
    scale += g.weight(i) * std::fabs(rd[i]);
    worst = std::max(worst, std::fabs(rd[i] - rf[i]));
  }
  CHECK(std::fabs(total) <= 1e-12 * std::max(1.0, scale));
  CHECK(worst <= 1e-10);
}

TEST_CASE("explicit jump step bound and kernel support are enforced") {
  jdi::Grid g(-12, 12, 256);
  const auto m = model("0", "1", "5", "gaussian", "0", "0.5");
  auto p0 = jdi::initial_density(m, g);
  CHECK_THROWS_AS(jdi::evolve_density(m, p0, 0.0, 0.1, 0.05), jdi::NumericalContractError);
  const auto wide = model("0", "1", "1", "gaussian", "0", "5");
  CHECK_THROWS_AS(jdi::evolve_density(wide, p0, 0.0, 0.1, 0.01), jdi::NumericalContractError);
}

TEST_CASE("mass leaving the domain aborts the run") {
  jdi::Grid g(-4, 4, 256);
  const auto m = model("0", "0.1", "2", "gaussian", "2", "0.3");
  CHECK_THROWS_WITH_AS(jdi::evolve_density(m, jdi::initial_density(m, g), 0.0, 1.0, 1e-2),
                       doctest::Contains("leaving the domain"), jdi::NumericalContractError);
}

TEST_CASE("Gaussian channel joint: mass, marginals and mutual information") {
  jdi::Grid g(-12, 12, 1024);
  const auto m = model("0", "1", "0");
  auto p0 = jdi::initial_density(m, g);
  jdi::JointOptions opt;
  opt.x0_grid = jdi::Grid(-7.0, 7.0, 141);
  jdi::SolverStats st;
  auto J = jdi::evolve_joint(m, p0, 1.0, 2e-3, &st, opt);
  CHECK(J.total_mass() == doctest::Approx(1.0).epsilon(1e-5));
  auto pt = jdi::evolve_density(m, p0, 0.0, 1.0, 2e-3);
  CHECK(jdi::l1_distance(J.marginal_xt(), pt) <= 1e-3);
  // the mollifier adds (2 dx)^2 to the channel noise
  const double s2 = std::pow(2.0 * g.dx(), 2);
  CHECK(jdi::mutual_information(J) == doctest::Approx(0.5 * std::log(1.0 + 1.0 / (1.0 + s2))).epsilon(0.01));
  CHECK(jdi::mutual_information(J) == doctest::Approx(0.5 * std::log(2.0)).epsilon(0.01));
  std::ostringstream os;
  J.write_csv(os);
  CHECK(os.str().rfind("x0,xt,p\n", 0) == 0);
}

TEST_CASE("short-time joint keeps nearly all of the input information") {
  jdi::Grid g(-12, 12, 1024);
  const auto m = model("0", "1", "0");
  auto p0 = jdi::initial_density(m, g);
  jdi::JointOptions opt;
  opt.x0_grid = jdi::Grid(-6.0, 6.0, 256);
  const double t = 1e-4;
  auto J = jdi::evolve_joint(m, p0, t, 1e-5, nullptr, opt);
  // X_t = X0 + N(0, t + s^2): I = h(X0) minus the entropy lost to the mollified noise
  const double noise = t + std::pow(2.0 * g.dx(), 2);
  const double expected = 0.5 * std::log(1.0 + 1.0 / noise);
  CHECK(jdi::mutual_information(J) >= 0.99 * expected);
  CHECK(jdi::mutual_information(J) <= 1.01 * expected);
}

TEST_CASE("without dynamics the joint keeps its t=0 information") {
  jdi::Grid g(-12, 12, 512);
  const auto m = model("0", "0", "0");
  auto p0 = jdi::initial_density(m, g);
  jdi::JointOptions opt;
  opt.x0_grid = jdi::Grid(-6.0, 6.0, 121);
  auto a = jdi::evolve_joint(m, p0, 0.01, 1e-2, nullptr, opt);
  auto b = jdi::evolve_joint(m, p0, 1.0, 1e-2, nullptr, opt);
  CHECK(jdi::mutual_information(a) == doctest::Approx(jdi::mutual_information(b)).epsilon(1e-12));
}

TEST_CASE("spectral solution of pure drift is a translation") {
  jdi::Grid g(-12, 12, 1024);
  const auto m = model("1", "0", "0");
  auto p0 = jdi::initial_density(m, g);
  auto p = jdi::additive_closed_form(m, p0, 2.0);
  CHECK(l1_to(p, 2.0, 1.0) <= 1e-6);
}

namespace {

// Cumulative trapezoid integral of p, evaluated at x by linear interpolation.
struct Cdf {
  const jdi::DensityField& p;
  std::vector<double> c;
  explicit Cdf(const jdi::DensityField& f) : p(f), c(f.grid().size(), 0.0) {
    for (std::size_t i = 1; i < c.size(); ++i) c[i] = c[i - 1] + 0.5 * f.grid().dx() * (f[i - 1] + f[i]);
  }
  double operator()(double x) const {
    const auto& g = p.grid();
    const double u = (x - g.x_min()) / g.dx();
    const auto i = static_cast<std::size_t>(std::floor(u));
    if (i + 1 >= c.size()) return c.back();
    const double f = u - static_cast<double>(i);
    // exact integral of the linear interpolant over the partial cell
    return c[i] + g.dx() * (f * p[i] + 0.5 * f * f * (p[i + 1] - p[i]));
  }
};

}  // namespace

TEST_CASE("spectral compound Poisson law matches Monte Carlo") {
  jdi::Grid g(-12, 12, 1024);
  auto c = testing::channel("0", "0", "2", "gaussian", "0", "1");
  c.initial_kind = "point";
  c.initial_x0 = 0.0;
  c.grid = g;
  const auto m = jdi::build_model(c);
  auto p = jdi::additive_closed_form(m, jdi::initial_density(m, g), 1.0);
  const Cdf F(p);
  // atom weight e^-2 is carried by the mollified spike (std 2 dx, well inside |x| < 0.25)
  const double atom = std::exp(-2.0);
  double continuous = 0.0;  // Poisson mixture of N(0, k) over |x| < 0.25
  double pk = atom;
  for (int k = 1; k < 40; ++k) {
    pk *= 2.0 / k;
    continuous += pk * std::erf(0.25 / std::sqrt(2.0 * k));
  }
  CHECK(F(0.25) - F(-0.25) == doctest::Approx(atom + continuous).epsilon(1e-3));
  // continuous part against a histogram of Monte Carlo paths that jumped
  auto e = jdi::simulate_ensemble(m, {0.0, 1.0}, 200000, 1e-3, 77);
  const double lo = -6, w = 0.2;
  const int bins = 60;
  std::vector<double> hist(bins, 0.0);
  std::size_t jumped = 0;
  for (std::size_t k = 0; k < e.paths; ++k) {
    const double x = e.state(k, 1);
    if (x == 0.0) continue;
    ++jumped;
    const int b = static_cast<int>(std::floor((x - lo) / w));
    if (b >= 0 && b < bins) hist[b] += 1.0;
  }
  const jdi::DensityField spike(g, jdi::mollified_point_mass(g, 0.0), 0.0);
  const Cdf S(spike);
  double l1 = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double a = lo + b * w, z = a + w;
    const double mass = (F(z) - F(a)) - atom * (S(z) - S(a));
    l1 += std::fabs(hist[b] / e.paths - mass);
  }
  CHECK(double(jumped) / e.paths == doctest::Approx(1 - atom).epsilon(0.01));
  CHECK(l1 <= 0.02);
}

TEST_CASE("spectral solver refuses state-dependent models") {
  jdi::Grid g(-12, 12, 256);
  const auto m = model("-x", "1", "0");
  CHECK_THROWS_AS(jdi::additive_closed_form(m, jdi::initial_density(m, g), 1.0), jdi::ModelError);
}

TEST_CASE("spectral and grid solvers agree on an additive jump-diffusion") {
  jdi::Grid g(-12, 12, 2048);
  const auto m = model("0.2", "0.5", "1", "gaussian", "0", "0.7");
  auto p0 = jdi::initial_density(m, g);
  jdi::SolverStats st;
  auto grid_sol = jdi::evolve_density(m, p0, 0.0, 1.0, 1e-3, &st);
  auto spec = jdi::additive_closed_form(m, p0, 1.0);
  CHECK(jdi::l1_distance(grid_sol, spec) <= 1e-3);
  CHECK(st.max_mass_drift <= 1e-8);
  CHECK(st.max_clipped_mass <= 1e-9);
}

TEST_CASE("time-dependent coefficients follow the integrated variance") {
  jdi::Grid g(-12, 12, 1024);
  const auto m = model("0", "1+t", "0");
  auto p = jdi::evolve_density(m, jdi::initial_density(m, g), 0.0, 1.0, 1e-3);
  CHECK(l1_to(p, 0.0, 2.5) <= 1e-3);
  auto q = jdi::additive_closed_form(m, jdi::initial_density(m, g), 1.0);
  CHECK(l1_to(q, 0.0, 2.5) <= 1e-6);
}
