#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "jdi/error.hpp"
#include "jdi/info.hpp"
#include "jdi/stencil.hpp"

namespace jdi {

namespace {

struct Node {
  double xi;
  double weight;  // quadrature weight times kernel density
};

// Gauss-Legendre (4 points) on panels [k dx, (k+1) dx] clipped to the kernel's truncated support,
// so that x + xi stays between the same pair of grid nodes within each panel.
std::vector<Node> kernel_nodes(const KernelShape& k, double dx) {
  static constexpr double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  static constexpr double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  auto [lo, hi] = k.support();
  std::vector<Node> out;
  const long k0 = static_cast<long>(std::floor(lo / dx));
  const long k1 = static_cast<long>(std::floor(hi / dx));
  for (long p = k0; p <= k1; ++p) {
    const double a = std::max(lo, static_cast<double>(p) * dx);
    const double b = std::min(hi, static_cast<double>(p + 1) * dx);
    if (!(b > a)) continue;
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int q = 0; q < 4; ++q) {
      const double xi = c + h * gx[q];
      out.push_back({xi, h * gw[q] * k.pdf(xi)});
    }
  }
  return out;
}

void check_support(const KernelShape& k, const Grid& g) {
  auto [lo, hi] = k.support();
  if (hi - lo > g.x_max() - g.x_min())
    throw NumericalContractError(
        fmt::format("support overflow: kernel support [{}, {}] is wider than the grid {}", lo, hi, g.describe()));
}

void finish(TermValue& tv) {
  tv.low_confidence = tv.clamp_mass >= 1e-6;
  if (!std::isfinite(tv.value)) throw NumericalContractError(fmt::format("term {} is not finite", tv.name));
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

TermValue entropy_jump_term(const DensityField& p, const ChannelModel& model, double t) {
  TermValue tv;
  tv.name = "jump_log_ratio";
  if (model.jump_free()) {
    tv.notes = "lambda == 0";
    return tv;
  }
  const Grid& g = p.grid();
  const double floor = kFloorRatio * p.max_value();
  const bool kernel_varies = model.kernel.depends_on_x();
  std::vector<Node> nodes;
  if (!kernel_varies) {
    const auto k = model.kernel.at(g.x(0), t);
    check_support(k, g);
    nodes = kernel_nodes(k, g.dx());
  }
  double value = 0.0, clamp = 0.0, outside = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double pi = p[i];
    if (pi <= 0.0) continue;
    const double x = g.x(i);
    const double lambda = model.jump_rate(x, t);
    if (lambda == 0.0) continue;
    if (kernel_varies) {
      const auto k = model.kernel.at(x, t);
      check_support(k, g);
      nodes = kernel_nodes(k, g.dx());
    }
    const double lp = std::log(std::max(pi, floor));
    double inner = 0.0, clamped = 0.0;
    for (const auto& nd : nodes) {
      const double y = x + nd.xi;
      double q = p.interpolate(y);
      if (y < g.x_min() || y > g.x_max()) outside += g.weight(i) * pi * nd.weight;
      if (q < floor) {
        q = floor;
        clamped += nd.weight;
      }
      inner += nd.weight * (lp - std::log(q));
    }
    value += g.weight(i) * pi * lambda * inner;
    clamp += g.weight(i) * pi * clamped;
  }
  tv.value = value;
  tv.clamp_mass = clamp;
  if (outside > 0.0) tv.notes = fmt::format("shifted mass outside grid {:.3g}", outside);
  finish(tv);
  return tv;
}

double shifted_kl(const DensityField& p, double xi, double* clamp_mass) {
  const Grid& g = p.grid();
  const double floor = kFloorRatio * p.max_value();
  double d = 0.0, clamp = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double pi = p[i];
    if (pi <= 0.0) continue;
    double q = p.interpolate(g.x(i) + xi);
    if (q < floor) {
      q = floor;
      clamp += g.weight(i) * pi;
    }
    d += g.weight(i) * pi * (std::log(std::max(pi, floor)) - std::log(q));
  }
  if (clamp_mass) *clamp_mass = clamp;
  return d;
}

TermValue additive_jump_kl(const DensityField& p, const ChannelModel& model, double t) {
  TermValue tv;
  tv.name = "jump_shift_kl";
  if (model.jump_free()) {
    tv.notes = "lambda == 0";
    return tv;
  }
  const Grid& g = p.grid();
  std::string why;
  if (!is_state_homogeneous(model, g, {t}, &why)) throw ModelError({"shift-KL form needs a state-homogeneous model: " + why});
  const double lambda = model.jump_rate(g.x(0), t);
  const auto k = model.kernel.at(g.x(0), t);
  check_support(k, g);
  double value = 0.0, clamp = 0.0, min_kl = std::numeric_limits<double>::infinity();
  for (const auto& nd : kernel_nodes(k, g.dx())) {
    double c = 0.0;
    const double d = shifted_kl(p, nd.xi, &c);
    min_kl = std::min(min_kl, d);
    value += nd.weight * d;
    clamp += nd.weight * c;
  }
  tv.value = lambda * value;
  tv.clamp_mass = clamp;
  tv.notes = fmt::format("min inner KL {:.3g}", min_kl);
  finish(tv);
  return tv;
}

TermValue mi_jump_term(const JointDensity& joint, const ChannelModel& model, double t) {
  TermValue tv;
  tv.name = "conditional_kl";
  if (model.jump_free()) {
    tv.notes = "lambda == 0";
    return tv;
  }
  const Grid& g0 = joint.grid0();
  const Grid& gt = joint.grid_t();
  const std::size_t R = joint.rows(), C = joint.cols();
  const double dx = gt.dx();

  // column conditionals Q[j][i] = p(x0_i | xt_j), stored column-major for contiguous access
  std::vector<double> m(C, 0.0), Q(C * R, 0.0), logQ(C * R, 0.0), H(C, 0.0), lfloor(C, 0.0);
  std::vector<bool> ok(C, false);
  double excluded = 0.0;
  for (std::size_t j = 0; j < C; ++j) {
    for (std::size_t i = 0; i < R; ++i) m[j] += g0.weight(i) * joint(i, j);
    if (m[j] < 1e-10) {
      excluded += gt.weight(j) * m[j];
      continue;
    }
    ok[j] = true;
    double qmax = 0.0;
    for (std::size_t i = 0; i < R; ++i) {
      Q[j * R + i] = joint(i, j) / m[j];
      qmax = std::max(qmax, Q[j * R + i]);
    }
    const double floor = kFloorRatio * qmax;
    lfloor[j] = std::log(floor);
    double h = 0.0;
    for (std::size_t i = 0; i < R; ++i) {
      const double q = Q[j * R + i];
      logQ[j * R + i] = q >= floor ? std::log(q) : lfloor[j];
      if (q > 0.0) h += g0.weight(i) * q * logQ[j * R + i];
    }
    H[j] = h;
  }

  const bool kernel_varies = model.kernel.depends_on_x();
  std::vector<Node> nodes;
  long pmin = 0, pmax = 0;
  auto set_nodes = [&](const KernelShape& k) {
    check_support(k, gt);
    nodes = kernel_nodes(k, dx);
    pmin = static_cast<long>(std::floor(nodes.front().xi / dx));
    pmax = static_cast<long>(std::floor(nodes.back().xi / dx)) + 1;
  };
  if (!kernel_varies) set_nodes(model.kernel.at(gt.x(0), t));

  double value = 0.0, clamp = 0.0, min_kl = std::numeric_limits<double>::infinity();
  std::vector<double> cross;
  std::vector<double> w0(R);
  for (std::size_t i = 0; i < R; ++i) w0[i] = g0.weight(i);
  for (std::size_t j = 0; j < C; ++j) {
    if (!ok[j]) continue;
    const double lambda = model.jump_rate(gt.x(j), t);
    if (lambda == 0.0) continue;
    if (kernel_varies) set_nodes(model.kernel.at(gt.x(j), t));
    // cross[j'] = sum_i w0_i Q_ji log Q_j'i for the columns the kernel can reach
    const long lo = static_cast<long>(j) + pmin, hi = static_cast<long>(j) + pmax;
    cross.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
    const double* qj = Q.data() + j * R;
    for (long c = lo; c <= hi; ++c) {
      double s;
      if (c < 0 || c >= static_cast<long>(C) || !ok[c]) {
        s = lfloor[j];  // shifted conditional undefined: clamp at this column's floor
      } else {
        const double* lq = logQ.data() + static_cast<std::size_t>(c) * R;
        s = 0.0;
        for (std::size_t i = 0; i < R; ++i) s += w0[i] * qj[i] * lq[i];
      }
      cross[c - lo] = s;
    }
    const double weight = gt.weight(j) * m[j] * lambda;
    for (const auto& nd : nodes) {
      const double s = static_cast<double>(j) + nd.xi / dx;
      const long c = static_cast<long>(std::floor(s));
      const double f = s - static_cast<double>(c);
      const long a = c - lo;
      const bool clamped = c < 0 || c + 1 >= static_cast<long>(C) || !ok[c] || !ok[c + 1];
      // log-linear interpolation between neighbouring columns keeps each KL non-negative
      const double d = H[j] - ((1.0 - f) * cross[a] + f * cross[a + 1]);
      min_kl = std::min(min_kl, d);
      value += weight * nd.weight * d;
      if (clamped) clamp += gt.weight(j) * m[j] * nd.weight;
    }
  }
  tv.value = value;
  tv.clamp_mass = clamp;
  tv.notes = fmt::format("min inner KL {:.3g}; excluded column mass {:.3g}", min_kl, excluded);
  finish(tv);
  return tv;
}

TermValue log_derivative_term(const DensityField& p, const ChannelModel& model, int n, double t) {
  if (n < 3) throw ConfigError(fmt::format("series terms start at n = 3, got {}", n));
  if (n > 8) throw NumericalContractError(fmt::format("stencil overflow: order {} exceeds 8", n));
  TermValue tv;
  tv.name = fmt::format("series_n{}", n);
  if (model.jump_free()) {
    tv.notes = "B_n == 0 for lambda == 0";
    return tv;
  }
  const Grid& g = p.grid();
  const auto B = km_coefficient_field(model, n, g, t);
  const double floor = kFloorRatio * p.max_value();
  std::vector<double> lp(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) lp[i] = std::log(std::max(p[i], floor));
  const auto d = derivative_interior(lp, n, g.dx());
  const int r = central_stencil(n).radius;
  double sum = 0.0, masked = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    bool valid = std::isfinite(d[i]);
    for (int k = -r; valid && k <= r; ++k) valid = p[i + k] >= floor;
    if (!valid) {
      masked += g.weight(i) * p[i];
      continue;
    }
    sum += g.weight(i) * p[i] * B[i] * d[i];
  }
  tv.value = -sum / factorial(n);
  tv.clamp_mass = masked;
  finish(tv);
  return tv;
}

TermValue log_derivative_term(const JointDensity& joint, const ChannelModel& model, int n, double t) {
  if (n < 3) throw ConfigError(fmt::format("series terms start at n = 3, got {}", n));
  if (n > 8) throw NumericalContractError(fmt::format("stencil overflow: order {} exceeds 8", n));
  TermValue tv;
  tv.name = fmt::format("series_n{}", n);
  if (model.jump_free()) {
    tv.notes = "B_n == 0 for lambda == 0";
    return tv;
  }
  const Grid& g0 = joint.grid0();
  const Grid& gt = joint.grid_t();
  const std::size_t C = joint.cols();
  const auto B = km_coefficient_field(model, n, gt, t);
  const int r = central_stencil(n).radius;

  auto log_derivative = [&](std::span<const double> f, std::vector<bool>& fits) {
    const double floor = kFloorRatio * *std::max_element(f.begin(), f.end());
    std::vector<double> lf(C);
    for (std::size_t j = 0; j < C; ++j) lf[j] = std::log(std::max(f[j], floor));
    auto d = derivative_interior(lf, n, gt.dx());
    fits.assign(C, false);
    for (std::size_t j = 0; j < C; ++j) {
      bool v = std::isfinite(d[j]);
      for (int k = -r; v && k <= r; ++k) v = f[j + k] >= floor;
      fits[j] = v;
    }
    return d;
  };

  const auto marginal = joint.marginal_xt();
  std::vector<bool> mfit, rfit;
  const auto dm = log_derivative(marginal.values(), mfit);
  double sum = 0.0, masked = 0.0;
  for (std::size_t i = 0; i < joint.rows(); ++i) {
    auto row = joint.row(i);
    if (*std::max_element(row.begin(), row.end()) <= 0.0) continue;
    const auto dr = log_derivative(row, rfit);
    double acc = 0.0, lost = 0.0;
    for (std::size_t j = 0; j < C; ++j) {
      if (!rfit[j] || !mfit[j]) {
        lost += gt.weight(j) * row[j];
        continue;
      }
      acc += gt.weight(j) * row[j] * B[j] * (dr[j] - dm[j]);
    }
    sum += g0.weight(i) * acc;
    masked += g0.weight(i) * lost;
  }
  tv.value = sum / factorial(n);
  tv.clamp_mass = masked;
  finish(tv);
  return tv;
}

TermValue drift_correction(const DensityField& p, std::span<const double> a, std::span<const double> b) {
  const Grid& g = p.grid();
  if (a.size() != g.size() || b.size() != g.size()) throw NumericalContractError("coefficient field size mismatch");
  TermValue tv;
  tv.name = "drift_correction";
  const auto da = first_derivative(a, g.dx());
  const auto d2b = second_derivative(b, g.dx());
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += g.weight(i) * p[i] * (da[i] - 0.5 * d2b[i]);
  tv.value = s;
  finish(tv);
  return tv;
}

TermValue drift_correction(const DensityField& p, const ChannelModel& model, double t) {
  if (!model.drift.depends_on_x() && !model.diffusion.depends_on_x()) {
    TermValue tv;
    tv.name = "drift_correction";
    return tv;
  }
  return drift_correction(p, sample_field(model.drift, p.grid(), t), sample_field(model.diffusion, p.grid(), t));
}

}  // namespace jdi
