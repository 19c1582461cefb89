#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "fft.hpp"
#include "jdi/density.hpp"
#include "jdi/error.hpp"

namespace jdi {

void SolverStats::merge(const SolverStats& o) {
  steps = std::max(steps, o.steps);
  max_mass_drift = std::max(max_mass_drift, o.max_mass_drift);
  max_clipped_mass = std::max(max_clipped_mass, o.max_clipped_mass);
  min_value = std::min(min_value, o.min_value);
  leaked_mass = std::max(leaked_mass, o.leaked_mass);
  jump_evaluations += o.jump_evaluations;
  stencil_evaluations += o.stencil_evaluations;
}

namespace {

// Chang-Cooper weight: 1/w - 1/(e^w - 1), the exact-steady-state blend for w = a dx / D.
double chang_cooper(double a, double D, double dx) {
  if (D <= 0.0) return a > 0.0 ? 0.0 : (a < 0.0 ? 1.0 : 0.5);
  const double w = a * dx / D;
  if (std::fabs(w) < 1e-5) return 0.5 - w / 12.0;
  if (w > 700.0) return 1.0 / w;
  return 1.0 / w - 1.0 / std::expm1(w);
}

// Drift-diffusion generator A (flux divergence, so dp_i/dt = (A p)_i / w_i) and the factorised
// matrix W - c A used by both the Crank-Nicolson and backward-Euler substeps.
struct DriftDiffusion {
  std::vector<double> sub, diag, sup;  // A
  std::vector<double> w;               // trapezoid weights
  std::vector<double> lsub, cp, inv;   // LU of W - c A
  double c = 0.0;

  DriftDiffusion(const ChannelModel& m, const Grid& g, double t, double c_) : c(c_) {
    const std::size_t n = g.size();
    const double dx = g.dx();
    const auto a = sample_field(m.drift, g, t);
    const auto b = sample_field(m.diffusion, g, t);
    for (std::size_t i = 0; i < n; ++i)
      if (b[i] < 0.0) throw EvaluationError(fmt::format("negative diffusion {} at x={} t={}", b[i], g.x(i), t));
    std::vector<double> alpha(n - 1), beta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double af = 0.5 * (a[i] + a[i + 1]);
      const double D = 0.25 * (b[i] + b[i + 1]);
      const double d = chang_cooper(af, D, dx);
      alpha[i] = af * (1.0 - d) + b[i] / (2.0 * dx);
      beta[i] = af * d - b[i + 1] / (2.0 * dx);
    }
    sub.assign(n, 0.0);
    diag.assign(n, 0.0);
    sup.assign(n, 0.0);
    w.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = g.weight(i);
      if (i >= 1) {
        sub[i] = alpha[i - 1];
        diag[i] += beta[i - 1];
      }
      if (i + 1 < n) {
        diag[i] -= alpha[i];
        sup[i] = -beta[i];
      }
    }
    lsub.resize(n);
    cp.resize(n);
    inv.resize(n);
    double prev_cp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double l = -c * sub[i];
      const double d = w[i] - c * diag[i];
      const double u = -c * sup[i];
      const double den = d - (i ? l * prev_cp : 0.0);
      if (!(std::fabs(den) > 0.0)) throw NumericalContractError("singular drift-diffusion matrix");
      lsub[i] = l;
      inv[i] = 1.0 / den;
      cp[i] = u * inv[i];
      prev_cp = cp[i];
    }
  }

  // r = W p + s A p
  void rhs(const double* p, double* r, double s) const {
    const std::size_t n = w.size();
    r[0] = w[0] * p[0] + s * (diag[0] * p[0] + sup[0] * p[1]);
    for (std::size_t i = 1; i + 1 < n; ++i)
      r[i] = w[i] * p[i] + s * (sub[i] * p[i - 1] + diag[i] * p[i] + sup[i] * p[i + 1]);
    r[n - 1] = w[n - 1] * p[n - 1] + s * (sub[n - 1] * p[n - 2] + diag[n - 1] * p[n - 1]);
  }

  // (W - c A) x = r
  void solve(const double* r, double* x) const {
    const std::size_t n = w.size();
    x[0] = r[0] * inv[0];
    for (std::size_t i = 1; i < n; ++i) x[i] = (r[i] - lsub[i] * x[i - 1]) * inv[i];
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= cp[i] * x[i + 1];
  }
};

struct JumpOperator {
  bool homogeneous = false;
  bool use_fft = false;
  double lambda = 0.0;             // homogeneous rate
  std::vector<double> rate;        // lambda at each node
  std::vector<double> source;      // homogeneous: w_j / m_j; general: w_j lambda_j / m_j
  std::vector<double> leak;        // w_j lambda_j * (kernel mass outside the domain)
  // homogeneous taps on offsets kmin..
  std::vector<double> taps;
  long kmin = 0;
  std::unique_ptr<detail::Convolver> conv;
  // general: per-source destination range and kernel samples
  std::vector<std::size_t> lo, hi, offset;
  std::vector<double> values;
  double max_rate = 0.0;
};

}  // namespace

struct KolmogorovSolver::Plan {
  double t = 0.0, dt = 0.0;
  bool startup = false;
  std::shared_ptr<const DriftDiffusion> first, second;
  std::shared_ptr<const JumpOperator> jump;
};

struct KolmogorovSolver::Workspace {
  std::vector<double> r, x, j0, j1, p1, q;
  std::unique_ptr<detail::Convolver::Buffers, void (*)(detail::Convolver::Buffers*)> fft{nullptr, nullptr};
};

namespace {

std::shared_ptr<const JumpOperator> build_jump(const ChannelModel& m, const Grid& g, double t, double dt,
                                               const SolverOptions& opt) {
  auto op = std::make_shared<JumpOperator>();
  const std::size_t n = g.size();
  const double dx = g.dx();
  const double width = g.x_max() - g.x_min();
  op->rate = sample_field(m.jump_rate, g, t);
  for (std::size_t i = 0; i < n; ++i) {
    if (op->rate[i] < 0.0) throw EvaluationError(fmt::format("negative jump rate at x={} t={}", g.x(i), t));
    op->max_rate = std::max(op->max_rate, op->rate[i]);
  }
  if (op->max_rate * dt > opt.max_jump_step)
    throw NumericalContractError(fmt::format("stability violation: lambda*dt = {} exceeds {} for the explicit jump step",
                                             op->max_rate * dt, opt.max_jump_step));

  const KernelShape k0 = m.kernel.at(g.x(0), t);
  bool homogeneous = !m.kernel.depends_on_x() && !m.jump_rate.depends_on_x();
  op->homogeneous = homogeneous;
  op->source.resize(n);
  op->leak.resize(n);

  auto leak_fraction = [&](const KernelShape& k, double xj) {
    return std::max(0.0, 1.0 - (k.cdf(g.x_max() - xj) - k.cdf(g.x_min() - xj)));
  };

  if (homogeneous) {
    auto [slo, shi] = k0.support();
    if (shi - slo > width)
      throw NumericalContractError(
          fmt::format("jump kernel support [{}, {}] is wider than the grid ({})", slo, shi, width));
    op->lambda = op->rate[0];
    op->kmin = static_cast<long>(std::ceil(slo / dx));
    const long kmax = static_cast<long>(std::floor(shi / dx));
    if (kmax < op->kmin) throw NumericalContractError("jump kernel is narrower than one grid cell");
    for (long k = op->kmin; k <= kmax; ++k) op->taps.push_back(k0.pdf(static_cast<double>(k) * dx));
    for (std::size_t j = 0; j < n; ++j) {
      double mass = 0.0;
      const long ilo = std::max<long>(0, static_cast<long>(j) + op->kmin);
      const long ihi = std::min<long>(static_cast<long>(n) - 1, static_cast<long>(j) + kmax);
      for (long i = ilo; i <= ihi; ++i) mass += g.weight(i) * op->taps[i - static_cast<long>(j) - op->kmin];
      if (!(mass > 0.0)) {
        // no kernel mass lands on the grid from this node: everything leaks, nothing is redeposited
        op->source[j] = 0.0;
        op->leak[j] = g.weight(j) * op->lambda;
        continue;
      }
      op->source[j] = g.weight(j) / mass;
      op->leak[j] = g.weight(j) * op->lambda * leak_fraction(k0, g.x(j));
    }
    op->use_fft = opt.jump_method == JumpMethod::fft || (opt.jump_method == JumpMethod::automatic && op->taps.size() > 32);
    if (op->use_fft) op->conv = std::make_unique<detail::Convolver>(op->taps, op->kmin, n);
    return op;
  }

  op->lo.resize(n);
  op->hi.resize(n);
  op->offset.resize(n + 1, 0);
  for (std::size_t j = 0; j < n; ++j) {
    const double xj = g.x(j);
    const KernelShape k = m.kernel.at(xj, t);
    auto [slo, shi] = k.support();
    if (shi - slo > width)
      throw NumericalContractError(
          fmt::format("jump kernel support [{}, {}] at x={} is wider than the grid ({})", slo, shi, xj, width));
    const long ilo = std::max<long>(0, static_cast<long>(std::ceil((xj + slo - g.x_min()) / dx)));
    const long ihi = std::min<long>(static_cast<long>(n) - 1, static_cast<long>(std::floor((xj + shi - g.x_min()) / dx)));
    op->offset[j] = op->values.size();
    double mass = 0.0;
    if (ilo <= ihi) {
      op->lo[j] = static_cast<std::size_t>(ilo);
      op->hi[j] = static_cast<std::size_t>(ihi);
      for (long i = ilo; i <= ihi; ++i) {
        const double v = k.pdf(g.x(i) - xj);
        op->values.push_back(v);
        mass += g.weight(i) * v;
      }
    } else {
      op->lo[j] = 1;
      op->hi[j] = 0;
    }
    const double lj = op->rate[j];
    if (!(mass > 0.0)) {
      op->source[j] = 0.0;
      op->leak[j] = g.weight(j) * lj;
      continue;
    }
    op->source[j] = g.weight(j) * lj / mass;
    op->leak[j] = g.weight(j) * lj * leak_fraction(k, xj);
  }
  op->offset[n] = op->values.size();
  return op;
}

}  // namespace

KolmogorovSolver::KolmogorovSolver(const ChannelModel& model, const Grid& grid, SolverOptions options)
    : model_(model),
      grid_(grid),
      options_(options),
      jumps_(!model.jump_free()),
      differential_(!model.differential_free()) {}

KolmogorovSolver::~KolmogorovSolver() = default;

std::shared_ptr<const KolmogorovSolver::Plan> KolmogorovSolver::plan(double t, double dt, bool startup) const {
  const bool cacheable = !model_.time_dependent();
  if (cacheable) {
    std::lock_guard lock(cache_mutex_);
    auto it = cache_.find({dt, startup});
    if (it != cache_.end()) return it->second;
  }
  auto p = std::make_shared<Plan>();
  p->t = t;
  p->dt = dt;
  p->startup = startup;
  // both the CN half step and the two BE quarter steps solve with W - (dt/4) A
  const double c = 0.25 * dt;
  if (differential_) {
    p->first = std::make_shared<const DriftDiffusion>(model_, grid_, t + 0.25 * dt, c);
    p->second = cacheable ? p->first : std::make_shared<const DriftDiffusion>(model_, grid_, t + 0.75 * dt, c);
  }
  if (jumps_) {
    auto op = build_jump(model_, grid_, t + 0.5 * dt, dt, options_);
    if (op->max_rate > 0.0) p->jump = std::move(op);
  }
  if (cacheable) {
    std::lock_guard lock(cache_mutex_);
    cache_.emplace(std::make_pair(dt, startup), p);
  }
  return p;
}

void KolmogorovSolver::WorkspaceDeleter::operator()(Workspace* ws) const { delete ws; }

KolmogorovSolver::WorkspacePtr KolmogorovSolver::make_workspace() const {
  WorkspacePtr ws(new Workspace());
  const std::size_t n = grid_.size();
  ws->r.resize(n);
  ws->x.resize(n);
  ws->j0.resize(n);
  ws->j1.resize(n);
  ws->p1.resize(n);
  ws->q.resize(n);
  return ws;
}

void KolmogorovSolver::jump_rate_of_change(const Plan& plan, std::span<const double> p, std::span<double> out,
                                           Workspace& ws) const {
  const std::size_t n = grid_.size();
  std::fill(out.begin(), out.end(), 0.0);
  if (!plan.jump) return;
  const JumpOperator& J = *plan.jump;
  if (J.homogeneous) {
    for (std::size_t j = 0; j < n; ++j) ws.q[j] = J.source[j] * p[j];
    if (J.use_fft) {
      if (!ws.fft) ws.fft = J.conv->make_buffers();
      J.conv->apply(ws.q.data(), out.data(), *ws.fft);
    } else {
      const long K = static_cast<long>(J.taps.size());
      for (std::size_t j = 0; j < n; ++j) {
        const double s = ws.q[j];
        if (s == 0.0) continue;
        const long base = static_cast<long>(j) + J.kmin;
        const long k0 = std::max<long>(0, -base);
        const long k1 = std::min<long>(K, static_cast<long>(n) - base);
        for (long k = k0; k < k1; ++k) out[base + k] += s * J.taps[k];
      }
    }
    for (std::size_t i = 0; i < n; ++i) out[i] = J.lambda * out[i] - J.lambda * p[i];
    return;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double s = J.source[j] * p[j];
    if (s == 0.0 || J.lo[j] > J.hi[j]) continue;
    const double* v = J.values.data() + J.offset[j];
    for (std::size_t i = J.lo[j]; i <= J.hi[j]; ++i) out[i] += s * v[i - J.lo[j]];
  }
  for (std::size_t i = 0; i < n; ++i) out[i] -= J.rate[i] * p[i];
}

void KolmogorovSolver::apply(const Plan& plan, std::span<double> p, Workspace& ws, SolverStats& stats) const {
  const std::size_t n = grid_.size();
  double mass0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) mass0 += grid_.weight(i) * p[i];

  auto half_step = [&](const DriftDiffusion& dd) {
    if (plan.startup) {
      for (int k = 0; k < 2; ++k) {
        for (std::size_t i = 0; i < n; ++i) ws.r[i] = dd.w[i] * p[i];
        dd.solve(ws.r.data(), p.data());
      }
      stats.stencil_evaluations += 2;
    } else {
      dd.rhs(p.data(), ws.r.data(), dd.c);
      dd.solve(ws.r.data(), p.data());
      stats.stencil_evaluations += 1;
    }
  };

  if (plan.first) half_step(*plan.first);

  if (plan.jump) {
    const double dt = plan.dt;
    const JumpOperator& J = *plan.jump;
    double leak_rate0 = 0.0, leak_rate1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) leak_rate0 += J.leak[j] * p[j];
    jump_rate_of_change(plan, p, ws.j0, ws);
    for (std::size_t i = 0; i < n; ++i) ws.p1[i] = p[i] + dt * ws.j0[i];
    for (std::size_t j = 0; j < n; ++j) leak_rate1 += J.leak[j] * ws.p1[j];
    jump_rate_of_change(plan, ws.p1, ws.j1, ws);
    for (std::size_t i = 0; i < n; ++i) p[i] += 0.5 * dt * (ws.j0[i] + ws.j1[i]);
    stats.jump_evaluations += 2;
    stats.leaked_mass += 0.5 * dt * (leak_rate0 + leak_rate1) / mass0;
  }

  if (plan.second) half_step(*plan.second);

  double mass1 = 0.0, clipped = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mass1 += grid_.weight(i) * p[i];
    if (p[i] < 0.0) {
      stats.min_value = std::min(stats.min_value, p[i]);
      clipped -= grid_.weight(i) * p[i];
      p[i] = 0.0;
    }
  }
  if (!std::isfinite(mass1)) throw NumericalContractError(fmt::format("non-finite density at t={}", plan.t + plan.dt));
  stats.max_mass_drift = std::max(stats.max_mass_drift, std::fabs(mass1 - mass0) / mass0);
  stats.max_clipped_mass = std::max(stats.max_clipped_mass, clipped / mass0);
  const double mass = mass1 + clipped;
  for (std::size_t i = 0; i < n; ++i) p[i] /= mass;
  ++stats.steps;
  if (stats.leaked_mass > options_.leak_limit)
    throw NumericalContractError(fmt::format(
        "jump mass leaving the domain reached {} (limit {}) by t={}; widen the grid", stats.leaked_mass,
        options_.leak_limit, plan.t + plan.dt));
}

}  // namespace jdi
