#include "jdi/simulate.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "jdi/error.hpp"
#include "jdi/parallel.hpp"

namespace jdi {

void PathEnsemble::write_csv(std::ostream& out) const {
  out << "path,time,state\n";
  const std::size_t T = times.size();
  for (std::size_t p = 0; p < paths; ++p)
    for (std::size_t k = 0; k < T; ++k) fmt::print(out, "{},{},{}\n", p, times[k], states[p * T + k]);
}

double propagator_step(const ChannelModel& m, double x, double t, double dt, RngStream& rng) {
  if (!(dt > 0.0)) throw NumericalContractError(fmt::format("propagator step needs dt > 0, got {}", dt));
  const double lambda = m.jump_rate(x, t);
  if (lambda * dt > 1.0)
    throw NumericalContractError(fmt::format("step too large: lambda*dt = {} > 1 at x={} t={}", lambda * dt, x, t));
  const double a = m.drift(x, t);
  const double b = m.diffusion(x, t);
  if (b < 0.0) throw EvaluationError(fmt::format("negative diffusion {} at x={} t={}", b, x, t));
  // fixed draw order: Z, then the jump indicator, then the jump size
  const double z = rng.normal();
  const double u = rng.uniform();
  double jump = 0.0;
  if (u < lambda * dt) {
    const KernelShape k = m.kernel.at(x, t);
    const double v = rng.uniform();
    const double g = rng.normal();
    jump = k.sample(v, g);
  }
  const double next = x + a * dt + std::sqrt(b * dt) * z + jump;
  if (!std::isfinite(next)) throw NumericalContractError(fmt::format("non-finite state after step from x={} t={}", x, t));
  return next;
}

namespace {

// Inverse-CDF sampler for a tabulated initial density.
struct TabulatedLaw {
  Grid grid;
  std::vector<double> cdf;

  explicit TabulatedLaw(const ChannelModel& m) : grid(m.initial.grid), cdf(grid.size(), 0.0) {
    std::vector<double> p(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) p[i] = m.initial.density(grid.x(i), 0.0);
    for (std::size_t i = 1; i < grid.size(); ++i) cdf[i] = cdf[i - 1] + 0.5 * grid.dx() * (p[i - 1] + p[i]);
    const double total = cdf.back();
    for (auto& c : cdf) c /= total;
  }

  double draw(double u) const {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t j = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - cdf.begin(), 1), cdf.size() - 1);
    const double span = cdf[j] - cdf[j - 1];
    const double f = span > 0.0 ? (u - cdf[j - 1]) / span : 0.5;
    return grid.x(j - 1) + f * grid.dx();
  }
};

double draw_initial(const ChannelModel& m, const TabulatedLaw* table, RngStream& rng) {
  switch (m.initial.kind) {
    case InitialLaw::Kind::gaussian: return m.initial.mean + m.initial.std * rng.normal();
    case InitialLaw::Kind::point: return m.initial.x0;
    case InitialLaw::Kind::density: return table->draw(rng.uniform());
  }
  return 0.0;
}

}  // namespace

double sample_initial(const ChannelModel& model, RngStream& rng) {
  if (model.initial.kind == InitialLaw::Kind::density) {
    TabulatedLaw table(model);
    return draw_initial(model, &table, rng);
  }
  return draw_initial(model, nullptr, rng);
}

PathEnsemble simulate_ensemble(const ChannelModel& model, const std::vector<double>& schedule, std::size_t paths,
                               double step_dt, std::uint64_t seed, const SimulationOptions& options) {
  if (schedule.empty()) throw ConfigError("simulation schedule is empty");
  if (paths < 1) throw ConfigError("simulation needs at least one path");
  if (!(step_dt > 0.0)) throw ConfigError(fmt::format("step_dt must be > 0, got {}", step_dt));
  const std::size_t T = schedule.size();
  if (paths > options.max_entries / T)
    throw NumericalContractError(fmt::format("ensemble of {} paths x {} times exceeds the memory budget of {} entries",
                                             paths, T, options.max_entries));

  // global step index at each recorded time
  std::vector<std::uint64_t> mark(T, 0);
  for (std::size_t k = 1; k < T; ++k) {
    const double gap = schedule[k] - schedule[k - 1];
    if (!(gap > 0.0)) throw ConfigError("simulation schedule must be strictly ascending");
    const double steps = std::round(gap / step_dt);
    if (steps < 1.0 || std::fabs(steps * step_dt - gap) > 1e-12 * std::max(1.0, gap))
      throw ConfigError(fmt::format("step_dt={} does not divide the schedule gap {} (between t={} and t={})", step_dt,
                                    gap, schedule[k - 1], schedule[k]));
    mark[k] = mark[k - 1] + static_cast<std::uint64_t>(steps);
  }
  if (mark.back() >= RngStream::kInitialStep) throw ConfigError("too many simulation steps");

  PathEnsemble e;
  e.times = schedule;
  e.paths = paths;
  e.seed = seed;
  e.step_dt = step_dt;
  e.states.assign(paths * T, 0.0);

  std::unique_ptr<TabulatedLaw> table;
  if (model.initial.kind == InitialLaw::Kind::density) table = std::make_unique<TabulatedLaw>(model);
  const double t0 = schedule.front();

  parallel_for(paths, options.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      RngStream init(seed, p, RngStream::kInitialStep);
      double x = draw_initial(model, table.get(), init);
      double* row = e.states.data() + p * T;
      row[0] = x;
      std::uint64_t s = 0;
      for (std::size_t k = 1; k < T; ++k) {
        for (; s < mark[k]; ++s) {
          RngStream rng(seed, p, static_cast<std::uint32_t>(s));
          x = propagator_step(model, x, t0 + static_cast<double>(s) * step_dt, step_dt, rng);
        }
        row[k] = x;
      }
    }
  });
  return e;
}

DensityField propagator_density(const ChannelModel& m, double x, double t, double dt) {
  const double b = m.diffusion(x, t);
  if (!(b > 0.0)) throw NumericalContractError("degenerate diffusion; use jump-only comparison");
  const double s = std::sqrt(b * dt);
  const double c = m.drift(x, t) * dt;
  double lo = c - 8.0 * s, hi = c + 8.0 * s;
  if (m.jump_rate(x, t) > 0.0) {
    auto [klo, khi] = m.kernel.at(x, t).support();
    lo = std::min(lo, klo);
    hi = std::max(hi, khi);
  }
  const double h = s / 8.0;
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / h)) + 1;
  if (n > 20'000'000) throw NumericalContractError("propagator density grid would exceed 2e7 nodes");
  return propagator_density(m, x, t, dt, Grid(lo, lo + static_cast<double>(n - 1) * h, std::max<std::size_t>(n, 16)));
}

DensityField propagator_density(const ChannelModel& m, double x, double t, double dt, const Grid& g) {
  const double lambda = m.jump_rate(x, t);
  if (!(lambda * dt < 1.0)) throw NumericalContractError(fmt::format("lambda*dt = {} must be < 1", lambda * dt));
  const double b = m.diffusion(x, t);
  if (!(b > 0.0)) throw NumericalContractError("degenerate diffusion; use jump-only comparison");
  const double var = b * dt;
  const double c = m.drift(x, t) * dt;
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * var);
  std::vector<double> v(g.size());
  KernelShape k{};
  if (lambda > 0.0) k = m.kernel.at(x, t);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double xi = g.x(i);
    const double gauss = norm * std::exp(-0.5 * (xi - c) * (xi - c) / var);
    v[i] = (1.0 - lambda * dt) * gauss + (lambda > 0.0 ? lambda * dt * k.pdf(xi) : 0.0);
  }
  return DensityField(g, std::move(v), t);
}

std::vector<double> propagator_draws(const ChannelModel& m, double x, double t, double dt, std::size_t count,
                                     std::uint64_t seed, std::size_t workers) {
  std::vector<double> out(count);
  parallel_for(count, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      RngStream rng(seed, i, 0);
      out[i] = propagator_step(m, x, t, dt, rng) - x;
    }
  });
  return out;
}

}  // namespace jdi
