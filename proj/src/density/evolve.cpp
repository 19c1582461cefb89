#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>

#include "jdi/density.hpp"
#include "jdi/error.hpp"
#include "jdi/parallel.hpp"

namespace jdi {

namespace {

std::vector<double> gaussian_on(const Grid& g, double mean, double sd) {
  std::vector<double> v(g.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double z = (g.x(i) - mean) / sd;
    v[i] = std::exp(-0.5 * z * z);
    mass += g.weight(i) * v[i];
  }
  if (!(mass > 0.0)) throw NumericalContractError(fmt::format("gaussian N({}, {}^2) has no mass on grid {}", mean, sd, g.describe()));
  for (auto& y : v) y /= mass;
  return v;
}

void check_normalized(const DensityField& p0) {
  if (std::fabs(p0.mass() - 1.0) > 1e-6)
    throw NumericalContractError(fmt::format("initial density must be normalized, mass is {}", p0.mass()));
}

// Step counts per segment so that each segment lands exactly on its record time.
struct Segment {
  double start, end;
  std::size_t steps;
};

std::vector<Segment> segments(double t0, const std::vector<double>& times, double dt) {
  if (!(dt > 0.0)) throw ConfigError(fmt::format("dt must be > 0, got {}", dt));
  std::vector<Segment> out;
  double prev = t0;
  for (double t : times) {
    if (!(t > prev)) throw ConfigError(fmt::format("record times must be ascending and after t0={}", t0));
    const double n = std::ceil((t - prev) / dt - 1e-9);
    out.push_back({prev, t, static_cast<std::size_t>(std::max(1.0, n))});
    prev = t;
  }
  return out;
}

}  // namespace

std::vector<double> mollified_point_mass(const Grid& grid, double x0) { return gaussian_on(grid, x0, 2.0 * grid.dx()); }

DensityField initial_density(const ChannelModel& model, const Grid& grid) {
  const InitialLaw& law = model.initial;
  switch (law.kind) {
    case InitialLaw::Kind::gaussian: return DensityField(grid, gaussian_on(grid, law.mean, law.std), 0.0);
    case InitialLaw::Kind::point: return DensityField(grid, mollified_point_mass(grid, law.x0), 0.0);
    case InitialLaw::Kind::density: {
      std::vector<double> v(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        v[i] = law.density(grid.x(i), 0.0);
        if (v[i] < 0.0) throw ModelError({fmt::format("initial density negative at x={}", grid.x(i))});
      }
      return DensityField(grid, std::move(v), 0.0).normalized();
    }
  }
  return {};
}

std::vector<DensityField> evolve_density_series(const ChannelModel& model, const DensityField& p0, double t0,
                                                const std::vector<double>& times, double dt, SolverStats* stats,
                                                const SolverOptions& options) {
  check_normalized(p0);
  KolmogorovSolver solver(model, p0.grid(), options);
  auto ws = solver.make_workspace();
  SolverStats local;
  std::vector<double> p(p0.values().begin(), p0.values().end());
  std::vector<DensityField> out;
  std::size_t global = 0;
  for (const auto& seg : segments(t0, times, dt)) {
    const double h = (seg.end - seg.start) / static_cast<double>(seg.steps);
    for (std::size_t s = 0; s < seg.steps; ++s, ++global) {
      const double t = seg.start + static_cast<double>(s) * h;
      auto plan = solver.plan(t, h, global < static_cast<std::size_t>(options.startup_steps));
      solver.apply(*plan, p, *ws, local);
    }
    out.emplace_back(p0.grid(), p, seg.end);
  }
  if (stats) stats->merge(local);
  return out;
}

DensityField evolve_density(const ChannelModel& model, const DensityField& p0, double t0, double t1, double dt,
                            SolverStats* stats, const SolverOptions& options) {
  return evolve_density_series(model, p0, t0, {t1}, dt, stats, options).front();
}

std::vector<JointDensity> evolve_joint_series(const ChannelModel& model, const DensityField& p0, double t0,
                                              const std::vector<double>& times, double dt, SolverStats* stats,
                                              const JointOptions& options) {
  check_normalized(p0);
  const Grid& gt = p0.grid();
  Grid g0;
  if (options.x0_grid) {
    g0 = *options.x0_grid;
  } else {
    const double cut = options.trim * p0.max_value();
    std::size_t lo = 0, hi = gt.size() - 1;
    while (lo < hi && p0[lo] < cut) ++lo;
    while (hi > lo && p0[hi] < cut) --hi;
    if (hi - lo + 1 < 16) {
      const std::size_t pad = (16 - (hi - lo + 1) + 1) / 2;
      lo = lo >= pad ? lo - pad : 0;
      hi = std::min(gt.size() - 1, lo + 15);
    }
    g0 = Grid(gt.x(lo), gt.x(hi), hi - lo + 1);
  }

  // x0 weights pi_i = p0(x0_i), normalised on grid0
  std::vector<double> pi(g0.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < g0.size(); ++i) {
    pi[i] = p0.interpolate(g0.x(i));
    mass += g0.weight(i) * pi[i];
  }
  if (!(mass > 0.0)) throw NumericalContractError("initial density has no mass on the x0 grid");
  for (auto& v : pi) v /= mass;

  const std::size_t R = g0.size(), C = gt.size();
  std::vector<double> rows(R * C);
  for (std::size_t i = 0; i < R; ++i) {
    auto m = mollified_point_mass(gt, g0.x(i));
    std::copy(m.begin(), m.end(), rows.begin() + i * C);
  }

  // Rows far out in the x0 tail may leak freely; the limit applies to the weighted joint leak.
  SolverOptions row_options = options.solver;
  row_options.leak_limit = std::numeric_limits<double>::infinity();
  KolmogorovSolver solver(model, gt, row_options);
  std::vector<SolverStats> row_stats(R);
  auto weighted_leak = [&] {
    double leaked = 0.0;
    for (std::size_t i = 0; i < R; ++i) leaked += g0.weight(i) * pi[i] * row_stats[i].leaked_mass;
    return leaked;
  };
  std::vector<JointDensity> out;
  std::size_t global = 0;
  for (const auto& seg : segments(t0, times, dt)) {
    const double h = (seg.end - seg.start) / static_cast<double>(seg.steps);
    for (std::size_t s = 0; s < seg.steps; ++s, ++global) {
      const double t = seg.start + static_cast<double>(s) * h;
      auto plan = solver.plan(t, h, global < static_cast<std::size_t>(options.solver.startup_steps));
      parallel_for(R, options.workers, [&](std::size_t b, std::size_t e) {
        auto ws = solver.make_workspace();
        for (std::size_t i = b; i < e; ++i)
          solver.apply(*plan, std::span<double>(rows.data() + i * C, C), *ws, row_stats[i]);
      });
    }
    if (const double leaked = weighted_leak(); leaked > options.solver.leak_limit)
      throw NumericalContractError(fmt::format(
          "joint jump mass leaving the domain reached {} (limit {}) by t={}; widen the grid", leaked,
          options.solver.leak_limit, seg.end));
    std::vector<double> joint(R * C);
    for (std::size_t i = 0; i < R; ++i)
      for (std::size_t j = 0; j < C; ++j) joint[i * C + j] = pi[i] * rows[i * C + j];
    out.emplace_back(g0, gt, std::move(joint), seg.end, 2.0 * gt.dx());
  }
  if (stats) {
    SolverStats total;
    for (std::size_t i = 0; i < R; ++i) total.merge(row_stats[i]);
    total.leaked_mass = weighted_leak();
    stats->merge(total);
  }
  return out;
}

JointDensity evolve_joint(const ChannelModel& model, const DensityField& p0, double t, double dt, SolverStats* stats,
                          const JointOptions& options) {
  return evolve_joint_series(model, p0, p0.time(), {t}, dt, stats, options).front();
}

}  // namespace jdi
