#include <fmt/format.h>

#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "jdi/config.hpp"
#include "jdi/density.hpp"
#include "jdi/error.hpp"
#include "jdi/kramers_moyal.hpp"
#include "jdi/simulate.hpp"
#include "jdi/verifier.hpp"

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<int> series_order;
  std::optional<double> tolerance;
  bool spectral = false;
};

fs::path output_dir(const Flags& f, const jdi::RunConfig& c) {
  fs::path dir = f.out.empty() ? fs::path(c.output.directory) : fs::path(f.out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw jdi::ConfigError(fmt::format("cannot write '{}'", p.string()));
  return out;
}

// Wall-clock stamps live only here so that every other output is reproducible.
void log_run(const fs::path& dir, const std::string& command, const Flags& f) {
  std::ofstream log(dir / "run.log", std::ios::app);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  log << stamp << ' ' << command << " config=" << f.config << '\n';
}

void apply_overrides(const Flags& f, jdi::RunConfig& c) {
  if (f.seed) c.monte_carlo.seed = *f.seed;
  if (f.paths) c.monte_carlo.paths = *f.paths;
  if (f.series_order) c.series_order = *f.series_order;
  for (auto& e : c.experiments) {
    if (f.seed) e.scenario.seed = *f.seed;
    if (f.paths) e.scenario.paths = *f.paths;
    if (f.series_order) e.scenario.series_order = *f.series_order;
    if (f.tolerance) e.scenario.tolerance = *f.tolerance;
  }
}

std::vector<double> record_times(const jdi::RunConfig& c) {
  return c.record.empty() ? std::vector<double>{c.t1} : c.record;
}

int cmd_validate(const jdi::RunConfig& c) {
  for (const auto& [name, mc] : c.models) {
    const auto m = jdi::build_model(mc);
    fmt::print("model {}\n  drift      a(x,t) = {}\n  diffusion  b(x,t) = {}\n  jump rate  lambda = {}\n", name,
               m.drift.source(), m.diffusion.source(), m.jump_rate.source());
    fmt::print("  kernel     {}({}, {})\n", jdi::to_string(m.kernel.family()), m.kernel.first().source(),
               m.kernel.second().source());
    fmt::print("  grid       {}\n", mc.grid.describe());
    fmt::print("  {:>10} {:>10} {:>14} {:>14} {:>14}\n", "x", "t", "a", "b", "lambda");
    const double xs[] = {mc.grid.x_min(), 0.5 * (mc.grid.x_min() + mc.grid.x_max()), mc.grid.x_max()};
    for (double t : {mc.t0, mc.t1})
      for (double x : xs)
        fmt::print("  {:>10.4g} {:>10.4g} {:>14.6g} {:>14.6g} {:>14.6g}\n", x, t, m.drift(x, t), m.diffusion(x, t),
                   m.jump_rate(x, t));
  }
  fmt::print("{} experiment entries\n", c.experiments.size());
  return 0;
}

int cmd_simulate(const jdi::RunConfig& c, const fs::path& dir) {
  const auto m = jdi::build_model(c.model_config(c.main_model));
  std::vector<double> schedule{c.t0};
  for (double t : record_times(c)) schedule.push_back(t);
  jdi::SimulationOptions so;
  so.workers = c.monte_carlo.workers;
  const auto e = jdi::simulate_ensemble(m, schedule, c.monte_carlo.paths, c.monte_carlo.step_dt, c.monte_carlo.seed, so);
  auto out = open_out(dir / "ensemble.csv");
  e.write_csv(out);
  fmt::print("{} paths at {} times written to {}\n", e.paths, e.times.size(), (dir / "ensemble.csv").string());
  return 0;
}

int cmd_density(const jdi::RunConfig& c, const fs::path& dir, bool spectral) {
  const auto m = jdi::build_model(c.model_config(c.main_model));
  const auto times = record_times(c);
  const auto p0 = jdi::initial_density(m, c.grid);
  jdi::SolverStats stats;
  const auto series = jdi::evolve_density_series(m, p0, c.t0, times, c.dt, &stats);
  {
    auto out = open_out(dir / "density.csv");
    out << "time,x,p\n";
    for (const auto& p : series)
      for (std::size_t i = 0; i < p.grid().size(); ++i)
        out << fmt::format("{:.12g},{:.12g},{:.17g}\n", p.time(), p.grid().x(i), p[i]);
  }
  {
    auto log = open_out(dir / "solver.csv");
    log << "steps,max_mass_drift,max_clipped_mass,min_value,leaked_mass\n";
    log << fmt::format("{},{:.6g},{:.6g},{:.6g},{:.6g}\n", stats.steps, stats.max_mass_drift, stats.max_clipped_mass,
                       stats.min_value, stats.leaked_mass);
  }
  fmt::print("{} steps; max mass drift {:.3g}, max clipped mass {:.3g}\n", stats.steps, stats.max_mass_drift,
             stats.max_clipped_mass);
  if (spectral) {
    jdi::DensityField start(p0.grid(), std::vector<double>(p0.values().begin(), p0.values().end()), c.t0);
    auto out = open_out(dir / "density_spectral.csv");
    out << "time,x,p\n";
    for (std::size_t k = 0; k < times.size(); ++k) {
      const auto q = jdi::additive_closed_form(m, start, times[k]);
      for (std::size_t i = 0; i < q.grid().size(); ++i)
        out << fmt::format("{:.12g},{:.12g},{:.17g}\n", times[k], q.grid().x(i), q[i]);
      fmt::print("t={}: L1(grid, spectral) = {:.4g}\n", times[k], jdi::l1_distance(series[k], q));
    }
  }
  return 0;
}

int cmd_km(const jdi::RunConfig& c, const fs::path& dir) {
  const auto m = jdi::build_model(c.model_config(c.main_model));
  const auto& mc = c.monte_carlo;
  std::vector<double> schedule(mc.window + 1);
  for (std::size_t k = 0; k <= mc.window; ++k) schedule[k] = c.t0 + static_cast<double>(k) * mc.step_dt;
  jdi::SimulationOptions so;
  so.workers = mc.workers;
  const auto e = jdi::simulate_ensemble(m, schedule, mc.paths, mc.step_dt, mc.seed, so);
  const auto pm = jdi::estimate_km(e, c.km.max_order, c.km.bins, 0, mc.window);
  {
    auto out = open_out(dir / "km.csv");
    pm.write_csv(out);
  }
  const double t_mid = 0.5 * (schedule.front() + schedule.back());
  auto out = open_out(dir / "km_comparison.csv");
  out << "bin_center,order,estimate,analytic,rel_error\n";
  fmt::print("{:>10} {:>5} {:>14} {:>14} {:>10}\n", "x", "order", "estimate", "analytic", "rel_error");
  for (std::size_t b = 0; b < pm.bins(); ++b) {
    if (!pm.usable[b]) continue;
    for (int n = 1; n <= pm.n_max; ++n) {
      const double est = pm.estimate(b, n);
      const double ana = jdi::analytic_km_coefficient(m, n, pm.bin_centers[b], t_mid);
      const double rel = ana != 0.0 ? std::fabs(est - ana) / std::fabs(ana) : std::fabs(est);
      out << fmt::format("{:.12g},{},{:.12g},{:.12g},{:.6g}\n", pm.bin_centers[b], n, est, ana, rel);
      fmt::print("{:>10.4g} {:>5} {:>14.6g} {:>14.6g} {:>10.3g}\n", pm.bin_centers[b], n, est, ana, rel);
    }
  }
  return 0;
}

int cmd_verify(const jdi::RunConfig& c, const fs::path& dir) {
  const auto entries = jdi::suite_entries(c);
  const auto suite = jdi::run_suite(entries, 1);
  if (c.output.wants("csv")) {
    auto out = open_out(dir / "report.csv");
    suite.write_csv(out);
  }
  if (c.output.wants("json")) {
    auto out = open_out(dir / "report.json");
    suite.write_json(out);
  }
  {
    auto out = open_out(dir / "summary.txt");
    suite.write_summary(out);
  }
  suite.write_summary(std::cout);
  const std::size_t failures = suite.failed();
  return failures == 0 ? 0 : static_cast<int>(std::min<std::size_t>(2 + failures, 125));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jdinfo: jump-diffusion channel densities and information identities"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config,--config", f.config, "run configuration (YAML)")->required();
    sub->add_option("--out", f.out, "output directory (overrides output.directory)");
    sub->add_option("--seed", f.seed, "random seed (overrides the config)");
    sub->add_option("--paths", f.paths, "Monte Carlo path count");
    sub->add_option("--series-order", f.series_order, "truncation order of the series identities");
    sub->add_option("--tolerance", f.tolerance, "tolerance applied to every identity");
  };
  auto* validate = app.add_subcommand("validate", "check a configuration and print the model summary");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo paths at the record times");
  auto* density = app.add_subcommand("density", "evolve the density to the record times");
  auto* km = app.add_subcommand("km", "estimate Kramers-Moyal coefficients from simulated paths");
  auto* verify = app.add_subcommand("verify", "run the configured identity checks");
  for (auto* s : {validate, simulate, density, km, verify}) add_common(s);
  density->add_flag("--spectral", f.spectral, "also compute the Fourier solution (state-homogeneous models)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    auto config = jdi::load_run_config(f.config);
    apply_overrides(f, config);
    if (validate->parsed()) return cmd_validate(config);
    const fs::path dir = output_dir(f, config);
    std::string name = app.get_subcommands().front()->get_name();
    log_run(dir, name, f);
    if (simulate->parsed()) return cmd_simulate(config, dir);
    if (density->parsed()) return cmd_density(config, dir, f.spectral);
    if (km->parsed()) return cmd_km(config, dir);
    return cmd_verify(config, dir);
  } catch (const jdi::ModelError& e) {
    fmt::print(stderr, "model error: {}\n", e.what());
    return 1;
  } catch (const jdi::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 1;
  } catch (const jdi::ParseError& e) {
    fmt::print(stderr, "expression error: {}\n", e.what());
    return 1;
  } catch (const jdi::NumericalContractError& e) {
    fmt::print(stderr, "numerical contract violated: {}\n", e.what());
    return 2;
  } catch (const jdi::EvaluationError& e) {
    fmt::print(stderr, "evaluation error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
}
