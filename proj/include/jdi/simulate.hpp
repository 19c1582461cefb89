#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "jdi/density_field.hpp"
#include "jdi/model.hpp"
#include "jdi/rng.hpp"

namespace jdi {

/// Monte Carlo paths recorded at a schedule. states is path-major: states[p * times.size() + k].
struct PathEnsemble {
  std::vector<double> times;
  std::size_t paths = 0;
  std::vector<double> states;
  std::uint64_t seed = 0;
  double step_dt = 0.0;

  double state(std::size_t path, std::size_t k) const { return states[path * times.size() + k]; }
  void write_csv(std::ostream& out) const;
};

struct SimulationOptions {
  std::size_t workers = 0;  // 0: hardware concurrency
  std::size_t max_entries = 250'000'000;
};

/// One Euler step of the propagator: x + a dt + sqrt(b dt) Z + xi Y, Y ~ Bernoulli(lambda dt).
double propagator_step(const ChannelModel& model, double x, double t, double dt, RngStream& rng);

/// Draw from the model's initial law.
double sample_initial(const ChannelModel& model, RngStream& rng);

PathEnsemble simulate_ensemble(const ChannelModel& model, const std::vector<double>& schedule, std::size_t paths,
                               double step_dt, std::uint64_t seed, const SimulationOptions& options = {});

/// The small-dt propagator law (1 - lambda dt) N(a dt, b dt) + lambda dt w(xi|x,t), on a xi grid
/// with spacing sqrt(b dt)/8 covering both components.
DensityField propagator_density(const ChannelModel& model, double x, double t, double dt);
DensityField propagator_density(const ChannelModel& model, double x, double t, double dt, const Grid& xi_grid);

/// Independent single-step increments X_{t+dt} - x, draw i keyed by (seed, i, 0).
std::vector<double> propagator_draws(const ChannelModel& model, double x, double t, double dt, std::size_t count,
                                     std::uint64_t seed, std::size_t workers = 0);

}  // namespace jdi
