#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "jdi/density_field.hpp"
#include "jdi/model.hpp"

namespace jdi {

struct SolverStats {
  std::size_t steps = 0;
  double max_mass_drift = 0.0;     // per step, before renormalisation
  double max_clipped_mass = 0.0;   // per step
  double min_value = 0.0;          // most negative value seen before clipping
  double leaked_mass = 0.0;        // jump mass that left the domain and was redeposited
  std::size_t jump_evaluations = 0;
  std::size_t stencil_evaluations = 0;

  void merge(const SolverStats& other);
};

enum class JumpMethod { automatic, direct, fft };

struct SolverOptions {
  JumpMethod jump_method = JumpMethod::automatic;
  int startup_steps = 2;       // steps whose drift-diffusion halves use two backward-Euler substeps
  double leak_limit = 1e-4;
  double max_jump_step = 0.1;  // bound on lambda * dt for the explicit jump step
};

/// Split-step solver for dp/dt = -(a p)' + (b p)''/2 + jump gain - lambda p on a reflecting grid.
///
/// Drift-diffusion uses a vertex-centred finite-volume flux with Chang-Cooper weighting and
/// Crank-Nicolson half steps; the jump integral is an explicit Heun step in between.
class KolmogorovSolver {
 public:
  struct Plan;
  struct Workspace;
  struct WorkspaceDeleter {
    void operator()(Workspace* ws) const;
  };
  using WorkspacePtr = std::unique_ptr<Workspace, WorkspaceDeleter>;

  KolmogorovSolver(const ChannelModel& model, const Grid& grid, SolverOptions options = {});
  ~KolmogorovSolver();

  const Grid& grid() const noexcept { return grid_; }

  std::shared_ptr<const Plan> plan(double t, double dt, bool startup) const;
  WorkspacePtr make_workspace() const;
  /// Advance a unit-mass density in place by one step.
  void apply(const Plan& plan, std::span<double> p, Workspace& ws, SolverStats& stats) const;
  /// Jump gain minus loss, exposed for tests.
  void jump_rate_of_change(const Plan& plan, std::span<const double> p, std::span<double> out, Workspace& ws) const;

  bool has_jumps() const noexcept { return jumps_; }
  bool has_differential() const noexcept { return differential_; }

 private:
  const ChannelModel& model_;
  Grid grid_;
  SolverOptions options_;
  bool jumps_, differential_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<double, bool>, std::shared_ptr<const Plan>> cache_;
};

/// The model's initial law on a grid, normalised to unit trapezoid mass.
DensityField initial_density(const ChannelModel& model, const Grid& grid);
/// Gaussian of standard deviation 2 dx centred at x0, unit mass.
std::vector<double> mollified_point_mass(const Grid& grid, double x0);

DensityField evolve_density(const ChannelModel& model, const DensityField& p0, double t0, double t1, double dt,
                            SolverStats* stats = nullptr, const SolverOptions& options = {});

/// One pass from t0 through every requested time (ascending, > t0).
std::vector<DensityField> evolve_density_series(const ChannelModel& model, const DensityField& p0, double t0,
                                                const std::vector<double>& times, double dt,
                                                SolverStats* stats = nullptr, const SolverOptions& options = {});

struct JointOptions {
  std::optional<Grid> x0_grid;  // default: p0's grid trimmed where p0 < trim * max p0
  double trim = 1e-14;
  std::size_t workers = 0;
  SolverOptions solver;
};

JointDensity evolve_joint(const ChannelModel& model, const DensityField& p0, double t, double dt,
                          SolverStats* stats = nullptr, const JointOptions& options = {});
std::vector<JointDensity> evolve_joint_series(const ChannelModel& model, const DensityField& p0, double t0,
                                              const std::vector<double>& times, double dt,
                                              SolverStats* stats = nullptr, const JointOptions& options = {});

struct SpectralOptions {
  double quadrature_tolerance = 1e-10;
  double aliasing_limit = 1e-6;
};

/// Fourier solution for state-homogeneous models, from p0.time() to t.
DensityField additive_closed_form(const ChannelModel& model, const DensityField& p0, double t,
                                  const SpectralOptions& options = {});

}  // namespace jdi
