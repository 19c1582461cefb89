#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jdi/density.hpp"
#include "jdi/info.hpp"
#include "jdi/model.hpp"

namespace jdi {

enum class IdentityId { THM1, LEMMA1, THM3, THM4, THM5, THM6, COR1, COR2, COR3, COR4, COR5, DEBRUIJN, IMMSE };

IdentityId parse_identity(std::string_view name);
std::string_view to_string(IdentityId id);

struct Provenance {
  std::uint64_t config_hash = 0;
  std::string grid;
  double dt = 0.0;
  std::uint64_t seed = 0;
};

struct IdentityReport {
  IdentityId id = IdentityId::DEBRUIJN;
  std::string model;
  double t = 0.0;
  double lhs = 0.0;
  std::vector<TermValue> rhs_terms;
  double rhs_total = 0.0;
  double abs_residual = 0.0;
  double rel_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  Provenance provenance;
  std::vector<std::string> diagnostics;
  double truncation = 0.0;  // series identities: the next two orders' contribution, order vs order + 2
  std::string failure;  // set when the report could not be computed
  SolverStats solver;   // merged statistics of every density solve behind this report
};

/// Settings for one verification entry.
struct Scenario {
  Grid grid{-12.0, 12.0, 1024};
  double t0 = 0.0;
  std::vector<double> times{1.0};
  double dt = 1e-3;
  double delta = 0.0;  // finite-difference step for the LHS; 0 means dt
  int series_order = 4;
  std::optional<double> tolerance;
  std::size_t x0_stride = 4;  // x0 grid uses every k-th xt node (trimmed to the initial support)
  std::size_t workers = 0;
  // Monte Carlo (THM1, LEMMA1)
  std::size_t paths = 100000;
  double step_dt = 1e-3;
  std::uint64_t seed = 20240521;
  int km_bins = 8;
  int km_max_order = 3;
  std::size_t km_window = 200;  // pooled consecutive increments per path
  double probe_x = 0.0;         // LEMMA1 starting point
  std::size_t draws = 1000000;
  double lemma_dt = 0.01;
};

double finite_difference_rate(double q_minus, double q_plus, double delta);

/// Default tolerance applied when the scenario does not set one.
double default_tolerance(IdentityId id);

/// One report per scenario time (per order for THM1). Errors become failed reports.
std::vector<IdentityReport> verify_identity(IdentityId id, const ChannelModel& model, const Scenario& scenario);

/// Several identities on one model and scenario, sharing the density and joint solves.
std::vector<IdentityReport> verify_identities(const std::vector<IdentityId>& ids, const ChannelModel& model,
                                              const Scenario& scenario);

struct SuiteEntry {
  IdentityId id;
  ChannelModel model;
  Scenario scenario;
};

struct SuiteReport {
  std::vector<IdentityReport> reports;
  std::size_t passed() const;
  std::size_t failed() const;
  bool success() const { return failed() == 0; }

  void write_csv(std::ostream& out) const;
  void write_json(std::ostream& out) const;
  void write_summary(std::ostream& out) const;
};

/// Runs entries concurrently; reports keep entry order.
SuiteReport run_suite(const std::vector<SuiteEntry>& entries, std::size_t workers = 1);

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ull);

}  // namespace jdi
