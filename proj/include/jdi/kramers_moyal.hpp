#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "jdi/density_field.hpp"
#include "jdi/model.hpp"
#include "jdi/simulate.hpp"

namespace jdi {

/// Binned estimates of B_n(x) = E[dX^n | X = x] / dt, orders 1..n_max.
struct PropagatorMoments {
  std::vector<double> bin_edges;    // bins + 1 entries
  std::vector<double> bin_centers;
  int n_max = 0;
  std::vector<double> estimates;        // bins x n_max, row-major; NaN where unusable
  std::vector<double> standard_errors;  // same layout
  std::vector<std::size_t> counts;
  std::vector<bool> usable;  // count >= min_count
  std::vector<bool> edge;    // first and last bin
  double dt_used = 0.0;
  std::size_t min_count = 50;
  double median = 0.0;

  std::size_t bins() const { return bin_centers.size(); }
  double estimate(std::size_t bin, int order) const { return estimates[bin * n_max + (order - 1)]; }
  double standard_error(std::size_t bin, int order) const { return standard_errors[bin * n_max + (order - 1)]; }
  /// The bin holding the sample median of the starting states.
  std::size_t central_bin() const;
  /// The middle half of the bins.
  std::vector<std::size_t> central_bins() const;

  void write_csv(std::ostream& out) const;
};

struct KmOptions {
  std::size_t min_count = 50;
};

/// Increments between recorded times t_index and t_index + 1.
PropagatorMoments estimate_km(const PathEnsemble& ensemble, int n_max, int bins, std::size_t t_index,
                              const KmOptions& options = {});
/// Pooled increments over consecutive recorded pairs (k, k+1) for k in [first, last).
PropagatorMoments estimate_km(const PathEnsemble& ensemble, int n_max, int bins, std::size_t first,
                              std::size_t last, const KmOptions& options = {});

/// Truncated series sum_{n=1}^{order} (-1)^n / n! d^n(B_n p)/dx^n with analytic B_n.
std::vector<double> km_series_rhs(const DensityField& p, const ChannelModel& model, int order, double t);

}  // namespace jdi
