#include "jdi/kramers_moyal.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "jdi/error.hpp"
#include "jdi/stencil.hpp"

namespace jdi {

std::size_t PropagatorMoments::central_bin() const {
  const double lo = bin_edges.front();
  const double w = (bin_edges.back() - lo) / static_cast<double>(bins());
  const auto b = static_cast<long>(std::floor((median - lo) / w));
  return static_cast<std::size_t>(std::clamp<long>(b, 0, static_cast<long>(bins()) - 1));
}

std::vector<std::size_t> PropagatorMoments::central_bins() const {
  std::vector<std::size_t> out;
  const std::size_t B = bins();
  for (std::size_t b = B / 4; b < B - B / 4; ++b) out.push_back(b);
  return out;
}

void PropagatorMoments::write_csv(std::ostream& out) const {
  out << "bin_center,order,estimate,stderr,count\n";
  for (std::size_t b = 0; b < bins(); ++b)
    for (int n = 1; n <= n_max; ++n) {
      if (usable[b])
        fmt::print(out, "{},{},{},{},{}\n", bin_centers[b], n, estimate(b, n), standard_error(b, n), counts[b]);
      else
        fmt::print(out, "{},{},nan,nan,{}\n", bin_centers[b], n, counts[b]);
    }
}

PropagatorMoments estimate_km(const PathEnsemble& e, int n_max, int bins, std::size_t t_index,
                              const KmOptions& options) {
  return estimate_km(e, n_max, bins, t_index, t_index + 1, options);
}

PropagatorMoments estimate_km(const PathEnsemble& e, int n_max, int bins, std::size_t first, std::size_t last,
                              const KmOptions& options) {
  if (n_max < 1 || n_max > 6) throw ConfigError(fmt::format("n_max must be in 1..6, got {}", n_max));
  if (bins < 8) throw ConfigError(fmt::format("at least 8 bins are required, got {}", bins));
  const std::size_t T = e.times.size();
  if (T < 2 || last <= first || last >= T)
    throw ConfigError(fmt::format("need recorded times {}..{} but the ensemble has {}", first, last, T));
  const double dt = e.times[first + 1] - e.times[first];
  for (std::size_t k = first; k < last; ++k) {
    const double gap = e.times[k + 1] - e.times[k];
    if (std::fabs(gap - dt) > 1e-9 * dt)
      throw ConfigError(fmt::format("non-uniform recording interval: {} vs {}", gap, dt));
  }

  std::vector<double> starts;
  starts.reserve(e.paths * (last - first));
  for (std::size_t p = 0; p < e.paths; ++p)
    for (std::size_t k = first; k < last; ++k) starts.push_back(e.state(p, k));
  const std::size_t S = starts.size();
  if (S < static_cast<std::size_t>(bins) * options.min_count)
    throw NumericalContractError(fmt::format("insufficient samples: {} increments for {} bins", S, bins));

  auto quantile = [&](std::vector<double>& v, double q) {
    const auto k = static_cast<std::size_t>(q * static_cast<double>(v.size() - 1));
    std::nth_element(v.begin(), v.begin() + static_cast<long>(k), v.end());
    return v[k];
  };
  std::vector<double> sorted(starts);
  const double q01 = quantile(sorted, 0.01);
  const double q99 = quantile(sorted, 0.99);
  const double med = quantile(sorted, 0.5);
  if (!(q99 > q01)) throw NumericalContractError("starting states are degenerate; cannot bin");

  PropagatorMoments pm;
  pm.n_max = n_max;
  pm.dt_used = dt;
  pm.min_count = options.min_count;
  pm.median = med;
  const double width = (q99 - q01) / bins;
  for (int b = 0; b <= bins; ++b) pm.bin_edges.push_back(q01 + b * width);
  pm.bin_edges.back() = q99;
  for (int b = 0; b < bins; ++b) pm.bin_centers.push_back(q01 + (b + 0.5) * width);

  std::vector<double> sum(bins * n_max, 0.0), sumsq(bins * n_max, 0.0);
  pm.counts.assign(bins, 0);
  for (std::size_t p = 0; p < e.paths; ++p) {
    for (std::size_t k = first; k < last; ++k) {
      const double x = e.state(p, k);
      if (x < q01 || x > q99) continue;
      const auto b = std::min<long>(static_cast<long>((x - q01) / width), bins - 1);
      const double d = e.state(p, k + 1) - x;
      double pw = 1.0;
      ++pm.counts[b];
      for (int n = 0; n < n_max; ++n) {
        pw *= d;
        sum[b * n_max + n] += pw;
        sumsq[b * n_max + n] += pw * pw;
      }
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  pm.estimates.assign(bins * n_max, nan);
  pm.standard_errors.assign(bins * n_max, nan);
  pm.usable.assign(bins, false);
  pm.edge.assign(bins, false);
  pm.edge.front() = pm.edge.back() = true;
  for (int b = 0; b < bins; ++b) {
    const std::size_t c = pm.counts[b];
    if (c < options.min_count) continue;
    pm.usable[b] = true;
    for (int n = 0; n < n_max; ++n) {
      const double mean = sum[b * n_max + n] / c;
      const double var = std::max(0.0, sumsq[b * n_max + n] / c - mean * mean) * c / (c - 1);
      pm.estimates[b * n_max + n] = mean / dt;
      pm.standard_errors[b * n_max + n] = std::sqrt(var / c) / dt;
    }
  }
  return pm;
}

std::vector<double> km_series_rhs(const DensityField& p, const ChannelModel& model, int order, double t) {
  if (order < 2) throw ConfigError(fmt::format("series order must be >= 2, got {}", order));
  if (order > 8) throw NumericalContractError(fmt::format("series order {} exceeds 8 (stencil conditioning)", order));
  const Grid& g = p.grid();
  if (g.size() < 4u * static_cast<std::size_t>(order))
    throw NumericalContractError(fmt::format("grid of {} nodes is too small for order {}", g.size(), order));
  std::vector<double> rhs(g.size(), 0.0);
  double factorial = 1.0;
  for (int n = 1; n <= order; ++n) {
    factorial *= n;
    if (n >= 3 && model.jump_free()) continue;
    const auto B = km_coefficient_field(model, n, g, t);
    std::vector<double> prod(g.size());
    bool any = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
      prod[i] = B[i] * p[i];
      any = any || prod[i] != 0.0;
    }
    if (!any) continue;
    const auto d = derivative_zero_extended(prod, n, g.dx());
    const double c = (n % 2 ? -1.0 : 1.0) / factorial;
    for (std::size_t i = 0; i < g.size(); ++i) rhs[i] += c * d[i];
  }
  return rhs;
}

}  // namespace jdi
