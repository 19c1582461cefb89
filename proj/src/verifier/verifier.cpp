#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <numbers>

#include "jdi/error.hpp"
#include "jdi/kramers_moyal.hpp"
#include "jdi/parallel.hpp"
#include "jdi/simulate.hpp"
#include "jdi/verifier.hpp"

namespace jdi {

namespace {

constexpr std::pair<IdentityId, std::string_view> kNames[] = {
    {IdentityId::THM1, "THM1"},   {IdentityId::LEMMA1, "LEMMA1"}, {IdentityId::THM3, "THM3"},
    {IdentityId::THM4, "THM4"},   {IdentityId::THM5, "THM5"},     {IdentityId::THM6, "THM6"},
    {IdentityId::COR1, "COR1"},   {IdentityId::COR2, "COR2"},     {IdentityId::COR3, "COR3"},
    {IdentityId::COR4, "COR4"},   {IdentityId::COR5, "COR5"},     {IdentityId::DEBRUIJN, "DEBRUIJN"},
    {IdentityId::IMMSE, "IMMSE"},
};

constexpr double kInequalitySlack = 1e-4;

}  // namespace

IdentityId parse_identity(std::string_view name) {
  for (auto [id, n] : kNames)
    if (n == name) return id;
  throw ConfigError(fmt::format("unknown identity '{}'", name));
}

std::string_view to_string(IdentityId id) {
  for (auto [i, n] : kNames)
    if (i == id) return n;
  return "?";
}

double finite_difference_rate(double q_minus, double q_plus, double delta) {
  if (!(delta > 0.0)) throw ConfigError(fmt::format("finite-difference step must be > 0, got {}", delta));
  return (q_plus - q_minus) / (2.0 * delta);
}

double default_tolerance(IdentityId id) {
  switch (id) {
    case IdentityId::DEBRUIJN:
    case IdentityId::IMMSE:
    case IdentityId::COR3: return 1e-3;
    case IdentityId::THM1: return 0.05;
    case IdentityId::LEMMA1: return 0.05;
    case IdentityId::COR2: return kInequalitySlack;
    default: return 1e-2;
  }
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t h) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

std::string describe_model(const ChannelModel& m) {
  std::string init;
  switch (m.initial.kind) {
    case InitialLaw::Kind::gaussian: init = fmt::format("gaussian({},{})", m.initial.mean, m.initial.std); break;
    case InitialLaw::Kind::point: init = fmt::format("point({})", m.initial.x0); break;
    case InitialLaw::Kind::density: init = "density(" + m.initial.density.unparse() + ")"; break;
  }
  return fmt::format("a={};b={};lambda={};kernel={}({},{});init={}", m.drift.unparse(), m.diffusion.unparse(),
                     m.jump_rate.unparse(), to_string(m.kernel.family()), m.kernel.first().unparse(),
                     m.kernel.second().unparse(), init);
}

bool is_gaussian_channel(const ChannelModel& m) {
  return m.drift.is_zero() && m.diffusion.constant_value() && *m.diffusion.constant_value() == 1.0 && m.jump_free();
}

// Shared solves for all identities of one (model, scenario).
class Context {
 public:
  Context(const ChannelModel& m, const Scenario& s) : m_(m), s_(s), delta_(s.delta > 0.0 ? s.delta : s.dt) {
    for (double t : s.times)
      for (int k = -2; k <= 2; ++k) {
        const double tk = t + k * delta_;
        if (!(tk > s.t0)) throw ConfigError(fmt::format("time {} is too close to t0={} for the finite-difference stencil", t, s.t0));
        times_.push_back(tk);
      }
    std::sort(times_.begin(), times_.end());
    times_.erase(std::unique(times_.begin(), times_.end(), [](double a, double b) { return std::fabs(a - b) < 1e-12; }),
                 times_.end());
  }

  double delta() const { return delta_; }
  const ChannelModel& model() const { return m_; }
  const Scenario& scenario() const { return s_; }

  const DensityField& density(double t) {
    if (densities_.empty()) {
      auto p0 = initial_density(m_, s_.grid);
      densities_ = evolve_density_series(m_, p0, s_.t0, times_, s_.dt, &density_stats_);
    }
    return densities_[index(t)];
  }
  const JointDensity& joint(double t) {
    if (joints_.empty()) {
      auto p0 = initial_density(m_, s_.grid);
      JointOptions opt;
      opt.workers = s_.workers;
      // x0 nodes: every k-th xt node where the initial law is non-negligible
      const Grid& g = s_.grid;
      const double cut = 1e-14 * p0.max_value();
      std::size_t lo = 0, hi = g.size() - 1;
      while (lo < hi && p0[lo] < cut) ++lo;
      while (hi > lo && p0[hi] < cut) --hi;
      const std::size_t k = std::max<std::size_t>(1, s_.x0_stride);
      std::size_t count = (hi - lo) / k + 1;
      if (count < 16) {
        count = 16;
        const std::size_t span = (count - 1) * k;
        const std::size_t mid = (lo + hi) / 2;
        lo = mid > span / 2 ? mid - span / 2 : 0;
        if (lo + span >= g.size()) lo = g.size() - 1 - span;
      }
      opt.x0_grid = Grid(g.x(lo), g.x(lo + (count - 1) * k), count);
      joints_ = evolve_joint_series(m_, p0, s_.t0, times_, s_.dt, &joint_stats_, opt);
    }
    return joints_[index(t)];
  }

  double entropy_at(double t) { return entropy(density(t)); }
  double mi_at(double t) {
    auto it = mi_.find(index(t));
    if (it != mi_.end()) return it->second;
    const double v = mutual_information(joint(t));
    mi_.emplace(index(t), v);
    return v;
  }

  const SolverStats& density_stats() const { return density_stats_; }
  const SolverStats& joint_stats() const { return joint_stats_; }

 private:
  std::size_t index(double t) const {
    for (std::size_t i = 0; i < times_.size(); ++i)
      if (std::fabs(times_[i] - t) < 1e-9) return i;
    throw Error(fmt::format("time {} was not scheduled", t));
  }

  const ChannelModel& m_;
  const Scenario& s_;
  double delta_;
  std::vector<double> times_;
  std::vector<DensityField> densities_;
  std::vector<JointDensity> joints_;
  std::map<std::size_t, double> mi_;
  SolverStats density_stats_, joint_stats_;
};

IdentityReport base_report(IdentityId id, const ChannelModel& m, const Scenario& s, double t) {
  IdentityReport r;
  r.id = id;
  r.model = m.name;
  r.t = t;
  r.tolerance = s.tolerance.value_or(default_tolerance(id));
  r.provenance.grid = s.grid.describe();
  r.provenance.dt = s.dt;
  r.provenance.seed = s.seed;
  std::string key = fmt::format("{}|{}|{}|t0={}|dt={}|delta={}|order={}|seed={}|paths={}|step={}", to_string(id),
                                describe_model(m), s.grid.describe(), s.t0, s.dt, s.delta, s.series_order, s.seed,
                                s.paths, s.step_dt);
  for (double x : s.times) key += fmt::format("|{}", x);
  r.provenance.config_hash = fnv1a(key);
  return r;
}

double sum_terms(const std::vector<TermValue>& terms) {
  double s = 0.0;
  for (const auto& t : terms) s += t.value;
  return s;
}

void settle(IdentityReport& r, double scale) {
  r.rhs_total = sum_terms(r.rhs_terms);
  r.abs_residual = std::fabs(r.lhs - r.rhs_total);
  r.rel_residual = r.abs_residual / std::max(scale, 1e-300);
  r.pass = r.rel_residual <= r.tolerance;
  for (const auto& t : r.rhs_terms)
    if (t.low_confidence) r.diagnostics.push_back(fmt::format("term {} is low-confidence (clamp mass {:.3g})", t.name, t.clamp_mass));
}

TermValue named(std::string name, double value, std::string notes = {}) {
  TermValue t;
  t.name = std::move(name);
  t.value = value;
  t.notes = std::move(notes);
  return t;
}

TermValue negated(TermValue t, std::string name) {
  t.name = std::move(name);
  t.value = -t.value;
  return t;
}

double entropy_rate(Context& c, double t, IdentityReport& r) {
  const double d = c.delta();
  const double lhs = finite_difference_rate(c.entropy_at(t - d), c.entropy_at(t + d), d);
  const double wide = finite_difference_rate(c.entropy_at(t - 2 * d), c.entropy_at(t + 2 * d), 2 * d);
  r.diagnostics.push_back(fmt::format("richardson: rate {:.10g} at delta, {:.10g} at 2 delta, extrapolated {:.10g}", lhs,
                                      wide, (4.0 * lhs - wide) / 3.0));
  return lhs;
}

double mi_rate(Context& c, double t, IdentityReport& r) {
  const double d = c.delta();
  const double lhs = finite_difference_rate(c.mi_at(t - d), c.mi_at(t + d), d);
  const double wide = finite_difference_rate(c.mi_at(t - 2 * d), c.mi_at(t + 2 * d), 2 * d);
  r.diagnostics.push_back(fmt::format("richardson: rate {:.10g} at delta, {:.10g} at 2 delta, extrapolated {:.10g}", lhs,
                                      wide, (4.0 * lhs - wide) / 3.0));
  r.diagnostics.push_back(fmt::format("I(t) = {:.10g}; mollifier std {:.4g}", c.mi_at(t), c.joint(t).mollifier_std()));
  return lhs;
}

void truncation_note(IdentityReport& r, int order, const std::function<TermValue(int)>& term) {
  double tail = 0.0;
  for (int n = order + 1; n <= std::min(order + 2, 8); ++n) tail += term(n).value;
  r.truncation = tail;
  r.diagnostics.push_back(fmt::format("truncation: orders {}..{} add {:.6g}", order + 1, std::min(order + 2, 8), tail));
}

IdentityReport entropy_identity(IdentityId id, Context& c, double t) {
  const auto& m = c.model();
  const auto& s = c.scenario();
  IdentityReport r = base_report(id, m, s, t);
  r.lhs = entropy_rate(c, t, r);
  const DensityField& p = c.density(t);
  const Grid& g = p.grid();
  double fisher_half = 0.0;
  switch (id) {
    case IdentityId::DEBRUIJN: {
      fisher_half = 0.5 * fisher_type(p, std::vector<double>(g.size(), 1.0));
      r.rhs_terms.push_back(named("fisher_half", fisher_half));
      break;
    }
    case IdentityId::THM3: {
      const auto B1 = km_coefficient_field(m, 1, g, t);
      const auto B2 = km_coefficient_field(m, 2, g, t);
      fisher_half = 0.5 * fisher_type(p, B2);
      r.rhs_terms.push_back(named("fisher_half_B2", fisher_half));
      r.rhs_terms.push_back(drift_correction(p, B1, B2));
      for (int n = 3; n <= s.series_order; ++n) r.rhs_terms.push_back(log_derivative_term(p, m, n, t));
      truncation_note(r, s.series_order, [&](int n) { return log_derivative_term(p, m, n, t); });
      break;
    }
    case IdentityId::THM5: {
      const auto b = sample_field(m.diffusion, g, t);
      fisher_half = 0.5 * fisher_type(p, b);
      r.rhs_terms.push_back(named("fisher_half", fisher_half));
      r.rhs_terms.push_back(entropy_jump_term(p, m, t));
      r.rhs_terms.push_back(drift_correction(p, m, t));
      break;
    }
    case IdentityId::COR4: {
      const auto b = sample_field(m.diffusion, g, t);
      fisher_half = 0.5 * fisher_type(p, b);
      r.rhs_terms.push_back(additive_jump_kl(p, m, t));
      r.rhs_terms.push_back(named("fisher_half", fisher_half));
      break;
    }
    default: throw Error("not an entropy identity");
  }
  const double scale = id == IdentityId::DEBRUIJN ? std::fabs(r.lhs) : std::max(std::fabs(r.lhs), std::fabs(fisher_half));
  settle(r, scale);
  if (id == IdentityId::DEBRUIJN && m.initial.kind == InitialLaw::Kind::gaussian) {
    const double var0 = m.initial.std * m.initial.std;
    const double closed = 1.0 / (2.0 * (var0 + (t - s.t0)));
    const double err = std::fabs(r.lhs - closed) / closed;
    r.diagnostics.push_back(fmt::format("closed form dh/dt = {:.10g}, relative gap {:.3g}", closed, err));
    r.pass = r.pass && err <= r.tolerance;
  }
  if (id == IdentityId::COR4) {
    const bool sign = r.lhs >= -kInequalitySlack;
    r.diagnostics.push_back(fmt::format("sign condition dh/dt >= 0: {}", sign ? "holds" : "violated"));
    r.pass = r.pass && sign;
  }
  r.solver = c.density_stats();
  return r;
}

IdentityReport mutual_identity(IdentityId id, Context& c, double t) {
  const auto& m = c.model();
  const auto& s = c.scenario();
  IdentityReport r = base_report(id, m, s, t);
  r.lhs = mi_rate(c, t, r);
  const JointDensity& J = c.joint(t);
  const Grid& g = J.grid_t();
  const double tau = t - s.t0;
  switch (id) {
    case IdentityId::IMMSE: {
      const double mmse = mmse_x0(J);
      r.rhs_terms.push_back(named("neg_mmse_over_2t2", -mmse / (2.0 * tau * tau), fmt::format("mmse {:.10g}", mmse)));
      settle(r, std::fabs(r.lhs));
      if (m.initial.kind == InitialLaw::Kind::gaussian) {
        const double v0 = m.initial.std * m.initial.std;
        const double closed_rate = -v0 / (2.0 * tau * (tau + v0));
        const double closed_mmse = v0 * tau / (v0 + tau);
        const double e1 = std::fabs(r.lhs - closed_rate) / std::fabs(closed_rate);
        const double e2 = std::fabs(mmse - closed_mmse) / closed_mmse;
        r.diagnostics.push_back(fmt::format("closed form dI/dt = {:.10g} (gap {:.3g}), mmse = {:.10g} (gap {:.3g})",
                                            closed_rate, e1, closed_mmse, e2));
        r.pass = r.pass && e1 <= r.tolerance && e2 <= r.tolerance;
      }
      break;
    }
    case IdentityId::THM4:
    case IdentityId::COR1: {
      const auto B2 = km_coefficient_field(m, 2, g, t);
      if (id == IdentityId::THM4) {
        r.rhs_terms.push_back(named("neg_half_mutual_fisher_B2", -0.5 * mutual_fisher(J, B2)));
      } else {
        const double mmse = generalized_mmse(J, B2, score_field(J));
        const double mf = mutual_fisher(J, B2);
        r.rhs_terms.push_back(named("neg_half_mmse_B2", -0.5 * mmse));
        r.diagnostics.push_back(fmt::format("mutual Fisher {:.10g} vs mmse of score {:.10g} (relative gap {:.3g})", mf, mmse,
                                            std::fabs(mf - mmse) / std::max(std::fabs(mf), 1e-300)));
      }
      for (int n = 3; n <= s.series_order; ++n) r.rhs_terms.push_back(log_derivative_term(J, m, n, t));
      truncation_note(r, s.series_order, [&](int n) { return log_derivative_term(J, m, n, t); });
      settle(r, std::fabs(r.lhs));
      break;
    }
    case IdentityId::THM6:
    case IdentityId::COR5: {
      const auto b = sample_field(m.diffusion, g, t);
      r.rhs_terms.push_back(negated(mi_jump_term(J, m, t), "neg_conditional_kl"));
      r.rhs_terms.push_back(named("neg_half_mutual_fisher", -0.5 * mutual_fisher(J, b)));
      settle(r, std::fabs(r.lhs));
      break;
    }
    case IdentityId::COR2: {
      const auto b = sample_field(m.diffusion, g, t);
      r.rhs_terms.push_back(named("neg_half_mmse_score", -0.5 * generalized_mmse(J, b, score_field(J))));
      settle(r, 1.0);
      r.rel_residual = r.abs_residual;
      r.pass = r.lhs <= kInequalitySlack && r.rhs_total <= kInequalitySlack;
      r.diagnostics.push_back(fmt::format("chain dI/dt <= -mmse/2 <= 0: {:.6g} <= {:.6g} <= 0 ({})", r.lhs, r.rhs_total,
                                          r.lhs <= r.rhs_total + kInequalitySlack ? "holds" : "violated"));
      break;
    }
    default: throw Error("not a mutual-information identity");
  }
  r.solver = c.joint_stats();
  return r;
}

IdentityReport cross_solver(Context& c, double t) {
  const auto& m = c.model();
  const auto& s = c.scenario();
  IdentityReport r = base_report(IdentityId::COR3, m, s, t);
  const auto& grid_solution = c.density(t);
  auto p0 = initial_density(m, s.grid);
  DensityField start(p0.grid(), std::vector<double>(p0.values().begin(), p0.values().end()), s.t0);
  auto spectral = additive_closed_form(m, start, t);
  r.lhs = l1_distance(grid_solution, spectral);
  settle(r, 1.0);
  r.diagnostics.push_back(fmt::format("L1(grid solver, spectral solver) = {:.4g}", r.lhs));
  r.solver = c.density_stats();
  return r;
}

std::vector<IdentityReport> km_recovery(const ChannelModel& m, const Scenario& s) {
  std::vector<double> schedule(s.km_window + 1);
  for (std::size_t k = 0; k <= s.km_window; ++k) schedule[k] = s.t0 + static_cast<double>(k) * s.step_dt;
  SimulationOptions so;
  so.workers = s.workers;
  const auto e = simulate_ensemble(m, schedule, s.paths, s.step_dt, s.seed, so);
  const auto pm = estimate_km(e, s.km_max_order, s.km_bins, 0, s.km_window);
  const double t_mid = 0.5 * (schedule.front() + schedule.back());
  const std::size_t cb = pm.central_bin();
  std::vector<IdentityReport> out;
  for (int n = 1; n <= s.km_max_order; ++n) {
    IdentityReport r = base_report(IdentityId::THM1, m, s, t_mid);
    r.tolerance = s.tolerance.value_or(n <= 2 ? 0.05 : 0.15);
    r.provenance.dt = s.step_dt;
    auto terms_at = [&](double x) {
      std::vector<TermValue> terms;
      const double lambda = m.jump_rate(x, t_mid);
      terms.push_back(named(fmt::format("lambda_w{}", n), lambda == 0.0 ? 0.0 : lambda * jump_moment(m, n, x, t_mid)));
      if (n == 1) terms.push_back(named("drift", m.drift(x, t_mid)));
      if (n == 2) terms.push_back(named("diffusion", m.diffusion(x, t_mid)));
      return terms;
    };
    if (!pm.usable[cb]) throw NumericalContractError("central bin has too few samples");
    r.lhs = pm.estimate(cb, n);
    r.rhs_terms = terms_at(pm.bin_centers[cb]);
    settle(r, std::fabs(sum_terms(r.rhs_terms)));
    r.diagnostics.push_back(fmt::format("central bin x={:.4g}: count {}, stderr {:.4g}, dt {}", pm.bin_centers[cb],
                                        pm.counts[cb], pm.standard_error(cb, n), pm.dt_used));
    double worst = 0.0;
    for (std::size_t b : pm.central_bins()) {
      if (!pm.usable[b]) continue;
      const double target = sum_terms(terms_at(pm.bin_centers[b]));
      worst = std::max(worst, std::fabs(pm.estimate(b, n) - target) / std::fabs(target));
    }
    r.diagnostics.push_back(fmt::format("worst relative gap over central bins {:.4g}", worst));
    r.pass = r.pass && worst <= r.tolerance;
    out.push_back(std::move(r));
  }
  return out;
}

// Histogram of single-step draws against the mixture, on a bin layout shared by every dt so that
// the sampling-noise floors are comparable.
double lemma_l1(const ChannelModel& m, const Scenario& s, double dt, const Grid& bins, IdentityReport& r) {
  const auto draws = propagator_draws(m, s.probe_x, s.t0, dt, s.draws, s.seed, s.workers);
  const auto p = propagator_density(m, s.probe_x, s.t0, dt, bins);
  std::vector<std::size_t> counts(bins.size(), 0);
  std::size_t outside = 0;
  for (double xi : draws) {
    const double k = std::round((xi - bins.x_min()) / bins.dx());
    if (k < 0.0 || k >= static_cast<double>(bins.size())) {
      ++outside;
      continue;
    }
    ++counts[static_cast<std::size_t>(k)];
  }
  const double N = static_cast<double>(draws.size());
  double l1 = static_cast<double>(outside) / N;
  double floor = 0.0;  // E|Bin(N,P)/N - P| summed over cells, normal approximation
  for (std::size_t k = 0; k < bins.size(); ++k) {
    const double P = std::min(1.0, bins.dx() * p[k]);
    l1 += std::fabs(static_cast<double>(counts[k]) / N - P);
    floor += std::sqrt(2.0 * P * (1.0 - P) / (std::numbers::pi * N));
  }
  r.diagnostics.push_back(fmt::format("dt={}: L1 {:.5g} over {} cells of width {:.4g}; sampling-noise floor {:.5g}", dt,
                                      l1, bins.size(), bins.dx(), floor));
  return l1;
}

std::vector<IdentityReport> propagator_law(const ChannelModel& m, const Scenario& s) {
  IdentityReport coarse = base_report(IdentityId::LEMMA1, m, s, s.t0);
  IdentityReport fine = base_report(IdentityId::LEMMA1, m, s, s.t0);
  coarse.provenance.dt = s.lemma_dt;
  fine.provenance.dt = s.lemma_dt / 4.0;
  const Grid bins = propagator_density(m, s.probe_x, s.t0, s.lemma_dt).grid();
  coarse.lhs = lemma_l1(m, s, s.lemma_dt, bins, coarse);
  fine.lhs = lemma_l1(m, s, s.lemma_dt / 4.0, bins, fine);
  for (auto* r : {&coarse, &fine}) {
    settle(*r, 1.0);
    r->rel_residual = r->abs_residual;
  }
  fine.pass = fine.pass && fine.lhs < coarse.lhs;
  fine.diagnostics.push_back(fmt::format("L1 at dt/4 ({:.5g}) {} L1 at dt ({:.5g})", fine.lhs,
                                         fine.lhs < coarse.lhs ? "<" : ">=", coarse.lhs));
  return {coarse, fine};
}

void check_compatible(IdentityId id, const ChannelModel& m, const Scenario& s) {
  switch (id) {
    case IdentityId::DEBRUIJN:
    case IdentityId::IMMSE:
      if (!is_gaussian_channel(m)) throw ModelError({fmt::format("{} needs the Gaussian channel a=0, b=1, lambda=0", to_string(id))});
      break;
    case IdentityId::COR3:
    case IdentityId::COR4:
    case IdentityId::COR5: {
      std::vector<double> ts{s.t0};
      for (double t : s.times) ts.push_back(t);
      std::string why;
      if (!is_state_homogeneous(m, s.grid, ts, &why))
        throw ModelError({fmt::format("{} needs a state-homogeneous model: {}", to_string(id), why)});
      break;
    }
    default: break;
  }
}

IdentityReport failed(IdentityId id, const ChannelModel& m, const Scenario& s, double t, const std::string& why) {
  IdentityReport r = base_report(id, m, s, t);
  r.failure = why;
  r.pass = false;
  r.lhs = r.rhs_total = r.abs_residual = r.rel_residual = std::nan("");
  return r;
}

}  // namespace

std::vector<IdentityReport> verify_identities(const std::vector<IdentityId>& ids, const ChannelModel& model,
                                              const Scenario& scenario) {
  std::vector<IdentityReport> out;
  std::unique_ptr<Context> ctx;
  std::string ctx_error;
  auto context = [&]() -> Context& {
    if (!ctx) ctx = std::make_unique<Context>(model, scenario);
    return *ctx;
  };
  for (IdentityId id : ids) {
    try {
      check_compatible(id, model, scenario);
    } catch (const std::exception& e) {
      out.push_back(failed(id, model, scenario, scenario.times.empty() ? scenario.t0 : scenario.times.front(),
                           fmt::format("incompatible model: {}", e.what())));
      continue;
    }
    if (id == IdentityId::THM1 || id == IdentityId::LEMMA1) {
      try {
        auto rs = id == IdentityId::THM1 ? km_recovery(model, scenario) : propagator_law(model, scenario);
        out.insert(out.end(), rs.begin(), rs.end());
      } catch (const std::exception& e) {
        out.push_back(failed(id, model, scenario, scenario.t0, e.what()));
      }
      continue;
    }
    for (double t : scenario.times) {
      try {
        switch (id) {
          case IdentityId::DEBRUIJN:
          case IdentityId::THM3:
          case IdentityId::THM5:
          case IdentityId::COR4: out.push_back(entropy_identity(id, context(), t)); break;
          case IdentityId::COR3: out.push_back(cross_solver(context(), t)); break;
          default: out.push_back(mutual_identity(id, context(), t)); break;
        }
      } catch (const std::exception& e) {
        out.push_back(failed(id, model, scenario, t, e.what()));
      }
    }
  }
  return out;
}

std::vector<IdentityReport> verify_identity(IdentityId id, const ChannelModel& model, const Scenario& scenario) {
  return verify_identities({id}, model, scenario);
}

SuiteReport run_suite(const std::vector<SuiteEntry>& entries, std::size_t workers) {
  std::vector<std::vector<IdentityReport>> parts(entries.size());
  parallel_for(entries.size(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) parts[i] = verify_identity(entries[i].id, entries[i].model, entries[i].scenario);
  });
  SuiteReport s;
  for (auto& p : parts) s.reports.insert(s.reports.end(), p.begin(), p.end());
  return s;
}

}  // namespace jdi
