#include "jdi/model.hpp"

#include <fmt/format.h>

#include <cmath>

#include "jdi/error.hpp"

namespace jdi {

ModelError::ModelError(std::vector<std::string> violations)
    : Error([&] {
        std::string msg = "invalid channel model:";
        for (const auto& v : violations) msg += "\n  " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

Grid::Grid(double x_min, double x_max, std::size_t n) : x_min_(x_min), x_max_(x_max), n_(n) {
  if (!(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max))
    throw ConfigError(fmt::format("grid needs x_min < x_max, got [{}, {}]", x_min, x_max));
  if (n < 16) throw ConfigError(fmt::format("grid needs at least 16 nodes, got {}", n));
  dx_ = (x_max - x_min) / static_cast<double>(n - 1);
}

std::string Grid::describe() const { return fmt::format("[{}, {}] n={}", x_min_, x_max_, n_); }

bool ChannelModel::time_dependent() const {
  return drift.depends_on_t() || diffusion.depends_on_t() || jump_rate.depends_on_t() || kernel.depends_on_t();
}

bool ChannelModel::structurally_homogeneous() const {
  return !drift.depends_on_x() && !diffusion.depends_on_x() && !jump_rate.depends_on_x() && !kernel.depends_on_x();
}

namespace {

ScalarField parse_field(const std::string& text, const char* what, std::vector<std::string>& violations) {
  try {
    auto f = ScalarField::parse(text);
    if (f.depends_on(Variable::xi))
      violations.push_back(fmt::format("{}: 'xi' is not allowed, jump kernels are parametric", what));
    return f;
  } catch (const ParseError& e) {
    violations.push_back(fmt::format("{}: {} in \"{}\"", what, e.what(), text));
  }
  return ScalarField();
}

// Evaluate f over the grid at each time and report the first few offending nodes.
template <class Check>
void scan(const ScalarField& f, const char* what, const Grid& g, const std::vector<double>& times, Check bad,
          std::vector<std::string>& violations) {
  std::size_t count = 0;
  for (double t : times) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = g.x(i);
      std::string problem;
      try {
        problem = bad(f(x, t));
      } catch (const EvaluationError& e) {
        problem = e.what();
      }
      if (problem.empty()) continue;
      if (count < 3) violations.push_back(fmt::format("{}: {} at node {} (x={}, t={})", what, problem, i, x, t));
      ++count;
    }
  }
  if (count > 3) violations.push_back(fmt::format("{}: {} further offending nodes", what, count - 3));
}

}  // namespace

ChannelModel build_model(const ModelConfig& c) {
  std::vector<std::string> v;
  ChannelModel m;
  m.name = c.name;
  m.drift = parse_field(c.drift, "drift a", v);
  m.diffusion = parse_field(c.diffusion, "diffusion b", v);
  m.jump_rate = parse_field(c.jump_rate, "jump rate lambda", v);
  KernelFamily family = KernelFamily::gaussian;
  try {
    family = parse_kernel_family(c.kernel_family);
  } catch (const ConfigError& e) {
    v.push_back(e.what());
  }
  const bool uni = family == KernelFamily::uniform;
  auto p1 = parse_field(c.kernel_p1, uni ? "kernel lo" : "kernel mean", v);
  auto p2 = parse_field(c.kernel_p2, uni ? "kernel hi" : "kernel scale", v);
  m.kernel = JumpKernel(family, p1, p2);

  if (!(c.t1 > c.t0)) v.push_back(fmt::format("time: t1 must exceed t0 (t0={}, t1={})", c.t0, c.t1));
  const std::vector<double> times = {c.t0, 0.5 * (c.t0 + c.t1), c.t1};
  const Grid& g = c.grid;

  auto nonneg = [](double y) { return y < 0.0 ? fmt::format("negative value {}", y) : std::string(); };
  auto finite = [](double) { return std::string(); };
  if (v.empty()) {
    scan(m.drift, "drift a", g, times, finite, v);
    scan(m.diffusion, "diffusion b", g, times, nonneg, v);
    scan(m.jump_rate, "jump rate lambda", g, times, nonneg, v);
    std::size_t bad_kernel = 0;
    for (double t : times) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        try {
          (void)m.kernel.at(g.x(i), t);
        } catch (const EvaluationError& e) {
          if (bad_kernel++ < 3) v.push_back(fmt::format("jump kernel: {} (node {})", e.what(), i));
        }
      }
    }
    if (bad_kernel > 3) v.push_back(fmt::format("jump kernel: {} further offending nodes", bad_kernel - 3));
  }

  InitialLaw& law = m.initial;
  law.grid = g;
  if (c.initial_kind == "gaussian") {
    law.kind = InitialLaw::Kind::gaussian;
    law.mean = c.initial_mean;
    law.std = c.initial_std;
    if (!(law.std > 0.0)) v.push_back(fmt::format("initial: gaussian std must be > 0, got {}", law.std));
  } else if (c.initial_kind == "point") {
    law.kind = InitialLaw::Kind::point;
    law.x0 = c.initial_x0;
    if (law.x0 < g.x_min() || law.x0 > g.x_max())
      v.push_back(fmt::format("initial: point mass x0={} lies outside the grid", law.x0));
  } else if (c.initial_kind == "density") {
    law.kind = InitialLaw::Kind::density;
    law.density = parse_field(c.initial_density, "initial density", v);
    if (law.density.depends_on_t()) v.push_back("initial density: must not depend on t");
    if (v.empty()) {
      double mass = 0.0;
      std::size_t bad = 0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        double y = 0.0;
        try {
          y = law.density(g.x(i), c.t0);
        } catch (const EvaluationError& e) {
          if (bad++ == 0) v.push_back(fmt::format("initial density: {} at node {}", e.what(), i));
          continue;
        }
        if (y < 0.0) {
          if (bad++ == 0) v.push_back(fmt::format("initial density: negative value {} at node {}", y, i));
          continue;
        }
        mass += g.weight(i) * y;
      }
      if (bad == 0 && !(mass > 0.0 && std::isfinite(mass)))
        v.push_back(fmt::format("initial density: not normalizable on the grid (mass {})", mass));
    }
  } else {
    v.push_back(fmt::format("initial: unknown type '{}' (expected gaussian, point or density)", c.initial_kind));
  }

  if (!v.empty()) throw ModelError(std::move(v));
  return m;
}

double jump_moment(const ChannelModel& model, int n, double x, double t) {
  if (n < 1) throw EvaluationError(fmt::format("jump moment order must be >= 1, got {}", n));
  return model.kernel.at(x, t).moment(n);
}

double analytic_km_coefficient(const ChannelModel& model, int n, double x, double t) {
  if (n < 1) throw EvaluationError(fmt::format("Kramers-Moyal order must be >= 1, got {}", n));
  const double lambda = model.jump_rate(x, t);
  const double jump = lambda == 0.0 ? 0.0 : lambda * jump_moment(model, n, x, t);
  if (n == 1) return jump + model.drift(x, t);
  if (n == 2) return jump + model.diffusion(x, t);
  return jump;
}

std::vector<double> sample_field(const ScalarField& f, const Grid& g, double t) {
  std::vector<double> out(g.size());
  if (f.constant_value()) {
    std::fill(out.begin(), out.end(), *f.constant_value());
    return out;
  }
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = f(g.x(i), t);
  return out;
}

std::vector<double> km_coefficient_field(const ChannelModel& model, int n, const Grid& g, double t) {
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = analytic_km_coefficient(model, n, g.x(i), t);
  return out;
}

bool is_state_homogeneous(const ChannelModel& m, const Grid& g, const std::vector<double>& times, std::string* why) {
  auto same = [](double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(a)); };
  for (double t : times) {
    const double x0 = g.x(0);
    const double a0 = m.drift(x0, t), b0 = m.diffusion(x0, t), l0 = m.jump_rate(x0, t);
    const auto k0 = m.kernel.at(x0, t);
    for (std::size_t i = 1; i < g.size(); ++i) {
      const double x = g.x(i);
      const auto k = m.kernel.at(x, t);
      const char* field = !same(m.drift(x, t), a0)       ? "drift"
                          : !same(m.diffusion(x, t), b0) ? "diffusion"
                          : !same(m.jump_rate(x, t), l0) ? "jump rate"
                          : (!same(k.p1, k0.p1) || !same(k.p2, k0.p2)) ? "kernel parameters"
                                                                       : nullptr;
      if (field) {
        if (why) *why = fmt::format("{} varies with x (node {}, t={})", field, i, t);
        return false;
      }
    }
  }
  return true;
}

}  // namespace jdi
