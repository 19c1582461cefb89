#include "jdi/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "jdi/error.hpp"

namespace jdi {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const YAML::Node& node, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!node.IsMap()) throw ConfigError(fmt::format("'{}' must be a mapping", path));
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(fmt::format("unknown key '{}'", join(path, key)));
  }
}

template <class T>
T read(const YAML::Node& node, const std::string& path) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("'{}' has an invalid value", path));
  }
}

template <class T>
void maybe(const YAML::Node& parent, const std::string& path, const char* key, T& out) {
  if (auto n = parent[key]) out = read<T>(n, join(path, key));
}

// Expressions may be written as numbers; the raw scalar text is kept.
void maybe_expr(const YAML::Node& parent, const std::string& path, const char* key, std::string& out) {
  if (auto n = parent[key]) {
    if (!n.IsScalar()) throw ConfigError(fmt::format("'{}' must be an expression string", join(path, key)));
    out = n.Scalar();
  }
}

std::vector<double> read_times(const YAML::Node& n, const std::string& path) {
  if (n.IsScalar()) return {read<double>(n, path)};
  if (!n.IsSequence()) throw ConfigError(fmt::format("'{}' must be a number or a list", path));
  std::vector<double> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(read<double>(n[i], fmt::format("{}[{}]", path, i)));
  return out;
}

Grid read_grid(const YAML::Node& n, const std::string& path, const Grid& base) {
  check_keys(n, path, {"x_min", "x_max", "n"});
  double lo = base.x_min(), hi = base.x_max();
  std::size_t size = base.size();
  maybe(n, path, "x_min", lo);
  maybe(n, path, "x_max", hi);
  maybe(n, path, "n", size);
  return Grid(lo, hi, size);
}

void read_channel(const YAML::Node& n, const std::string& path, ModelConfig& m) {
  check_keys(n, path, {"name", "drift", "diffusion", "jump_rate", "jump_kernel"});
  maybe(n, path, "name", m.name);
  maybe_expr(n, path, "drift", m.drift);
  maybe_expr(n, path, "diffusion", m.diffusion);
  maybe_expr(n, path, "jump_rate", m.jump_rate);
  if (auto k = n["jump_kernel"]) {
    const std::string kp = join(path, "jump_kernel");
    check_keys(k, kp, {"family", "mean", "scale", "lo", "hi"});
    maybe(k, kp, "family", m.kernel_family);
    const bool uni = m.kernel_family == "uniform";
    if (uni && (k["mean"] || k["scale"]))
      throw ConfigError(fmt::format("'{}': the uniform kernel takes lo and hi", kp));
    if (!uni && (k["lo"] || k["hi"]))
      throw ConfigError(fmt::format("'{}': family '{}' takes mean and scale", kp, m.kernel_family));
    if (uni) {
      m.kernel_p1 = "-1";
      maybe_expr(k, kp, "lo", m.kernel_p1);
      maybe_expr(k, kp, "hi", m.kernel_p2);
    } else {
      maybe_expr(k, kp, "mean", m.kernel_p1);
      maybe_expr(k, kp, "scale", m.kernel_p2);
    }
  }
}

void read_initial(const YAML::Node& n, const std::string& path, ModelConfig& m) {
  check_keys(n, path, {"type", "mean", "std", "x0", "expr"});
  maybe(n, path, "type", m.initial_kind);
  maybe(n, path, "mean", m.initial_mean);
  maybe(n, path, "std", m.initial_std);
  maybe(n, path, "x0", m.initial_x0);
  maybe_expr(n, path, "expr", m.initial_density);
}

Scenario base_scenario(const RunConfig& c) {
  Scenario s;
  s.grid = c.grid;
  s.t0 = c.t0;
  s.times = c.record.empty() ? std::vector<double>{c.t1} : c.record;
  s.dt = c.dt;
  s.series_order = c.series_order;
  s.workers = c.monte_carlo.workers;
  s.paths = c.monte_carlo.paths;
  s.step_dt = c.monte_carlo.step_dt;
  s.seed = c.monte_carlo.seed;
  s.km_bins = c.km.bins;
  s.km_max_order = c.km.max_order;
  s.km_window = c.monte_carlo.window;
  s.probe_x = c.monte_carlo.probe_x;
  s.draws = c.monte_carlo.draws;
  s.lemma_dt = c.monte_carlo.lemma_dt;
  return s;
}

ExperimentEntry read_entry(const YAML::Node& n, const std::string& path, const RunConfig& c) {
  ExperimentEntry e{IdentityId::DEBRUIJN, c.main_model, base_scenario(c)};
  if (n.IsScalar()) {
    e.id = parse_identity(n.Scalar());
  } else {
    check_keys(n, path,
               {"id", "model", "times", "grid", "dt", "delta", "series_order", "tolerance", "x0_stride", "paths",
                "step_dt", "seed", "window", "draws", "lemma_dt", "probe_x", "km_bins", "km_max_order"});
    if (!n["id"]) throw ConfigError(fmt::format("'{}' needs an id", path));
    e.id = parse_identity(read<std::string>(n["id"], join(path, "id")));
    maybe(n, path, "model", e.model);
    if (!c.models.count(e.model)) throw ConfigError(fmt::format("'{}': unknown model '{}'", join(path, "model"), e.model));
    if (auto t = n["times"]) e.scenario.times = read_times(t, join(path, "times"));
    if (!n["grid"] && c.models.at(e.model).grid != c.grid) e.scenario.grid = c.models.at(e.model).grid;
    if (auto g = n["grid"]) e.scenario.grid = read_grid(g, join(path, "grid"), e.scenario.grid);
    Scenario& s = e.scenario;
    maybe(n, path, "dt", s.dt);
    maybe(n, path, "delta", s.delta);
    maybe(n, path, "series_order", s.series_order);
    if (auto t = n["tolerance"]) s.tolerance = read<double>(t, join(path, "tolerance"));
    maybe(n, path, "x0_stride", s.x0_stride);
    maybe(n, path, "paths", s.paths);
    maybe(n, path, "step_dt", s.step_dt);
    maybe(n, path, "seed", s.seed);
    maybe(n, path, "window", s.km_window);
    maybe(n, path, "draws", s.draws);
    maybe(n, path, "lemma_dt", s.lemma_dt);
    maybe(n, path, "probe_x", s.probe_x);
    maybe(n, path, "km_bins", s.km_bins);
    maybe(n, path, "km_max_order", s.km_max_order);
  }
  if (!e.scenario.tolerance) {
    auto it = c.tolerances.find(e.id);
    if (it != c.tolerances.end()) e.scenario.tolerance = it->second;
  }
  return e;
}

}  // namespace

bool OutputConfig::wants(std::string_view format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

const ModelConfig& RunConfig::model_config(const std::string& name) const {
  auto it = models.find(name);
  if (it == models.end()) throw ConfigError(fmt::format("unknown model '{}'", name));
  return it->second;
}

RunConfig parse_run_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("malformed config: {}", e.what()));
  }
  if (!root.IsMap()) throw ConfigError("config must be a mapping of sections");
  check_keys(root, "", {"channel", "grid", "time", "initial", "experiment", "output", "models"});
  for (const char* required : {"channel", "grid", "time", "initial"})
    if (!root[required]) throw ConfigError(fmt::format("missing section '{}'", required));

  RunConfig c;
  c.grid = read_grid(root["grid"], "grid", c.grid);
  {
    const YAML::Node t = root["time"];
    check_keys(t, "time", {"t0", "t1", "dt", "record"});
    maybe(t, "time", "t0", c.t0);
    maybe(t, "time", "t1", c.t1);
    maybe(t, "time", "dt", c.dt);
    if (auto r = t["record"]) c.record = read_times(r, "time.record");
    if (!(c.t1 > c.t0)) throw ConfigError(fmt::format("'time': t1 must exceed t0 (t0={}, t1={})", c.t0, c.t1));
    if (!(c.dt > 0.0)) throw ConfigError(fmt::format("'time.dt' must be > 0, got {}", c.dt));
    for (double r : c.record)
      if (!(r > c.t0) || r > c.t1 + 1e-12)
        throw ConfigError(fmt::format("'time.record' entry {} lies outside (t0, t1]", r));
    if (!std::is_sorted(c.record.begin(), c.record.end())) throw ConfigError("'time.record' must be ascending");
  }

  ModelConfig main;
  read_channel(root["channel"], "channel", main);
  read_initial(root["initial"], "initial", main);
  main.grid = c.grid;
  main.t0 = c.t0;
  main.t1 = c.t1;
  c.main_model = main.name;
  c.models[main.name] = main;

  if (auto ms = root["models"]) {
    if (!ms.IsMap()) throw ConfigError("'models' must be a mapping of named models");
    for (const auto& kv : ms) {
      const auto name = kv.first.as<std::string>();
      const std::string path = join("models", name);
      if (c.models.count(name)) throw ConfigError(fmt::format("'{}': duplicate model name", path));
      check_keys(kv.second, path, {"channel", "initial", "grid"});
      ModelConfig m = main;  // unspecified fields inherit from the top-level model
      if (auto ch = kv.second["channel"]) read_channel(ch, join(path, "channel"), m);
      m.name = name;
      if (auto in = kv.second["initial"]) read_initial(in, join(path, "initial"), m);
      m.grid = kv.second["grid"] ? read_grid(kv.second["grid"], join(path, "grid"), c.grid) : c.grid;
      m.t0 = c.t0;
      m.t1 = c.t1;
      c.models[name] = m;
    }
  }

  if (auto ex = root["experiment"]) {
    check_keys(ex, "experiment", {"identities", "series_order", "monte_carlo", "tolerances", "km"});
    maybe(ex, "experiment", "series_order", c.series_order);
    if (auto mc = ex["monte_carlo"]) {
      const std::string p = "experiment.monte_carlo";
      check_keys(mc, p, {"paths", "step_dt", "seed", "workers", "window", "draws", "lemma_dt", "probe_x"});
      auto& m = c.monte_carlo;
      maybe(mc, p, "paths", m.paths);
      maybe(mc, p, "step_dt", m.step_dt);
      maybe(mc, p, "seed", m.seed);
      maybe(mc, p, "workers", m.workers);
      maybe(mc, p, "window", m.window);
      maybe(mc, p, "draws", m.draws);
      maybe(mc, p, "lemma_dt", m.lemma_dt);
      maybe(mc, p, "probe_x", m.probe_x);
    }
    if (auto km = ex["km"]) {
      check_keys(km, "experiment.km", {"bins", "max_order"});
      maybe(km, "experiment.km", "bins", c.km.bins);
      maybe(km, "experiment.km", "max_order", c.km.max_order);
    }
    if (auto tol = ex["tolerances"]) {
      if (!tol.IsMap()) throw ConfigError("'experiment.tolerances' must map identity ids to numbers");
      for (const auto& kv : tol) {
        const auto key = kv.first.as<std::string>();
        IdentityId id;
        try {
          id = parse_identity(key);
        } catch (const ConfigError&) {
          throw ConfigError(fmt::format("unknown key '{}'", join("experiment.tolerances", key)));
        }
        c.tolerances[id] = read<double>(kv.second, join("experiment.tolerances", key));
      }
    }
    if (auto ids = ex["identities"]) {
      if (ids.IsScalar()) {
        c.experiments.push_back(read_entry(ids, "experiment.identities", c));
      } else if (ids.IsSequence()) {
        for (std::size_t i = 0; i < ids.size(); ++i)
          c.experiments.push_back(read_entry(ids[i], fmt::format("experiment.identities[{}]", i), c));
      } else {
        throw ConfigError("'experiment.identities' must be an id or a list");
      }
    }
  }

  if (auto out = root["output"]) {
    check_keys(out, "output", {"directory", "formats"});
    maybe(out, "output", "directory", c.output.directory);
    if (auto f = out["formats"]) {
      c.output.formats.clear();
      if (f.IsScalar()) {
        c.output.formats.push_back(f.Scalar());
      } else {
        for (std::size_t i = 0; i < f.size(); ++i) c.output.formats.push_back(read<std::string>(f[i], "output.formats"));
      }
      for (const auto& x : c.output.formats)
        if (x != "csv" && x != "json") throw ConfigError(fmt::format("'output.formats': unknown format '{}'", x));
    }
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

ChannelModel build_model(std::string_view config_text) {
  const RunConfig c = parse_run_config(config_text);
  return build_model(c.model_config(c.main_model));
}

std::vector<SuiteEntry> suite_entries(const RunConfig& config) {
  std::map<std::string, ChannelModel> built;
  for (const auto& [name, mc] : config.models) built.emplace(name, build_model(mc));
  std::vector<SuiteEntry> out;
  for (const auto& e : config.experiments) out.push_back({e.id, built.at(e.model), e.scenario});
  return out;
}

}  // namespace jdi
