#include <string>

#include "doctest.h"
#include "jdi/config.hpp"
#include "jdi/error.hpp"

namespace {

const char* kBase = R"(
channel:
  name: ou
  drift: "-x"
  diffusion: 1
  jump_rate: "0.5"
  jump_kernel: {family: gaussian, mean: "0.3", scale: "0.5"}
grid: {x_min: -10, x_max: 10, n: 512}
time: {t0: 0, t1: 1, dt: 2e-3, record: [0.5, 1]}
initial: {type: gaussian, mean: 0, std: 1}
experiment:
  series_order: 5
  tolerances: {THM5: 0.02}
  monte_carlo: {paths: 1000, seed: 7}
  identities:
    - THM5
    - {id: DEBRUIJN, model: bm, times: [1], grid: {n: 256}}
models:
  bm:
    channel: {drift: "0", diffusion: "1", jump_rate: "0"}
output: {directory: somewhere, formats: [csv, json]}
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  s.replace(s.find(from), from.size(), to);
  return s;
}

}  // namespace

TEST_CASE("a complete config parses") {
  auto c = jdi::parse_run_config(kBase);
  CHECK(c.main_model == "ou");
  CHECK(c.models.size() == 2);
  CHECK(c.grid.size() == 512);
  CHECK(c.record == std::vector<double>{0.5, 1.0});
  REQUIRE(c.experiments.size() == 2);
  CHECK(c.experiments[0].id == jdi::IdentityId::THM5);
  CHECK(c.experiments[0].scenario.series_order == 5);
  CHECK(*c.experiments[0].scenario.tolerance == 0.02);
  CHECK(c.experiments[0].scenario.seed == 7);
  CHECK(c.experiments[0].scenario.times == std::vector<double>{0.5, 1.0});
  CHECK(c.experiments[1].model == "bm");
  CHECK(c.experiments[1].scenario.grid.size() == 256);
  CHECK_FALSE(c.experiments[1].scenario.tolerance);
  CHECK(c.output.wants("json"));
  CHECK(c.model_config("ou").diffusion == "1");
  auto entries = jdi::suite_entries(c);
  CHECK(entries.size() == 2);
  CHECK(entries[1].model.drift.is_zero());
}

TEST_CASE("unknown keys are errors naming the key path") {
  try {
    jdi::parse_run_config(replace(kBase, "drift: \"-x\"", "drfit: \"-x\""));
    FAIL("expected a config error");
  } catch (const jdi::ConfigError& e) {
    CHECK(std::string(e.what()).find("channel.drfit") != std::string::npos);
  }
  try {
    jdi::parse_run_config(replace(kBase, "paths: 1000", "pahts: 1000"));
    FAIL("expected a config error");
  } catch (const jdi::ConfigError& e) {
    CHECK(std::string(e.what()).find("experiment.monte_carlo.pahts") != std::string::npos);
  }
  CHECK_THROWS_AS(jdi::parse_run_config(replace(kBase, "THM5: 0.02", "THM9: 0.02")), jdi::ConfigError);
  CHECK_THROWS_AS(jdi::parse_run_config(replace(kBase, "- THM5", "- THM7")), jdi::ConfigError);
}

TEST_CASE("structural errors") {
  CHECK_THROWS_AS(jdi::parse_run_config("channel: {drift: 0}\n"), jdi::ConfigError);
  CHECK_THROWS_AS(jdi::parse_run_config(replace(kBase, "record: [0.5, 1]", "record: [1, 0.5]")), jdi::ConfigError);
  CHECK_THROWS_AS(jdi::parse_run_config(replace(kBase, "record: [0.5, 1]", "record: [2]")), jdi::ConfigError);
  CHECK_THROWS_AS(jdi::parse_run_config(replace(kBase, "n: 512", "n: many")), jdi::ConfigError);
  CHECK_THROWS_AS(jdi::parse_run_config(replace(kBase, "model: bm", "model: nope")), jdi::ConfigError);
  CHECK_THROWS_AS(jdi::parse_run_config(replace(kBase, "formats: [csv, json]", "formats: [xml]")), jdi::ConfigError);
  CHECK_THROWS_AS(jdi::parse_run_config("channel: [\n"), jdi::ConfigError);
}

TEST_CASE("build_model from config text") {
  auto m = jdi::build_model(std::string_view(kBase));
  CHECK(m.name == "ou");
  CHECK(m.drift(2.0, 0.0) == -2.0);
  CHECK(m.kernel.family() == jdi::KernelFamily::gaussian);
  CHECK_THROWS_AS(jdi::build_model(std::string_view(replace(kBase, "diffusion: 1", "diffusion: \"-1\""))), jdi::ModelError);
}

TEST_CASE("uniform kernels take lo and hi") {
  auto c = jdi::parse_run_config(
      replace(kBase, "{family: gaussian, mean: \"0.3\", scale: \"0.5\"}", "{family: uniform, lo: \"-1\", hi: \"2\"}"));
  CHECK(c.model_config("ou").kernel_p1 == "-1");
  CHECK(c.model_config("ou").kernel_p2 == "2");
  CHECK_THROWS_AS(jdi::parse_run_config(replace(kBase, "family: gaussian,", "family: uniform,")), jdi::ConfigError);
}

TEST_CASE("named models inherit unspecified fields from the top-level model") {
  auto c = jdi::parse_run_config(kBase);
  const auto& bm = c.model_config("bm");
  CHECK(bm.name == "bm");
  CHECK(bm.drift == "0");
  CHECK(bm.jump_rate == "0");
  CHECK(bm.kernel_p1 == "0.3");
  CHECK(bm.initial_std == 1.0);
  auto d = jdi::parse_run_config(replace(kBase, "jump_rate: \"0\"}", "}"));
  CHECK(d.model_config("bm").jump_rate == "0.5");
}
