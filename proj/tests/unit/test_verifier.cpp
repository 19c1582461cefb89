#include <cmath>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "jdi/error.hpp"
#include "jdi/verifier.hpp"

using testing::model;

TEST_CASE("central finite differences") {
  const double d = 1e-3;
  auto q = [](double t) { return t * t; };
  CHECK(jdi::finite_difference_rate(q(1 - d), q(1 + d), d) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(jdi::finite_difference_rate(3.5, 3.5, d) == 0.0);
  auto h = [](double t) { return 0.5 * std::log(2 * std::numbers::pi * std::numbers::e * (1 + t)); };
  CHECK(std::fabs(jdi::finite_difference_rate(h(1 - d), h(1 + d), d) - 0.25) <= 1e-6);
  CHECK_THROWS_AS(jdi::finite_difference_rate(0, 1, 0.0), jdi::ConfigError);
}

TEST_CASE("identity names round-trip") {
  for (auto id : {jdi::IdentityId::THM1, jdi::IdentityId::COR5, jdi::IdentityId::IMMSE})
    CHECK(jdi::parse_identity(jdi::to_string(id)) == id);
  CHECK_THROWS_AS(jdi::parse_identity("THM2"), jdi::ConfigError);
}

TEST_CASE("de Bruijn on the Gaussian channel") {
  jdi::Scenario s;
  s.times = {1.0};
  auto rs = jdi::verify_identity(jdi::IdentityId::DEBRUIJN, model("0", "1", "0"), s);
  REQUIRE(rs.size() == 1);
  const auto& r = rs[0];
  CHECK(r.pass);
  CHECK(r.lhs == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(r.rhs_total == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(r.rel_residual <= 1e-3);
  double sum = 0.0;
  for (const auto& t : r.rhs_terms) sum += t.value;
  CHECK(r.rhs_total == sum);
  CHECK(r.provenance.config_hash != 0);
  CHECK(r.solver.max_mass_drift <= 1e-8);
}

TEST_CASE("entropy balance of the stationary OU channel") {
  jdi::Scenario s;
  s.times = {0.5};
  auto r = jdi::verify_identity(jdi::IdentityId::THM5, model("-x", "2", "0"), s).at(0);
  CHECK(r.pass);
  CHECK(std::fabs(r.lhs) <= 1e-3);
  CHECK(std::fabs(r.rhs_total) <= 1e-3);
  REQUIRE(r.rhs_terms.size() == 3);
  CHECK(r.rhs_terms[0].value == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.rhs_terms[1].value == 0.0);
  CHECK(r.rhs_terms[2].value == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("without jumps the two entropy forms coincide") {
  jdi::Scenario s;
  s.times = {0.5};
  s.grid = jdi::Grid(-10, 10, 512);
  const auto m = model("-0.5*x", "1+0.2*tanh(x)", "0");
  auto both = jdi::verify_identities({jdi::IdentityId::THM3, jdi::IdentityId::THM5}, m, s);
  REQUIRE(both.size() == 2);
  CHECK(both[0].pass);
  CHECK(both[1].pass);
  CHECK(std::fabs(both[0].rhs_total - both[1].rhs_total) <= 1e-10);
}

TEST_CASE("incompatible models produce failed reports with a reason") {
  jdi::Scenario s;
  auto r = jdi::verify_identity(jdi::IdentityId::DEBRUIJN, model("-x", "1", "0"), s).at(0);
  CHECK_FALSE(r.pass);
  CHECK(r.failure.find("incompatible") != std::string::npos);
  auto c = jdi::verify_identity(jdi::IdentityId::COR4, model("-x", "1", "0.5"), s).at(0);
  CHECK_FALSE(c.pass);
  CHECK(c.failure.find("state-homogeneous") != std::string::npos);
}

TEST_CASE("upstream errors are embedded, not thrown") {
  jdi::Scenario s;
  s.times = {0.5};
  s.grid = jdi::Grid(-3, 3, 128);
  auto r = jdi::verify_identity(jdi::IdentityId::THM5, model("0", "1", "2", "gaussian", "2", "0.3"), s).at(0);
  CHECK_FALSE(r.pass);
  CHECK_FALSE(r.failure.empty());
}

TEST_CASE("suite bookkeeping and export") {
  auto empty = jdi::run_suite({});
  CHECK(empty.success());
  CHECK(empty.reports.empty());
  jdi::Scenario s;
  s.times = {0.5, 1.0};
  s.grid = jdi::Grid(-12, 12, 512);
  jdi::Scenario coarse = s;
  coarse.grid = jdi::Grid(-12, 12, 64);
  coarse.times = {1.0};
  auto suite = jdi::run_suite({{jdi::IdentityId::DEBRUIJN, model("0", "1", "0"), s},
                               {jdi::IdentityId::IMMSE, model("0", "1", "0"), coarse}},
                              2);
  REQUIRE(suite.reports.size() == 3);
  CHECK(suite.reports[0].pass);
  CHECK(suite.reports[1].pass);
  // a 64-node grid cannot hold 1e-3: the entries fail with their residuals reported
  CHECK_FALSE(suite.reports[2].pass);
  CHECK(suite.reports[2].rel_residual > 1e-3);
  CHECK(std::isfinite(suite.reports[2].rel_residual));
  CHECK(suite.failed() >= 1);
  std::ostringstream csv, json, summary;
  suite.write_csv(csv);
  suite.write_json(json);
  suite.write_summary(summary);
  CHECK(csv.str().rfind("identity,model,t,lhs,rhs_total,abs_residual,rel_residual,verdict\n", 0) == 0);
  CHECK(json.str().find("\"rhs_terms\"") != std::string::npos);
  CHECK(summary.str().find("FAIL") != std::string::npos);
}
