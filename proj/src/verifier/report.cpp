#include <fmt/format.h>

#include <cmath>
#include "json.hpp"
#include <ostream>

#include "jdi/verifier.hpp"

namespace jdi {

std::size_t SuiteReport::passed() const {
  std::size_t n = 0;
  for (const auto& r : reports) n += r.pass ? 1 : 0;
  return n;
}

std::size_t SuiteReport::failed() const { return reports.size() - passed(); }

namespace {

std::string num(double v) { return std::isfinite(v) ? fmt::format("{:.12g}", v) : std::string("nan"); }

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

void SuiteReport::write_csv(std::ostream& out) const {
  out << "identity,model,t,lhs,rhs_total,abs_residual,rel_residual,verdict\n";
  for (const auto& r : reports)
    out << fmt::format("{},{},{},{},{},{},{},{}\n", to_string(r.id), r.model, num(r.t), num(r.lhs), num(r.rhs_total),
                       num(r.abs_residual), num(r.rel_residual), r.pass ? "PASS" : "FAIL");
}

void SuiteReport::write_json(std::ostream& out) const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : r.rhs_terms)
      terms.push_back({{"term", t.name},
                       {"value", finite_or_null(t.value)},
                       {"clamp_mass", t.clamp_mass},
                       {"quadrature_residual", t.quadrature_residual},
                       {"low_confidence", t.low_confidence},
                       {"notes", t.notes}});
    nlohmann::json j = {{"identity", std::string(to_string(r.id))},
                        {"model", r.model},
                        {"t", r.t},
                        {"lhs", finite_or_null(r.lhs)},
                        {"rhs_terms", terms},
                        {"rhs_total", finite_or_null(r.rhs_total)},
                        {"abs_residual", finite_or_null(r.abs_residual)},
                        {"rel_residual", finite_or_null(r.rel_residual)},
                        {"tolerance", r.tolerance},
                        {"verdict", r.pass ? "PASS" : "FAIL"},
                        {"diagnostics", r.diagnostics},
                        {"truncation", r.truncation},
                        {"provenance",
                         {{"config_hash", fmt::format("{:016x}", r.provenance.config_hash)},
                          {"grid", r.provenance.grid},
                          {"dt", r.provenance.dt},
                          {"seed", r.provenance.seed}}},
                        {"solver",
                         {{"steps", r.solver.steps},
                          {"max_mass_drift", r.solver.max_mass_drift},
                          {"max_clipped_mass", r.solver.max_clipped_mass},
                          {"min_value", r.solver.min_value},
                          {"leaked_mass", r.solver.leaked_mass}}}};
    if (!r.failure.empty()) j["failure"] = r.failure;
    arr.push_back(std::move(j));
  }
  nlohmann::json doc = {{"reports", arr}, {"passed", passed()}, {"failed", failed()}};
  out << doc.dump(2) << '\n';
}

void SuiteReport::write_summary(std::ostream& out) const {
  for (const auto& r : reports) {
    out << fmt::format("{:<4} {:<8} {:<20} t={:<8g} lhs={:<14} rhs={:<14} rel={:<10} tol={:g}\n", r.pass ? "PASS" : "FAIL",
                       to_string(r.id), r.model, r.t, num(r.lhs), num(r.rhs_total), num(r.rel_residual), r.tolerance);
    if (!r.failure.empty()) out << "     error: " << r.failure << '\n';
    for (const auto& t : r.rhs_terms) out << fmt::format("     {:<28} {}\n", t.name, num(t.value));
    for (const auto& d : r.diagnostics) out << "     " << d << '\n';
  }
  out << fmt::format("{} passed, {} failed\n", passed(), failed());
}

}  // namespace jdi
