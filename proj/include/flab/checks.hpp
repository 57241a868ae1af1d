#pragma once

#include <string>
#include <vector>

#include "flab/scenario.hpp"

namespace flab {

enum class Verdict { Pass, Fail, Skip };
const char* to_string(Verdict v);

struct CheckInfo {
  std::string name;
  std::string subject;    // what the check exercises
  std::string condition;  // what must hold for a pass
  bool needs_mrp = false;
  bool invariant = true;  // expected to pass on every well-formed instance
};

// In execution order.
const std::vector<CheckInfo>& registered_checks();
const CheckInfo& check_info(const std::string& name);  // throws UnknownCheck
std::string explain(const std::string& name);

// Runs the scenario's checks (or `checks` when non-empty) and returns the report:
// {tool, version, scenario_hash, seed, checks: [{name, verdict, note, details}],
//  summary: {pass, fail, skip}, verdict}.
// Throws ParseError / UnknownCheck for malformed input; check failures are report content.
json run_scenario(const Scenario& s, const std::vector<std::string>& checks = {});
json run_scenario(const json& scenario, const std::vector<std::string>& checks = {});

// Rank per node, multiplicities, constraint menu and the unreachable direction if any.
json check_mrp_report(const Scenario& s);

// Deflator LPs, multiplier solution and the enlargement checks in one report.
json viability_audit(const Scenario& s);

std::string render_table(const json& report);

// 0 pass, 1 check failed.
int exit_code(const json& report);

}  // namespace flab
