#pragma once

// Acceptance checks shared by `kpn verify` and the kpn_acceptance test.

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace kpn {

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double value = 0.0;       // headline measured quantity
  double threshold = 0.0;   // bound it is compared against
  double seconds = 0.0;
  double time_limit = 0.0;
  std::string detail;
  nlohmann::json extra;     // secondary measurements
};

struct PlotTable {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  std::vector<PlotTable> plots;

  bool all_pass() const;
  nlohmann::json to_json() const;
};

/// Runs acceptance criteria `ids` (1..10; empty for all) with the fixed
/// acceptance seed. Each check catches its own errors and reports them as
/// failures.
VerifyReport run_acceptance(const std::vector<int>& ids = {});

/// "criterion <id> <name>: PASS|FAIL value=<v> threshold=<t> time=<s>s"
std::string format_line(const CheckResult& r);

}  // namespace kpn
