#pragma once

#include <string>

#include "rfcw/config.hpp"

namespace rfcw {

struct RunResult {
  int exit_code = 0;  // 0 success, 1 internal error, 2 domain error
  std::string json;   // result record, or {"error": ...} on failure
};

// Commands: landscape, predict, exact, bounds, simulate, validate, report.
// Never throws; failures are encoded in exit_code + json.
RunResult run_command(const std::string& command, const Config& cfg);

}  // namespace rfcw
