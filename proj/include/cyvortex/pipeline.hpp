/// @file pipeline.hpp
/// @brief The four batch commands. Each returns an exit status and the JSON
/// document it wrote, and never throws.
///
/// Exit status: 0 success, 1 scientific failure (no convergence, failed
/// invariant), 2 invalid configuration or input.
#pragma once

#include <string>

#include "cyvortex/config.hpp"
#include "cyvortex/error.hpp"

namespace cyv {

struct RunReport {
  int exit_code = 0;
  std::string command;
  std::string summary_json;
  std::string message;
};

RunReport run_solve(const RunConfig& config);
RunReport run_verify(const RunConfig& config);
RunReport run_mms(const RunConfig& config);
RunReport run_decay(const RunConfig& config);

/// Dispatches on "solve", "verify", "mms" or "decay"; exit 2 otherwise.
RunReport run_command(const std::string& command, const RunConfig& config);

/// Exit status for an error code: 2 for input problems, 1 otherwise.
int exit_code_for(ErrorCode code);

}  // namespace cyv
