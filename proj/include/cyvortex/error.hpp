/// @file error.hpp
/// @brief Exception type shared by the core library.
///
/// Every failure raised by the core carries an ErrorCode; the C API maps the
/// code onto its status enum and the CLI maps it onto an exit code.
#pragma once

#include <stdexcept>
#include <string>

namespace cyv {

enum class ErrorCode {
  invalid_argument,  // malformed input to an operation
  config,            // configuration validation failure
  resolution,        // grid cannot resolve the requested vortex data
  out_of_range,      // query outside a tabulated/represented range
  diverged,          // overflow or non-finite iterate
  not_converged,     // iteration budget exhausted
  krylov_breakdown,  // linear solver stagnated
  io,                // file could not be read or written
  shape_mismatch,    // field does not belong to the grid
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cyv
