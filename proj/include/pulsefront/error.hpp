#pragma once

#include <stdexcept>
#include <string>

namespace pulsefront {

/// Stable error categories. The numeric values are part of the C API.
enum class ErrorCode : int {
  ok = 0,
  invalid_argument = 1,
  config = 2,
  grid_mismatch = 3,
  boundary_policy = 4,
  newton_divergence = 5,
  window_too_narrow = 6,
  not_bracketed = 7,
  fit_window_empty = 8,
  out_of_range = 9,
  cfl_violation = 10,
  nan_detected = 11,
  no_convergence = 12,
  precondition = 13,
  io = 14,
  internal = 99,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace pulsefront
