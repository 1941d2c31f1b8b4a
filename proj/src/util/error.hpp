#pragma once

#include <stdexcept>
#include <string>

namespace mecw {

// Mirrors mecw_status in the C API; values must stay in sync.
enum class ErrorCode : int {
  invalid_argument = 1,
  capacity = 2,
  parse = 3,
  not_found = 4,
  io = 5,
  corrupt = 6,
  degenerate_input = 7,
  insufficient_data = 8,
  transport = 9,
  oracle_integrity = 10,
  not_analyzed = 11,
  already_exists = 12,
  credentials = 13,
  internal = 100,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace mecw
