#pragma once

#include <stdexcept>
#include <string>

namespace prom {

enum class ErrorCode {
  InvalidArgument = 1,
  Io = 2,
  Parse = 3,
  NotFound = 4,
  State = 5,
  Capacity = 6,
  Internal = 7,
};

// All recoverable failures in the core are reported with this type. The C API
// maps `code()` onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace prom
