#pragma once

#include <stdexcept>
#include <string>

namespace antijam {

enum class ErrorCode {
  InvalidArgument = 1,
  Geometry = 2,
  Infeasible = 3,
  NotFound = 4,
  Io = 5,
  Parse = 6,
  State = 7,
};

// All failures inside the core are reported as antijam::Error. The C API
// translates the code into its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace antijam
