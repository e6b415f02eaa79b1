#pragma once

#include <stdexcept>
#include <string>

namespace orthospec {

enum class ErrorCode {
  kInvalidParameter,
  kSingularity,
  kAccuracy,
  kNumeric,
  kDegenerate,
  kNotApplicable,
  kCapExceeded,
  kConfig,
  kIo,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised when 1/mu - T(y) vanishes; carries the offending point.
class SingularityError : public Error {
 public:
  SingularityError(double y, double mu, const std::string& what)
      : Error(ErrorCode::kSingularity, what), y_(y), mu_(mu) {}

  double y() const noexcept { return y_; }
  double mu() const noexcept { return mu_; }

 private:
  double y_;
  double mu_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace orthospec
