#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slitqfi {

enum class ErrorCode {
  kInvalidArgument,
  kOutOfRange,
  kInvalidConfig,
  kParse,
  kNoResonance,
  kWindowTooNarrow,
  kSingularLoss,
  kIllConditioned,
  kLinearizationInvalid,
  kDegenerateDistribution,
  kTruncation,
  kNoData,
  kSweepFailed,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (the CLI in particular) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace slitqfi
