#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace superopt {

/// Failure raised by any numerical stage.
///
/// `code()` is a stable machine-readable tag ("aliasing", "zero_operator",
/// "reduction_failed", ...). Solver stages attach the recursion level and the
/// residual that tripped the check, when they have one.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail, int level = -1,
        double residual = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(code + ": " + detail),
        code_(std::move(code)),
        detail_(detail),
        level_(level),
        residual_(residual) {}

  const std::string& code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  int level() const noexcept { return level_; }
  double residual() const noexcept { return residual_; }

  /// Same error re-tagged with the recursion level it surfaced at.
  Error at_level(int level) const { return Error(code_, detail_, level, residual_); }

 private:
  std::string code_;
  std::string detail_;
  int level_;
  double residual_;
};

}  // namespace superopt
