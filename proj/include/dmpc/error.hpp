#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dmpc {

enum class ErrorCode {
  BoundsInverted,
  ComfortOutsideBounds,
  NonPositiveCoefficient,
  InvalidValue,
  ShapeMismatch,
  InsufficientData,
  DegenerateSweep,
  BadBounds,
  NonFiniteObjective,
  Schema,
};

std::string_view to_string(ErrorCode code);

/// Error raised by every module. `field()` names the offending config field
/// or data column when there is one; `vector()` carries the offending
/// decision vector for NonFiniteObjective.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string field = {},
        std::vector<double> vector = {});

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] const std::string& field() const noexcept { return field_; }
  [[nodiscard]] const std::vector<double>& vector() const noexcept { return vector_; }

 private:
  ErrorCode code_;
  std::string field_;
  std::vector<double> vector_;
};

}  // namespace dmpc
