#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nmembrane {

enum class ErrorKind {
  InvalidArgument,
  NondegeneracyViolation,
  InvalidWeight,
  InvalidRange,
  NotConnected,
  AsymptoticMismatch,
  NoRegionFound,
  ZeroVector,
  OrderingViolation,
  TwoRayViolation,
  TooLarge,
  NotConverged,
  UnorderedBoundary,
  IncompatibleGrids,
  EmptyFreeBoundary,
  BallOutsideDomain,
  OutOfDomain,
  NotRegular,
  InsufficientData,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` carries the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nmembrane
