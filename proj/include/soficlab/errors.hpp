#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace soficlab {

enum class ErrorCode {
  NotAGroup,
  SizeBudgetExceeded,
  SizeMismatch,
  BadVertex,
  BadElement,
  BadGraph,
  ContextMismatch,
  KMismatch,
  MissingProductKey,
  MissingInverseKey,
  KeyDomainMismatch,
  CarrierBudgetExceeded,
  CannotPreserveFixedpointFreeness,
  BadGeneratorIndex,
  RadiusExceeded,
  InputAxiomViolation,
  BudgetExceeded,
  MissingProvenance,
  UnregisteredClass,
  Disconnected,
  BadTree,
  BadRange,
  SchemaError,
  IoError,
  InvalidArgument,
};

std::string_view error_name(ErrorCode code);

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace soficlab
