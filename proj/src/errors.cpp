#include "soficlab/errors.hpp"

namespace soficlab {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotAGroup: return "NotAGroup";
    case ErrorCode::SizeBudgetExceeded: return "SizeBudgetExceeded";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::BadVertex: return "BadVertex";
    case ErrorCode::BadElement: return "BadElement";
    case ErrorCode::BadGraph: return "BadGraph";
    case ErrorCode::ContextMismatch: return "ContextMismatch";
    case ErrorCode::KMismatch: return "KMismatch";
    case ErrorCode::MissingProductKey: return "MissingProductKey";
    case ErrorCode::MissingInverseKey: return "MissingInverseKey";
    case ErrorCode::KeyDomainMismatch: return "KeyDomainMismatch";
    case ErrorCode::CarrierBudgetExceeded: return "CarrierBudgetExceeded";
    case ErrorCode::CannotPreserveFixedpointFreeness: return "CannotPreserveFixedpointFreeness";
    case ErrorCode::BadGeneratorIndex: return "BadGeneratorIndex";
    case ErrorCode::RadiusExceeded: return "RadiusExceeded";
    case ErrorCode::InputAxiomViolation: return "InputAxiomViolation";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::MissingProvenance: return "MissingProvenance";
    case ErrorCode::UnregisteredClass: return "UnregisteredClass";
    case ErrorCode::Disconnected: return "Disconnected";
    case ErrorCode::BadTree: return "BadTree";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace soficlab
