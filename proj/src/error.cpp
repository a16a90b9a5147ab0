#include "semipartm/error.hpp"

namespace semipartm {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NonFinite: return "NonFinite";
    case Errc::ConvergenceFailure: return "ConvergenceFailure";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::NonNegativityViolated: return "NonNegativityViolated";
    case Errc::InvalidKnots: return "InvalidKnots";
    case Errc::CovariateMismatch: return "CovariateMismatch";
    case Errc::GridEmpty: return "GridEmpty";
    case Errc::FoldTooSmall: return "FoldTooSmall";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::AllDocumentsEmpty: return "AllDocumentsEmpty";
    case Errc::MissingCovariates: return "MissingCovariates";
    case Errc::NonNumericValue: return "NonNumericValue";
    case Errc::NonIntegerCounts: return "NonIntegerCounts";
    case Errc::SingularValueZero: return "SingularValueZero";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::ModelInputMismatch: return "ModelInputMismatch";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::Io: return "Io";
    case Errc::Parse: return "Parse";
  }
  return "Unknown";
}

ErrorClass error_class(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument:
      return ErrorClass::Usage;
    case Errc::NonFinite:
    case Errc::ConvergenceFailure:
    case Errc::SingularSystem:
    case Errc::SingularValueZero:
      return ErrorClass::Numerical;
    default:
      return ErrorClass::Data;
  }
}

}  // namespace semipartm
