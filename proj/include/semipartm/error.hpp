#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semipartm {

enum class Errc {
  InvalidArgument,
  DimensionMismatch,
  NonFinite,
  ConvergenceFailure,
  SingularSystem,
  NonNegativityViolated,
  InvalidKnots,
  CovariateMismatch,
  GridEmpty,
  FoldTooSmall,
  EmptyCorpus,
  AllDocumentsEmpty,
  MissingCovariates,
  NonNumericValue,
  NonIntegerCounts,
  SingularValueZero,
  LengthMismatch,
  ShapeMismatch,
  EmptyInput,
  ModelInputMismatch,
  DuplicateId,
  Io,
  Parse,
};

std::string_view errc_name(Errc code) noexcept;

// Broad class of an error, used to pick process exit codes.
enum class ErrorClass { Usage, Data, Numerical };

ErrorClass error_class(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace semipartm
