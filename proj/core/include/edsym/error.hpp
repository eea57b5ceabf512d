#pragma once

#include <stdexcept>
#include <string>

namespace edsym {

// Every failure the toolkit can diagnose carries one of these codes. Codes
// are stable strings in reports, so renaming one is a format change.
enum class Errc {
  UnknownCoordinate,
  DomainViolation,
  AllSamplesSingular,
  ChartMismatch,
  RankInconsistent,
  CoframeDegenerate,
  NotFree,
  NotTransverse,
  NotProjectable,
  SectionNotValid,
  NotInvariant,
  NotASubalgebra,
  NotSubmersion,
  FiberTangency,
  CrossTermPresent,
  NotProductTangent,
  NotAnIdeal,
  NonRationalStructureConstants,
  ExpressionNotInvariant,
  SpanMismatch,
  TruncatedSlot,
  NotAContactSymmetry,
  DegreeUnsupported,
  Undecided,
  SyntaxError,
  UnresolvedReference,
  DimensionMismatch,
  UnknownExample,
  UsageError,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace edsym
