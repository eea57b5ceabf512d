#include "edsym/error.hpp"

namespace edsym {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::UnknownCoordinate: return "UnknownCoordinate";
    case Errc::DomainViolation: return "DomainViolation";
    case Errc::AllSamplesSingular: return "AllSamplesSingular";
    case Errc::ChartMismatch: return "ChartMismatch";
    case Errc::RankInconsistent: return "RankInconsistent";
    case Errc::CoframeDegenerate: return "CoframeDegenerate";
    case Errc::NotFree: return "NotFree";
    case Errc::NotTransverse: return "NotTransverse";
    case Errc::NotProjectable: return "NotProjectable";
    case Errc::SectionNotValid: return "SectionNotValid";
    case Errc::NotInvariant: return "NotInvariant";
    case Errc::NotASubalgebra: return "NotASubalgebra";
    case Errc::NotSubmersion: return "NotSubmersion";
    case Errc::FiberTangency: return "FiberTangency";
    case Errc::CrossTermPresent: return "CrossTermPresent";
    case Errc::NotProductTangent: return "NotProductTangent";
    case Errc::NotAnIdeal: return "NotAnIdeal";
    case Errc::NonRationalStructureConstants:
      return "NonRationalStructureConstants";
    case Errc::ExpressionNotInvariant: return "ExpressionNotInvariant";
    case Errc::SpanMismatch: return "SpanMismatch";
    case Errc::TruncatedSlot: return "TruncatedSlot";
    case Errc::NotAContactSymmetry: return "NotAContactSymmetry";
    case Errc::DegreeUnsupported: return "DegreeUnsupported";
    case Errc::Undecided: return "Undecided";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::UnresolvedReference: return "UnresolvedReference";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::UnknownExample: return "UnknownExample";
    case Errc::UsageError: return "UsageError";
  }
  return "UnknownError";
}

}  // namespace edsym
