#pragma once

#include <map>
#include <string>
#include <vector>

#include "edsym/expr.hpp"

namespace edsym {

// Default box avoids 0 and 1, where products and powers degenerate.
struct SampleBox {
  double lo = 0.2;
  double hi = 2.2;
};

// Where numeric probes live: coordinates in sampling order, per-coordinate
// boxes, and inequality constraints (each expression must be > 0 at an
// accepted point). Constraint expressions may use any chart coordinate.
struct SampleDomain {
  std::vector<std::string> coords;
  std::map<std::string, SampleBox> boxes;
  std::vector<Expr> positive;
};

struct SamplePlan {
  unsigned long seed = 0;
  int samples = 8;
  double tol = 1e-9;
  double rank_tol = 1e-7;  // relative threshold for numeric rank decisions
  int max_retries = 1000;  // rejection attempts per point
};

// seed 0 unless EDSYM_SEED overrides it
SamplePlan default_plan();

using SamplePoint = std::map<std::string, double>;

// Deterministic: a fixed seed and domain produce identical points. Points
// rejected by a constraint or by a DomainViolation in one of `must_eval`
// are resampled, up to max_retries per point; exhaustion throws
// AllSamplesSingular.
std::vector<SamplePoint> sample_points(const SampleDomain&, const SamplePlan&,
                                       const std::vector<Expr>& must_eval = {});

struct ZeroCertificate {
  bool zero = false;
  double tol = 0;
  std::vector<SamplePoint> points;
  std::vector<double> residuals;  // |value| per point
  std::vector<double> scales;     // max |subterm| per point
  int witness = -1;               // first failing point when !zero
};

// Probabilistic zero test: |value| <= tol * (1 + scale) at every sample.
// A structural zero short-circuits with an empty point list.
ZeroCertificate certify_zero(const Expr&, const SampleDomain&,
                             const SamplePlan&);
bool is_zero(const Expr&, const SampleDomain&, const SamplePlan&);

}  // namespace edsym
