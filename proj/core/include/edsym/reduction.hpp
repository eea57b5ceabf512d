#pragma once

#include <map>
#include <utility>
#include <vector>

#include "edsym/eds.hpp"

namespace edsym {

// Finite-dimensional Lie algebra of vector fields on one chart. Construction
// verifies closure: every bracket [X_i, X_j] must lie in the pointwise span
// of the basis at each sample point. The solved bracket coefficients are
// rounded to rationals and cached only when the rounded relations certify as
// identities.
class LieAction {
 public:
  LieAction(ChartPtr chart, std::vector<VectorField> basis, const SamplePlan&);

  const ChartPtr& chart() const { return chart_; }
  const std::vector<VectorField>& basis() const { return basis_; }
  int dim() const { return static_cast<int>(basis_.size()); }

  bool exact_constants() const { return exact_; }
  // [X_i, X_j] = sum_k constants()[(i,j)][k] X_k, keyed by i < j; empty when
  // the rounded constants failed certification
  const std::map<std::pair<int, int>, std::vector<mpq_class>>& constants() const {
    return constants_;
  }

 private:
  ChartPtr chart_;
  std::vector<VectorField> basis_;
  bool exact_ = false;
  std::map<std::pair<int, int>, std::vector<mpq_class>> constants_;
};

// basis fields pointwise linearly independent at every sample point
bool acts_freely(const LieAction&, const SamplePlan&);

// the Lie derivative of every generator along every basis field stays in the
// algebraic closure of the system
bool is_symmetry(const EDS&, const LieAction&, const SamplePlan&);

// the annihilator of the 1-form generators meets the span of the basis
// fields only in zero, at every sample point
bool is_transverse(const EDS&, const LieAction&, const SamplePlan&);

// Coframe adapted to a free transverse action: theta pairs with the basis
// fields by theta[i](X_j) = delta_ij, theta_sb completes theta to a basis of
// the span of the 1-form generators, omega_sb completes that to a coframe,
// and both completion blocks annihilate every basis field.
struct AdaptedCoframe {
  std::vector<DiffForm> theta;
  std::vector<DiffForm> theta_sb;
  std::vector<DiffForm> omega_sb;

  std::vector<DiffForm> full() const;
};

AdaptedCoframe adapted_coframe(const EDS&, const LieAction&, const SamplePlan&);

// The 2-form content of the algebraic closure, rewritten on the omega_sb
// block of the adapted coframe and reduced modulo the 1-form generators.
// Returns an independent spanning set whose members annihilate the action.
std::vector<DiffForm> semibasic_two_forms(const EDS&, const LieAction&,
                                          const AdaptedCoframe&,
                                          const SamplePlan&);

// Quotient data for one action: invariants q onto the quotient chart and a
// cross-section back, with q . section the identity.
struct QuotientSpec {
  LieAction action;
  SmoothMap q;
  SmoothMap section;

  const ChartPtr& quotient_chart() const { return q.target; }
};

// Validates that every component of q is annihilated by the action, that q
// is a submersion at the sample points, and that section is a right inverse
// of q.
QuotientSpec make_quotient_spec(const LieAction&, const SmoothMap& q,
                                const SmoothMap& section, const SamplePlan&);

// The reduced system on the quotient chart: section pullbacks of the
// semi-basic generators, with 2-forms already implied by the 1-form block
// dropped. Every output generator is certified to pull back along q into the
// algebraic closure of the input.
EDS quotient(const EDS&, const QuotientSpec&, const SamplePlan&);

// The map between the quotients of two nested actions on the same chart,
// composed from the finer section and the coarser invariants, certified by
// factoring the coarser invariants through the finer quotient.
SmoothMap induced_projection(const QuotientSpec& fine,
                             const QuotientSpec& coarse, const SamplePlan&);

struct ExtensionReport {
  bool extension = false;        // spans_match and closed together
  bool spans_match = false;      // generators match <J, pullback(I)> both ways
  bool closed = false;           // each d xi lies in <J, pullback(I)>
  bool derived_contains = true;  // diagnostic: each xi survives into the
                                 // derived system (checked only when E is
                                 // Pfaffian; not required for extension)
};

// Integrable-extension test for E on the source of p against I on its
// target, with J the chosen 1-forms transverse to the fibres. Throws
// NotSubmersion when p drops rank and FiberTangency when J degenerates on a
// fibre.
ExtensionReport is_integrable_extension(const SmoothMap& p, const EDS& E,
                                        const EDS& I,
                                        const std::vector<DiffForm>& J,
                                        const SamplePlan&);

}  // namespace edsym
