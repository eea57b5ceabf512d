#pragma once

#include <array>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "edsym/eds.hpp"
#include "edsym/geometry.hpp"
#include "edsym/reduction.hpp"
#include "edsym/sample.hpp"

namespace edsym {

// Which sigma block a 2-form generator must occupy once reduced modulo the
// 1-form generators.
enum class Branch { hat, check };

// A coframe split proposed for a Pfaffian system: theta spans the 1-form
// generators, sigma_hat and sigma_check complete it to a coframe, and tags
// assigns each 2-form generator of `system` a block (parallel to
// system.twos()).
struct Decomposition {
  EDS system;
  std::vector<DiffForm> theta;
  std::vector<DiffForm> sigma_hat;
  std::vector<DiffForm> sigma_check;
  std::vector<Branch> tags;
};

// Certified block sizes: s = #theta, p = #sigma_hat, rho = #sigma_check,
// t = #hat-tagged 2-forms, tau = #check-tagged ones.
struct DecompositionReport {
  int s = 0;
  int p = 0;
  int rho = 0;
  int t = 0;
  int tau = 0;
};

// Certifies that the split is a decomposition of bidegree [p, rho]: sizes
// add up to dim M with p, rho >= 2 and at least one 2-form per block, the
// full coframe has maximal rank at every sample, theta spans exactly the
// 1-form generators, and each 2-form generator reduces modulo theta to a
// form supported purely on its tagged block.  Throws CrossTermPresent with
// the offending generator, frame pair, and coefficient otherwise.
DecompositionReport check_decomposition(const Decomposition& dec,
                                        const SamplePlan& plan);

// The two singular Pfaffian systems attached to a decomposition.  Each
// span has constant rank at samples and together they span all of T*M.
struct SingularPair {
  ChartPtr chart;
  std::vector<DiffForm> hat;
  std::vector<DiffForm> check;
  int rank_hat = 0;
  int rank_check = 0;
};

// Builds the pair from explicit spans, certifying constant ranks and that
// hat and check jointly span the coframe bundle (SpanMismatch otherwise).
SingularPair make_singular_pair(const ChartPtr& chart,
                                std::vector<DiffForm> hat,
                                std::vector<DiffForm> check,
                                const SamplePlan& plan);

// Pair for a certified decomposition: hat = theta + sigma_hat, check =
// theta + sigma_check.
SingularPair singular_pair(const Decomposition& dec, const SamplePlan& plan);

// Functions whose differentials lie in the given singular span and are
// pointwise independent.
struct FirstIntegralBasis {
  ChartPtr chart;
  std::vector<Expr> integrals;
  std::vector<DiffForm> system;
};

// Certifies df in span(system) for every candidate (SpanMismatch names the
// first failure) and pointwise independence of the differentials
// (RankInconsistent).
FirstIntegralBasis first_integral_basis(const ChartPtr& chart,
                                        std::vector<Expr> integrals,
                                        std::vector<DiffForm> system,
                                        const SamplePlan& plan);

// Darboux integrability verdict for a singular pair with candidate
// integral bases: hat_closes means span(hat) + span(d check-integrals)
// covers T*M, check_closes the mirror image, independent that the two
// differential families have full joint rank.
struct DarbouxReport {
  bool darboux = false;
  bool hat_closes = false;
  bool check_closes = false;
  bool independent = false;
  int rank_hat = 0;
  int rank_check = 0;
};

// hat_integrals must have differentials in span(pair.hat) and
// check_integrals in span(pair.check); memberships are re-certified.
DarbouxReport check_darboux(const SingularPair& pair,
                            const FirstIntegralBasis& hat_integrals,
                            const FirstIntegralBasis& check_integrals,
                            const SamplePlan& plan);

// dim M - rank V-hat-infinity - rank V-check-infinity.  Throws
// DimensionMismatch when the inputs make the count negative.
int vessiot_dimension(int dim_m, int rank_hat_infinity,
                      int rank_check_infinity);

// Splits a product-tangent symmetry algebra into its factor truncations.
// Every basis field must decompose as X_1 + X_2 with X_a tangent to factor
// a (NotProductTangent otherwise); the truncations are deduplicated by
// span before the factor actions are rebuilt.
std::pair<LieAction, LieAction> projected_algebras(const LieAction& action,
                                                   const ChartPtr& m1,
                                                   const ChartPtr& m2,
                                                   const SamplePlan& plan);

// One intermediate integral presented upstairs.  `invariant` lives on the
// total chart; `reduced` is its expression on the quotient chart and is
// recovered through the cross section when absent.  The identity
// invariant = reduced o q is always re-certified (ExpressionNotInvariant).
struct FactorIntegral {
  Expr invariant;
  std::optional<Expr> reduced;
};

// Pushes intermediate integrals down a group quotient and certifies that
// the reduced expressions are first integrals of the stated singular
// systems on the quotient chart.
std::pair<FirstIntegralBasis, FirstIntegralBasis>
intermediate_integrals_from_quotient(const QuotientSpec& spec,
                                     const SingularPair& pair,
                                     const std::vector<FactorIntegral>& hat,
                                     const std::vector<FactorIntegral>& check,
                                     const SamplePlan& plan);

// Whether a Vessiot algebra was read off from a diagonal action directly
// or from the reduced quotient algebra.
enum class VessiotSource { diagonal, reduced };

// Abstract Lie algebra carried by structure constants over Q; keys are
// basis pairs (i, j) with i < j.
struct VessiotAlgebra {
  int dim = 0;
  std::map<std::pair<int, int>, std::vector<mpq_class>> constants;
  VessiotSource source = VessiotSource::diagonal;
};

// Exact Jacobi identity over Q.
bool jacobi_holds(const VessiotAlgebra& g);

// Reads the algebra off an action with exact structure constants.  Throws
// NonRationalStructureConstants when certification of the constants
// failed, RankInconsistent when they violate Jacobi (the basis cannot
// have been pointwise independent).
VessiotAlgebra vessiot_from_action(const LieAction& action);

// Result of factoring a diagonal action through per-factor quotients:
// a1, a2 generate the factor kernels' projections, q and section assemble
// the product quotient map, reduced carries the surviving basis classes
// downstairs, and vessiot is the quotient algebra.
struct DiagonalReduction {
  std::vector<VectorField> a1;
  std::vector<VectorField> a2;
  SmoothMap q;
  SmoothMap section;
  std::vector<VectorField> reduced;
  VessiotAlgebra vessiot;
};

// Computes the kernels K_a of the opposite-factor truncations, checks
// W = K_1 + K_2 is an ideal (NotAnIdeal), quotients the action along the
// supplied per-factor quotient maps, and certifies that the pushed-forward
// basis realizes the quotient structure constants.  q_a must collapse
// exactly the A_a orbits: its target dimension is dim m_a minus the number
// of independent kernel fields (DimensionMismatch).
DiagonalReduction diagonal_reduction(const LieAction& action,
                                     const ChartPtr& m1, const ChartPtr& m2,
                                     const SmoothMap& q1, const SmoothMap& s1,
                                     const SmoothMap& q2, const SmoothMap& s2,
                                     const SamplePlan& plan);

// Singular data transported along an integrable extension p : ext -> base.
// up.hat = admissible + p^*(down.hat) and mirror for check; the integral
// bases upstairs extend the pullbacks of the ones downstairs.
struct ExtensionRecord {
  SmoothMap projection;
  std::vector<DiffForm> admissible;
  SingularPair up;
  SingularPair down;
  FirstIntegralBasis up_hat;
  FirstIntegralBasis up_check;
  FirstIntegralBasis down_hat;
  FirstIntegralBasis down_check;
};

// Certifies that p is an integrable extension of `base` with the given
// admissible block, that the lifted spans have the direct-sum ranks
// rank(admissible) + rank(down), and that every 1-form generator of `ext`
// lies in both lifted spans (SpanMismatch on any failure).  extra_hat and
// extra_check adjoin integrals that exist only upstairs.
ExtensionRecord extension_singular_systems(const EDS& ext, const EDS& base,
                                           const SmoothMap& p,
                                           std::vector<DiffForm> admissible,
                                           const SingularPair& down,
                                           const FirstIntegralBasis& down_hat,
                                           const FirstIntegralBasis& down_check,
                                           const std::vector<Expr>& extra_hat,
                                           const std::vector<Expr>& extra_check,
                                           const SamplePlan& plan);

// Maximal-compatibility verdict for an extension: fiber_transverse_*
// reports ker p_* meeting the annihilator of the lifted integrals only in
// zero at every sample, rank_saturated_* the count rank(up) =
// fiber_dim + rank(down).
struct MaxCompatReport {
  bool compatible = false;
  bool fiber_transverse_hat = false;
  bool fiber_transverse_check = false;
  bool rank_saturated_hat = false;
  bool rank_saturated_check = false;
  bool within_bounds_hat = false;
  bool within_bounds_check = false;
  int fiber_dim = 0;
  int rank_up_hat = 0;
  int rank_up_check = 0;
  int rank_down_hat = 0;
  int rank_down_check = 0;
};

MaxCompatReport check_max_compatible(const ExtensionRecord& record,
                                     const SamplePlan& plan);

// One affine chart of the plane search on a 3-dimensional algebra: planes
// span{e_i + a e_k, e_j + b e_k} close under the bracket exactly on the
// zero set of a quadratic in (a, b), stored low-to-high as
// {1, a, b, a^2, ab, b^2}.
struct PlaneSearchChart {
  int i = 0;
  int j = 0;
  int k = 0;
  std::array<mpq_class, 6> poly;
  bool solvable = false;
};

// witness holds the two basis coefficient vectors of a closing plane when
// one exists; charts records the quadratic and its real solvability per
// affine chart.
struct SubalgebraReport {
  bool exists = false;
  std::vector<std::vector<mpq_class>> witness;
  std::vector<PlaneSearchChart> charts;
};

// Decides existence of a 2-dimensional subalgebra of a 3-dimensional
// algebra over the reals, exactly.  The three affine charts cover all
// planes, real solvability of each chart quadratic is decided by
// discriminant signs, and a certified rational witness is reported when
// the bounded search finds one (a real quadric need not carry a rational
// point, so `exists` can hold with an empty witness).  Throws
// DimensionMismatch unless g.dim == 3.
SubalgebraReport has_2dim_subalgebra(const VessiotAlgebra& g);

}  // namespace edsym
