#pragma once

#include <map>
#include <utility>
#include <vector>

#include "edsym/geometry.hpp"
#include "edsym/linalg.hpp"

namespace edsym {

// Exterior differential system presented by 1-form and 2-form generators on
// a single chart; the algebraic ideal they span is the object of the
// membership and derived-system operations.
class EDS {
 public:
  EDS(ChartPtr chart, std::vector<DiffForm> one_forms,
      std::vector<DiffForm> two_forms = {});

  const ChartPtr& chart() const { return chart_; }
  const std::vector<DiffForm>& ones() const { return ones_; }
  const std::vector<DiffForm>& twos() const { return twos_; }

  // every generator coefficient, usable as a sampling rejection set
  std::vector<Expr> coefficient_exprs() const;

  // algebraic generators of the differential closure: the same 1-forms,
  // with the exterior derivatives of the 1-forms joined to the 2-forms
  EDS algebraic_closure() const;

 private:
  ChartPtr chart_;
  std::vector<DiffForm> ones_;
  std::vector<DiffForm> twos_;
};

struct RankReport {
  int rank = 0;
  std::vector<int> per_point;
};

// pointwise rank of the 1-form span; disagreement between points throws
// RankInconsistent
RankReport rank_at_samples(const EDS&, const SamplePlan&);

struct MembershipCertificate {
  bool member = false;
  double tol = 0;
  std::vector<SamplePoint> points;
  std::vector<double> residuals;       // least-squares residual per point
  std::vector<std::vector<double>> coefficients;  // solution per point
  int witness = -1;                    // first failing point when !member
};

// Pointwise membership of w in the algebraic ideal. Degree 1 solves
// w = sum lambda_i alpha_i; degree 2 solves
// w = sum mu_j beta_j + sum alpha_i ^ eta_i with the eta_i free 1-forms.
// Coefficient vectors list lambda (degree 1) or mu followed by the eta
// components (degree 2).
MembershipCertificate membership(const DiffForm& w, const EDS& ideal,
                                 const SamplePlan&);

// Generators of the derived system: all combinations sum a_i alpha_i of the
// 1-form generators, a_i functions, whose exterior derivative stays in the
// algebraic ideal. Coefficients come out of the symbolic nullspace, so
// function coefficients are found exactly.
std::vector<DiffForm> derived_system(const EDS&, const SamplePlan&);

struct StructureEquations {
  // d omega^i = sum_{a<b} coeff[i][(a,b)] omega^a ^ omega^b
  std::vector<std::map<std::pair<int, int>, Expr>> coeff;
};

// Expands each d omega^i in the coframe basis via the dual frame, then
// certifies the expansion by a residual zero-test; a coframe that fails to
// invert throws CoframeDegenerate.
StructureEquations structure_equations(const std::vector<DiffForm>& coframe,
                                       const SamplePlan&);

}  // namespace edsym
