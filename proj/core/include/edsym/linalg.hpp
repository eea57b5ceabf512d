#pragma once

#include <Eigen/Dense>
#include <vector>

#include "edsym/sample.hpp"

namespace edsym {

// rank with a relative singular threshold; empty matrices have rank 0
int numeric_rank(const Eigen::MatrixXd& A, double rel_tol);

struct LeastSquares {
  Eigen::VectorXd x;
  double residual;  // max-norm of Ax - b
  double scale;     // magnitude reference for the residual test
};
LeastSquares solve_least_squares(const Eigen::MatrixXd& A,
                                 const Eigen::VectorXd& b);

// Dense matrix of expressions. Row-reduction decisions (is this entry zero,
// which pivot is best) are delegated to the sampling oracle: an entry counts
// as zero when certify_zero accepts it, and among nonzero candidates the one
// with the largest magnitude at the first sample point wins. Entries of the
// reduced matrix that certify as zero are replaced by structural zeros.
using SymMatrix = std::vector<std::vector<Expr>>;

struct SymRref {
  SymMatrix reduced;
  std::vector<int> pivot_cols;  // one per pivot row, in order
  int rank = 0;
};

SymRref sym_rref(const SymMatrix&, const SampleDomain&, const SamplePlan&);

// Throws `on_singular` when the oracle finds a rank defect.
SymMatrix sym_inverse(const SymMatrix&, const SampleDomain&,
                      const SamplePlan&, Errc on_singular = Errc::RankInconsistent);

// basis of the right kernel, one coefficient vector per free column
std::vector<std::vector<Expr>> sym_nullspace(const SymMatrix&,
                                             const SampleDomain&,
                                             const SamplePlan&);

}  // namespace edsym
