#include "edsym/linalg.hpp"

#include <cmath>

namespace edsym {

int numeric_rank(const Eigen::MatrixXd& A, double rel_tol) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(rel_tol);
  return static_cast<int>(qr.rank());
}

LeastSquares solve_least_squares(const Eigen::MatrixXd& A,
                                 const Eigen::VectorXd& b) {
  LeastSquares out;
  if (A.cols() == 0) {
    out.x = Eigen::VectorXd(0);
    out.residual = b.size() ? b.cwiseAbs().maxCoeff() : 0.0;
    out.scale = out.residual;
    return out;
  }
  out.x = A.colPivHouseholderQr().solve(b);
  Eigen::VectorXd r = A * out.x - b;
  out.residual = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
  double anorm = A.size() ? A.cwiseAbs().maxCoeff() : 0.0;
  double xnorm = out.x.size() ? out.x.cwiseAbs().maxCoeff() : 0.0;
  double bnorm = b.size() ? b.cwiseAbs().maxCoeff() : 0.0;
  out.scale = std::max(bnorm, anorm * xnorm);
  return out;
}

namespace {

struct EntryProbe {
  enum class Class { Zero, NonZero, Indeterminate } cls;
  double score;  // |value| at the first evaluable point
};

EntryProbe probe_entry(const Expr& e, const std::vector<SamplePoint>& pts,
                       double tol) {
  if (e.is_zero()) return {EntryProbe::Class::Zero, 0.0};
  bool any_eval = false, nonzero = false;
  double score = 0.0;
  bool have_score = false;
  for (const auto& p : pts) {
    try {
      EvalResult r = eval_numeric(e, p);
      if (!have_score) {
        score = std::fabs(r.value);
        have_score = true;
      }
      any_eval = true;
      if (std::fabs(r.value) > tol * (1 + r.scale)) nonzero = true;
    } catch (const Error& err) {
      if (err.code() != Errc::DomainViolation) throw;
    }
  }
  if (!any_eval) return {EntryProbe::Class::Indeterminate, 0.0};
  return {nonzero ? EntryProbe::Class::NonZero : EntryProbe::Class::Zero,
          score};
}

}  // namespace

SymRref sym_rref(const SymMatrix& A, const SampleDomain& dom,
                 const SamplePlan& plan) {
  SymRref out;
  out.reduced = A;
  size_t rows = A.size();
  size_t cols = rows ? A[0].size() : 0;
  for (const auto& r : A)
    if (r.size() != cols)
      fail(Errc::DimensionMismatch, "ragged matrix");
  if (rows == 0 || cols == 0) return out;

  auto pts = sample_points(dom, plan);
  SymMatrix& R = out.reduced;
  std::vector<bool> used(rows, false);
  std::vector<int> pivot_row_of;  // parallel to pivot_cols

  for (size_t col = 0; col < cols; ++col) {
    int best = -1;
    double best_score = 0.0;
    bool saw_indeterminate = false;
    for (size_t r = 0; r < rows; ++r) {
      if (used[r]) continue;
      EntryProbe p = probe_entry(R[r][col], pts, plan.tol);
      if (p.cls == EntryProbe::Class::Indeterminate) {
        saw_indeterminate = true;
      } else if (p.cls == EntryProbe::Class::NonZero &&
                 (best < 0 || p.score > best_score)) {
        best = static_cast<int>(r);
        best_score = p.score;
      }
    }
    if (best < 0) {
      if (saw_indeterminate)
        fail(Errc::RankInconsistent,
             "pivot decision impossible: entries do not evaluate at any "
             "sample");
      continue;
    }
    used[best] = true;
    out.pivot_cols.push_back(static_cast<int>(col));
    pivot_row_of.push_back(best);
    Expr inv_pivot = num(1) / R[best][col];
    for (size_t c = 0; c < cols; ++c) R[best][c] = R[best][c] * inv_pivot;
    for (size_t r = 0; r < rows; ++r) {
      if (r == static_cast<size_t>(best)) continue;
      Expr f = R[r][col];
      if (f.is_zero()) continue;
      for (size_t c = 0; c < cols; ++c)
        R[r][c] = R[r][c] - f * R[best][c];
    }
  }
  out.rank = static_cast<int>(out.pivot_cols.size());

  // move pivot rows into leading position in pivot order
  SymMatrix ordered;
  ordered.reserve(rows);
  for (int r : pivot_row_of) ordered.push_back(std::move(R[r]));
  for (size_t r = 0; r < rows; ++r)
    if (!used[r]) ordered.push_back(std::move(R[r]));
  R = std::move(ordered);

  // certified-zero cleanup: entries that vanish at every sample are
  // math-zero with high confidence and only carry normalization debris
  for (auto& row : R)
    for (auto& e : row) {
      if (e.is_zero()) continue;
      EntryProbe p = probe_entry(e, pts, plan.tol);
      if (p.cls == EntryProbe::Class::Zero) e = Expr();
    }
  return out;
}

SymMatrix sym_inverse(const SymMatrix& A, const SampleDomain& dom,
                      const SamplePlan& plan, Errc on_singular) {
  size_t n = A.size();
  for (const auto& r : A)
    if (r.size() != n)
      fail(Errc::DimensionMismatch, "inverse of a non-square matrix");
  SymMatrix aug(n, std::vector<Expr>(2 * n));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) aug[i][j] = A[i][j];
    aug[i][n + i] = num(1);
  }
  SymRref r = sym_rref(aug, dom, plan);
  // a singular left block pushes a pivot into the identity columns
  bool regular = r.rank == static_cast<int>(n);
  for (int c : r.pivot_cols)
    if (c >= static_cast<int>(n)) regular = false;
  if (!regular) fail(on_singular, "matrix is singular at the sample points");
  SymMatrix inv(n, std::vector<Expr>(n));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) inv[i][j] = r.reduced[i][n + j];
  return inv;
}

std::vector<std::vector<Expr>> sym_nullspace(const SymMatrix& A,
                                             const SampleDomain& dom,
                                             const SamplePlan& plan) {
  size_t cols = A.empty() ? 0 : A[0].size();
  SymRref r = sym_rref(A, dom, plan);
  std::vector<bool> is_pivot(cols, false);
  for (int c : r.pivot_cols) is_pivot[c] = true;
  std::vector<std::vector<Expr>> basis;
  for (size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<Expr> v(cols);
    v[f] = num(1);
    for (size_t pr = 0; pr < r.pivot_cols.size(); ++pr)
      v[r.pivot_cols[pr]] = -r.reduced[pr][f];
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace edsym
