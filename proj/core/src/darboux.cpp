#include "edsym/darboux.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace edsym {

namespace {

void append_field_coeffs(std::vector<Expr>& out, const VectorField& X) {
  for (const auto& [coord, e] : X.comps()) out.push_back(e);
}

void append_form_coeffs(std::vector<Expr>& out, const DiffForm& w) {
  for (const auto& [idx, e] : w.comps()) out.push_back(e);
}

Eigen::MatrixXd fields_matrix(const std::vector<VectorField>& fields,
                              const SamplePoint& pt, int m) {
  Eigen::MatrixXd G(static_cast<int>(fields.size()), m);
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto row = field_values_at(fields[i], pt);
    for (int c = 0; c < m; ++c) G(static_cast<int>(i), c) = row[c];
  }
  return G;
}

Eigen::MatrixXd forms_matrix(const std::vector<DiffForm>& forms,
                             const SamplePoint& pt, int m) {
  Eigen::MatrixXd T(static_cast<int>(forms.size()), m);
  for (std::size_t i = 0; i < forms.size(); ++i) {
    const auto row = form_values_at(forms[i], pt);
    for (int c = 0; c < m; ++c) T(static_cast<int>(i), c) = row[c];
  }
  return T;
}

// nearest small rational via the continued-fraction convergents; refuses
// when no convergent with a modest denominator lands within tolerance
bool rationalize(double x, mpq_class& out) {
  const double tol = 1e-9 * (1.0 + std::fabs(x));
  long h1 = 1, h0 = 0, k1 = 0, k0 = 1;
  double a = x;
  for (int it = 0; it < 40; ++it) {
    const double fl = std::floor(a);
    if (fl > 1e15 || fl < -1e15) return false;
    const long ai = static_cast<long>(fl);
    const long h = ai * h1 + h0;
    const long k = ai * k1 + k0;
    if (k > 1000000L) return false;
    if (std::fabs(x - static_cast<double>(h) / static_cast<double>(k)) <= tol) {
      out = mpq_class(mpz_class(h), mpz_class(k));
      out.canonicalize();
      return true;
    }
    h0 = h1;
    h1 = h;
    k0 = k1;
    k1 = k;
    const double frac = a - fl;
    if (frac < 1e-12) return false;
    a = 1.0 / frac;
  }
  return false;
}

// rows are the target coordinates in chart order, columns the source ones
SymMatrix jacobian(const SmoothMap& p) {
  const auto& tc = p.target->coords;
  const auto& sc = p.source->coords;
  SymMatrix J(tc.size(), std::vector<Expr>(sc.size()));
  for (std::size_t r = 0; r < tc.size(); ++r) {
    const Expr& f = p.comps.at(tc[r]);
    for (std::size_t c = 0; c < sc.size(); ++c) J[r][c] = diff(f, sc[c]);
  }
  return J;
}

std::vector<Expr> flatten(const SymMatrix& A) {
  std::vector<Expr> out;
  for (const auto& row : A)
    for (const auto& e : row) out.push_back(e);
  return out;
}

Eigen::MatrixXd eval_matrix(const SymMatrix& A, const SamplePoint& pt) {
  Eigen::MatrixXd M(static_cast<int>(A.size()),
                    A.empty() ? 0 : static_cast<int>(A.front().size()));
  for (std::size_t r = 0; r < A.size(); ++r)
    for (std::size_t c = 0; c < A[r].size(); ++c)
      M(static_cast<int>(r), static_cast<int>(c)) =
          eval_numeric(A[r][c], pt).value;
  return M;
}

void require_one_forms(const std::vector<DiffForm>& forms,
                       const ChartPtr& chart, const char* what) {
  for (const auto& w : forms) {
    if (w.chart() != chart)
      fail(Errc::ChartMismatch,
           std::string(what) + " forms must live on the stated chart");
    if (w.degree() != 1)
      fail(Errc::DegreeUnsupported,
           std::string(what) + " block accepts 1-forms only");
  }
}

int constant_rank(const std::vector<DiffForm>& forms,
                  const std::vector<SamplePoint>& pts, int m,
                  const SamplePlan& plan, const char* what) {
  if (forms.empty()) return 0;
  int rank = -1;
  for (const auto& pt : pts) {
    const int r = numeric_rank(forms_matrix(forms, pt, m), plan.rank_tol);
    if (rank < 0)
      rank = r;
    else if (r != rank)
      fail(Errc::RankInconsistent,
           std::string(what) + " span changes rank between sample points");
  }
  return rank;
}

// coordinate split of a product chart: 0 for the first factor, 1 for the
// second; every coordinate must belong to exactly one of them
void require_factor_split(const ChartPtr& chart, const ChartPtr& m1,
                          const ChartPtr& m2) {
  if (!chart || !m1 || !m2) fail(Errc::ChartMismatch, "factor charts missing");
  if (chart->dim() != m1->dim() + m2->dim())
    fail(Errc::ChartMismatch, "factor dimensions do not add up");
  for (const auto& c : chart->coords) {
    const bool in1 = m1->has_coord(c);
    if (in1 == m2->has_coord(c))
      fail(Errc::ChartMismatch,
           "coordinate " + c + " must belong to exactly one factor");
  }
}

// component truncation to one factor; kept coefficients may involve only
// that factor's coordinates
VectorField truncate_to(const VectorField& X, const ChartPtr& mf) {
  std::map<std::string, Expr> comps;
  for (const auto& [coord, e] : X.comps()) {
    if (!mf->has_coord(coord)) continue;
    for (const auto& c : free_coords(e))
      if (!mf->has_coord(c))
        fail(Errc::NotProductTangent,
             "component along " + coord + " depends on the other factor");
    comps[coord] = e;
  }
  return VectorField(mf, std::move(comps));
}

bool certified_zero_field(const VectorField& X, const SampleDomain& dom,
                          const SamplePlan& plan) {
  for (const auto& [coord, e] : X.comps())
    if (!is_zero(e, dom, plan)) return false;
  return true;
}

using QVec = std::vector<mpq_class>;
using QMat = std::vector<QVec>;

// in-place reduced row echelon form over Q; returns the pivot column per
// surviving row, zero rows dropped
std::vector<int> q_rref(QMat& A) {
  std::vector<int> pivots;
  const int rows = static_cast<int>(A.size());
  const int cols = rows ? static_cast<int>(A.front().size()) : 0;
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int pr = -1;
    for (int i = r; i < rows; ++i)
      if (sgn(A[i][c]) != 0) {
        pr = i;
        break;
      }
    if (pr < 0) continue;
    std::swap(A[r], A[pr]);
    const mpq_class inv = mpq_class(1) / A[r][c];
    for (int j = 0; j < cols; ++j) A[r][j] *= inv;
    for (int i = 0; i < rows; ++i) {
      if (i == r || sgn(A[i][c]) == 0) continue;
      const mpq_class f = A[i][c];
      for (int j = 0; j < cols; ++j) A[i][j] -= f * A[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  A.resize(pivots.size());
  return pivots;
}

void reduce_mod_rows(QVec& v, const QMat& R, const std::vector<int>& pivots) {
  for (std::size_t r = 0; r < R.size(); ++r) {
    const mpq_class f = v[pivots[r]];
    if (sgn(f) == 0) continue;
    for (std::size_t j = 0; j < v.size(); ++j) v[j] -= f * R[r][j];
  }
}

// [e_i, e_j] coefficients with antisymmetry; absent keys are zero
QVec bracket_coeffs(const std::map<std::pair<int, int>, QVec>& cons, int i,
                    int j, int n) {
  QVec out(n, mpq_class(0));
  if (i == j) return out;
  const bool flip = i > j;
  const auto it = cons.find(flip ? std::make_pair(j, i) : std::make_pair(i, j));
  if (it == cons.end()) return out;
  out = it->second;
  if (flip)
    for (auto& x : out) x = -x;
  return out;
}

void require_constant_table(const VessiotAlgebra& g) {
  for (const auto& [key, v] : g.constants)
    if (key.first < 0 || key.second <= key.first || key.second >= g.dim ||
        static_cast<int>(v.size()) != g.dim)
      fail(Errc::DimensionMismatch,
           "structure constants must be dim-vectors keyed by pairs i < j");
}

bool exact_sqrt(const mpq_class& x, mpq_class& r) {
  if (sgn(x) < 0) return false;
  const mpz_class num = x.get_num(), den = x.get_den();
  if (mpz_perfect_square_p(num.get_mpz_t()) == 0 ||
      mpz_perfect_square_p(den.get_mpz_t()) == 0)
    return false;
  mpz_class rn, rd;
  mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
  r = mpq_class(rn, rd);
  return true;
}

// Q(a, b) = F + D a + E b + A a^2 + B ab + C b^2, stored in that order
bool quadratic_has_real_zero(const std::array<mpq_class, 6>& q) {
  const mpq_class &F = q[0], &D = q[1], &E = q[2], &A = q[3], &B = q[4],
                  &C = q[5];
  if (sgn(A) != 0) {
    // real zero iff the a-discriminant (Bb+D)^2 - 4A(Cb^2+Eb+F) is
    // nonnegative somewhere
    const mpq_class d2 = B * B - 4 * A * C;
    const mpq_class d1 = 2 * B * D - 4 * A * E;
    const mpq_class d0 = D * D - 4 * A * F;
    if (sgn(d2) > 0) return true;
    if (sgn(d2) == 0) return sgn(d1) != 0 || sgn(d0) >= 0;
    return sgn(d1 * d1 - 4 * d2 * d0) >= 0;
  }
  if (sgn(B) != 0 || sgn(D) != 0) return true;
  if (sgn(C) != 0) return sgn(E * E - 4 * C * F) >= 0;
  if (sgn(E) != 0) return true;
  return sgn(F) == 0;
}

// bounded search for an exact rational zero, small values first
bool find_rational_zero(const std::array<mpq_class, 6>& q, mpq_class& a,
                        mpq_class& b) {
  const mpq_class &F = q[0], &D = q[1], &E = q[2], &A = q[3], &B = q[4],
                  &C = q[5];
  std::vector<mpq_class> grid;
  grid.emplace_back(0);
  for (int num = 1; num <= 12; ++num)
    for (int den = 1; den <= 4; ++den) {
      mpq_class g(num, den);
      g.canonicalize();
      grid.push_back(g);
      grid.push_back(-g);
    }

  if (sgn(A) == 0 && sgn(B) == 0 && sgn(D) == 0) {
    // a is unconstrained, b must kill C b^2 + E b + F
    a = 0;
    if (sgn(C) == 0) {
      if (sgn(E) != 0) {
        b = -F / E;
        return true;
      }
      b = 0;
      return sgn(F) == 0;
    }
    mpq_class root;
    if (!exact_sqrt(E * E - 4 * C * F, root)) return false;
    b = (-E + root) / (2 * C);
    return true;
  }
  if (sgn(A) == 0) {
    // a enters linearly with slope B b + D
    for (const auto& bb : grid) {
      const mpq_class slope = B * bb + D;
      if (sgn(slope) == 0) continue;
      b = bb;
      a = -(C * bb * bb + E * bb + F) / slope;
      return true;
    }
    return false;
  }
  for (const auto& bb : grid) {
    const mpq_class disc =
        (B * bb + D) * (B * bb + D) - 4 * A * (C * bb * bb + E * bb + F);
    mpq_class root;
    if (sgn(disc) < 0 || !exact_sqrt(disc, root)) continue;
    b = bb;
    a = (-(B * bb + D) + root) / (2 * A);
    return true;
  }
  return false;
}

}  // namespace

DecompositionReport check_decomposition(const Decomposition& dec,
                                        const SamplePlan& plan) {
  const EDS& sys = dec.system;
  const ChartPtr& chart = sys.chart();
  const int m = chart->dim();
  const int s = static_cast<int>(dec.theta.size());
  const int p = static_cast<int>(dec.sigma_hat.size());
  const int rho = static_cast<int>(dec.sigma_check.size());

  require_one_forms(dec.theta, chart, "theta");
  require_one_forms(dec.sigma_hat, chart, "sigma_hat");
  require_one_forms(dec.sigma_check, chart, "sigma_check");
  if (dec.tags.size() != sys.twos().size())
    fail(Errc::DimensionMismatch, "one block tag per 2-form generator");
  if (s + p + rho != m)
    fail(Errc::DimensionMismatch,
         "block sizes must add up to the chart dimension");
  if (p < 2 || rho < 2)
    fail(Errc::DimensionMismatch, "both sigma blocks need at least two forms");
  int t = 0, tau = 0;
  for (const Branch b : dec.tags) (b == Branch::hat ? t : tau) += 1;
  if (t < 1 || tau < 1)
    fail(Errc::DimensionMismatch,
         "each sigma block needs a tagged 2-form generator");

  std::vector<DiffForm> frame = dec.theta;
  frame.insert(frame.end(), dec.sigma_hat.begin(), dec.sigma_hat.end());
  frame.insert(frame.end(), dec.sigma_check.begin(), dec.sigma_check.end());

  std::vector<Expr> must = sys.coefficient_exprs();
  for (const auto& w : frame) append_form_coeffs(must, w);
  const auto dom = chart->domain();
  const auto pts = sample_points(dom, plan, must);
  for (const auto& pt : pts)
    if (numeric_rank(forms_matrix(frame, pt, m), plan.rank_tol) != m)
      fail(Errc::CoframeDegenerate,
           "theta and sigma blocks do not frame the chart at a sample point");

  // theta spans exactly the 1-form generators
  {
    const EDS theta_span(chart, dec.theta);
    for (const auto& w : sys.ones())
      if (!membership(w, theta_span, plan).member)
        fail(Errc::SpanMismatch, "a 1-form generator escapes the theta block");
    const EDS ones_span(chart, sys.ones());
    for (const auto& w : dec.theta)
      if (!membership(w, ones_span, plan).member)
        fail(Errc::SpanMismatch,
             "a theta form lies outside the 1-form generators");
  }

  // the listed 2-forms must account for the derivatives of the 1-forms
  for (const auto& w : sys.ones())
    if (!membership(exterior_derivative(w), sys, plan).member)
      fail(Errc::SpanMismatch,
           "derivative of a 1-form generator escapes the 2-form span");

  // rewrite the theta-pivot coordinate differentials through the rest,
  // dropping theta-ideal terms
  SymMatrix tc(s, std::vector<Expr>(m));
  for (int r = 0; r < s; ++r)
    for (int c = 0; c < m; ++c) tc[r][c] = dec.theta[r].coeff({c});
  const SymRref red = sym_rref(tc, dom, plan);
  if (red.rank != s) fail(Errc::CoframeDegenerate, "theta block drops rank");

  const int width = p + rho;
  std::vector<int> pivot_row(m, -1);
  for (int r = 0; r < s; ++r) pivot_row[red.pivot_cols[r]] = r;
  std::vector<int> free_cols;
  std::vector<int> pos_of(m, -1);
  for (int c = 0; c < m; ++c)
    if (pivot_row[c] < 0) {
      pos_of[c] = static_cast<int>(free_cols.size());
      free_cols.push_back(c);
    }

  std::vector<std::vector<std::pair<int, Expr>>> subst(m);
  for (int c = 0; c < m; ++c) {
    if (pos_of[c] >= 0) {
      subst[c].emplace_back(pos_of[c], num(1));
      continue;
    }
    const int r = pivot_row[c];
    for (int a = 0; a < width; ++a)
      subst[c].emplace_back(a, -red.reduced[r][free_cols[a]]);
  }

  auto reduce_one = [&](const DiffForm& v) {
    std::vector<Expr> row(width);
    for (const auto& [idx, ce] : v.comps())
      for (const auto& [pos, e] : subst[idx[0]]) row[pos] += ce * e;
    return row;
  };

  SymMatrix M;
  for (const auto& w : dec.sigma_hat) M.push_back(reduce_one(w));
  for (const auto& w : dec.sigma_check) M.push_back(reduce_one(w));
  const SymMatrix V = sym_inverse(M, dom, plan, Errc::CoframeDegenerate);

  for (std::size_t g = 0; g < sys.twos().size(); ++g) {
    // reduced components over the free coordinate differentials
    SymMatrix acc(width, std::vector<Expr>(width));
    for (const auto& [idx, ce] : sys.twos()[g].comps())
      for (const auto& [p1, e1] : subst[idx[0]])
        for (const auto& [p2, e2] : subst[idx[1]]) {
          if (p1 == p2) continue;
          const Expr term = ce * e1 * e2;
          if (p1 < p2)
            acc[p1][p2] += term;
          else
            acc[p2][p1] -= term;
        }
    // frame components on the forbidden block pairs must certify as zero
    for (int i = 0; i < width; ++i)
      for (int j = i + 1; j < width; ++j) {
        const bool forbidden =
            dec.tags[g] == Branch::hat ? (j >= p) : (i < p);
        if (!forbidden) continue;
        Expr w;
        for (int a = 0; a < width; ++a)
          for (int b = a + 1; b < width; ++b)
            w += acc[a][b] * (V[a][i] * V[b][j] - V[a][j] * V[b][i]);
        if (!is_zero(w, dom, plan)) {
          std::ostringstream os;
          os << "2-form generator " << g << " keeps a cross component on the"
             << " frame pair (" << i << ", " << j << "): " << to_string(w);
          fail(Errc::CrossTermPresent, os.str());
        }
      }
  }

  return DecompositionReport{s, p, rho, t, tau};
}

SingularPair make_singular_pair(const ChartPtr& chart,
                                std::vector<DiffForm> hat,
                                std::vector<DiffForm> check,
                                const SamplePlan& plan) {
  if (!chart) fail(Errc::ChartMismatch, "singular pair needs a chart");
  require_one_forms(hat, chart, "hat");
  require_one_forms(check, chart, "check");
  const int m = chart->dim();
  std::vector<Expr> must;
  for (const auto& w : hat) append_form_coeffs(must, w);
  for (const auto& w : check) append_form_coeffs(must, w);
  const auto pts = sample_points(chart->domain(), plan, must);
  const int rank_hat = constant_rank(hat, pts, m, plan, "hat");
  const int rank_check = constant_rank(check, pts, m, plan, "check");

  std::vector<DiffForm> joint = hat;
  joint.insert(joint.end(), check.begin(), check.end());
  for (const auto& pt : pts)
    if (numeric_rank(forms_matrix(joint, pt, m), plan.rank_tol) != m)
      fail(Errc::SpanMismatch,
           "hat and check systems do not span the coframe bundle");

  return SingularPair{chart, std::move(hat), std::move(check), rank_hat,
                      rank_check};
}

SingularPair singular_pair(const Decomposition& dec, const SamplePlan& plan) {
  std::vector<DiffForm> hat = dec.theta;
  hat.insert(hat.end(), dec.sigma_hat.begin(), dec.sigma_hat.end());
  std::vector<DiffForm> check = dec.theta;
  check.insert(check.end(), dec.sigma_check.begin(), dec.sigma_check.end());
  return make_singular_pair(dec.system.chart(), std::move(hat),
                            std::move(check), plan);
}

FirstIntegralBasis first_integral_basis(const ChartPtr& chart,
                                        std::vector<Expr> integrals,
                                        std::vector<DiffForm> system,
                                        const SamplePlan& plan) {
  if (!chart) fail(Errc::ChartMismatch, "integral basis needs a chart");
  require_one_forms(system, chart, "singular system");
  std::vector<DiffForm> diffs;
  for (const auto& f : integrals) {
    for (const auto& c : free_coords(f))
      if (!chart->has_coord(c))
        fail(Errc::UnknownCoordinate,
             "integral mentions " + c + " outside the chart");
    diffs.push_back(d_of(chart, f));
  }

  const EDS span(chart, system);
  for (std::size_t i = 0; i < diffs.size(); ++i)
    if (!membership(diffs[i], span, plan).member) {
      std::ostringstream os;
      os << "differential of integral " << i << " escapes the singular system";
      fail(Errc::SpanMismatch, os.str());
    }

  if (!diffs.empty()) {
    std::vector<Expr> must = integrals;
    for (const auto& w : diffs) append_form_coeffs(must, w);
    const auto pts = sample_points(chart->domain(), plan, must);
    const int n = static_cast<int>(diffs.size());
    const int m = chart->dim();
    for (const auto& pt : pts)
      if (numeric_rank(forms_matrix(diffs, pt, m), plan.rank_tol) != n)
        fail(Errc::RankInconsistent,
             "integral differentials are dependent at a sample point");
  }

  return FirstIntegralBasis{chart, std::move(integrals), std::move(system)};
}

DarbouxReport check_darboux(const SingularPair& pair,
                            const FirstIntegralBasis& hat_integrals,
                            const FirstIntegralBasis& check_integrals,
                            const SamplePlan& plan) {
  if (hat_integrals.chart != pair.chart || check_integrals.chart != pair.chart)
    fail(Errc::ChartMismatch, "integral bases must live on the pair chart");
  const ChartPtr& chart = pair.chart;
  const int m = chart->dim();

  const EDS hat_span(chart, pair.hat);
  for (const auto& f : hat_integrals.integrals)
    if (!membership(d_of(chart, f), hat_span, plan).member)
      fail(Errc::SpanMismatch, "hat integral escapes the hat system");
  const EDS check_span(chart, pair.check);
  for (const auto& f : check_integrals.integrals)
    if (!membership(d_of(chart, f), check_span, plan).member)
      fail(Errc::SpanMismatch, "check integral escapes the check system");

  std::vector<DiffForm> dh, dc;
  for (const auto& f : hat_integrals.integrals)
    dh.push_back(d_of(chart, f));
  for (const auto& f : check_integrals.integrals)
    dc.push_back(d_of(chart, f));

  std::vector<Expr> must;
  for (const auto& w : pair.hat) append_form_coeffs(must, w);
  for (const auto& w : pair.check) append_form_coeffs(must, w);
  for (const auto& w : dh) append_form_coeffs(must, w);
  for (const auto& w : dc) append_form_coeffs(must, w);
  const auto pts = sample_points(chart->domain(), plan, must);

  auto closes = [&](const std::vector<DiffForm>& span,
                    const std::vector<DiffForm>& opposite) {
    std::vector<DiffForm> joint = span;
    joint.insert(joint.end(), opposite.begin(), opposite.end());
    for (const auto& pt : pts)
      if (numeric_rank(forms_matrix(joint, pt, m), plan.rank_tol) != m)
        return false;
    return true;
  };

  DarbouxReport rep;
  rep.rank_hat = pair.rank_hat;
  rep.rank_check = pair.rank_check;
  rep.hat_closes = closes(pair.hat, dc);
  rep.check_closes = closes(pair.check, dh);

  rep.independent = true;
  std::vector<DiffForm> all = dh;
  all.insert(all.end(), dc.begin(), dc.end());
  const int n = static_cast<int>(all.size());
  for (const auto& pt : pts)
    if (numeric_rank(forms_matrix(all, pt, m), plan.rank_tol) != n) {
      rep.independent = false;
      break;
    }

  rep.darboux = rep.hat_closes && rep.check_closes && rep.independent;
  return rep;
}

int vessiot_dimension(int dim_m, int rank_hat_infinity,
                      int rank_check_infinity) {
  if (dim_m < 0 || rank_hat_infinity < 0 || rank_check_infinity < 0)
    fail(Errc::DimensionMismatch, "ranks and dimension must be nonnegative");
  const int v = dim_m - rank_hat_infinity - rank_check_infinity;
  if (v < 0)
    fail(Errc::DimensionMismatch,
         "integral ranks exceed the chart dimension");
  return v;
}

std::pair<LieAction, LieAction> projected_algebras(const LieAction& action,
                                                   const ChartPtr& m1,
                                                   const ChartPtr& m2,
                                                   const SamplePlan& plan) {
  require_factor_split(action.chart(), m1, m2);

  auto project = [&](const ChartPtr& mf) {
    std::vector<VectorField> kept;
    const auto dom = mf->domain();
    std::vector<Expr> must;
    std::vector<VectorField> parts;
    for (const auto& X : action.basis()) {
      parts.push_back(truncate_to(X, mf));
      append_field_coeffs(must, parts.back());
    }
    const auto pts = sample_points(dom, plan, must);
    const int m = mf->dim();
    const int rows = static_cast<int>(pts.size()) * m;
    for (const auto& X : parts) {
      if (X.is_structurally_zero() || certified_zero_field(X, dom, plan))
        continue;
      Eigen::VectorXd v(rows);
      for (std::size_t pi = 0; pi < pts.size(); ++pi) {
        const auto row = field_values_at(X, pts[pi]);
        for (int c = 0; c < m; ++c) v(static_cast<int>(pi) * m + c) = row[c];
      }
      bool dependent = false;
      if (!kept.empty()) {
        Eigen::MatrixXd A(rows, static_cast<int>(kept.size()));
        for (std::size_t k = 0; k < kept.size(); ++k)
          for (std::size_t pi = 0; pi < pts.size(); ++pi) {
            const auto row = field_values_at(kept[k], pts[pi]);
            for (int c = 0; c < m; ++c)
              A(static_cast<int>(pi) * m + c, static_cast<int>(k)) = row[c];
          }
        const LeastSquares ls = solve_least_squares(A, v);
        if (ls.residual <= plan.tol * (1.0 + ls.scale)) {
          // confirm the numeric dependency exactly; on any doubt keep the
          // field
          VectorField resid = X;
          bool exact = true;
          for (std::size_t k = 0; k < kept.size(); ++k) {
            mpq_class c;
            if (!rationalize(ls.x(static_cast<int>(k)), c)) {
              exact = false;
              break;
            }
            resid = resid - num(c) * kept[k];
          }
          dependent = exact && certified_zero_field(resid, dom, plan);
        }
      }
      if (!dependent) kept.push_back(X);
    }
    return kept;
  };

  return {LieAction(m1, project(m1), plan), LieAction(m2, project(m2), plan)};
}

std::pair<FirstIntegralBasis, FirstIntegralBasis>
intermediate_integrals_from_quotient(const QuotientSpec& spec,
                                     const SingularPair& pair,
                                     const std::vector<FactorIntegral>& hat,
                                     const std::vector<FactorIntegral>& check,
                                     const SamplePlan& plan) {
  if (pair.chart != spec.quotient_chart())
    fail(Errc::ChartMismatch, "singular pair must live on the quotient chart");
  const auto dom = spec.q.source->domain();

  auto reduce = [&](const std::vector<FactorIntegral>& fis) {
    std::vector<Expr> out;
    for (const auto& fi : fis) {
      const Expr red =
          fi.reduced ? *fi.reduced : pullback(spec.section, fi.invariant);
      if (!is_zero(fi.invariant - pullback(spec.q, red), dom, plan))
        fail(Errc::ExpressionNotInvariant,
             "candidate does not descend through the quotient");
      out.push_back(red);
    }
    return out;
  };

  return {first_integral_basis(pair.chart, reduce(hat), pair.hat, plan),
          first_integral_basis(pair.chart, reduce(check), pair.check, plan)};
}

bool jacobi_holds(const VessiotAlgebra& g) {
  require_constant_table(g);
  const int n = g.dim;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        QVec total(n, mpq_class(0));
        const std::array<std::array<int, 3>, 3> cyc = {
            {{i, j, k}, {j, k, i}, {k, i, j}}};
        for (const auto& abc : cyc) {
          const QVec cab = bracket_coeffs(g.constants, abc[0], abc[1], n);
          for (int l = 0; l < n; ++l) {
            if (sgn(cab[l]) == 0) continue;
            const QVec clc = bracket_coeffs(g.constants, l, abc[2], n);
            for (int r = 0; r < n; ++r) total[r] += cab[l] * clc[r];
          }
        }
        for (int r = 0; r < n; ++r)
          if (sgn(total[r]) != 0) return false;
      }
  return true;
}

VessiotAlgebra vessiot_from_action(const LieAction& action) {
  if (!action.exact_constants())
    fail(Errc::NonRationalStructureConstants,
         "structure constants did not certify as rational");
  VessiotAlgebra g{action.dim(), action.constants(), VessiotSource::diagonal};
  if (!jacobi_holds(g))
    fail(Errc::RankInconsistent,
         "constants violate the Jacobi identity, so the basis fields cannot "
         "be pointwise independent");
  return g;
}

DiagonalReduction diagonal_reduction(const LieAction& action,
                                     const ChartPtr& m1, const ChartPtr& m2,
                                     const SmoothMap& q1, const SmoothMap& s1,
                                     const SmoothMap& q2, const SmoothMap& s2,
                                     const SamplePlan& plan) {
  require_factor_split(action.chart(), m1, m2);
  if (!action.exact_constants())
    fail(Errc::NonRationalStructureConstants,
         "diagonal reduction needs exact structure constants");
  const int n = action.dim();

  std::vector<VectorField> r1, r2;
  for (const auto& X : action.basis()) {
    r1.push_back(truncate_to(X, m1));
    r2.push_back(truncate_to(X, m2));
  }

  // exact coefficient vectors spanning the kernel of one truncation family
  auto kernel_of = [&](const std::vector<VectorField>& fam,
                       const ChartPtr& mf) {
    QMat out;
    std::vector<Expr> must;
    for (const auto& X : fam) append_field_coeffs(must, X);
    const auto dom = mf->domain();
    const auto pts = sample_points(dom, plan, must);
    const int m = mf->dim();
    Eigen::MatrixXd A(static_cast<int>(pts.size()) * m, n);
    for (std::size_t pi = 0; pi < pts.size(); ++pi)
      A.block(static_cast<int>(pi) * m, 0, m, n) =
          fields_matrix(fam, pts[pi], m).transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    lu.setThreshold(plan.rank_tol);
    const int k = static_cast<int>(lu.dimensionOfKernel());
    if (k == 0) return out;
    const Eigen::MatrixXd K = lu.kernel();
    for (int col = 0; col < k; ++col) {
      QVec q(n);
      for (int i = 0; i < n; ++i)
        if (!rationalize(K(i, col), q[i]))
          fail(Errc::Undecided,
               "kernel coefficient did not certify as rational");
      VectorField combo(mf, {});
      for (int i = 0; i < n; ++i)
        if (sgn(q[i]) != 0) combo = combo + num(q[i]) * fam[i];
      if (!certified_zero_field(combo, dom, plan))
        fail(Errc::Undecided, "kernel direction failed exact certification");
      out.push_back(std::move(q));
    }
    return out;
  };
  const QMat ker2 = kernel_of(r2, m2);
  const QMat ker1 = kernel_of(r1, m1);

  auto push_combos = [&](const QMat& kers, const std::vector<VectorField>& fam,
                         const ChartPtr& mf) {
    std::vector<VectorField> out;
    const auto dom = mf->domain();
    for (const auto& q : kers) {
      VectorField X(mf, {});
      for (int i = 0; i < n; ++i)
        if (sgn(q[i]) != 0) X = X + num(q[i]) * fam[i];
      if (X.is_structurally_zero() || certified_zero_field(X, dom, plan))
        continue;
      out.push_back(std::move(X));
    }
    return out;
  };
  std::vector<VectorField> a1 = push_combos(ker2, r1, m1);
  std::vector<VectorField> a2 = push_combos(ker1, r2, m2);

  auto factor_spec = [&](const std::vector<VectorField>& av, const ChartPtr& mf,
                         const SmoothMap& qa, const SmoothMap& sa) {
    LieAction sub(mf, av, plan);
    if (!av.empty() && !acts_freely(sub, plan))
      fail(Errc::NotFree, "kernel fields do not act freely on their factor");
    if (qa.target->dim() != mf->dim() - static_cast<int>(av.size()))
      fail(Errc::DimensionMismatch,
           "quotient chart dimension does not match the orbit count");
    return make_quotient_spec(sub, qa, sa, plan);
  };
  const QuotientSpec spec1 = factor_spec(a1, m1, q1, s1);
  const QuotientSpec spec2 = factor_spec(a2, m2, q2, s2);

  // W = K1 + K2 must be an ideal of the symmetry algebra
  QMat W = ker2;
  W.insert(W.end(), ker1.begin(), ker1.end());
  const std::vector<int> pivots = q_rref(W);
  const auto& cons = action.constants();
  for (int i = 0; i < n; ++i)
    for (const auto& w : W) {
      QVec v(n, mpq_class(0));
      for (int j = 0; j < n; ++j) {
        if (sgn(w[j]) == 0) continue;
        const QVec cij = bracket_coeffs(cons, i, j, n);
        for (int k = 0; k < n; ++k) v[k] += w[j] * cij[k];
      }
      reduce_mod_rows(v, W, pivots);
      for (int k = 0; k < n; ++k)
        if (sgn(v[k]) != 0)
          fail(Errc::NotAnIdeal,
               "kernel span is not an ideal of the symmetry algebra");
    }

  std::vector<int> comp;
  {
    std::size_t pr = 0;
    for (int j = 0; j < n; ++j) {
      if (pr < pivots.size() && pivots[pr] == j) {
        ++pr;
        continue;
      }
      comp.push_back(j);
    }
  }
  const int nv = static_cast<int>(comp.size());

  VessiotAlgebra g;
  g.dim = nv;
  g.source = VessiotSource::reduced;
  for (int a = 0; a < nv; ++a)
    for (int b = a + 1; b < nv; ++b) {
      QVec v = bracket_coeffs(cons, comp[a], comp[b], n);
      reduce_mod_rows(v, W, pivots);
      QVec out(nv);
      for (int k = 0; k < nv; ++k) out[k] = v[comp[k]];
      g.constants[{a, b}] = std::move(out);
    }
  if (!jacobi_holds(g))
    fail(Errc::RankInconsistent,
         "reduced constants violate the Jacobi identity, so the action basis "
         "cannot be pointwise independent");

  const ChartPtr prod = product_chart(
      spec1.quotient_chart()->name + "_" + spec2.quotient_chart()->name,
      {spec1.quotient_chart(), spec2.quotient_chart()});
  std::map<std::string, Expr> qc = q1.comps;
  for (const auto& [k, e] : q2.comps) qc[k] = e;
  std::map<std::string, Expr> sc = s1.comps;
  for (const auto& [k, e] : s2.comps) sc[k] = e;
  SmoothMap Q = make_map(q1.name + "_" + q2.name, action.chart(), prod, qc);
  SmoothMap S = make_map(s1.name + "_" + s2.name, prod, action.chart(), sc);
  require_section(Q, S, plan);

  std::vector<VectorField> reduced;
  for (int a = 0; a < nv; ++a)
    reduced.push_back(
        pushforward_projectable(Q, S, action.basis()[comp[a]], plan));

  // the pushed-forward classes must realize the quotient constants
  const auto pdom = prod->domain();
  for (int a = 0; a < nv; ++a)
    for (int b = a + 1; b < nv; ++b) {
      VectorField resid = lie_bracket(reduced[a], reduced[b]);
      const QVec& v = g.constants.at({a, b});
      for (int k = 0; k < nv; ++k)
        if (sgn(v[k]) != 0) resid = resid - num(v[k]) * reduced[k];
      if (!certified_zero_field(resid, pdom, plan))
        fail(Errc::Undecided,
             "reduced fields do not realize the quotient constants");
    }

  return DiagonalReduction{std::move(a1),      std::move(a2), std::move(Q),
                           std::move(S),       std::move(reduced),
                           std::move(g)};
}

ExtensionRecord extension_singular_systems(
    const EDS& ext, const EDS& base, const SmoothMap& p,
    std::vector<DiffForm> admissible, const SingularPair& down,
    const FirstIntegralBasis& down_hat, const FirstIntegralBasis& down_check,
    const std::vector<Expr>& extra_hat, const std::vector<Expr>& extra_check,
    const SamplePlan& plan) {
  if (ext.chart() != p.source || base.chart() != p.target)
    fail(Errc::ChartMismatch,
         "projection must map the extension chart onto the base chart");
  if (down.chart != base.chart() || down_hat.chart != down.chart ||
      down_check.chart != down.chart)
    fail(Errc::ChartMismatch, "downstairs data must live on the base chart");

  if (!is_integrable_extension(p, ext, base, admissible, plan).extension)
    fail(Errc::SpanMismatch,
         "projection with the chosen admissible block is not an integrable "
         "extension");

  std::vector<DiffForm> up_hat_forms = admissible;
  for (const auto& w : down.hat) up_hat_forms.push_back(pullback(p, w));
  std::vector<DiffForm> up_check_forms = admissible;
  for (const auto& w : down.check) up_check_forms.push_back(pullback(p, w));
  SingularPair up = make_singular_pair(ext.chart(), std::move(up_hat_forms),
                                       std::move(up_check_forms), plan);

  {
    std::vector<Expr> must;
    for (const auto& w : admissible) append_form_coeffs(must, w);
    const auto pts = sample_points(ext.chart()->domain(), plan, must);
    const int rank_adm = constant_rank(admissible, pts, ext.chart()->dim(),
                                       plan, "admissible");
    if (up.rank_hat != rank_adm + down.rank_hat ||
        up.rank_check != rank_adm + down.rank_check)
      fail(Errc::SpanMismatch,
           "lifted singular systems do not split off the admissible block");
  }

  const EDS hat_span(ext.chart(), up.hat);
  const EDS check_span(ext.chart(), up.check);
  for (const auto& w : ext.ones()) {
    if (!membership(w, hat_span, plan).member)
      fail(Errc::SpanMismatch,
           "a 1-form generator escapes the lifted hat system");
    if (!membership(w, check_span, plan).member)
      fail(Errc::SpanMismatch,
           "a 1-form generator escapes the lifted check system");
  }

  auto lift = [&](const FirstIntegralBasis& fb, const std::vector<Expr>& ex) {
    std::vector<Expr> out;
    for (const auto& f : fb.integrals) out.push_back(pullback(p, f));
    out.insert(out.end(), ex.begin(), ex.end());
    return out;
  };
  FirstIntegralBasis up_hat =
      first_integral_basis(ext.chart(), lift(down_hat, extra_hat), up.hat, plan);
  FirstIntegralBasis up_check = first_integral_basis(
      ext.chart(), lift(down_check, extra_check), up.check, plan);

  return ExtensionRecord{p,
                         std::move(admissible),
                         std::move(up),
                         down,
                         std::move(up_hat),
                         std::move(up_check),
                         down_hat,
                         down_check};
}

MaxCompatReport check_max_compatible(const ExtensionRecord& record,
                                     const SamplePlan& plan) {
  const SmoothMap& p = record.projection;
  MaxCompatReport rep;
  rep.fiber_dim = p.source->dim() - p.target->dim();
  rep.rank_up_hat = static_cast<int>(record.up_hat.integrals.size());
  rep.rank_up_check = static_cast<int>(record.up_check.integrals.size());
  rep.rank_down_hat = static_cast<int>(record.down_hat.integrals.size());
  rep.rank_down_check = static_cast<int>(record.down_check.integrals.size());
  rep.rank_saturated_hat =
      rep.rank_up_hat == rep.fiber_dim + rep.rank_down_hat;
  rep.rank_saturated_check =
      rep.rank_up_check == rep.fiber_dim + rep.rank_down_check;
  rep.within_bounds_hat = rep.rank_down_hat <= rep.rank_up_hat &&
                          rep.rank_up_hat <= rep.rank_down_hat + rep.fiber_dim;
  rep.within_bounds_check =
      rep.rank_down_check <= rep.rank_up_check &&
      rep.rank_up_check <= rep.rank_down_check + rep.fiber_dim;

  const ChartPtr& up_chart = p.source;
  const int m = up_chart->dim();
  std::vector<DiffForm> dh, dc;
  for (const auto& f : record.up_hat.integrals)
    dh.push_back(d_of(up_chart, f));
  for (const auto& f : record.up_check.integrals)
    dc.push_back(d_of(up_chart, f));

  const SymMatrix jac = jacobian(p);
  std::vector<Expr> must = flatten(jac);
  for (const auto& [coord, e] : p.comps) must.push_back(e);
  for (const auto& w : dh) append_form_coeffs(must, w);
  for (const auto& w : dc) append_form_coeffs(must, w);
  const auto pts = sample_points(up_chart->domain(), plan, must);

  bool th = true, tc = true;
  for (const auto& pt : pts) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(eval_matrix(jac, pt));
    lu.setThreshold(plan.rank_tol);
    if (static_cast<int>(lu.dimensionOfKernel()) != rep.fiber_dim)
      fail(Errc::RankInconsistent,
           "projection kernel changes dimension between samples");
    if (rep.fiber_dim == 0) continue;
    const Eigen::MatrixXd K = lu.kernel();
    const int rh =
        dh.empty() ? 0
                   : numeric_rank(forms_matrix(dh, pt, m) * K, plan.rank_tol);
    const int rc =
        dc.empty() ? 0
                   : numeric_rank(forms_matrix(dc, pt, m) * K, plan.rank_tol);
    th = th && rh == rep.fiber_dim;
    tc = tc && rc == rep.fiber_dim;
  }
  rep.fiber_transverse_hat = th;
  rep.fiber_transverse_check = tc;
  rep.compatible = th && tc && rep.rank_saturated_hat &&
                   rep.rank_saturated_check;
  return rep;
}

SubalgebraReport has_2dim_subalgebra(const VessiotAlgebra& g) {
  if (g.dim != 3)
    fail(Errc::DimensionMismatch, "plane search requires a 3-dimensional "
                                  "algebra");
  require_constant_table(g);

  SubalgebraReport rep;
  const std::array<std::array<int, 3>, 3> frames = {
      {{0, 1, 2}, {0, 2, 1}, {1, 2, 0}}};
  for (const auto& ijk : frames) {
    const int i = ijk[0], j = ijk[1], k = ijk[2];
    const QVec cij = bracket_coeffs(g.constants, i, j, 3);
    const QVec cik = bracket_coeffs(g.constants, i, k, 3);
    const QVec ckj = bracket_coeffs(g.constants, k, j, 3);
    // the plane span{e_i + a e_k, e_j + b e_k} closes exactly on the zero
    // set of Q(a, b) below
    PlaneSearchChart pc;
    pc.i = i;
    pc.j = j;
    pc.k = k;
    pc.poly[0] = cij[k];
    pc.poly[1] = ckj[k] - cij[i];
    pc.poly[2] = cik[k] - cij[j];
    pc.poly[3] = -ckj[i];
    pc.poly[4] = -cik[i] - ckj[j];
    pc.poly[5] = -cik[j];
    pc.solvable = quadratic_has_real_zero(pc.poly);
    rep.charts.push_back(std::move(pc));
  }

  for (const auto& pc : rep.charts) {
    if (!pc.solvable) continue;
    rep.exists = true;
    if (!rep.witness.empty()) continue;
    mpq_class a, b;
    if (!find_rational_zero(pc.poly, a, b)) continue;
    QVec u(3, mpq_class(0)), v(3, mpq_class(0));
    u[pc.i] = 1;
    u[pc.k] = a;
    v[pc.j] = 1;
    v[pc.k] = b;
    // certify closure of the witness plane directly
    QVec w(3, mpq_class(0));
    for (int r = 0; r < 3; ++r)
      for (int s = 0; s < 3; ++s) {
        if (r == s) continue;
        const mpq_class f = u[r] * v[s];
        if (sgn(f) == 0) continue;
        const QVec crs = bracket_coeffs(g.constants, r, s, 3);
        for (int l = 0; l < 3; ++l) w[l] += f * crs[l];
      }
    const mpq_class lam = w[pc.i], mu = w[pc.j];
    bool closes = true;
    for (int l = 0; l < 3; ++l)
      if (sgn(w[l] - lam * u[l] - mu * v[l]) != 0) closes = false;
    if (!closes)
      fail(Errc::Undecided, "witness plane failed its closure certificate");
    rep.witness = {std::vector<mpq_class>(u.begin(), u.end()),
                   std::vector<mpq_class>(v.begin(), v.end())};
  }
  return rep;
}

}  // namespace edsym
