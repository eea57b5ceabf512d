#include "edsym/eds.hpp"

#include <algorithm>
#include <sstream>

namespace edsym {

namespace {

void require_generator(const ChartPtr& chart, const DiffForm& w, int degree) {
  if (w.chart() != chart) fail(Errc::ChartMismatch, "generator lives on a different chart");
  if (w.degree() != degree) {
    std::ostringstream os;
    os << "generator of degree " << w.degree() << " in the degree-" << degree << " slot";
    fail(Errc::DimensionMismatch, os.str());
  }
}

void append_coeffs(std::vector<Expr>& out, const DiffForm& w) {
  for (const auto& [idx, c] : w.comps()) out.push_back(c);
}

// row index of the sorted pair (a, b) in the index_tuples(dim, 2) order
int pair_row(int dim, int a, int b) {
  int r = 0;
  for (int i = 0; i < a; ++i) r += dim - 1 - i;
  return r + (b - a - 1);
}

// coefficient of omega^a ^ omega^b when the 2-form is rewritten through the
// inverse transition matrix E, so dx^k = sum_a E[k][a] omega^a
Expr coframe_pair_coeff(const DiffForm& two, const SymMatrix& E, int a, int b) {
  Expr out;
  for (const auto& [idx, c] : two.comps()) {
    const int k = idx[0], l = idx[1];
    out += c * (E[k][a] * E[l][b] - E[l][a] * E[k][b]);
  }
  return out;
}

}  // namespace

EDS::EDS(ChartPtr chart, std::vector<DiffForm> one_forms,
         std::vector<DiffForm> two_forms)
    : chart_(std::move(chart)), ones_(std::move(one_forms)), twos_(std::move(two_forms)) {
  if (!chart_) fail(Errc::ChartMismatch, "EDS needs a chart");
  for (const auto& w : ones_) require_generator(chart_, w, 1);
  for (const auto& w : twos_) require_generator(chart_, w, 2);
}

std::vector<Expr> EDS::coefficient_exprs() const {
  std::vector<Expr> out;
  for (const auto& w : ones_) append_coeffs(out, w);
  for (const auto& w : twos_) append_coeffs(out, w);
  return out;
}

EDS EDS::algebraic_closure() const {
  std::vector<DiffForm> twos = twos_;
  for (const auto& w : ones_) {
    DiffForm dw = exterior_derivative(w);
    if (!dw.comps().empty()) twos.push_back(std::move(dw));
  }
  return EDS(chart_, ones_, std::move(twos));
}

RankReport rank_at_samples(const EDS& sys, const SamplePlan& plan) {
  RankReport rep;
  if (sys.ones().empty()) return rep;
  const auto dom = sys.chart()->domain();
  const auto pts = sample_points(dom, plan, sys.coefficient_exprs());
  const int n = sys.chart()->dim();
  const int s = static_cast<int>(sys.ones().size());
  for (const auto& pt : pts) {
    Eigen::MatrixXd A(s, n);
    for (int i = 0; i < s; ++i) {
      const auto row = form_values_at(sys.ones()[i], pt);
      for (int j = 0; j < n; ++j) A(i, j) = row[j];
    }
    rep.per_point.push_back(numeric_rank(A, plan.rank_tol));
  }
  rep.rank = rep.per_point.front();
  for (int r : rep.per_point)
    if (r != rep.rank)
      fail(Errc::RankInconsistent, "1-form span has different ranks at different samples");
  return rep;
}

MembershipCertificate membership(const DiffForm& w, const EDS& ideal,
                                 const SamplePlan& plan) {
  if (w.chart() != ideal.chart())
    fail(Errc::ChartMismatch, "form and ideal live on different charts");
  if (w.degree() != 1 && w.degree() != 2)
    fail(Errc::DegreeUnsupported, "membership handles degrees 1 and 2");

  const int n = ideal.chart()->dim();
  const int s = static_cast<int>(ideal.ones().size());
  const int t = static_cast<int>(ideal.twos().size());

  auto must_eval = ideal.coefficient_exprs();
  append_coeffs(must_eval, w);
  const auto dom = ideal.chart()->domain();

  MembershipCertificate cert;
  cert.tol = plan.tol;
  cert.points = sample_points(dom, plan, must_eval);
  cert.member = true;

  for (std::size_t p = 0; p < cert.points.size(); ++p) {
    const auto& pt = cert.points[p];
    const auto wv = form_values_at(w, pt);
    Eigen::VectorXd b(static_cast<int>(wv.size()));
    for (std::size_t r = 0; r < wv.size(); ++r) b(static_cast<int>(r)) = wv[r];

    Eigen::MatrixXd A;
    if (w.degree() == 1) {
      A.setZero(n, s);
      for (int i = 0; i < s; ++i) {
        const auto col = form_values_at(ideal.ones()[i], pt);
        for (int j = 0; j < n; ++j) A(j, i) = col[j];
      }
    } else {
      // unknowns: mu_1..mu_t, then the n components of each eta_i
      const int rows = n * (n - 1) / 2;
      A.setZero(rows, t + s * n);
      for (int j = 0; j < t; ++j) {
        const auto col = form_values_at(ideal.twos()[j], pt);
        for (int r = 0; r < rows; ++r) A(r, j) = col[r];
      }
      for (int i = 0; i < s; ++i) {
        const auto th = form_values_at(ideal.ones()[i], pt);
        for (int a = 0; a < n; ++a)
          for (int bb = a + 1; bb < n; ++bb) {
            const int r = pair_row(n, a, bb);
            A(r, t + i * n + bb) += th[a];
            A(r, t + i * n + a) -= th[bb];
          }
      }
    }

    double residual, scale;
    std::vector<double> x;
    if (A.cols() == 0) {
      residual = b.size() ? b.cwiseAbs().maxCoeff() : 0.0;
      scale = residual;
    } else {
      auto ls = solve_least_squares(A, b);
      residual = ls.residual;
      scale = ls.scale;
      x.assign(ls.x.data(), ls.x.data() + ls.x.size());
    }
    cert.residuals.push_back(residual);
    cert.coefficients.push_back(std::move(x));
    if (residual > plan.tol * (1.0 + scale) && cert.member) {
      cert.member = false;
      cert.witness = static_cast<int>(p);
    }
  }
  return cert;
}

std::vector<DiffForm> derived_system(const EDS& sys, const SamplePlan& plan) {
  const int n = sys.chart()->dim();
  const int s = static_cast<int>(sys.ones().size());
  const int t = static_cast<int>(sys.twos().size());
  if (s == 0) return {};

  const auto dom = sys.chart()->domain();
  const auto pts = sample_points(dom, plan, sys.coefficient_exprs());
  if (rank_at_samples(sys, plan).rank != s)
    fail(Errc::RankInconsistent, "1-form generators are not pointwise independent");

  // complete the generators to a coframe with coordinate differentials,
  // chosen greedily by rank growth at the first sample point
  Eigen::MatrixXd probe(n, n);
  for (int i = 0; i < s; ++i) {
    const auto row = form_values_at(sys.ones()[i], pts.front());
    for (int j = 0; j < n; ++j) probe(i, j) = row[j];
  }
  std::vector<int> complement;
  int have = s;
  for (int c = 0; c < n && have < n; ++c) {
    probe.row(have).setZero();
    probe(have, c) = 1.0;
    if (numeric_rank(probe.topRows(have + 1), plan.rank_tol) == have + 1) {
      complement.push_back(c);
      ++have;
    }
  }
  if (have < n) fail(Errc::RankInconsistent, "could not complete the generators to a coframe");

  SymMatrix P(n, std::vector<Expr>(n));
  for (int i = 0; i < s; ++i)
    for (const auto& [idx, c] : sys.ones()[i].comps()) P[i][idx[0]] = c;
  for (int i = 0; i < n - s; ++i) P[s + i][complement[i]] = num(1);
  const SymMatrix E = sym_inverse(P, dom, plan);

  // d(sum a_i theta_i) lies in the ideal iff the coefficients of
  // w^a ^ w^b with both factors in the complement can be matched by the
  // 2-form generators; unknowns are the a_i followed by the multipliers
  if (n - s <= 1) return sys.ones();
  const int pairs = (n - s) * (n - s - 1) / 2;
  SymMatrix M(pairs, std::vector<Expr>(s + t));
  std::vector<DiffForm> dtheta;
  for (int i = 0; i < s; ++i) dtheta.push_back(exterior_derivative(sys.ones()[i]));
  int r = 0;
  for (int a = s; a < n; ++a)
    for (int b = a + 1; b < n; ++b, ++r) {
      for (int i = 0; i < s; ++i) M[r][i] = coframe_pair_coeff(dtheta[i], E, a, b);
      for (int j = 0; j < t; ++j)
        M[r][s + j] = -coframe_pair_coeff(sys.twos()[j], E, a, b);
    }

  const auto kernel = sym_nullspace(M, dom, plan);
  SymMatrix combos;
  for (const auto& v : kernel) combos.emplace_back(v.begin(), v.begin() + s);
  if (combos.empty()) return {};

  // multiplier-only kernel vectors have zero a-part; rref drops them and
  // leaves one clean coefficient row per derived generator
  const auto rr = sym_rref(combos, dom, plan);
  std::vector<DiffForm> out;
  for (int k = 0; k < rr.rank; ++k) {
    DiffForm g(sys.chart(), 1);
    for (int i = 0; i < s; ++i) {
      if (rr.reduced[k][i].is_zero()) continue;
      g = g + rr.reduced[k][i] * sys.ones()[i];
    }
    if (!g.is_structurally_zero()) out.push_back(g);
  }
  return out;
}

StructureEquations structure_equations(const std::vector<DiffForm>& coframe,
                                       const SamplePlan& plan) {
  if (coframe.empty()) fail(Errc::DimensionMismatch, "empty coframe");
  const ChartPtr chart = coframe.front().chart();
  const int n = chart->dim();
  if (static_cast<int>(coframe.size()) != n)
    fail(Errc::DimensionMismatch, "coframe size does not match the chart dimension");
  for (const auto& w : coframe) require_generator(chart, w, 1);

  const auto dom = chart->domain();
  SymMatrix P(n, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i)
    for (const auto& [idx, c] : coframe[i].comps()) P[i][idx[0]] = c;
  const SymMatrix E = sym_inverse(P, dom, plan, Errc::CoframeDegenerate);

  StructureEquations eq;
  eq.coeff.resize(n);
  for (int i = 0; i < n; ++i) {
    const DiffForm dw = exterior_derivative(coframe[i]);
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        Expr c = coframe_pair_coeff(dw, E, a, b);
        if (c.is_zero() || is_zero(c, dom, plan)) continue;
        eq.coeff[i][{a, b}] = c;
      }
    DiffForm resid = dw;
    for (const auto& [ab, c] : eq.coeff[i])
      resid = resid - c * wedge(coframe[ab.first], coframe[ab.second]);
    for (const auto& [idx, c] : resid.comps())
      if (!is_zero(c, dom, plan))
        fail(Errc::Undecided, "structure-equation expansion failed its residual test");
  }
  return eq;
}

}  // namespace edsym
