#include "edsym/reduction.hpp"

#include <algorithm>
#include <cmath>

namespace edsym {

namespace {

// value of a 1-form on a field, as the 0-form coefficient of the hook
Expr hook1(const VectorField& X, const DiffForm& w) {
  DiffForm h = hook(X, w);
  auto it = h.comps().find(std::vector<int>{});
  return it == h.comps().end() ? Expr() : it->second;
}

// drops components the oracle certifies as zero
DiffForm certified_clean(const DiffForm& w, const SampleDomain& dom,
                         const SamplePlan& plan) {
  DiffForm out(w.chart(), w.degree());
  for (const auto& [idx, c] : w.comps())
    if (!is_zero(c, dom, plan)) out.add_term(idx, c);
  return out;
}

void append_field_coeffs(std::vector<Expr>& out, const VectorField& X) {
  for (const auto& [coord, e] : X.comps()) out.push_back(e);
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

void require_submersion(const SmoothMap& p, const SamplePlan& plan) {
  const SymMatrix jac = jacobian(p);
  std::vector<Expr> must = flatten(jac);
  for (const auto& [coord, e] : p.comps) must.push_back(e);
  const auto pts = sample_points(p.source->domain(), plan, must);
  const int t = p.target->dim();
  for (const auto& pt : pts)
    if (numeric_rank(eval_matrix(jac, pt), plan.rank_tol) != t)
      fail(Errc::NotSubmersion, "map " + p.name + " drops rank at a sample point");
}

}  // namespace

LieAction::LieAction(ChartPtr chart, std::vector<VectorField> basis,
                     const SamplePlan& plan)
    : chart_(std::move(chart)), basis_(std::move(basis)) {
  if (!chart_) fail(Errc::ChartMismatch, "action needs a chart");
  for (const auto& X : basis_)
    if (X.chart() != chart_)
      fail(Errc::ChartMismatch, "basis field lives on a different chart");

  const int n = dim();
  exact_ = true;
  if (n < 2) return;

  const auto dom = chart_->domain();
  std::vector<Expr> must;
  for (const auto& X : basis_) append_field_coeffs(must, X);
  std::vector<VectorField> brackets;
  std::vector<std::pair<int, int>> keys;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      brackets.push_back(lie_bracket(basis_[i], basis_[j]));
      keys.emplace_back(i, j);
      append_field_coeffs(must, brackets.back());
    }
  const auto pts = sample_points(dom, plan, must);
  const int m = chart_->dim();

  std::vector<std::vector<double>> first_solution(keys.size());
  for (const auto& pt : pts) {
    const Eigen::MatrixXd A = fields_matrix(basis_, pt, m).transpose();
    for (std::size_t k = 0; k < keys.size(); ++k) {
      const auto bv = field_values_at(brackets[k], pt);
      Eigen::VectorXd b(m);
      for (int r = 0; r < m; ++r) b(r) = bv[r];
      const auto ls = solve_least_squares(A, b);
      if (ls.residual > plan.tol * (1.0 + ls.scale))
        fail(Errc::NotASubalgebra, "bracket leaves the span of the basis");
      if (first_solution[k].empty())
        for (int j = 0; j < n; ++j) first_solution[k].push_back(ls.x(j));
    }
  }

  // round the solved coefficients and certify the rounded relations as
  // identities; any failure leaves the constants unset
  for (std::size_t k = 0; k < keys.size() && exact_; ++k) {
    std::vector<mpq_class> cs(n);
    for (int j = 0; j < n && exact_; ++j)
      if (!rationalize(first_solution[k][j], cs[j])) exact_ = false;
    if (!exact_) break;
    VectorField resid = brackets[k];
    for (int j = 0; j < n; ++j) resid = resid - num(cs[j]) * basis_[j];
    for (const auto& [coord, e] : resid.comps())
      if (!is_zero(e, dom, plan)) {
        exact_ = false;
        break;
      }
    if (exact_) constants_[keys[k]] = std::move(cs);
  }
  if (!exact_) constants_.clear();
}

bool acts_freely(const LieAction& act, const SamplePlan& plan) {
  const int n = act.dim();
  if (n == 0) return true;
  const int m = act.chart()->dim();
  std::vector<Expr> must;
  for (const auto& X : act.basis()) append_field_coeffs(must, X);
  const auto pts = sample_points(act.chart()->domain(), plan, must);
  for (const auto& pt : pts)
    if (numeric_rank(fields_matrix(act.basis(), pt, m), plan.rank_tol) != n)
      return false;
  return true;
}

bool is_symmetry(const EDS& sys, const LieAction& act, const SamplePlan& plan) {
  if (act.chart() != sys.chart())
    fail(Errc::ChartMismatch, "action and system live on different charts");
  const EDS alg = sys.algebraic_closure();
  for (const auto& X : act.basis()) {
    for (const auto& w : sys.ones())
      if (!membership(lie_derivative(X, w), alg, plan).member) return false;
    for (const auto& w : sys.twos())
      if (!membership(lie_derivative(X, w), alg, plan).member) return false;
  }
  return true;
}

bool is_transverse(const EDS& sys, const LieAction& act, const SamplePlan& plan) {
  if (act.chart() != sys.chart())
    fail(Errc::ChartMismatch, "action and system live on different charts");
  const int n = act.dim();
  if (n == 0) return true;
  const int m = sys.chart()->dim();

  std::vector<Expr> must = sys.coefficient_exprs();
  for (const auto& X : act.basis()) append_field_coeffs(must, X);
  const auto pts = sample_points(sys.chart()->domain(), plan, must);

  // the intersection of ann(ones) with the span of the fields vanishes
  // exactly when pairing the forms against the fields preserves the rank of
  // the field block
  int seen = -1;
  for (const auto& pt : pts) {
    const Eigen::MatrixXd G = fields_matrix(act.basis(), pt, m);
    const Eigen::MatrixXd T = forms_matrix(sys.ones(), pt, m);
    const int rg = numeric_rank(G, plan.rank_tol);
    const Eigen::MatrixXd B = T * G.transpose();
    const int ok = numeric_rank(B, plan.rank_tol) == rg ? 1 : 0;
    if (seen == -1) seen = ok;
    if (seen != ok)
      fail(Errc::RankInconsistent, "transversality differs between sample points");
  }
  return seen == 1;
}

std::vector<DiffForm> AdaptedCoframe::full() const {
  std::vector<DiffForm> out = theta;
  out.insert(out.end(), theta_sb.begin(), theta_sb.end());
  out.insert(out.end(), omega_sb.begin(), omega_sb.end());
  return out;
}

AdaptedCoframe adapted_coframe(const EDS& sys, const LieAction& act,
                               const SamplePlan& plan) {
  if (act.chart() != sys.chart())
    fail(Errc::ChartMismatch, "action and system live on different charts");
  const ChartPtr& chart = sys.chart();
  const int m = chart->dim();
  const int s = static_cast<int>(sys.ones().size());
  const int n = act.dim();
  const auto dom = chart->domain();

  if (s > 0 && rank_at_samples(sys, plan).rank != s)
    fail(Errc::RankInconsistent, "1-form generators are not pointwise independent");

  AdaptedCoframe out;
  std::vector<int> sel;
  if (n > 0) {
    if (!acts_freely(act, plan))
      fail(Errc::NotFree, "basis fields drop rank at a sample point");
    if (!is_transverse(sys, act, plan))
      fail(Errc::NotTransverse,
           "annihilator of the 1-form generators meets the action");

    SymMatrix H(n, std::vector<Expr>(s));
    for (int i = 0; i < n; ++i)
      for (int A = 0; A < s; ++A) H[i][A] = hook1(act.basis()[i], sys.ones()[A]);

    std::vector<Expr> must = sys.coefficient_exprs();
    for (const auto& X : act.basis()) append_field_coeffs(must, X);
    const auto pts = sample_points(dom, plan, must);

    Eigen::MatrixXd Hv(n, s);
    for (int i = 0; i < n; ++i)
      for (int A = 0; A < s; ++A)
        Hv(i, A) = eval_numeric(H[i][A], pts.front()).value;

    // greedy column selection keeps the earliest generators whose pairing
    // block stays nondegenerate
    for (int A = 0; A < s && static_cast<int>(sel.size()) < n; ++A) {
      Eigen::MatrixXd sub(n, static_cast<int>(sel.size()) + 1);
      for (std::size_t c = 0; c < sel.size(); ++c) sub.col(static_cast<int>(c)) = Hv.col(sel[c]);
      sub.col(static_cast<int>(sel.size())) = Hv.col(A);
      if (numeric_rank(sub, plan.rank_tol) > static_cast<int>(sel.size()))
        sel.push_back(A);
    }
    if (static_cast<int>(sel.size()) < n)
      fail(Errc::NotTransverse, "pairing with the 1-form generators drops rank");

    SymMatrix A(n, std::vector<Expr>(n));
    for (int a = 0; a < n; ++a)
      for (int j = 0; j < n; ++j) A[a][j] = H[j][sel[a]];
    const SymMatrix C = sym_inverse(A, dom, plan, Errc::NotTransverse);

    for (int i = 0; i < n; ++i) {
      DiffForm th(chart, 1);
      for (int a = 0; a < n; ++a) th = th + C[i][a] * sys.ones()[sel[a]];
      out.theta.push_back(std::move(th));
    }

    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Expr e = hook1(act.basis()[j], out.theta[i]) - (i == j ? num(1) : Expr());
        if (!is_zero(e, dom, plan))
          fail(Errc::Undecided, "adapted coframe failed its duality certification");
      }
  }

  for (int A = 0; A < s; ++A) {
    if (std::find(sel.begin(), sel.end(), A) != sel.end()) continue;
    if (n == 0) {
      out.theta_sb.push_back(sys.ones()[A]);
      continue;
    }
    DiffForm w = sys.ones()[A];
    for (int i = 0; i < n; ++i)
      w = w - hook1(act.basis()[i], sys.ones()[A]) * out.theta[i];
    out.theta_sb.push_back(certified_clean(w, dom, plan));
  }

  // coordinate differentials completing the generators to a coframe, then
  // corrected to annihilate the action
  const auto pts0 = sample_points(dom, plan, sys.coefficient_exprs());
  Eigen::MatrixXd probe = Eigen::MatrixXd::Zero(s + m, m);
  int rows = 0;
  for (int A = 0; A < s; ++A) {
    const auto v = form_values_at(sys.ones()[A], pts0.front());
    for (int c = 0; c < m; ++c) probe(rows, c) = v[c];
    ++rows;
  }
  int have = numeric_rank(probe.topRows(rows), plan.rank_tol);
  for (int c = 0; c < m && have < m; ++c) {
    probe.row(rows).setZero();
    probe(rows, c) = 1.0;
    const int grown = numeric_rank(probe.topRows(rows + 1), plan.rank_tol);
    if (grown <= have) continue;
    have = grown;
    ++rows;
    DiffForm w = d_coord(chart, chart->coords[c]);
    if (n == 0) {
      out.omega_sb.push_back(std::move(w));
      continue;
    }
    for (int i = 0; i < n; ++i)
      w = w - act.basis()[i].coeff(chart->coords[c]) * out.theta[i];
    out.omega_sb.push_back(certified_clean(w, dom, plan));
  }
  if (have < m)
    fail(Errc::RankInconsistent, "coordinate complement did not reach full rank");
  return out;
}

std::vector<DiffForm> semibasic_two_forms(const EDS& sys, const LieAction& act,
                                          const AdaptedCoframe& cf,
                                          const SamplePlan& plan) {
  const ChartPtr& chart = sys.chart();
  const int m = chart->dim();
  const auto dom = chart->domain();
  if (static_cast<int>(cf.theta.size()) != act.dim())
    fail(Errc::DimensionMismatch, "adapted coframe does not match the action");
  for (const auto& w : cf.theta)
    if (w.chart() != chart)
      fail(Errc::ChartMismatch, "coframe member lives on a different chart");

  std::vector<DiffForm> cands = sys.twos();
  for (const auto& w : sys.ones()) {
    DiffForm dw = exterior_derivative(w);
    if (!dw.comps().empty()) cands.push_back(std::move(dw));
  }
  if (cands.empty()) return {};

  // Row-reduce the 1-form generators so every pivot coordinate differential
  // has an expansion, modulo the span, in complement differentials alone.
  // Reducing candidates through that expansion replaces inverting the full
  // coframe; the complement block of the result is unchanged.
  const int s = static_cast<int>(sys.ones().size());
  std::vector<std::vector<std::pair<int, Expr>>> expand(m);
  std::vector<int> comp, slot(m, -1);
  {
    std::vector<char> pivot(m, 0);
    SymRref rr;
    if (s > 0) {
      SymMatrix A(s, std::vector<Expr>(m));
      for (int j = 0; j < s; ++j)
        for (int k = 0; k < m; ++k) A[j][k] = sys.ones()[j].coeff({k});
      rr = sym_rref(A, dom, plan);
      if (rr.rank != s)
        fail(Errc::RankInconsistent,
             "1-form generators are not pointwise independent");
      for (int c : rr.pivot_cols) pivot[c] = 1;
    }
    for (int k = 0; k < m; ++k)
      if (!pivot[k]) {
        slot[k] = static_cast<int>(comp.size());
        comp.push_back(k);
      }
    for (int j = 0; j < static_cast<int>(rr.pivot_cols.size()); ++j)
      for (int u : comp)
        if (!(rr.reduced[j][u] == Expr()))
          expand[rr.pivot_cols[j]].emplace_back(u, -rr.reduced[j][u]);
    for (int u : comp) expand[u].emplace_back(u, num(1));
  }

  std::vector<std::pair<int, int>> pairs;
  for (std::size_t a = 0; a < comp.size(); ++a)
    for (std::size_t b = a + 1; b < comp.size(); ++b)
      pairs.emplace_back(comp[a], comp[b]);
  if (pairs.empty()) return {};

  SymMatrix rows;
  for (const auto& tau : cands) {
    std::map<std::pair<int, int>, Expr> t;
    for (const auto& [idx, c] : tau.comps())
      for (const auto& [a, ca] : expand[idx[0]])
        for (const auto& [b, cb] : expand[idx[1]]) {
          if (a == b) continue;
          if (a < b)
            t[{a, b}] += c * ca * cb;
          else
            t[{b, a}] -= c * ca * cb;
        }
    std::vector<Expr> row;
    row.reserve(pairs.size());
    for (const auto& p : pairs) {
      auto it = t.find(p);
      row.push_back(it == t.end() ? Expr() : it->second);
    }
    rows.push_back(std::move(row));
  }

  // complement differentials corrected to annihilate the action
  std::map<int, DiffForm> om;
  const auto omega_of = [&](int u) -> const DiffForm& {
    auto it = om.find(u);
    if (it == om.end()) {
      DiffForm w = d_coord(chart, chart->coords[u]);
      for (std::size_t i = 0; i < cf.theta.size(); ++i) {
        const Expr a = act.basis()[i].coeff(chart->coords[u]);
        if (!a.is_zero()) w = w - a * cf.theta[i];
      }
      it = om.emplace(u, std::move(w)).first;
    }
    return it->second;
  };

  const SymRref rr = sym_rref(rows, dom, plan);
  std::vector<DiffForm> out;
  for (int r = 0; r < rr.rank; ++r) {
    DiffForm tau(chart, 2);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const Expr& c = rr.reduced[r][p];
      if (c == Expr()) continue;
      tau = tau + c * wedge(omega_of(pairs[p].first), omega_of(pairs[p].second));
    }
    if (!tau.comps().empty()) out.push_back(std::move(tau));
  }

  for (const auto& tau : out)
    for (const auto& X : act.basis()) {
      const DiffForm h = hook(X, tau);
      for (const auto& [idx, c] : h.comps())
        if (!is_zero(c, dom, plan))
          fail(Errc::Undecided, "semi-basic 2-form fails to annihilate the action");
    }
  return out;
}

QuotientSpec make_quotient_spec(const LieAction& act, const SmoothMap& q,
                                const SmoothMap& section, const SamplePlan& plan) {
  if (q.source != act.chart())
    fail(Errc::ChartMismatch, "invariants start on the wrong chart");
  if (section.source != q.target || section.target != q.source)
    fail(Errc::ChartMismatch, "section does not reverse the invariants map");

  const auto dom = act.chart()->domain();
  for (const auto& X : act.basis())
    for (const auto& [name, h] : q.comps)
      if (!is_zero(apply(X, h), dom, plan))
        fail(Errc::NotInvariant, "quotient coordinate " + name + " is moved by the action");

  require_submersion(q, plan);
  require_section(q, section, plan);
  return QuotientSpec{act, q, section};
}

EDS quotient(const EDS& sys, const QuotientSpec& qs, const SamplePlan& plan) {
  if (qs.action.chart() != sys.chart())
    fail(Errc::ChartMismatch, "quotient data lives on a different chart");
  if (!is_symmetry(sys, qs.action, plan))
    fail(Errc::NotInvariant, "system is not invariant under the action");

  const auto cf = adapted_coframe(sys, qs.action, plan);
  const auto taus = semibasic_two_forms(sys, qs.action, cf, plan);
  const auto qdom = qs.quotient_chart()->domain();

  std::vector<DiffForm> ones_out;
  for (const auto& w : cf.theta_sb) {
    DiffForm g = certified_clean(pullback(qs.section, w), qdom, plan);
    if (!g.comps().empty()) ones_out.push_back(std::move(g));
  }
  std::vector<DiffForm> twos_raw;
  for (const auto& w : taus) {
    DiffForm g = certified_clean(pullback(qs.section, w), qdom, plan);
    if (!g.comps().empty()) twos_raw.push_back(std::move(g));
  }

  // 2-forms already inside the closure of the 1-form block are redundant
  std::vector<DiffForm> twos_out;
  if (!twos_raw.empty()) {
    const EDS part = EDS(qs.quotient_chart(), ones_out).algebraic_closure();
    for (auto& g : twos_raw)
      if (!membership(g, part, plan).member) twos_out.push_back(std::move(g));
  }

  EDS out(qs.quotient_chart(), std::move(ones_out), std::move(twos_out));

  const EDS alg = sys.algebraic_closure();
  for (const auto& g : out.ones())
    if (!membership(pullback(qs.q, g), alg, plan).member)
      fail(Errc::Undecided, "quotient generator failed its round-trip membership");
  for (const auto& g : out.twos())
    if (!membership(pullback(qs.q, g), alg, plan).member)
      fail(Errc::Undecided, "quotient generator failed its round-trip membership");
  return out;
}

SmoothMap induced_projection(const QuotientSpec& fine, const QuotientSpec& coarse,
                             const SamplePlan& plan) {
  if (fine.action.chart() != coarse.action.chart())
    fail(Errc::ChartMismatch, "quotients of different charts");

  const auto dom = fine.action.chart()->domain();
  const int m = fine.action.chart()->dim();
  const int nc = coarse.action.dim();
  std::vector<Expr> must;
  for (const auto& X : fine.action.basis()) append_field_coeffs(must, X);
  for (const auto& X : coarse.action.basis()) append_field_coeffs(must, X);
  const auto pts = sample_points(dom, plan, must);

  for (const auto& pt : pts) {
    const Eigen::MatrixXd A = fields_matrix(coarse.action.basis(), pt, m).transpose();
    for (const auto& X : fine.action.basis()) {
      const auto bv = field_values_at(X, pt);
      Eigen::VectorXd b(m);
      for (int r = 0; r < m; ++r) b(r) = bv[r];
      double residual, scale;
      if (nc == 0) {
        residual = b.size() ? b.cwiseAbs().maxCoeff() : 0.0;
        scale = residual;
      } else {
        const auto ls = solve_least_squares(A, b);
        residual = ls.residual;
        scale = ls.scale;
      }
      if (residual > plan.tol * (1.0 + scale))
        fail(Errc::NotASubalgebra, "finer action does not sit inside the coarser one");
    }
  }

  SmoothMap p = compose(coarse.q, fine.section);
  const SmoothMap round = compose(p, fine.q);
  for (const auto& name : coarse.q.target->coords) {
    const Expr e = round.comps.at(name) - coarse.q.comps.at(name);
    if (!is_zero(e, dom, plan))
      fail(Errc::Undecided, "projection failed to factor the coarser invariants");
  }
  return p;
}

ExtensionReport is_integrable_extension(const SmoothMap& p, const EDS& E,
                                        const EDS& I,
                                        const std::vector<DiffForm>& J,
                                        const SamplePlan& plan) {
  if (E.chart() != p.source)
    fail(Errc::ChartMismatch, "extension system must live on the source of the map");
  if (I.chart() != p.target)
    fail(Errc::ChartMismatch, "base system must live on the target of the map");
  for (const auto& xi : J) {
    if (xi.chart() != E.chart())
      fail(Errc::ChartMismatch, "candidate 1-form lives on a different chart");
    if (xi.degree() != 1)
      fail(Errc::DimensionMismatch, "candidate forms must be 1-forms");
  }

  const int mN = E.chart()->dim();
  const int mM = p.target->dim();
  const int r = static_cast<int>(J.size());

  const SymMatrix jac = jacobian(p);
  std::vector<Expr> must = flatten(jac);
  for (const auto& [coord, e] : p.comps) must.push_back(e);
  for (const auto& xi : J)
    for (const auto& [idx, c] : xi.comps()) must.push_back(c);
  {
    const auto ec = E.coefficient_exprs();
    must.insert(must.end(), ec.begin(), ec.end());
  }
  const auto pts = sample_points(E.chart()->domain(), plan, must);

  for (const auto& pt : pts) {
    const Eigen::MatrixXd Jm = eval_matrix(jac, pt);
    if (numeric_rank(Jm, plan.rank_tol) != mM)
      fail(Errc::NotSubmersion, "map " + p.name + " drops rank at a sample point");
    if (r == 0) continue;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Jm);
    lu.setThreshold(plan.rank_tol);
    if (lu.dimensionOfKernel() == 0)
      fail(Errc::FiberTangency, "candidate forms exceed the fibre dimension");
    const Eigen::MatrixXd K = lu.kernel();
    const Eigen::MatrixXd Jf = forms_matrix(J, pt, mN);
    if (numeric_rank(Jf * K, plan.rank_tol) != r)
      fail(Errc::FiberTangency, "candidate forms degenerate on a fibre");
  }

  // the comparison ideal generated by the candidates and the pulled-back base
  std::vector<DiffForm> rh_ones = J;
  for (const auto& w : I.ones()) rh_ones.push_back(pullback(p, w));
  std::vector<DiffForm> rh_twos;
  for (const auto& w : I.twos()) rh_twos.push_back(pullback(p, w));
  for (const auto& w : I.ones()) {
    DiffForm dw = exterior_derivative(pullback(p, w));
    if (!dw.comps().empty()) rh_twos.push_back(std::move(dw));
  }
  const EDS rhs(E.chart(), std::move(rh_ones), std::move(rh_twos));
  const EDS lhs = E.algebraic_closure();

  ExtensionReport rep;
  rep.spans_match = true;
  for (const auto& w : lhs.ones())
    if (rep.spans_match && !membership(w, rhs, plan).member) rep.spans_match = false;
  for (const auto& w : lhs.twos())
    if (rep.spans_match && !membership(w, rhs, plan).member) rep.spans_match = false;
  for (const auto& w : rhs.ones())
    if (rep.spans_match && !membership(w, lhs, plan).member) rep.spans_match = false;
  for (const auto& w : rhs.twos())
    if (rep.spans_match && !membership(w, lhs, plan).member) rep.spans_match = false;

  rep.closed = true;
  for (const auto& xi : J) {
    const DiffForm dxi = exterior_derivative(xi);
    if (dxi.comps().empty()) continue;
    if (!membership(dxi, rhs, plan).member) {
      rep.closed = false;
      break;
    }
  }

  if (E.twos().empty() && !E.ones().empty()) {
    const EDS derived(E.chart(), derived_system(E, plan));
    for (const auto& xi : J)
      if (!membership(xi, derived, plan).member) {
        rep.derived_contains = false;
        break;
      }
  }

  rep.extension = rep.spans_match && rep.closed;
  return rep;
}

}  // namespace edsym
