#include "edsym/geometry.hpp"

#include <algorithm>

namespace edsym {

// ------------------------------------------------------------------ charts

int Chart::index_of(const std::string& c) const {
  for (size_t i = 0; i < coords.size(); ++i)
    if (coords[i] == c) return static_cast<int>(i);
  return -1;
}

SampleDomain Chart::domain() const {
  SampleDomain d;
  d.coords = coords;
  d.boxes = boxes;
  d.positive = positive;
  return d;
}

ChartPtr make_chart(const std::string& name,
                    const std::vector<std::string>& coords,
                    const std::vector<Expr>& positive,
                    const std::map<std::string, SampleBox>& boxes) {
  auto ch = std::make_shared<Chart>();
  ch->name = name;
  ch->coords = coords;
  ch->positive = positive;
  ch->boxes = boxes;
  std::set<std::string> seen;
  for (const auto& c : coords) {
    (void)sym(c);  // rejects reserved names
    if (!seen.insert(c).second)
      fail(Errc::DimensionMismatch,
           "chart " + name + " repeats coordinate " + c);
  }
  for (const auto& g : positive)
    for (const auto& c : free_coords(g))
      if (!seen.count(c))
        fail(Errc::UnknownCoordinate,
             "constraint on chart " + name + " uses " + c);
  for (const auto& [c, box] : boxes)
    if (!seen.count(c))
      fail(Errc::UnknownCoordinate, "box on chart " + name + " for " + c);
  return ch;
}

ChartPtr product_chart(const std::string& name,
                       const std::vector<ChartPtr>& factors) {
  auto ch = std::make_shared<Chart>();
  ch->name = name;
  ch->factors = factors;
  std::set<std::string> seen;
  for (const auto& f : factors) {
    for (const auto& c : f->coords) {
      if (!seen.insert(c).second)
        fail(Errc::DimensionMismatch,
             "product chart " + name + " repeats coordinate " + c);
      ch->coords.push_back(c);
    }
    for (const auto& [c, box] : f->boxes) ch->boxes[c] = box;
    for (const auto& g : f->positive) ch->positive.push_back(g);
  }
  return ch;
}

static void require_same_chart(const ChartPtr& a, const ChartPtr& b,
                               const char* op) {
  if (a != b)
    fail(Errc::ChartMismatch, std::string(op) + ": " + a->name + " vs " +
                                  b->name);
}

// ------------------------------------------------------------ orientation

int sort_index_sign(std::vector<int>& idx) {
  int sign = 1;
  for (size_t i = 1; i < idx.size(); ++i) {
    int v = idx[i];
    size_t j = i;
    while (j > 0 && idx[j - 1] > v) {
      idx[j] = idx[j - 1];
      --j;
      sign = -sign;
    }
    idx[j] = v;
  }
  for (size_t i = 1; i < idx.size(); ++i)
    if (idx[i] == idx[i - 1]) return 0;
  return sign;
}

std::vector<std::vector<int>> index_tuples(int dim, int degree) {
  std::vector<std::vector<int>> out;
  if (degree < 0 || degree > dim) return out;
  std::vector<int> cur(degree);
  for (int i = 0; i < degree; ++i) cur[i] = i;
  for (;;) {
    out.push_back(cur);
    int k = degree - 1;
    while (k >= 0 && cur[k] == dim - degree + k) --k;
    if (k < 0) break;
    ++cur[k];
    for (int i = k + 1; i < degree; ++i) cur[i] = cur[i - 1] + 1;
  }
  if (degree == 0) out = {{}};
  return out;
}

// ------------------------------------------------------------------ forms

DiffForm::DiffForm(ChartPtr chart, int degree)
    : chart_(std::move(chart)), degree_(degree) {
  if (degree < 0)
    fail(Errc::DegreeUnsupported, "negative form degree");
}

Expr DiffForm::coeff(const std::vector<int>& idx) const {
  std::vector<int> key = idx;
  int sign = sort_index_sign(key);
  if (sign == 0) return Expr();
  auto it = comps_.find(key);
  if (it == comps_.end()) return Expr();
  return sign < 0 ? -it->second : it->second;
}

void DiffForm::add_term(std::vector<int> idx, const Expr& c) {
  if (static_cast<int>(idx.size()) != degree_)
    fail(Errc::DimensionMismatch, "index tuple does not match form degree");
  for (int i : idx)
    if (i < 0 || i >= chart_->dim())
      fail(Errc::UnknownCoordinate,
           "coordinate index " + std::to_string(i) + " outside chart " +
               chart_->name);
  if (c.is_zero()) return;
  int sign = sort_index_sign(idx);
  if (sign == 0) return;
  Expr v = sign < 0 ? -c : c;
  auto it = comps_.find(idx);
  if (it == comps_.end()) {
    comps_.emplace(std::move(idx), v);
  } else {
    it->second += v;
    if (it->second.is_zero()) comps_.erase(it);
  }
}

DiffForm fn_form(ChartPtr chart, const Expr& f) {
  DiffForm w(std::move(chart), 0);
  w.add_term({}, f);
  return w;
}

DiffForm d_coord(ChartPtr chart, const std::string& c) {
  int i = chart->index_of(c);
  if (i < 0)
    fail(Errc::UnknownCoordinate, c + " not on chart " + chart->name);
  DiffForm w(std::move(chart), 1);
  w.add_term({i}, num(1));
  return w;
}

DiffForm d_of(ChartPtr chart, const Expr& f) {
  for (const auto& c : free_coords(f))
    if (!chart->has_coord(c))
      fail(Errc::UnknownCoordinate, c + " not on chart " + chart->name);
  DiffForm w(chart, 1);
  for (int i = 0; i < chart->dim(); ++i) {
    Expr df = diff(f, chart->coords[i]);
    if (!df.is_zero()) w.add_term({i}, df);
  }
  return w;
}

DiffForm operator+(const DiffForm& a, const DiffForm& b) {
  require_same_chart(a.chart(), b.chart(), "form addition");
  if (a.degree() != b.degree())
    fail(Errc::DimensionMismatch, "adding forms of different degree");
  DiffForm out = a;
  for (const auto& [idx, c] : b.comps()) out.add_term(idx, c);
  return out;
}

DiffForm operator-(const DiffForm& a) {
  DiffForm out(a.chart(), a.degree());
  for (const auto& [idx, c] : a.comps()) out.add_term(idx, -c);
  return out;
}

DiffForm operator-(const DiffForm& a, const DiffForm& b) { return a + (-b); }

DiffForm operator*(const Expr& s, const DiffForm& a) {
  DiffForm out(a.chart(), a.degree());
  for (const auto& [idx, c] : a.comps()) out.add_term(idx, s * c);
  return out;
}

DiffForm operator*(const DiffForm& a, const Expr& s) { return s * a; }

DiffForm wedge(const DiffForm& a, const DiffForm& b) {
  require_same_chart(a.chart(), b.chart(), "wedge");
  DiffForm out(a.chart(), a.degree() + b.degree());
  for (const auto& [ia, ca] : a.comps()) {
    for (const auto& [ib, cb] : b.comps()) {
      std::vector<int> idx = ia;
      idx.insert(idx.end(), ib.begin(), ib.end());
      out.add_term(std::move(idx), ca * cb);
    }
  }
  return out;
}

DiffForm exterior_derivative(const DiffForm& a) {
  const ChartPtr& ch = a.chart();
  DiffForm out(ch, a.degree() + 1);
  for (const auto& [idx, c] : a.comps()) {
    for (int j = 0; j < ch->dim(); ++j) {
      Expr dc = diff(c, ch->coords[j]);
      if (dc.is_zero()) continue;
      std::vector<int> ni;
      ni.reserve(idx.size() + 1);
      ni.push_back(j);
      ni.insert(ni.end(), idx.begin(), idx.end());
      out.add_term(std::move(ni), dc);
    }
  }
  return out;
}

// ------------------------------------------------------------------ fields

VectorField::VectorField(ChartPtr chart, std::map<std::string, Expr> comps)
    : chart_(std::move(chart)) {
  for (auto& [c, e] : comps) {
    if (!chart_->has_coord(c))
      fail(Errc::UnknownCoordinate,
           "field component " + c + " not on chart " + chart_->name);
    for (const auto& fc : free_coords(e))
      if (!chart_->has_coord(fc))
        fail(Errc::UnknownCoordinate,
             "field coefficient uses " + fc + " off chart " + chart_->name);
    if (!e.is_zero()) comps_.emplace(c, e);
  }
}

Expr VectorField::coeff(const std::string& coord) const {
  auto it = comps_.find(coord);
  return it == comps_.end() ? Expr() : it->second;
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  require_same_chart(a.chart(), b.chart(), "field addition");
  std::map<std::string, Expr> m = a.comps();
  for (const auto& [c, e] : b.comps()) {
    auto it = m.find(c);
    if (it == m.end())
      m.emplace(c, e);
    else
      it->second += e;
  }
  return VectorField(a.chart(), std::move(m));
}

VectorField operator-(const VectorField& a) {
  std::map<std::string, Expr> m;
  for (const auto& [c, e] : a.comps()) m.emplace(c, -e);
  return VectorField(a.chart(), std::move(m));
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  return a + (-b);
}

VectorField operator*(const Expr& s, const VectorField& a) {
  std::map<std::string, Expr> m;
  for (const auto& [c, e] : a.comps()) m.emplace(c, s * e);
  return VectorField(a.chart(), std::move(m));
}

Expr apply(const VectorField& X, const Expr& f) {
  Expr out;
  for (const auto& [c, e] : X.comps()) out += e * diff(f, c);
  return out;
}

DiffForm hook(const VectorField& X, const DiffForm& w) {
  require_same_chart(X.chart(), w.chart(), "interior product");
  if (w.degree() == 0) return DiffForm(w.chart(), 0);
  DiffForm out(w.chart(), w.degree() - 1);
  const auto& coords = w.chart()->coords;
  for (const auto& [idx, c] : w.comps()) {
    for (size_t k = 0; k < idx.size(); ++k) {
      Expr xc = X.coeff(coords[idx[k]]);
      if (xc.is_zero()) continue;
      std::vector<int> rest;
      rest.reserve(idx.size() - 1);
      for (size_t j = 0; j < idx.size(); ++j)
        if (j != k) rest.push_back(idx[j]);
      Expr t = xc * c;
      if (k % 2 == 1) t = -t;
      out.add_term(std::move(rest), t);
    }
  }
  return out;
}

DiffForm lie_derivative(const VectorField& X, const DiffForm& w) {
  // on functions i_X w vanishes identically, leaving the directional term
  if (w.degree() == 0) return hook(X, exterior_derivative(w));
  return hook(X, exterior_derivative(w)) + exterior_derivative(hook(X, w));
}

VectorField lie_bracket(const VectorField& X, const VectorField& Y) {
  require_same_chart(X.chart(), Y.chart(), "bracket");
  std::map<std::string, Expr> m;
  for (const auto& c : X.chart()->coords) {
    Expr e = apply(X, Y.coeff(c)) - apply(Y, X.coeff(c));
    if (!e.is_zero()) m.emplace(c, e);
  }
  return VectorField(X.chart(), std::move(m));
}

// ------------------------------------------------------------------- maps

SmoothMap make_map(const std::string& name, ChartPtr source, ChartPtr target,
                   const std::map<std::string, Expr>& comps) {
  SmoothMap m;
  m.name = name;
  m.source = std::move(source);
  m.target = std::move(target);
  for (const auto& c : m.target->coords) {
    auto it = comps.find(c);
    if (it == comps.end())
      fail(Errc::DimensionMismatch,
           "map " + name + " missing component for " + c);
    for (const auto& fc : free_coords(it->second))
      if (!m.source->has_coord(fc))
        fail(Errc::UnknownCoordinate,
             "map " + name + " component " + c + " uses " + fc +
                 " off chart " + m.source->name);
    m.comps.emplace(c, it->second);
  }
  if (comps.size() != m.target->coords.size())
    fail(Errc::DimensionMismatch,
         "map " + name + " has components off its target chart");
  return m;
}

SmoothMap compose(const SmoothMap& f, const SmoothMap& g) {
  if (f.source != g.target)
    fail(Errc::ChartMismatch,
         "compose: " + f.name + " after " + g.name + " do not chain");
  std::map<std::string, Expr> comps;
  for (const auto& [c, e] : f.comps) comps.emplace(c, substitute(e, g.comps));
  return make_map("(" + f.name + "." + g.name + ")", g.source, f.target,
                  comps);
}

Expr pullback(const SmoothMap& m, const Expr& f) {
  return substitute(f, m.comps);
}

DiffForm pullback(const SmoothMap& m, const DiffForm& w) {
  require_same_chart(m.target, w.chart(), "pullback");
  if (w.degree() == 0)
    return fn_form(m.source, substitute(w.coeff({}), m.comps));
  std::vector<DiffForm> dphi;
  dphi.reserve(m.target->dim());
  for (const auto& c : m.target->coords)
    dphi.push_back(d_of(m.source, m.comps.at(c)));
  DiffForm out(m.source, w.degree());
  for (const auto& [idx, c] : w.comps()) {
    DiffForm t = fn_form(m.source, substitute(c, m.comps));
    for (int i : idx) t = wedge(t, dphi[i]);
    out = out + t;
  }
  return out;
}

void require_section(const SmoothMap& phi, const SmoothMap& sigma,
                     const SamplePlan& plan) {
  if (sigma.target != phi.source || sigma.source != phi.target)
    fail(Errc::ChartMismatch, "section " + sigma.name +
                                  " does not invert map " + phi.name);
  SampleDomain dom = sigma.source->domain();
  for (const auto& c : phi.target->coords) {
    Expr e = substitute(phi.comps.at(c), sigma.comps) - sym(c);
    if (!is_zero(e, dom, plan))
      fail(Errc::SectionNotValid,
           sigma.name + " is not a section of " + phi.name +
               " in coordinate " + c);
  }
}

VectorField pushforward_projectable(const SmoothMap& phi,
                                    const SmoothMap& sigma,
                                    const VectorField& X,
                                    const SamplePlan& plan) {
  require_same_chart(X.chart(), phi.source, "pushforward");
  require_section(phi, sigma, plan);
  SampleDomain dom = phi.source->domain();
  std::map<std::string, Expr> comps;
  for (const auto& c : phi.target->coords) {
    Expr w = apply(X, phi.comps.at(c));
    Expr cand = substitute(w, sigma.comps);
    // projectability: the candidate must reproduce X(phi^c) everywhere on
    // the source, not only along the section
    if (!is_zero(substitute(cand, phi.comps) - w, dom, plan))
      fail(Errc::NotProjectable,
           to_string(X) + " does not project along " + phi.name +
               " in component " + c);
    if (!cand.is_zero()) comps.emplace(c, cand);
  }
  return VectorField(phi.target, std::move(comps));
}

// ---------------------------------------------------------------- numerics

std::vector<double> form_values_at(const DiffForm& w, const SamplePoint& pt) {
  auto tuples = index_tuples(w.chart()->dim(), w.degree());
  std::vector<double> out;
  out.reserve(tuples.size());
  for (const auto& t : tuples) {
    auto it = w.comps().find(t);
    out.push_back(it == w.comps().end() ? 0.0
                                        : eval_numeric(it->second, pt).value);
  }
  return out;
}

std::vector<double> field_values_at(const VectorField& X, const SamplePoint& pt) {
  const auto& coords = X.chart()->coords;
  std::vector<double> out(coords.size(), 0.0);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    auto it = X.comps().find(coords[i]);
    if (it != X.comps().end()) out[i] = eval_numeric(it->second, pt).value;
  }
  return out;
}

// ---------------------------------------------------------------- printing

static std::string coeff_prefix(const Expr& c, const std::string& basis) {
  if (c.is_one()) return basis;
  if ((-c).is_one()) return "-" + basis;
  std::string s = to_string(c);
  if (s.find(' ') != std::string::npos) s = "(" + s + ")";
  return s + "*" + basis;
}

std::string to_string(const DiffForm& w) {
  if (w.degree() == 0) return to_string(w.coeff({}));
  if (w.comps().empty()) return "0";
  const auto& coords = w.chart()->coords;
  std::string out;
  bool first = true;
  for (const auto& [idx, c] : w.comps()) {
    std::string basis;
    for (size_t i = 0; i < idx.size(); ++i) {
      if (i) basis += "/\\";
      basis += "d(" + coords[idx[i]] + ")";
    }
    std::string term = coeff_prefix(c, basis);
    if (first) {
      out = term;
      first = false;
    } else if (!term.empty() && term[0] == '-') {
      out += " - " + term.substr(1);
    } else {
      out += " + " + term;
    }
  }
  return out;
}

std::string to_string(const VectorField& v) {
  if (v.comps().empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [c, e] : v.comps()) {
    std::string term = coeff_prefix(e, "D(" + c + ")");
    if (first) {
      out = term;
      first = false;
    } else if (!term.empty() && term[0] == '-') {
      out += " - " + term.substr(1);
    } else {
      out += " + " + term;
    }
  }
  return out;
}

}  // namespace edsym
