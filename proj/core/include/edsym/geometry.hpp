#pragma once

#include <map>
#include <string>
#include <vector>

#include "edsym/chart.hpp"

namespace edsym {

// Sorts idx ascending in place. Returns 0 when an index repeats, otherwise
// the sign of the sorting permutation. Every orientation decision in the
// calculus funnels through this one routine.
int sort_index_sign(std::vector<int>& idx);

// All strictly increasing `degree`-tuples from {0..dim-1}, lexicographic.
// Fixes the component enumeration used when forms become numeric vectors.
std::vector<std::vector<int>> index_tuples(int dim, int degree);

// Exterior form of fixed degree with sparse components over strictly
// increasing coordinate-index tuples. Structural-zero coefficients are
// dropped on construction.
class DiffForm {
 public:
  DiffForm(ChartPtr chart, int degree);

  const ChartPtr& chart() const { return chart_; }
  int degree() const { return degree_; }
  const std::map<std::vector<int>, Expr>& comps() const { return comps_; }
  bool is_structurally_zero() const { return comps_.empty(); }
  // coefficient of the (sorted) tuple, zero when absent
  Expr coeff(const std::vector<int>& idx) const;

  // builder access: tuple may be unsorted, the shuffle sign is absorbed
  void add_term(std::vector<int> idx, const Expr& c);

 private:
  ChartPtr chart_;
  int degree_;
  std::map<std::vector<int>, Expr> comps_;
};

DiffForm fn_form(ChartPtr chart, const Expr& f);       // 0-form
DiffForm d_coord(ChartPtr chart, const std::string&);  // dx
DiffForm d_of(ChartPtr chart, const Expr& f);          // df as a 1-form

DiffForm operator+(const DiffForm&, const DiffForm&);
DiffForm operator-(const DiffForm&, const DiffForm&);
DiffForm operator-(const DiffForm&);
DiffForm operator*(const Expr&, const DiffForm&);
DiffForm operator*(const DiffForm&, const Expr&);

DiffForm wedge(const DiffForm&, const DiffForm&);
DiffForm exterior_derivative(const DiffForm&);

class VectorField {
 public:
  VectorField(ChartPtr chart, std::map<std::string, Expr> comps);

  const ChartPtr& chart() const { return chart_; }
  const std::map<std::string, Expr>& comps() const { return comps_; }
  Expr coeff(const std::string& coord) const;
  bool is_structurally_zero() const { return comps_.empty(); }

 private:
  ChartPtr chart_;
  std::map<std::string, Expr> comps_;
};

VectorField operator+(const VectorField&, const VectorField&);
VectorField operator-(const VectorField&, const VectorField&);
VectorField operator-(const VectorField&);
VectorField operator*(const Expr&, const VectorField&);

// directional derivative X(f)
Expr apply(const VectorField& X, const Expr& f);

DiffForm hook(const VectorField& X, const DiffForm& w);  // interior product
// Cartan formula: i_X dw + d(i_X w)
DiffForm lie_derivative(const VectorField& X, const DiffForm& w);
VectorField lie_bracket(const VectorField&, const VectorField&);

// Map between charts, one component expression per target coordinate, all
// written in source coordinates.
struct SmoothMap {
  std::string name;
  ChartPtr source, target;
  std::map<std::string, Expr> comps;
};

SmoothMap make_map(const std::string& name, ChartPtr source, ChartPtr target,
                   const std::map<std::string, Expr>& comps);
// f after g, i.e. (f . g)(x) = f(g(x)); g.target must be f.source
SmoothMap compose(const SmoothMap& f, const SmoothMap& g);

Expr pullback(const SmoothMap&, const Expr& f);
DiffForm pullback(const SmoothMap&, const DiffForm& w);

// Checks that sigma is a right inverse of phi at the sample points; throws
// SectionNotValid otherwise.
void require_section(const SmoothMap& phi, const SmoothMap& sigma,
                     const SamplePlan& plan);

// Pushforward of X along phi, expressed through the section sigma. The
// candidate components sigma*(X(phi^j)) are accepted only when their
// pullbacks agree with X(phi^j) on all of the source chart; otherwise X is
// not projectable and the call throws NotProjectable.
VectorField pushforward_projectable(const SmoothMap& phi,
                                    const SmoothMap& sigma,
                                    const VectorField& X,
                                    const SamplePlan& plan);

// numeric component vector in the index_tuples enumeration
std::vector<double> form_values_at(const DiffForm&, const SamplePoint&);
// numeric component vector in chart coordinate order
std::vector<double> field_values_at(const VectorField&, const SamplePoint&);

std::string to_string(const DiffForm&);
std::string to_string(const VectorField&);

}  // namespace edsym
