#pragma once

#include "edsym/eds.hpp"

namespace edsym {

// One contact relation: d(var) = sum over (base, deriv) of deriv * d(base).
// Standard jet levels carry one slope per independent variable; chain levels
// carry a single slope over their tower's base.
struct JetLevel {
  std::string var;
  std::vector<std::pair<std::string, std::string>> slopes;
};

// Jet data carried by a chart. Levels are listed in dependency order: a
// level's slopes may only name coordinates introduced by later levels, and
// its bases only independent variables or earlier level variables.
// top_bases records, for each coordinate with no level of its own, the bases
// over which its contact relation would continue one order up; that is the
// truncation metadata for the total derivatives.
struct JetStructure {
  std::vector<std::string> indeps;
  std::vector<JetLevel> levels;
  std::map<std::string, std::vector<std::string>> top_bases;
};

// Jet chart in multi-index coordinates: dependent variables u carry
// derivative coordinates u_x, u_xy, ... up to the order bound, with the
// index letters in independent-variable order.
ChartPtr standard_jet(const std::string& name,
                      const std::vector<std::string>& indeps,
                      const std::vector<std::string>& deps, int order,
                      const std::vector<Expr>& positive = {},
                      const std::map<std::string, SampleBox>& boxes = {});

// One tower of a chain chart: coordinates dep, dep1, ..., dep<order> with
// contact forms d(dep_i) - dep_{i+1} d(base). The base is the independent
// variable or the ground variable of an earlier tower.
struct ChainTower {
  std::string dep;
  std::string base;
  int order = 0;
};

ChartPtr chain_jet(const std::string& name, const std::string& indep,
                   const std::vector<ChainTower>& towers,
                   const std::vector<Expr>& positive = {},
                   const std::map<std::string, SampleBox>& boxes = {});

// product_chart plus concatenation of the factors' jet structures; extra
// constraints may couple coordinates of different factors
ChartPtr jet_product(const std::string& name,
                     const std::vector<ChartPtr>& factors,
                     const std::vector<Expr>& positive = {},
                     const std::map<std::string, SampleBox>& boxes = {});

// Pfaffian presentation with one generator per contact level
EDS contact_system(const ChartPtr&);

// The unique field with D(dir) = 1, D(other independents) = 0, annihilating
// every contact form. Coordinates whose action would need slopes beyond the
// order bound carry no component; truncated_slots names them.
VectorField total_derivative(const ChartPtr&, const std::string& dir);
std::vector<std::string> truncated_slots(const ChartPtr&,
                                         const std::string& dir);

// D_dir(f), refusing with TruncatedSlot when f depends on a coordinate
// whose action in this direction fell off the order bound
Expr total_derivative_apply(const ChartPtr&, const std::string& dir,
                            const Expr& f);

// Fills in the missing slope components of X so that every contact form is
// preserved, then certifies the result by lie-derivative membership in the
// contact system; failure of that certificate throws NotAContactSymmetry.
VectorField prolong_field(const ChartPtr&, const VectorField& X,
                          const SamplePlan&);

// is_zero certificate for lhs - rhs over the chart domain
bool verify_syzygy(const ChartPtr&, const Expr& lhs, const Expr& rhs,
                   const SamplePlan&);

}  // namespace edsym
