#include "edsym/jets.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace edsym {

namespace {

const JetStructure& jet_of(const ChartPtr& c) {
  if (!c || !c->jet) fail(Errc::UsageError, "chart carries no jet structure");
  return *c->jet;
}

void require_direction(const JetStructure& J, const std::string& dir) {
  if (std::find(J.indeps.begin(), J.indeps.end(), dir) == J.indeps.end())
    fail(Errc::UnknownCoordinate,
         "total derivative direction " + dir + " is not independent");
}

// D_dir(c) for every coordinate with a represented action; top-order
// coordinates are absent
std::map<std::string, Expr> action_map(const JetStructure& J,
                                       const std::string& dir) {
  std::map<std::string, Expr> act;
  for (const auto& i : J.indeps) act[i] = num(i == dir ? 1 : 0);
  for (const auto& lv : J.levels) {
    Expr a;
    for (const auto& [base, deriv] : lv.slopes) a += sym(deriv) * act.at(base);
    act[lv.var] = a;
  }
  return act;
}

// multi-indices of total order m over n directions, first direction first
void count_tuples(int n, int m, std::vector<int>& cur,
                  std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == n - 1) {
    cur.push_back(m);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int k = m; k >= 0; --k) {
    cur.push_back(k);
    count_tuples(n, m - k, cur, out);
    cur.pop_back();
  }
}

std::vector<std::vector<int>> multi_indices(int n, int m) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  count_tuples(n, m, cur, out);
  return out;
}

std::string jet_name(const std::string& dep,
                     const std::vector<std::string>& indeps,
                     const std::vector<int>& K) {
  bool flat = true;
  for (int k : K)
    if (k) flat = false;
  if (flat) return dep;
  std::string s = dep + "_";
  for (std::size_t i = 0; i < K.size(); ++i)
    for (int r = 0; r < K[i]; ++r) s += indeps[i];
  return s;
}

}  // namespace

ChartPtr standard_jet(const std::string& name,
                      const std::vector<std::string>& indeps,
                      const std::vector<std::string>& deps, int order,
                      const std::vector<Expr>& positive,
                      const std::map<std::string, SampleBox>& boxes) {
  if (indeps.empty() || deps.empty() || order < 1)
    fail(Errc::UsageError, "jet chart needs variables and a positive order");
  const int n = static_cast<int>(indeps.size());
  auto J = std::make_shared<JetStructure>();
  J->indeps = indeps;
  std::vector<std::string> coords = indeps;
  for (const auto& dep : deps) {
    for (int m = 0; m <= order; ++m)
      for (const auto& K : multi_indices(n, m)) {
        const std::string var = jet_name(dep, indeps, K);
        coords.push_back(var);
        if (m == order) {
          J->top_bases[var] = indeps;
          continue;
        }
        JetLevel lv;
        lv.var = var;
        for (int i = 0; i < n; ++i) {
          auto Ki = K;
          ++Ki[i];
          lv.slopes.emplace_back(indeps[i], jet_name(dep, indeps, Ki));
        }
        J->levels.push_back(std::move(lv));
      }
  }
  auto base = make_chart(name, coords, positive, boxes);
  Chart c = *base;
  c.jet = J;
  return std::make_shared<const Chart>(std::move(c));
}

ChartPtr chain_jet(const std::string& name, const std::string& indep,
                   const std::vector<ChainTower>& towers,
                   const std::vector<Expr>& positive,
                   const std::map<std::string, SampleBox>& boxes) {
  if (towers.empty()) fail(Errc::UsageError, "chain chart needs a tower");
  auto J = std::make_shared<JetStructure>();
  J->indeps = {indep};
  std::vector<std::string> coords = {indep};
  std::set<std::string> grounds = {indep};
  for (const auto& tw : towers) {
    if (tw.order < 1) fail(Errc::UsageError, "tower order must be positive");
    if (!grounds.count(tw.base))
      fail(Errc::UnknownCoordinate,
           "tower base " + tw.base + " is not an earlier variable");
    std::string var = tw.dep;
    coords.push_back(var);
    for (int k = 1; k <= tw.order; ++k) {
      const std::string next = tw.dep + std::to_string(k);
      coords.push_back(next);
      J->levels.push_back({var, {{tw.base, next}}});
      var = next;
    }
    J->top_bases[var] = {tw.base};
    grounds.insert(tw.dep);
  }
  auto base = make_chart(name, coords, positive, boxes);
  Chart c = *base;
  c.jet = J;
  return std::make_shared<const Chart>(std::move(c));
}

ChartPtr jet_product(const std::string& name,
                     const std::vector<ChartPtr>& factors,
                     const std::vector<Expr>& positive,
                     const std::map<std::string, SampleBox>& boxes) {
  auto J = std::make_shared<JetStructure>();
  for (const auto& f : factors) {
    const JetStructure& jf = jet_of(f);
    J->indeps.insert(J->indeps.end(), jf.indeps.begin(), jf.indeps.end());
    J->levels.insert(J->levels.end(), jf.levels.begin(), jf.levels.end());
    J->top_bases.insert(jf.top_bases.begin(), jf.top_bases.end());
  }
  Chart c = *product_chart(name, factors);
  c.jet = J;
  c.positive.insert(c.positive.end(), positive.begin(), positive.end());
  for (const auto& [coord, box] : boxes) c.boxes[coord] = box;
  return std::make_shared<const Chart>(std::move(c));
}

EDS contact_system(const ChartPtr& chart) {
  const JetStructure& J = jet_of(chart);
  std::vector<DiffForm> ones;
  for (const auto& lv : J.levels) {
    DiffForm th = d_coord(chart, lv.var);
    for (const auto& [base, deriv] : lv.slopes)
      th = th - sym(deriv) * d_coord(chart, base);
    ones.push_back(th);
  }
  return EDS(chart, std::move(ones));
}

VectorField total_derivative(const ChartPtr& chart, const std::string& dir) {
  const JetStructure& J = jet_of(chart);
  require_direction(J, dir);
  std::map<std::string, Expr> comps;
  for (auto& [c, e] : action_map(J, dir))
    if (!e.is_zero()) comps.emplace(c, e);
  return VectorField(chart, std::move(comps));
}

std::vector<std::string> truncated_slots(const ChartPtr& chart,
                                         const std::string& dir) {
  const JetStructure& J = jet_of(chart);
  require_direction(J, dir);
  const auto act = action_map(J, dir);
  std::vector<std::string> out;
  for (const auto& [top, bases] : J.top_bases)
    for (const auto& b : bases)
      if (!act.at(b).is_zero()) {
        out.push_back(top);
        break;
      }
  return out;
}

Expr total_derivative_apply(const ChartPtr& chart, const std::string& dir,
                            const Expr& f) {
  const auto free = free_coords(f);
  for (const auto& c : free)
    if (!chart->has_coord(c))
      fail(Errc::UnknownCoordinate, "expression uses " + c + " off the chart");
  for (const auto& t : truncated_slots(chart, dir))
    if (free.count(t))
      fail(Errc::TruncatedSlot,
           "derivative along " + dir + " of an expression in " + t +
               " needs slopes beyond the order bound");
  return apply(total_derivative(chart, dir), f);
}

VectorField prolong_field(const ChartPtr& chart, const VectorField& X,
                          const SamplePlan& plan) {
  const JetStructure& J = jet_of(chart);
  if (X.chart() != chart) fail(Errc::ChartMismatch, "field lives off the jet chart");
  std::map<std::string, Expr> comps = X.comps();
  const auto val = [&comps](const std::string& c) {
    auto it = comps.find(c);
    return it == comps.end() ? Expr() : it->second;
  };
  const std::set<std::string> indep_set(J.indeps.begin(), J.indeps.end());
  std::map<std::string, std::map<std::string, Expr>> act;
  for (const auto& i : J.indeps) act[i] = action_map(J, i);

  for (const auto& lv : J.levels) {
    bool over_indeps = true;
    for (const auto& [base, deriv] : lv.slopes)
      if (!indep_set.count(base)) over_indeps = false;

    if (over_indeps) {
      for (const auto& [b, R] : lv.slopes) {
        if (comps.count(R)) continue;
        Expr e = total_derivative_apply(chart, b, val(lv.var));
        for (const auto& [b2, R2] : lv.slopes)
          e -= sym(R2) * total_derivative_apply(chart, b, val(b2));
        if (!e.is_zero()) comps.emplace(R, e);
      }
      continue;
    }

    // chain level: one slope over a dependent base; differentiate along the
    // direction that moves the base and divide by the base's speed
    const auto& [B, R] = lv.slopes.front();
    if (comps.count(R)) continue;
    std::string dir;
    for (const auto& i : J.indeps)
      if (!act[i].at(B).is_zero()) {
        dir = i;
        break;
      }
    if (dir.empty())
      fail(Errc::UsageError, "chain base is not moved by any direction");
    Expr e = (total_derivative_apply(chart, dir, val(lv.var)) -
              sym(R) * total_derivative_apply(chart, dir, val(B))) /
             act[dir].at(B);
    if (!e.is_zero()) comps.emplace(R, e);
  }

  VectorField Xp(chart, std::move(comps));
  const EDS I = contact_system(chart);
  for (const auto& th : I.ones())
    if (!membership(lie_derivative(Xp, th), I, plan).member)
      fail(Errc::NotAContactSymmetry,
           "prolonged field does not preserve the contact system");
  return Xp;
}

bool verify_syzygy(const ChartPtr& chart, const Expr& lhs, const Expr& rhs,
                   const SamplePlan& plan) {
  const Expr d = lhs - rhs;
  for (const auto& c : free_coords(d))
    if (!chart->has_coord(c))
      fail(Errc::UnknownCoordinate, "expression uses " + c + " off the chart");
  return is_zero(d, chart->domain(), plan);
}

}  // namespace edsym
