#include <functional>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "edsym/jets.hpp"
#include "edsym/reduction.hpp"

using namespace edsym;

namespace {

Errc thrown_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::UsageError;
}

SamplePlan plan() { return default_plan(); }

// every component certifies to zero on the form's chart
bool form_zero(const DiffForm& w, const SamplePlan& pl) {
  SampleDomain dom = w.chart()->domain();
  for (const auto& [idx, c] : w.comps())
    if (!is_zero(c, dom, pl)) return false;
  return true;
}

// product of two second-order towers; the constraints keep the logarithmic
// invariants below defined
ChartPtr wave_chart() {
  static ChartPtr c = jet_product(
      "m8",
      {standard_jet("jw", {"y"}, {"w"}, 2),
       standard_jet("jv", {"x"}, {"v"}, 2)},
      {parse_expr("v + w"), parse_expr("v_x"), parse_expr("w_y")});
  return c;
}

VectorField field(const ChartPtr& c,
                  const std::map<std::string, std::string>& comps) {
  std::map<std::string, Expr> m;
  for (const auto& [k, v] : comps) m.emplace(k, parse_expr(v));
  return VectorField(c, std::move(m));
}

// opposite translations of the two towers
VectorField x1() { return field(wave_chart(), {{"w", "1"}, {"v", "-1"}}); }

// joint scaling of both towers
VectorField x2() {
  return field(wave_chart(), {{"w", "w"},
                              {"w_y", "w_y"},
                              {"w_yy", "w_yy"},
                              {"v", "v"},
                              {"v_x", "v_x"},
                              {"v_xx", "v_xx"}});
}

// equal translations of the two towers
VectorField z1() { return field(wave_chart(), {{"w", "1"}, {"v", "1"}}); }

// second prolongation of w -> w/(1 - t w), v -> v/(1 + t v)
VectorField z2() {
  return field(wave_chart(), {{"w", "w^2"},
                              {"w_y", "2*w*w_y"},
                              {"w_yy", "2*w_y^2 + 2*w*w_yy"},
                              {"v", "-v^2"},
                              {"v_x", "-2*v*v_x"},
                              {"v_xx", "-2*v_x^2 - 2*v*v_xx"}});
}

LieAction two_param() { return LieAction(wave_chart(), {x1(), x2()}, plan()); }

LieAction three_param_a() {
  return LieAction(wave_chart(), {x1(), x2(), z1()}, plan());
}

LieAction three_param_b() {
  return LieAction(wave_chart(), {x1(), x2(), z2()}, plan());
}

ChartPtr pair_chart() {
  static ChartPtr c = make_chart("n6", {"x", "y", "V", "W", "V_x", "W_y"});
  return c;
}

ChartPtr wave_base() {
  static ChartPtr c = make_chart("n5a", {"x", "y", "u1", "u1x", "u1y"});
  return c;
}

ChartPtr liouville_base() {
  static ChartPtr c = make_chart("n5b", {"x", "y", "u2", "u2x", "u2y"});
  return c;
}

ChartPtr line_jet() {
  static ChartPtr c = make_chart("tj1", {"x", "u", "u1"});
  return c;
}

SmoothMap str_map(const std::string& name, ChartPtr s, ChartPtr t,
                  const std::map<std::string, std::string>& comps) {
  std::map<std::string, Expr> m;
  for (const auto& [k, v] : comps) m.emplace(k, parse_expr(v));
  return make_map(name, s, t, m);
}

SmoothMap inv_pair() {
  return str_map("qp", wave_chart(), pair_chart(),
                 {{"x", "x"},
                  {"y", "y"},
                  {"V", "log(v_x/(v + w))"},
                  {"W", "log(w_y/(v + w))"},
                  {"V_x", "v_xx/v_x - v_x/(v + w)"},
                  {"W_y", "w_yy/w_y - w_y/(v + w)"}});
}

SmoothMap sec_pair() {
  return str_map("sp", pair_chart(), wave_chart(),
                 {{"x", "x"},
                  {"y", "y"},
                  {"w", "0"},
                  {"v", "1"},
                  {"w_y", "exp(W)"},
                  {"v_x", "exp(V)"},
                  {"w_yy", "exp(W)*W_y + exp(2*W)"},
                  {"v_xx", "exp(V)*V_x + exp(2*V)"}});
}

// a second right inverse of inv_pair through w = v = 1
SmoothMap sec_pair_alt() {
  return str_map("spb", pair_chart(), wave_chart(),
                 {{"x", "x"},
                  {"y", "y"},
                  {"w", "1"},
                  {"v", "1"},
                  {"w_y", "2*exp(W)"},
                  {"v_x", "2*exp(V)"},
                  {"w_yy", "2*exp(W)*W_y + 2*exp(2*W)"},
                  {"v_xx", "2*exp(V)*V_x + 2*exp(2*V)"}});
}

SmoothMap inv_wave() {
  return str_map("qw", wave_chart(), wave_base(),
                 {{"x", "x"},
                  {"y", "y"},
                  {"u1", "log(v_x) - log(w_y)"},
                  {"u1x", "v_xx/v_x"},
                  {"u1y", "-w_yy/w_y"}});
}

SmoothMap sec_wave() {
  return str_map("sw", wave_base(), wave_chart(),
                 {{"x", "x"},
                  {"y", "y"},
                  {"w", "0"},
                  {"v", "1"},
                  {"w_y", "1"},
                  {"v_x", "exp(u1)"},
                  {"w_yy", "-u1y"},
                  {"v_xx", "u1x*exp(u1)"}});
}

SmoothMap inv_liouville() {
  return str_map("ql", wave_chart(), liouville_base(),
                 {{"x", "x"},
                  {"y", "y"},
                  {"u2", "log(2*v_x*w_y/(v + w)^2)"},
                  {"u2x", "v_xx/v_x - 2*v_x/(v + w)"},
                  {"u2y", "w_yy/w_y - 2*w_y/(v + w)"}});
}

SmoothMap sec_liouville() {
  return str_map("sl", liouville_base(), wave_chart(),
                 {{"x", "x"},
                  {"y", "y"},
                  {"w", "0"},
                  {"v", "1"},
                  {"w_y", "1"},
                  {"v_x", "exp(u2)/2"},
                  {"w_yy", "u2y + 2"},
                  {"v_xx", "(u2x + exp(u2))*exp(u2)/2"}});
}

DiffForm beta1() {
  auto c = pair_chart();
  return d_coord(c, "V") - parse_expr("V_x") * d_coord(c, "x") +
         parse_expr("exp(W)") * d_coord(c, "y");
}

DiffForm beta2() {
  auto c = pair_chart();
  return d_coord(c, "W") + parse_expr("exp(V)") * d_coord(c, "x") -
         parse_expr("W_y") * d_coord(c, "y");
}

EDS wave_system() {
  auto c = wave_base();
  DiffForm th = d_coord(c, "u1") - parse_expr("u1x") * d_coord(c, "x") -
                parse_expr("u1y") * d_coord(c, "y");
  return EDS(c, {th},
             {wedge(d_coord(c, "u1x"), d_coord(c, "x")),
              wedge(d_coord(c, "u1y"), d_coord(c, "y"))});
}

EDS liouville_system() {
  auto c = liouville_base();
  DiffForm th = d_coord(c, "u2") - parse_expr("u2x") * d_coord(c, "x") -
                parse_expr("u2y") * d_coord(c, "y");
  DiffForm t1 = wedge(
      d_coord(c, "u2x") - parse_expr("exp(u2)") * d_coord(c, "y"),
      d_coord(c, "x"));
  DiffForm t2 = wedge(
      d_coord(c, "u2y") - parse_expr("exp(u2)") * d_coord(c, "x"),
      d_coord(c, "y"));
  return EDS(c, {th}, {t1, t2});
}

// composite of the three-parameter invariants with the pair section
SmoothMap proj_wave() {
  return str_map("pw", pair_chart(), wave_base(),
                 {{"x", "x"},
                  {"y", "y"},
                  {"u1", "V - W"},
                  {"u1x", "V_x + exp(V)"},
                  {"u1y", "-W_y - exp(W)"}});
}

SmoothMap proj_liouville() {
  return str_map("pl", pair_chart(), liouville_base(),
                 {{"x", "x"},
                  {"y", "y"},
                  {"u2", "V + W + log(2)"},
                  {"u2x", "V_x - exp(V)"},
                  {"u2y", "W_y - exp(W)"}});
}

}  // namespace

TEST_SUITE("reduction") {

TEST_CASE("bracket closure fixes the structure constants") {
  LieAction act = two_param();
  CHECK(act.exact_constants());
  CHECK(act.constants().at({0, 1}) == std::vector<mpq_class>{1, 0});

  LieAction act3 = three_param_b();
  CHECK(act3.exact_constants());
  CHECK(act3.constants().at({0, 1}) == std::vector<mpq_class>{1, 0, 0});
  CHECK(act3.constants().at({0, 2}) == std::vector<mpq_class>{0, 2, 0});
  CHECK(act3.constants().at({1, 2}) == std::vector<mpq_class>{0, 0, 1});

  // a single field closes vacuously
  LieAction one(wave_chart(), {x2()}, plan());
  CHECK(one.exact_constants());
  CHECK(one.constants().empty());

  // bracket outside the pointwise span
  CHECK(thrown_code([&] {
          LieAction(wave_chart(),
                    {field(wave_chart(), {{"y", "1"}}),
                     field(wave_chart(), {{"w", "1"}, {"w_y", "y"}})},
                    plan());
        }) == Errc::NotASubalgebra);

  // closure with a function coefficient passes but leaves no constants
  LieAction fn(wave_chart(),
               {x1(), field(wave_chart(), {{"w_y", "w"}, {"v", "w"}})},
               plan());
  CHECK(!fn.exact_constants());
  CHECK(fn.constants().empty());
}

TEST_CASE("freeness and transversality are pointwise rank conditions") {
  EDS sys = contact_system(wave_chart());
  LieAction act = two_param();
  CHECK(acts_freely(act, plan()));
  CHECK(is_transverse(sys, act, plan()));

  LieAction dep(wave_chart(),
                {x1(), field(wave_chart(), {{"w", "2"}, {"v", "-2"}})},
                plan());
  CHECK(!acts_freely(dep, plan()));

  LieAction act3 = three_param_a();
  CHECK(acts_freely(act3, plan()));
  CHECK(is_transverse(sys, act3, plan()));

  // two of the four contact forms annihilate the third field
  EDS sub(wave_chart(), {sys.ones()[0], sys.ones()[2]});
  CHECK(!is_transverse(sub, act3, plan()));

  // a full coframe is transverse to anything
  std::vector<DiffForm> all;
  for (const auto& c : wave_chart()->coords)
    all.push_back(d_coord(wave_chart(), c));
  CHECK(is_transverse(EDS(wave_chart(), all), act3, plan()));
}

TEST_CASE("adapted coframe splits into dual and semibasic blocks") {
  EDS sys = contact_system(wave_chart());
  LieAction act = two_param();
  AdaptedCoframe cf = adapted_coframe(sys, act, plan());
  CHECK(cf.theta.size() == 2);
  CHECK(cf.theta_sb.size() == 2);
  CHECK(cf.omega_sb.size() == 4);
  CHECK(rank_at_samples(EDS(wave_chart(), cf.full()), plan()).rank == 8);

  SampleDomain dom = wave_chart()->domain();
  std::vector<VectorField> basis = act.basis();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Expr pairing = hook(basis[j], cf.theta[i]).coeff({});
      CHECK(is_zero(pairing - num(i == j ? 1 : 0), dom, plan()));
    }
  for (const auto& X : basis) {
    for (const auto& w : cf.theta_sb)
      CHECK(is_zero(hook(X, w).coeff({}), dom, plan()));
    for (const auto& w : cf.omega_sb)
      CHECK(is_zero(hook(X, w).coeff({}), dom, plan()));
  }

  // the semibasic block spans the invariant part of the contact span
  DiffForm sb1 = parse_expr("1/v_x") * sys.ones()[3] -
                 parse_expr("1/w_y") * sys.ones()[1];
  DiffForm sb2 = parse_expr("1/v_x") * sys.ones()[3] +
                 parse_expr("1/w_y") * sys.ones()[1] -
                 parse_expr("2/(v + w)") * (sys.ones()[2] + sys.ones()[0]);
  EDS ours(wave_chart(), cf.theta_sb);
  CHECK(membership(sb1, ours, plan()).member);
  CHECK(membership(sb2, ours, plan()).member);
  EDS theirs(wave_chart(), {sb1, sb2});
  for (const auto& w : cf.theta_sb)
    CHECK(membership(w, theirs, plan()).member);

  // a trivial action leaves the generators and picks coordinate complements
  LieAction none(wave_chart(), {}, plan());
  AdaptedCoframe cf0 = adapted_coframe(sys, none, plan());
  CHECK(cf0.theta.empty());
  REQUIRE(cf0.theta_sb.size() == 4);
  for (int i = 0; i < 4; ++i)
    CHECK(form_zero(cf0.theta_sb[i] - sys.ones()[i], plan()));
  REQUIRE(cf0.omega_sb.size() == 4);
  CHECK(form_zero(cf0.omega_sb[0] - d_coord(wave_chart(), "y"), plan()));
  CHECK(form_zero(cf0.omega_sb[1] - d_coord(wave_chart(), "w_yy"), plan()));
  CHECK(form_zero(cf0.omega_sb[2] - d_coord(wave_chart(), "x"), plan()));
  CHECK(form_zero(cf0.omega_sb[3] - d_coord(wave_chart(), "v_xx"), plan()));
}

TEST_CASE("semibasic two forms carry the reduced torsion") {
  EDS sys = contact_system(wave_chart());

  LieAction act3 = three_param_a();
  AdaptedCoframe cfa = adapted_coframe(sys, act3, plan());
  std::vector<DiffForm> taus = semibasic_two_forms(sys, act3, cfa, plan());
  CHECK(taus.size() == 2);
  for (const auto& t : taus)
    for (const auto& X : act3.basis())
      CHECK(form_zero(hook(X, t), plan()));
  DiffForm pa1 = wedge(parse_expr("-1/v_x") * d_coord(wave_chart(), "v_xx") +
                           parse_expr("v_xx/v_x^2") * d_coord(wave_chart(), "v_x"),
                       d_coord(wave_chart(), "x"));
  DiffForm pa2 = wedge(parse_expr("-1/w_y") * d_coord(wave_chart(), "w_yy") +
                           parse_expr("w_yy/w_y^2") * d_coord(wave_chart(), "w_y"),
                       d_coord(wave_chart(), "y"));
  EDS ours(wave_chart(), sys.ones(), taus);
  CHECK(membership(pa1, ours, plan()).member);
  CHECK(membership(pa2, ours, plan()).member);
  EDS theirs(wave_chart(), sys.ones(), {pa1, pa2});
  for (const auto& t : taus) CHECK(membership(t, theirs, plan()).member);

  LieAction actb = three_param_b();
  AdaptedCoframe cfb = adapted_coframe(sys, actb, plan());
  std::vector<DiffForm> tausb = semibasic_two_forms(sys, actb, cfb, plan());
  CHECK(tausb.size() == 2);
  DiffForm pb1 = wedge(
      parse_expr("1/v_x") * d_coord(wave_chart(), "v_xx") +
          parse_expr("v_x/(w_y*(v + w))") * sys.ones()[1] -
          parse_expr("v_xx/v_x^2 + 1/(v + w)") * sys.ones()[3],
      d_coord(wave_chart(), "x"));
  DiffForm pb2 = wedge(
      parse_expr("1/w_y") * d_coord(wave_chart(), "w_yy") +
          parse_expr("w_y/(v_x*(v + w))") * sys.ones()[3] -
          parse_expr("w_yy/w_y^2 + 1/(v + w)") * sys.ones()[1],
      d_coord(wave_chart(), "y"));
  EDS oursb(wave_chart(), sys.ones(), tausb);
  CHECK(membership(pb1, oursb, plan()).member);
  CHECK(membership(pb2, oursb, plan()).member);
  EDS theirsb(wave_chart(), sys.ones(), {pb1, pb2});
  for (const auto& t : tausb) CHECK(membership(t, theirsb, plan()).member);

  // a closed generator leaves nothing to reduce
  ChartPtr f3 = make_chart("f3", {"x", "y", "z"});
  EDS closed(f3, {d_coord(f3, "z")});
  LieAction none(f3, {}, plan());
  AdaptedCoframe cf0 = adapted_coframe(closed, none, plan());
  CHECK(semibasic_two_forms(closed, none, cf0, plan()).empty());
}

TEST_CASE("quotient by the two parameter action is the hyperbolic pair") {
  EDS sys = contact_system(wave_chart());
  LieAction act = two_param();
  QuotientSpec spec = make_quotient_spec(act, inv_pair(), sec_pair(), plan());
  EDS out = quotient(sys, spec, plan());
  CHECK(out.ones().size() == 2);
  CHECK(out.twos().empty());

  EDS expect(pair_chart(), {beta1(), beta2()});
  for (const auto& w : out.ones())
    CHECK(membership(w, expect, plan()).member);
  CHECK(membership(beta1(), out, plan()).member);
  CHECK(membership(beta2(), out, plan()).member);

  // the quotient ideal does not depend on the cross-section
  QuotientSpec alt = make_quotient_spec(act, inv_pair(), sec_pair_alt(), plan());
  EDS out2 = quotient(sys, alt, plan());
  CHECK(out2.ones().size() == 2);
  CHECK(out2.twos().empty());
  for (const auto& w : out2.ones()) CHECK(membership(w, out, plan()).member);
  for (const auto& w : out.ones()) CHECK(membership(w, out2, plan()).member);
}

TEST_CASE("quotients by the extended actions reach the scalar equations") {
  EDS sys = contact_system(wave_chart());

  QuotientSpec spec1 =
      make_quotient_spec(three_param_a(), inv_wave(), sec_wave(), plan());
  EDS out1 = quotient(sys, spec1, plan());
  CHECK(out1.ones().size() == 1);
  CHECK(out1.twos().size() == 2);
  EDS expect1 = wave_system();
  CHECK(membership(out1.ones()[0], expect1, plan()).member);
  for (const auto& t : out1.twos())
    CHECK(membership(t, expect1, plan()).member);
  EDS back1 = out1.algebraic_closure();
  CHECK(membership(expect1.ones()[0], back1, plan()).member);
  for (const auto& t : expect1.twos())
    CHECK(membership(t, back1, plan()).member);

  QuotientSpec spec2 = make_quotient_spec(three_param_b(), inv_liouville(),
                                          sec_liouville(), plan());
  EDS out2 = quotient(sys, spec2, plan());
  CHECK(out2.ones().size() == 1);
  CHECK(out2.twos().size() == 2);
  EDS expect2 = liouville_system();
  CHECK(membership(out2.ones()[0], expect2, plan()).member);
  for (const auto& t : out2.twos())
    CHECK(membership(t, expect2, plan()).member);
  EDS back2 = out2.algebraic_closure();
  CHECK(membership(expect2.ones()[0], back2, plan()).member);
  for (const auto& t : expect2.twos())
    CHECK(membership(t, back2, plan()).member);
}

TEST_CASE("quotient data is validated before reducing") {
  LieAction act = two_param();

  // the pair invariants are moved by the third field
  CHECK(thrown_code([&] {
          make_quotient_spec(three_param_a(), inv_pair(), sec_pair(), plan());
        }) == Errc::NotInvariant);

  // swapped section components fail the right-inverse certificate
  SmoothMap bad_sec =
      str_map("spx", pair_chart(), wave_chart(),
              {{"x", "x"},
               {"y", "y"},
               {"w", "0"},
               {"v", "1"},
               {"w_y", "exp(V)"},
               {"v_x", "exp(W)"},
               {"w_yy", "exp(W)*W_y + exp(2*W)"},
               {"v_xx", "exp(V)*V_x + exp(2*V)"}});
  CHECK(thrown_code([&] {
          make_quotient_spec(act, inv_pair(), bad_sec, plan());
        }) == Errc::SectionNotValid);

  // a repeated invariant drops rank
  SmoothMap bad_inv =
      str_map("qpx", wave_chart(), pair_chart(),
              {{"x", "x"},
               {"y", "y"},
               {"V", "x"},
               {"W", "log(w_y/(v + w))"},
               {"V_x", "v_xx/v_x - v_x/(v + w)"},
               {"W_y", "w_yy/w_y - w_y/(v + w)"}});
  CHECK(thrown_code([&] {
          make_quotient_spec(act, bad_inv, sec_pair(), plan());
        }) == Errc::NotSubmersion);

  // the system itself must be invariant
  QuotientSpec spec = make_quotient_spec(act, inv_pair(), sec_pair(), plan());
  EDS moved(wave_chart(),
            {d_coord(wave_chart(), "y") - d_coord(wave_chart(), "w")});
  CHECK(thrown_code([&] { quotient(moved, spec, plan()); }) ==
        Errc::NotInvariant);

  // trivial action with identity data returns the system unchanged
  ChartPtr lj = line_jet();
  SmoothMap idm = str_map("idq", lj, lj, {{"x", "x"}, {"u", "u"}, {"u1", "u1"}});
  LieAction none(lj, {}, plan());
  QuotientSpec triv = make_quotient_spec(none, idm, idm, plan());
  EDS lsys(lj, {d_coord(lj, "u") - parse_expr("u1") * d_coord(lj, "x")});
  EDS lout = quotient(lsys, triv, plan());
  CHECK(lout.ones().size() == 1);
  CHECK(lout.twos().empty());
  CHECK(form_zero(lout.ones()[0] - lsys.ones()[0], plan()));
}

TEST_CASE("induced projection factors the coarser invariants") {
  QuotientSpec fine =
      make_quotient_spec(two_param(), inv_pair(), sec_pair(), plan());
  QuotientSpec coarse =
      make_quotient_spec(three_param_a(), inv_wave(), sec_wave(), plan());
  SampleDomain dom = pair_chart()->domain();

  SmoothMap p = induced_projection(fine, coarse, plan());
  CHECK(p.source == pair_chart());
  CHECK(p.target == wave_base());
  SmoothMap expect = proj_wave();
  for (const auto& [name, comp] : expect.comps)
    CHECK(is_zero(p.comps.at(name) - comp, dom, plan()));

  QuotientSpec coarse2 = make_quotient_spec(three_param_b(), inv_liouville(),
                                            sec_liouville(), plan());
  SmoothMap p2 = induced_projection(fine, coarse2, plan());
  SmoothMap expect2 = proj_liouville();
  for (const auto& [name, comp] : expect2.comps)
    CHECK(is_zero(p2.comps.at(name) - comp, dom, plan()));

  // projecting a quotient onto itself is the identity
  SmoothMap idp = induced_projection(fine, fine, plan());
  for (const auto& name : pair_chart()->coords)
    CHECK(is_zero(idp.comps.at(name) - sym(name), dom, plan()));

  // the finer action must sit inside the coarser one
  CHECK(thrown_code([&] { induced_projection(coarse, fine, plan()); }) ==
        Errc::NotASubalgebra);
}

TEST_CASE("integrable extension certificates for both descents") {
  EDS upstairs(pair_chart(), {beta1(), beta2()});
  EDS base1 = wave_system();
  EDS base2 = liouville_system();

  ExtensionReport rep =
      is_integrable_extension(proj_wave(), upstairs, base1, {beta2()}, plan());
  CHECK(rep.extension);
  CHECK(rep.spans_match);
  CHECK(rep.closed);
  CHECK(!rep.derived_contains);

  ExtensionReport rep2 = is_integrable_extension(proj_liouville(), upstairs,
                                                 base2, {beta2()}, plan());
  CHECK(rep2.extension);
  CHECK(rep2.spans_match);
  CHECK(rep2.closed);
  CHECK(!rep2.derived_contains);

  // dropping the two-form generators of the base breaks the span
  EDS partial(wave_base(), {base1.ones()[0]});
  ExtensionReport rep3 =
      is_integrable_extension(proj_wave(), upstairs, partial, {beta2()}, plan());
  CHECK(!rep3.extension);
  CHECK(!rep3.spans_match);

  // the identity map extends trivially
  ChartPtr lj = line_jet();
  SmoothMap idm = str_map("idj", lj, lj, {{"x", "x"}, {"u", "u"}, {"u1", "u1"}});
  EDS lsys(lj, {d_coord(lj, "u") - parse_expr("u1") * d_coord(lj, "x")});
  ExtensionReport rid = is_integrable_extension(idm, lsys, lsys, {}, plan());
  CHECK(rid.extension);
  CHECK(rid.spans_match);
  CHECK(rid.closed);
  CHECK(rid.derived_contains);

  // a candidate annihilating the fibre direction is rejected
  CHECK(thrown_code([&] {
          is_integrable_extension(proj_wave(), upstairs, base1,
                                  {d_coord(pair_chart(), "x")}, plan());
        }) == Errc::FiberTangency);

  // the projection must be a submersion
  SmoothMap bad = str_map("px", pair_chart(), wave_base(),
                          {{"x", "x"},
                           {"y", "y"},
                           {"u1", "x"},
                           {"u1x", "V_x"},
                           {"u1y", "W_y"}});
  CHECK(thrown_code([&] {
          is_integrable_extension(bad, upstairs, base1, {beta2()}, plan());
        }) == Errc::NotSubmersion);
}

}  // TEST_SUITE
