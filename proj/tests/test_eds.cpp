#include <functional>

#include "doctest.h"
#include "edsym/eds.hpp"

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

// second-order jet-like chart with two contact forms
ChartPtr j2() {
  static ChartPtr c = make_chart("j2", {"x", "u", "u1", "u2"});
  return c;
}

DiffForm contact1() {
  return d_coord(j2(), "u") - sym("u1") * d_coord(j2(), "x");
}

DiffForm contact2() {
  return d_coord(j2(), "u1") - sym("u2") * d_coord(j2(), "x");
}

}  // namespace

TEST_SUITE("eds") {

TEST_CASE("generators are validated against the chart and their degree") {
  auto c = j2();
  CHECK(thrown_code([&] { EDS(c, {wedge(d_coord(c, "x"), d_coord(c, "u"))}); }) ==
        Errc::DimensionMismatch);
  CHECK(thrown_code([&] { EDS(c, {contact1()}, {contact2()}); }) ==
        Errc::DimensionMismatch);
  auto other = make_chart("other", {"x", "u", "u1", "u2"});
  CHECK(thrown_code([&] { EDS(other, {contact1()}); }) == Errc::ChartMismatch);
  EDS ok(c, {contact1(), contact2()});
  CHECK(ok.coefficient_exprs().size() == 4);
}

TEST_CASE("rank counts the pointwise span of the one-forms") {
  auto plan = default_plan();
  EDS sys(j2(), {contact1(), contact2()});
  auto rep = rank_at_samples(sys, plan);
  CHECK(rep.rank == 2);
  CHECK(rep.per_point.size() == plan.samples);

  EDS padded(j2(), {contact1(), contact2(),
                    contact1() + sym("x") * contact2()});
  CHECK(rank_at_samples(padded, plan).rank == 2);
}

TEST_CASE("membership finds exact combinations in degree one") {
  auto plan = default_plan();
  EDS sys(j2(), {contact1(), contact2()});

  auto in = membership(contact1() + sym("x") * contact2(), sys, plan);
  CHECK(in.member);
  REQUIRE(in.points.size() == plan.samples);
  for (std::size_t p = 0; p < in.points.size(); ++p) {
    REQUIRE(in.coefficients[p].size() == 2);
    CHECK(in.coefficients[p][0] == doctest::Approx(1.0));
    CHECK(in.coefficients[p][1] == doctest::Approx(in.points[p].at("x")));
  }

  auto out = membership(d_coord(j2(), "u"), sys, plan);
  CHECK(!out.member);
  CHECK(out.witness == 0);
  CHECK(out.residuals[0] > plan.tol);
}

TEST_CASE("membership in degree two uses wedge factors and two-form generators") {
  auto plan = default_plan();
  auto c = j2();
  EDS sys(c, {contact1(), contact2()});

  // d(contact1) = dx ^ du1 = dx ^ (contact2 + u2 dx), so it is algebraic
  CHECK(membership(exterior_derivative(contact1()), sys, plan).member);

  auto stray = wedge(d_coord(c, "x"), d_coord(c, "u2"));
  CHECK(!membership(stray, sys, plan).member);

  EDS with_two(c, {contact1(), contact2()}, {stray});
  CHECK(membership(stray, with_two, plan).member);
}

TEST_CASE("membership handles only degrees one and two") {
  auto plan = default_plan();
  auto c = j2();
  EDS sys(c, {contact1()});
  auto three =
      wedge(wedge(d_coord(c, "x"), d_coord(c, "u")), d_coord(c, "u1"));
  CHECK(thrown_code([&] { membership(three, sys, plan); }) ==
        Errc::DegreeUnsupported);
  CHECK(thrown_code([&] { membership(fn_form(c, sym("x")), sys, plan); }) ==
        Errc::DegreeUnsupported);
}

TEST_CASE("derived system of the contact system keeps the lower contact form") {
  auto plan = default_plan();
  EDS sys(j2(), {contact1(), contact2()});
  auto der = derived_system(sys, plan);
  REQUIRE(der.size() == 1);
  CHECK(der[0].comps().size() == 2);
  CHECK(der[0].coeff({0}) == parse_expr("-u1"));
  CHECK(der[0].coeff({1}) == num(1));

  // one more step kills the system: d(contact1) is not a multiple of it
  CHECK(derived_system(EDS(j2(), {contact1()}), plan).empty());
}

TEST_CASE("two-form generators absorb torsion in the derived system") {
  auto c = make_chart("j1", {"x", "u", "u1"});
  auto theta = d_coord(c, "u") - sym("u1") * d_coord(c, "x");
  auto beta = wedge(d_coord(c, "x"), d_coord(c, "u1"));
  auto plan = default_plan();
  CHECK(derived_system(EDS(c, {theta}), plan).empty());
  auto der = derived_system(EDS(c, {theta}, {beta}), plan);
  REQUIRE(der.size() == 1);
  CHECK(der[0].coeff({1}) == num(1));
}

TEST_CASE("derived system solves for function coefficients") {
  auto c = make_chart("fc", {"x", "y", "z", "w"});
  auto a1 = d_coord(c, "y") + sym("z") * d_coord(c, "w");
  auto a2 = d_coord(c, "x") + sym("x") * sym("z") * d_coord(c, "w");
  auto plan = default_plan();
  auto der = derived_system(EDS(c, {a1, a2}), plan);
  REQUIRE(der.size() == 1);
  CHECK(der[0].comps().size() == 2);
  CHECK(der[0].coeff({0}) == parse_expr("-1/x"));
  CHECK(der[0].coeff({1}) == num(1));
  CHECK(exterior_derivative(der[0]).is_structurally_zero());
}

TEST_CASE("structure equations of a rotating coframe are exact") {
  auto c = make_chart("rot", {"x", "y", "t"});
  auto w1 = cos(sym("t")) * d_coord(c, "x") + sin(sym("t")) * d_coord(c, "y");
  auto w2 = -sin(sym("t")) * d_coord(c, "x") + cos(sym("t")) * d_coord(c, "y");
  auto w3 = d_coord(c, "t");
  auto eq = structure_equations({w1, w2, w3}, default_plan());
  REQUIRE(eq.coeff.size() == 3);
  REQUIRE(eq.coeff[0].size() == 1);
  CHECK(eq.coeff[0].at({1, 2}) == parse_expr("-1"));
  REQUIRE(eq.coeff[1].size() == 1);
  CHECK(eq.coeff[1].at({0, 2}) == parse_expr("1"));
  CHECK(eq.coeff[2].empty());
}

TEST_CASE("degenerate coframes are rejected") {
  auto c = make_chart("dg", {"x", "y"});
  auto plan = default_plan();
  CHECK(thrown_code([&] {
          structure_equations({d_coord(c, "x"), d_coord(c, "x")}, plan);
        }) == Errc::CoframeDegenerate);
  CHECK(thrown_code([&] { structure_equations({d_coord(c, "x")}, plan); }) ==
        Errc::DimensionMismatch);
}

}  // TEST_SUITE
