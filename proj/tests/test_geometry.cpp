#include <functional>

#include "doctest.h"
#include "edsym/geometry.hpp"

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

ChartPtr plane() {
  static ChartPtr c = make_chart("plane", {"x", "y"});
  return c;
}

ChartPtr space() {
  static ChartPtr c = make_chart("space", {"x", "y", "z"});
  return c;
}

bool form_is_zero_at_samples(const DiffForm& w, const SamplePlan& plan) {
  SampleDomain dom = w.chart()->domain();
  for (const auto& [idx, c] : w.comps())
    if (!is_zero(c, dom, plan)) return false;
  return true;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("shuffle sign sorts and detects repeats") {
  std::vector<int> a = {2, 0, 1};
  CHECK(sort_index_sign(a) == 1);
  CHECK(a == std::vector<int>{0, 1, 2});
  std::vector<int> b = {1, 0};
  CHECK(sort_index_sign(b) == -1);
  std::vector<int> c = {0, 1, 1};
  CHECK(sort_index_sign(c) == 0);
  std::vector<int> e;
  CHECK(sort_index_sign(e) == 1);
}

TEST_CASE("index tuples enumerate lexicographically") {
  auto t = index_tuples(3, 2);
  REQUIRE(t.size() == 3);
  CHECK(t[0] == std::vector<int>{0, 1});
  CHECK(t[1] == std::vector<int>{0, 2});
  CHECK(t[2] == std::vector<int>{1, 2});
  CHECK(index_tuples(4, 0) == std::vector<std::vector<int>>{{}});
  CHECK(index_tuples(2, 3).empty());
}

TEST_CASE("wedge is graded anticommutative") {
  auto ch = plane();
  DiffForm dx = d_coord(ch, "x"), dy = d_coord(ch, "y");
  CHECK(wedge(dx, dx).is_structurally_zero());
  CHECK((wedge(dx, dy) + wedge(dy, dx)).is_structurally_zero());
  DiffForm w = wedge(sym("x") * dy, sym("y") * dx);
  CHECK(w.coeff({0, 1}) == -sym("x") * sym("y"));
  // unsorted tuples absorb the shuffle sign
  CHECK(w.coeff({1, 0}) == sym("x") * sym("y"));
}

TEST_CASE("d squares to zero structurally") {
  auto ch = space();
  Expr x = sym("x"), y = sym("y"), z = sym("z");
  DiffForm w(ch, 1);
  w.add_term({0}, exp(x * y) * z);
  w.add_term({1}, log(z) / (x + num(1)));
  w.add_term({2}, sin(x * z));
  CHECK(exterior_derivative(exterior_derivative(w)).is_structurally_zero());
  DiffForm f = fn_form(ch, sqrt(x + y) * z);
  CHECK(exterior_derivative(exterior_derivative(f)).is_structurally_zero());
}

TEST_CASE("interior product contracts with signs") {
  auto ch = plane();
  Expr a = sym("x") + num(1), b = sym("y");
  VectorField X(ch, {{"x", a}, {"y", b}});
  DiffForm w = wedge(d_coord(ch, "x"), d_coord(ch, "y"));
  DiffForm got = hook(X, w);
  // i_X (dx ^ dy) = X^x dy - X^y dx
  CHECK(got.coeff({1}) == a);
  CHECK(got.coeff({0}) == -b);
  CHECK(hook(X, fn_form(ch, a)).is_structurally_zero());
}

TEST_CASE("Cartan formula reproduces the hand computation") {
  auto ch = plane();
  VectorField X(ch, {{"x", sym("y")}});
  DiffForm w = sym("x") * d_coord(ch, "y");
  // L_{y dd/dx} (x dy) = y dy
  DiffForm got = lie_derivative(X, w);
  CHECK(got.coeff({1}) == sym("y"));
  CHECK(got.coeff({0}).is_zero());
  // on functions the Lie derivative is the directional derivative
  DiffForm f = fn_form(ch, sym("x") * sym("x"));
  CHECK(lie_derivative(X, f).coeff({}) == num(2) * sym("x") * sym("y"));
}

TEST_CASE("Lie bracket matches the commutator") {
  auto ch = plane();
  VectorField X(ch, {{"y", sym("x")}});
  VectorField Y(ch, {{"x", sym("y")}});
  VectorField b = lie_bracket(X, Y);
  CHECK(b.coeff("x") == sym("x"));
  CHECK(b.coeff("y") == -sym("y"));
  // Jacobi identity on three concrete fields
  VectorField Z(ch, {{"x", sym("x") * sym("y")}, {"y", num(1)}});
  VectorField j = lie_bracket(X, lie_bracket(Y, Z)) +
                  lie_bracket(Y, lie_bracket(Z, X)) +
                  lie_bracket(Z, lie_bracket(X, Y));
  CHECK(j.is_structurally_zero());
}

TEST_CASE("pullback through polar coordinates") {
  auto pol = make_chart("polar", {"r", "t"});
  auto ch = plane();
  SmoothMap phi = make_map("topolar", pol, ch,
                           {{"x", sym("r") * cos(sym("t"))},
                            {"y", sym("r") * sin(sym("t"))}});
  // phi*(x^2 + y^2) = r^2 exactly, thanks to the sine-power rewrite
  CHECK(pullback(phi, sym("x") * sym("x") + sym("y") * sym("y")) ==
        sym("r") * sym("r"));
  // phi*(dx ^ dy) = r dr ^ dt
  DiffForm area = wedge(d_coord(ch, "x"), d_coord(ch, "y"));
  DiffForm got = pullback(phi, area);
  CHECK(got.coeff({0, 1}) == sym("r"));
  // d commutes with pullback
  DiffForm w = sym("x") * sym("y") * d_coord(ch, "x");
  DiffForm diff_form =
      exterior_derivative(pullback(phi, w)) -
      pullback(phi, exterior_derivative(w));
  CHECK(form_is_zero_at_samples(diff_form, SamplePlan{}));
}

TEST_CASE("pushforward accepts projectable fields only") {
  auto src = space();
  auto dst = make_chart("base", {"u", "v"});
  SmoothMap phi =
      make_map("proj", src, dst, {{"u", sym("x")}, {"v", sym("y")}});
  SmoothMap sec = make_map("sec", dst, src,
                           {{"x", sym("u")}, {"y", sym("v")}, {"z", num(1)}});
  SamplePlan plan;
  VectorField X(src, {{"x", num(1)}, {"z", sym("x") * sym("y")}});
  VectorField Y = pushforward_projectable(phi, sec, X, plan);
  CHECK(Y.coeff("u").is_one());
  CHECK(Y.coeff("v").is_zero());
  VectorField bad(src, {{"x", sym("z")}});
  CHECK(thrown_code([&] {
          pushforward_projectable(phi, sec, bad, plan);
        }) == Errc::NotProjectable);
  SmoothMap notsec = make_map(
      "notsec", dst, src,
      {{"x", sym("u")}, {"y", sym("v") + num(1)}, {"z", num(0)}});
  CHECK(thrown_code([&] {
          pushforward_projectable(phi, notsec, X, plan);
        }) == Errc::SectionNotValid);
}

TEST_CASE("chart mismatches are refused") {
  auto a = plane();
  auto b = make_chart("other", {"x", "y"});
  CHECK(thrown_code([&] {
          (void)(d_coord(a, "x") + d_coord(b, "x"));
        }) == Errc::ChartMismatch);
  CHECK(thrown_code([&] {
          (void)wedge(d_coord(a, "x"), d_coord(b, "y"));
        }) == Errc::ChartMismatch);
  CHECK(thrown_code([&] { d_coord(a, "w"); }) == Errc::UnknownCoordinate);
  CHECK(thrown_code([&] {
          (void)VectorField(a, {{"x", sym("q")}});
        }) == Errc::UnknownCoordinate);
}

TEST_CASE("product charts concatenate disjoint factors") {
  auto a = make_chart("left", {"x", "y"}, {sym("x") - num(1)});
  auto b = make_chart("right", {"u", "v"});
  auto p = product_chart("both", {a, b});
  CHECK(p->coords == std::vector<std::string>{"x", "y", "u", "v"});
  CHECK(p->positive.size() == 1);
  CHECK(p->factors.size() == 2);
  CHECK(thrown_code([&] { product_chart("bad", {a, a}); }) ==
        Errc::DimensionMismatch);
}

TEST_CASE("forms and fields print canonically") {
  auto ch = plane();
  DiffForm w = sym("y") * d_coord(ch, "x") - d_coord(ch, "y");
  CHECK(to_string(w) == "y*d(x) - d(y)");
  DiffForm two = wedge(d_coord(ch, "x"), (sym("x") + num(1)) * d_coord(ch, "y"));
  CHECK(to_string(two) == "(x + 1)*d(x)/\\d(y)");
  VectorField X(ch, {{"x", num(1)}, {"y", -sym("x")}});
  CHECK(to_string(X) == "D(x) - x*D(y)");
  CHECK(to_string(DiffForm(ch, 2)) == "0");
}

}  // TEST_SUITE
