#include <functional>

#include "doctest.h"
#include "edsym/linalg.hpp"

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

SymMatrix parse_matrix(const std::vector<std::vector<std::string>>& rows) {
  SymMatrix m;
  for (const auto& r : rows) {
    m.emplace_back();
    for (const auto& s : r) m.back().push_back(parse_expr(s));
  }
  return m;
}

SampleDomain domain_of(const std::vector<std::string>& coords) {
  SampleDomain dom;
  dom.coords = coords;
  return dom;
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("numeric rank uses a relative threshold") {
  Eigen::MatrixXd a(3, 3);
  a << 1, 0, 0, 0, 1, 0, 0, 0, 1;
  CHECK(numeric_rank(a, 1e-7) == 3);
  a.row(2) = a.row(0) + a.row(1);
  CHECK(numeric_rank(a, 1e-7) == 2);
  a.row(2) << 0, 0, 1e-12;
  CHECK(numeric_rank(a, 1e-7) == 2);
  CHECK(numeric_rank(Eigen::MatrixXd(0, 4), 1e-7) == 0);
}

TEST_CASE("least squares reports residual against the data scale") {
  Eigen::MatrixXd a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  Eigen::VectorXd b(3);
  b << 2, 3, 5;
  auto exact = solve_least_squares(a, b);
  CHECK(exact.x(0) == doctest::Approx(2));
  CHECK(exact.x(1) == doctest::Approx(3));
  CHECK(exact.residual <= 1e-12 * (1 + exact.scale));

  b << 2, 3, 100;
  auto off = solve_least_squares(a, b);
  CHECK(off.residual > 1.0);
  CHECK(off.scale >= 100);
}

TEST_CASE("rref of a rational matrix is exact") {
  auto m = parse_matrix({{"1", "2", "3"}, {"2", "4", "7"}});
  auto dom = domain_of({"x"});
  auto rr = sym_rref(m, dom, default_plan());
  CHECK(rr.rank == 2);
  CHECK(rr.pivot_cols == std::vector<int>{0, 2});
  CHECK(rr.reduced[0][0] == parse_expr("1"));
  CHECK(rr.reduced[0][1] == parse_expr("2"));
  CHECK(rr.reduced[0][2].is_zero());
  CHECK(rr.reduced[1][2] == parse_expr("1"));
}

TEST_CASE("rref pivots on functions and keeps them exact") {
  auto m = parse_matrix({{"x", "x^2"}, {"1", "x"}});
  auto dom = domain_of({"x"});
  auto rr = sym_rref(m, dom, default_plan());
  CHECK(rr.rank == 1);
  CHECK(rr.pivot_cols == std::vector<int>{0});
  CHECK(rr.reduced[0][0] == parse_expr("1"));
  CHECK(rr.reduced[0][1] == parse_expr("x"));
  CHECK(rr.reduced[1][0].is_zero());
  CHECK(rr.reduced[1][1].is_zero());
}

TEST_CASE("rotation coframe matrix inverts to its transpose") {
  auto m = parse_matrix({{"cos(t)", "sin(t)", "0"},
                         {"-sin(t)", "cos(t)", "0"},
                         {"0", "0", "1"}});
  auto dom = domain_of({"t"});
  auto inv = sym_inverse(m, dom, default_plan());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(inv[i][j] == m[j][i]);
}

TEST_CASE("oracle pivoting steps over an opaque zero") {
  // entry (0,0) is exp(log(x)) - x: structurally nonzero, numerically zero,
  // so the pivot search must reject it
  auto m = parse_matrix({{"exp(log(x)) - x", "1"}, {"1", "1"}});
  auto dom = domain_of({"x"});
  auto plan = default_plan();
  auto inv = sym_inverse(m, dom, plan);
  // certify the inverse numerically: m * inv - id vanishes at samples
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Expr entry = m[i][0] * inv[0][j] + m[i][1] * inv[1][j];
      if (i == j) entry = entry - num(1);
      CHECK(is_zero(entry, dom, plan));
    }
}

TEST_CASE("singular matrices throw the caller's code") {
  auto m = parse_matrix({{"1", "2"}, {"2", "4"}});
  auto dom = domain_of({"x"});
  CHECK(thrown_code([&] { sym_inverse(m, dom, default_plan()); }) ==
        Errc::RankInconsistent);
  CHECK(thrown_code([&] {
          sym_inverse(m, dom, default_plan(), Errc::CoframeDegenerate);
        }) == Errc::CoframeDegenerate);
}

TEST_CASE("nullspace basis carries function coefficients") {
  auto dom = domain_of({"x"});
  auto one_row = parse_matrix({{"1", "x"}});
  auto ker = sym_nullspace(one_row, dom, default_plan());
  REQUIRE(ker.size() == 1);
  CHECK(ker[0][0] == parse_expr("-x"));
  CHECK(ker[0][1] == parse_expr("1"));

  auto rank_one = parse_matrix({{"x", "x^2"}, {"1", "x"}});
  ker = sym_nullspace(rank_one, dom, default_plan());
  REQUIRE(ker.size() == 1);
  CHECK(ker[0][0] == parse_expr("-x"));
  CHECK(ker[0][1] == parse_expr("1"));

  auto full = parse_matrix({{"1", "0"}, {"0", "x"}});
  CHECK(sym_nullspace(full, dom, default_plan()).empty());
}

}  // TEST_SUITE
