#pragma once

#include <gmpxx.h>

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "edsym/error.hpp"

namespace edsym {

namespace detail {
struct Frac;
using FracPtr = std::shared_ptr<const detail::Frac>;
}  // namespace detail

enum class FuncKind { Exp, Log, Sin, Cos, ArcSin, ArcCos };

// Immutable scalar expression in canonical form: a reduced fraction of
// expanded multivariate polynomials over atoms (coordinates, pi, function
// kernels, fractional powers) with exact rational coefficients and positive
// rational exponents. Construction normalizes eagerly, so two Exprs built
// from different arrangements of the same polynomial identity compare equal
// structurally. Identities that are not polynomial consequences of the atom
// algebra (log laws, angle sums) are NOT decided here; is_zero in sample.hpp
// is the oracle for those.
class Expr {
 public:
  Expr();  // zero

  bool is_zero() const;  // structural zero of the canonical form
  bool is_one() const;
  // den == 1 and the numerator is constant
  std::optional<mpq_class> as_rational() const;

  const detail::FracPtr& frac() const { return f_; }
  explicit Expr(detail::FracPtr f) : f_(std::move(f)) {}

 private:
  detail::FracPtr f_;
};

Expr sym(const std::string& name);
Expr num(long n);
Expr num(const mpq_class& q);
Expr pi_const();

Expr operator+(const Expr&, const Expr&);
Expr operator-(const Expr&, const Expr&);
Expr operator*(const Expr&, const Expr&);
// Throws DomainViolation if the divisor's canonical form is zero.
Expr operator/(const Expr&, const Expr&);
Expr operator-(const Expr&);
Expr& operator+=(Expr&, const Expr&);
Expr& operator-=(Expr&, const Expr&);
Expr& operator*=(Expr&, const Expr&);
Expr& operator/=(Expr&, const Expr&);

// Real-power semantics: fractional exponents with even reduced denominator
// require a nonnegative base at evaluation time; odd denominators take the
// real root. Only rewrites valid under those semantics are applied.
Expr pow(const Expr& base, const mpq_class& exponent);
Expr fn(FuncKind k, const Expr& arg);
Expr exp(const Expr&);
Expr log(const Expr&);
Expr sin(const Expr&);
Expr cos(const Expr&);
Expr tan(const Expr&);   // rewritten to sin/cos
Expr cot(const Expr&);   // rewritten to cos/sin
Expr sqrt(const Expr&);  // rewritten to pow 1/2
Expr arcsin(const Expr&);
Expr arccos(const Expr&);

// Partial derivative treating every other coordinate as constant.
Expr diff(const Expr&, const std::string& coord);

// Simultaneous substitution; coordinates absent from the map are kept.
// Throws DomainViolation if a denominator collapses to zero.
Expr substitute(const Expr&, const std::map<std::string, Expr>& repl);

struct EvalResult {
  double value;
  double scale;  // max |subterm| seen during evaluation, >= |value|
};
// Throws DomainViolation outside the real domain (log of a nonpositive
// value, even root of a negative value, vanishing denominator, overflow)
// and UnknownCoordinate when the point omits a coordinate the expression
// uses.
EvalResult eval_numeric(const Expr&, const std::map<std::string, double>& pt);

std::set<std::string> free_coords(const Expr&);

// Canonical printing; parse_expr(to_string(e)) rebuilds e exactly.
std::string to_string(const Expr&);
Expr parse_expr(const std::string& text);

// Total order on canonical forms; 0 iff structurally equal.
int compare(const Expr&, const Expr&);
bool operator==(const Expr&, const Expr&);
bool operator!=(const Expr&, const Expr&);
struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const {
    return compare(a, b) < 0;
  }
};

// Read-only view of the canonical fraction, for modules that extract exact
// coefficients (the Lie-algebra layer). A term is coeff * prod factor^exp.
struct AtomView {
  enum class Kind { Coord, Pi, Func, PowBase, NumPow } kind;
  std::string coord;   // Kind::Coord
  FuncKind fk;         // Kind::Func
  Expr sub;            // Func argument or PowBase base
  mpq_class num_base;  // Kind::NumPow
};
struct TermView {
  mpq_class coeff;
  std::vector<std::pair<AtomView, mpq_class>> factors;
};
std::vector<TermView> numerator_terms(const Expr&);
std::vector<TermView> denominator_terms(const Expr&);

}  // namespace edsym
