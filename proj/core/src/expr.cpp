#include "edsym/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace edsym {
namespace detail {

using Rat = mpq_class;

namespace {

bool rat_is_int(const Rat& q) { return q.get_den() == 1; }

long rat_to_long(const Rat& q) {
  if (!rat_is_int(q) || !q.get_num().fits_slong_p())
    fail(Errc::DomainViolation, "exponent out of range: " + q.get_str());
  return q.get_num().get_si();
}

Rat rat_pow_int(const Rat& q, long n) {
  if (n == 0) return Rat(1);
  if (q == 0 && n < 0) fail(Errc::DomainViolation, "zero to negative power");
  unsigned long m = static_cast<unsigned long>(n < 0 ? -n : n);
  mpz_class nu, de;
  mpz_pow_ui(nu.get_mpz_t(), q.get_num().get_mpz_t(), m);
  mpz_pow_ui(de.get_mpz_t(), q.get_den().get_mpz_t(), m);
  Rat r = n < 0 ? Rat(de, nu) : Rat(nu, de);
  r.canonicalize();
  return r;
}

// floor(q/2) as a long, for the sin^2 elimination count
long half_floor(const Rat& q) {
  mpz_class two_den = 2 * q.get_den();
  mpz_class m;
  mpz_fdiv_q(m.get_mpz_t(), q.get_num().get_mpz_t(), two_den.get_mpz_t());
  return m.get_si();
}

}  // namespace

struct Atom;
using AtomPtr = std::shared_ptr<const Atom>;

struct Mono {
  // factors sorted by atom order, exponents > 0
  std::vector<std::pair<AtomPtr, Rat>> fs;
};

struct Poly {
  // terms sorted descending in monomial order, coefficients nonzero
  std::vector<std::pair<Mono, Rat>> ts;
};

struct Frac {
  Poly num, den;
  std::string key;  // canonical printed form
};

struct Atom {
  enum class Kind { Coord, Pi, Fun, PowBase, NumPow };
  Kind kind;
  std::string name;  // Coord
  FuncKind fk{};     // Fun
  FracPtr sub;       // Fun argument or PowBase base
  Rat numbase;       // NumPow
  int rank;
  std::string key;
};

namespace {

// ---------------------------------------------------------------- printing

const char* func_name(FuncKind k) {
  switch (k) {
    case FuncKind::Exp: return "exp";
    case FuncKind::Log: return "log";
    case FuncKind::Sin: return "sin";
    case FuncKind::Cos: return "cos";
    case FuncKind::ArcSin: return "arcsin";
    case FuncKind::ArcCos: return "arccos";
  }
  return "?";
}

std::string print_poly(const Poly& p);

std::string atom_str(const Atom& a) {
  switch (a.kind) {
    case Atom::Kind::Coord: return a.name;
    case Atom::Kind::Pi: return "pi";
    case Atom::Kind::Fun:
      return std::string(func_name(a.fk)) + "(" + a.sub->key + ")";
    case Atom::Kind::PowBase: return "(" + a.sub->key + ")";
    case Atom::Kind::NumPow: {
      std::string s = a.numbase.get_str();
      if (a.numbase < 0 || !rat_is_int(a.numbase)) s = "(" + s + ")";
      return s;
    }
  }
  return "?";
}

std::string exponent_str(const Rat& e) {
  if (rat_is_int(e)) return "^" + e.get_str();
  return "^(" + e.get_str() + ")";
}

std::string term_str(const Mono& m, const Rat& mag) {
  std::vector<std::string> parts;
  if (m.fs.empty() || mag != 1) parts.push_back(mag.get_str());
  for (const auto& [a, e] : m.fs) {
    std::string f = a->key;
    if (e != 1) f += exponent_str(e);
    parts.push_back(f);
  }
  std::string out = parts[0];
  for (size_t i = 1; i < parts.size(); ++i) out += "*" + parts[i];
  return out;
}

std::string print_poly(const Poly& p) {
  if (p.ts.empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [m, c] : p.ts) {
    Rat mag = c < 0 ? Rat(-c) : c;
    if (first) {
      out = (c < 0 ? "-" : "") + term_str(m, mag);
      first = false;
    } else {
      out += (c < 0 ? " - " : " + ") + term_str(m, mag);
    }
  }
  return out;
}

bool poly_is_one(const Poly& p) {
  return p.ts.size() == 1 && p.ts[0].first.fs.empty() && p.ts[0].second == 1;
}

std::string print_frac(const Poly& num, const Poly& den) {
  if (num.ts.empty()) return "0";
  std::string ns = print_poly(num);
  if (poly_is_one(den)) return ns;
  if (num.ts.size() > 1) ns = "(" + ns + ")";
  std::string ds = print_poly(den);
  bool bare = den.ts.size() == 1 && den.ts[0].first.fs.size() <= 1;
  if (!bare) ds = "(" + ds + ")";
  return ns + "/" + ds;
}

// ---------------------------------------------------------------- ordering

int cmp_atom(const Atom& a, const Atom& b) {
  if (a.rank != b.rank) return a.rank < b.rank ? -1 : 1;
  return a.key.compare(b.key);
}

// Descending lexicographic order on exponent vectors: the term whose
// earliest differing atom carries the larger exponent comes first, so the
// constant term is always last. Compatible with monomial multiplication.
int cmp_mono(const Mono& a, const Mono& b) {
  size_t n = std::min(a.fs.size(), b.fs.size());
  for (size_t i = 0; i < n; ++i) {
    int c = cmp_atom(*a.fs[i].first, *b.fs[i].first);
    if (c != 0) return c;
    int e = cmp(a.fs[i].second, b.fs[i].second);
    if (e != 0) return e > 0 ? -1 : 1;
  }
  if (a.fs.size() != b.fs.size()) return a.fs.size() > n ? -1 : 1;
  return 0;
}

struct MonoLess {
  bool operator()(const Mono& a, const Mono& b) const {
    return cmp_mono(a, b) < 0;
  }
};

int cmp_poly(const Poly& a, const Poly& b) {
  size_t n = std::min(a.ts.size(), b.ts.size());
  for (size_t i = 0; i < n; ++i) {
    int c = cmp_mono(a.ts[i].first, b.ts[i].first);
    if (c != 0) return c;
    c = cmp(a.ts[i].second, b.ts[i].second);
    if (c != 0) return c > 0 ? 1 : -1;
  }
  if (a.ts.size() != b.ts.size()) return a.ts.size() > n ? 1 : -1;
  return 0;
}

// ------------------------------------------------------------ atom builders

AtomPtr make_coord_atom(const std::string& name) {
  auto a = std::make_shared<Atom>();
  a->kind = Atom::Kind::Coord;
  a->name = name;
  a->rank = 0;
  a->key = name;
  return a;
}

AtomPtr make_pi_atom() {
  auto a = std::make_shared<Atom>();
  a->kind = Atom::Kind::Pi;
  a->rank = 1;
  a->key = "pi";
  return a;
}

AtomPtr make_fun_atom(FuncKind k, FracPtr arg) {
  auto a = std::make_shared<Atom>();
  a->kind = Atom::Kind::Fun;
  a->fk = k;
  a->sub = std::move(arg);
  a->rank = 2;
  a->key = atom_str(*a);
  return a;
}

AtomPtr make_powbase_atom(FracPtr base) {
  auto a = std::make_shared<Atom>();
  a->kind = Atom::Kind::PowBase;
  a->sub = std::move(base);
  a->rank = 3;
  a->key = atom_str(*a);
  return a;
}

AtomPtr make_numpow_atom(const Rat& base) {
  auto a = std::make_shared<Atom>();
  a->kind = Atom::Kind::NumPow;
  a->numbase = base;
  a->rank = 4;
  a->key = atom_str(*a);
  return a;
}

// ------------------------------------------------------------- poly algebra

Poly poly_zero() { return Poly{}; }

Poly poly_const(const Rat& c) {
  Poly p;
  if (c != 0) p.ts.push_back({Mono{}, c});
  return p;
}

Poly poly_one() { return poly_const(Rat(1)); }

// MonoLess already places the lexicographically greatest monomial first and
// the constant term last, so map iteration order is the canonical order.
Poly poly_from_map(std::map<Mono, Rat, MonoLess>&& m) {
  Poly p;
  p.ts.reserve(m.size());
  for (auto& [mono, c] : m)
    if (c != 0) p.ts.push_back({mono, c});
  return p;
}

Poly poly_add(const Poly& a, const Poly& b) {
  std::map<Mono, Rat, MonoLess> m;
  for (const auto& [mo, c] : a.ts) m[mo] += c;
  for (const auto& [mo, c] : b.ts) m[mo] += c;
  return poly_from_map(std::move(m));
}

Poly poly_neg(const Poly& a) {
  Poly p = a;
  for (auto& t : p.ts) t.second = -t.second;
  return p;
}

Poly poly_scale(const Poly& a, const Rat& c) {
  if (c == 0) return poly_zero();
  Poly p = a;
  for (auto& t : p.ts) t.second *= c;
  return p;
}

Mono mono_mul(const Mono& a, const Mono& b) {
  Mono r;
  size_t i = 0, j = 0;
  while (i < a.fs.size() && j < b.fs.size()) {
    int c = cmp_atom(*a.fs[i].first, *b.fs[j].first);
    if (c < 0) {
      r.fs.push_back(a.fs[i++]);
    } else if (c > 0) {
      r.fs.push_back(b.fs[j++]);
    } else {
      Rat e = a.fs[i].second + b.fs[j].second;
      if (e != 0) r.fs.push_back({a.fs[i].first, e});
      ++i;
      ++j;
    }
  }
  for (; i < a.fs.size(); ++i) r.fs.push_back(a.fs[i]);
  for (; j < b.fs.size(); ++j) r.fs.push_back(b.fs[j]);
  return r;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.ts.empty() || b.ts.empty()) return poly_zero();
  std::map<Mono, Rat, MonoLess> m;
  for (const auto& [ma, ca] : a.ts)
    for (const auto& [mb, cb] : b.ts) m[mono_mul(ma, mb)] += ca * cb;
  return poly_from_map(std::move(m));
}

Poly poly_pow_int(const Poly& a, long n) {
  Poly r = poly_one();
  for (long i = 0; i < n; ++i) r = poly_mul(r, a);
  return r;
}

bool poly_is_zero(const Poly& p) { return p.ts.empty(); }

// exact monomial quotient a / b, or nullopt when some exponent would go
// negative
std::optional<Mono> mono_div(const Mono& a, const Mono& b) {
  Mono r;
  size_t i = 0;
  for (const auto& [atom, e] : b.fs) {
    while (i < a.fs.size() && cmp_atom(*a.fs[i].first, *atom) < 0)
      r.fs.push_back(a.fs[i++]);
    if (i == a.fs.size() || cmp_atom(*a.fs[i].first, *atom) != 0)
      return std::nullopt;
    Rat d = a.fs[i].second - e;
    if (d < 0) return std::nullopt;
    if (d != 0) r.fs.push_back({a.fs[i].first, d});
    ++i;
  }
  for (; i < a.fs.size(); ++i) r.fs.push_back(a.fs[i]);
  return r;
}

// exact polynomial division; nullopt when b does not divide a
std::optional<Poly> poly_div_exact(const Poly& a, const Poly& b) {
  if (poly_is_zero(b)) return std::nullopt;
  std::map<Mono, Rat, MonoLess> quot;
  Poly rem = a;
  int guard = 0;
  while (!poly_is_zero(rem)) {
    if (++guard > 10000) return std::nullopt;
    auto q = mono_div(rem.ts[0].first, b.ts[0].first);
    if (!q) return std::nullopt;
    Rat qc = rem.ts[0].second / b.ts[0].second;
    quot[*q] += qc;
    Poly t;
    t.ts.push_back({*q, qc});
    rem = poly_add(rem, poly_neg(poly_mul(t, b)));
  }
  return poly_from_map(std::move(quot));
}

// ------------------------------------------------------- normalization pass

bool mono_needs_rewrite(const Mono& m) {
  for (const auto& [a, e] : m.fs) {
    if (a->kind == Atom::Kind::PowBase && rat_is_int(e)) return true;
    if (a->kind == Atom::Kind::NumPow && rat_is_int(e)) return true;
    if (a->kind == Atom::Kind::Fun && a->fk == FuncKind::Sin && e >= 2)
      return true;
  }
  return false;
}

bool poly_needs_rewrite(const Poly& p) {
  for (const auto& t : p.ts)
    if (mono_needs_rewrite(t.first)) return true;
  return false;
}

struct RawFrac {
  Poly num, den;
};

RawFrac raw_mul(const RawFrac& a, const RawFrac& b) {
  return {poly_mul(a.num, b.num), poly_mul(a.den, b.den)};
}

RawFrac raw_add(const RawFrac& a, const RawFrac& b) {
  return {poly_add(poly_mul(a.num, b.den), poly_mul(b.num, a.den)),
          poly_mul(a.den, b.den)};
}

RawFrac raw_pow_int(const RawFrac& a, long n) {
  if (n >= 0) return {poly_pow_int(a.num, n), poly_pow_int(a.den, n)};
  if (poly_is_zero(a.num))
    fail(Errc::DomainViolation, "zero base with negative integer exponent");
  return {poly_pow_int(a.den, -n), poly_pow_int(a.num, -n)};
}

// One rewriting sweep: folds PowBase and NumPow atoms whose accumulated
// exponent became an integer, and eliminates sin powers >= 2 in favor of
// 1 - cos^2. Both rewrites are valid real identities on the evaluation
// domain of the input. May create new foldable factors, so the caller loops.
RawFrac fold_poly(const Poly& p) {
  RawFrac acc{poly_zero(), poly_one()};
  for (const auto& [m, c] : p.ts) {
    Mono plain;
    Rat coeff = c;
    RawFrac t{poly_one(), poly_one()};
    for (const auto& [a, e] : m.fs) {
      if (a->kind == Atom::Kind::PowBase && rat_is_int(e)) {
        t = raw_mul(t, raw_pow_int({a->sub->num, a->sub->den}, rat_to_long(e)));
      } else if (a->kind == Atom::Kind::NumPow && rat_is_int(e)) {
        coeff *= rat_pow_int(a->numbase, rat_to_long(e));
      } else if (a->kind == Atom::Kind::Fun && a->fk == FuncKind::Sin &&
                 e >= 2) {
        long k = half_floor(e);
        Rat r = e - 2 * k;
        Poly base = poly_const(Rat(1));
        Mono cos2;
        cos2.fs.push_back({make_fun_atom(FuncKind::Cos, a->sub), Rat(2)});
        Poly c2;
        c2.ts.push_back({cos2, Rat(-1)});
        base = poly_add(base, c2);
        t = raw_mul(t, {poly_pow_int(base, k), poly_one()});
        if (r != 0) plain = mono_mul(plain, Mono{{{a, r}}});
      } else {
        plain = mono_mul(plain, Mono{{{a, e}}});
      }
    }
    Poly pm;
    if (coeff != 0) pm.ts.push_back({plain, coeff});
    t = raw_mul(t, {pm, poly_one()});
    acc = raw_add(acc, t);
  }
  return acc;
}

FracPtr make_canonical(Poly num, Poly den);

FracPtr norm_frac(Poly num, Poly den) {
  int guard = 0;
  while (poly_needs_rewrite(num) || poly_needs_rewrite(den)) {
    if (++guard > 64)
      fail(Errc::DomainViolation, "normalization did not terminate");
    RawFrac fn = fold_poly(num);
    RawFrac fd = fold_poly(den);
    num = poly_mul(fn.num, fd.den);
    den = poly_mul(fn.den, fd.num);
  }
  return make_canonical(std::move(num), std::move(den));
}

// Reduction: monomial gcd, exact-division attempt both ways, then leading
// coefficient of the denominator scaled to 1. Cheap and idempotent; equal
// values built along different routes may still differ structurally, and
// the subtraction test (a - b expands to the zero polynomial) is the
// decision procedure for rational identities.
FracPtr make_canonical(Poly num, Poly den) {
  if (poly_is_zero(den)) fail(Errc::DomainViolation, "zero denominator");
  if (poly_is_zero(num)) {
    auto f = std::make_shared<Frac>();
    f->num = poly_zero();
    f->den = poly_one();
    f->key = "0";
    return f;
  }

  // common monomial factor across every term of both polynomials
  Mono g = num.ts[0].first;
  auto meet = [](const Mono& a, const Mono& b) {
    Mono r;
    size_t i = 0, j = 0;
    while (i < a.fs.size() && j < b.fs.size()) {
      int c = cmp_atom(*a.fs[i].first, *b.fs[j].first);
      if (c < 0) {
        ++i;
      } else if (c > 0) {
        ++j;
      } else {
        r.fs.push_back({a.fs[i].first, a.fs[i].second < b.fs[j].second
                                           ? a.fs[i].second
                                           : b.fs[j].second});
        ++i;
        ++j;
      }
    }
    return r;
  };
  for (const auto& t : num.ts) g = meet(g, t.first);
  for (const auto& t : den.ts) g = meet(g, t.first);
  if (!g.fs.empty()) {
    auto strip = [&](Poly& p) {
      for (auto& t : p.ts) t.first = *mono_div(t.first, g);
    };
    strip(num);
    strip(den);
  }

  if (!poly_is_one(den)) {
    if (auto q = poly_div_exact(num, den)) {
      num = *q;
      den = poly_one();
    } else if (auto q2 = poly_div_exact(den, num)) {
      den = *q2;
      num = poly_one();
    }
  }

  Rat lead = den.ts[0].second;
  if (lead != 1) {
    Rat inv = 1 / lead;
    num = poly_scale(num, inv);
    den = poly_scale(den, inv);
  }

  auto f = std::make_shared<Frac>();
  f->num = std::move(num);
  f->den = std::move(den);
  f->key = print_frac(f->num, f->den);
  return f;
}

FracPtr frac_zero() {
  static FracPtr z = make_canonical(poly_zero(), poly_one());
  return z;
}

FracPtr frac_one() {
  static FracPtr o = make_canonical(poly_one(), poly_one());
  return o;
}

bool frac_is_zero(const FracPtr& f) { return poly_is_zero(f->num); }

bool frac_is_one(const FracPtr& f) {
  return poly_is_one(f->num) && poly_is_one(f->den);
}

FracPtr frac_of_atom(AtomPtr a, const Rat& e) {
  Poly p;
  p.ts.push_back({Mono{{{std::move(a), e}}}, Rat(1)});
  return norm_frac(std::move(p), poly_one());
}

// atom^e with the sign of e routed to numerator or denominator, keeping
// polynomial exponents positive
FracPtr frac_of_atom_signed(AtomPtr a, const Rat& e) {
  if (e > 0) return frac_of_atom(std::move(a), e);
  Poly p;
  p.ts.push_back({Mono{{{std::move(a), -e}}}, Rat(1)});
  return norm_frac(poly_one(), std::move(p));
}

}  // namespace
}  // namespace detail

// ------------------------------------------------------------- public API

using detail::Frac;
using detail::FracPtr;
using detail::Poly;
using detail::Rat;

Expr::Expr() : f_(detail::frac_zero()) {}

bool Expr::is_zero() const { return detail::frac_is_zero(f_); }

bool Expr::is_one() const { return detail::frac_is_one(f_); }

std::optional<mpq_class> Expr::as_rational() const {
  if (!detail::poly_is_one(f_->den)) return std::nullopt;
  if (f_->num.ts.empty()) return mpq_class(0);
  if (f_->num.ts.size() == 1 && f_->num.ts[0].first.fs.empty())
    return f_->num.ts[0].second;
  return std::nullopt;
}

Expr sym(const std::string& name) {
  static const std::set<std::string> reserved = {
      "pi",  "exp",  "log",  "sin",    "cos",
      "tan", "cot",  "sqrt", "arcsin", "arccos"};
  if (name.empty() || reserved.count(name))
    fail(Errc::UsageError, "reserved or empty coordinate name: '" + name + "'");
  return Expr(detail::frac_of_atom(detail::make_coord_atom(name), Rat(1)));
}

Expr num(long n) { return num(mpq_class(n)); }

Expr num(const mpq_class& q) {
  mpq_class c = q;
  c.canonicalize();
  return Expr(detail::norm_frac(detail::poly_const(c), detail::poly_one()));
}

Expr pi_const() {
  return Expr(detail::frac_of_atom(detail::make_pi_atom(), Rat(1)));
}

Expr operator+(const Expr& a, const Expr& b) {
  const Frac &x = *a.frac(), &y = *b.frac();
  return Expr(detail::norm_frac(
      detail::poly_add(detail::poly_mul(x.num, y.den),
                       detail::poly_mul(y.num, x.den)),
      detail::poly_mul(x.den, y.den)));
}

Expr operator-(const Expr& a) {
  const Frac& x = *a.frac();
  return Expr(detail::norm_frac(detail::poly_neg(x.num), x.den));
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
  const Frac &x = *a.frac(), &y = *b.frac();
  return Expr(detail::norm_frac(detail::poly_mul(x.num, y.num),
                                detail::poly_mul(x.den, y.den)));
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_zero()) fail(Errc::DomainViolation, "division by zero expression");
  const Frac &x = *a.frac(), &y = *b.frac();
  return Expr(detail::norm_frac(detail::poly_mul(x.num, y.den),
                                detail::poly_mul(x.den, y.num)));
}

Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }
Expr& operator/=(Expr& a, const Expr& b) { return a = a / b; }

Expr pow(const Expr& base, const mpq_class& exponent) {
  Rat q = exponent;
  q.canonicalize();
  if (q == 0) return num(1);
  if (detail::rat_is_int(q)) {
    const Frac& x = *base.frac();
    if (base.is_zero()) {
      if (q < 0) fail(Errc::DomainViolation, "zero to negative power");
      return Expr();
    }
    long n = detail::rat_to_long(q);
    auto r = detail::raw_pow_int({x.num, x.den}, n);
    return Expr(detail::norm_frac(std::move(r.num), std::move(r.den)));
  }
  if (base.is_zero()) {
    if (q < 0) fail(Errc::DomainViolation, "zero to negative power");
    return Expr();
  }
  if (auto c = base.as_rational()) {
    // rational constant base; odd root of a negative takes the real root
    if (*c > 0) {
      if (*c == 1) return num(1);
      return Expr(
          detail::frac_of_atom_signed(detail::make_numpow_atom(*c), q));
    }
    bool odd_root = mpz_odd_p(q.get_den().get_mpz_t());
    if (!odd_root)
      return Expr(
          detail::frac_of_atom_signed(detail::make_numpow_atom(*c), q));
    Rat mag = -*c;
    Expr m = mag == 1 ? num(1)
                      : Expr(detail::frac_of_atom_signed(
                            detail::make_numpow_atom(mag), q));
    return mpz_odd_p(q.get_num().get_mpz_t()) ? -m : m;
  }
  const Frac& x = *base.frac();
  // single factor with exponent 1 or a non-even-integer exponent folds by
  // multiplying exponents; an even inner exponent would change the sign
  // behaviour, so it stays wrapped
  if (detail::poly_is_one(x.den) && x.num.ts.size() == 1 &&
      x.num.ts[0].second == 1 && x.num.ts[0].first.fs.size() == 1) {
    const auto& [atom, e] = x.num.ts[0].first.fs[0];
    bool even_int = detail::rat_is_int(e) && mpz_even_p(e.get_num().get_mpz_t());
    if (!even_int) {
      Rat ne = e * q;
      if (ne > 0) return Expr(detail::frac_of_atom(atom, ne));
      return num(1) / Expr(detail::frac_of_atom(atom, -ne));
    }
  }
  if (q > 0)
    return Expr(detail::frac_of_atom(detail::make_powbase_atom(base.frac()), q));
  return num(1) / Expr(detail::frac_of_atom(
                     detail::make_powbase_atom(base.frac()), -q));
}

Expr fn(FuncKind k, const Expr& arg) {
  switch (k) {
    case FuncKind::Exp: {
      if (arg.is_zero()) return num(1);
      const Frac& x = *arg.frac();
      if (!detail::poly_is_one(x.den))
        return Expr(detail::frac_of_atom(
            detail::make_fun_atom(FuncKind::Exp, arg.frac()), Rat(1)));
      // split over terms: each kernel carries one coefficient-free monomial,
      // so exp(2x + y) and exp(x)^2 * exp(y) normalize identically
      Expr r = num(1);
      for (const auto& [m, c] : x.num.ts) {
        Poly mono_poly;
        mono_poly.ts.push_back({m, Rat(1)});
        FracPtr kernel_arg =
            detail::norm_frac(std::move(mono_poly), detail::poly_one());
        r = r * pow(Expr(detail::frac_of_atom(
                        detail::make_fun_atom(FuncKind::Exp, kernel_arg),
                        Rat(1))),
                    c);
      }
      return r;
    }
    case FuncKind::Log:
      if (arg.is_one()) return Expr();
      break;
    case FuncKind::Sin:
      if (arg.is_zero()) return Expr();
      break;
    case FuncKind::Cos:
      if (arg.is_zero()) return num(1);
      break;
    case FuncKind::ArcSin:
      if (arg.is_zero()) return Expr();
      break;
    case FuncKind::ArcCos:
      break;
  }
  return Expr(
      detail::frac_of_atom(detail::make_fun_atom(k, arg.frac()), Rat(1)));
}

Expr exp(const Expr& e) { return fn(FuncKind::Exp, e); }
Expr log(const Expr& e) { return fn(FuncKind::Log, e); }
Expr sin(const Expr& e) { return fn(FuncKind::Sin, e); }
Expr cos(const Expr& e) { return fn(FuncKind::Cos, e); }
Expr tan(const Expr& e) { return sin(e) / cos(e); }
Expr cot(const Expr& e) { return cos(e) / sin(e); }
Expr sqrt(const Expr& e) { return pow(e, mpq_class(1, 2)); }
Expr arcsin(const Expr& e) { return fn(FuncKind::ArcSin, e); }
Expr arccos(const Expr& e) { return fn(FuncKind::ArcCos, e); }

// ------------------------------------------------------------------- diff

namespace {

Expr atom_as_expr(const detail::AtomPtr& a) {
  switch (a->kind) {
    case detail::Atom::Kind::Coord: return sym(a->name);
    case detail::Atom::Kind::Pi: return pi_const();
    case detail::Atom::Kind::Fun:
    case detail::Atom::Kind::PowBase:
    case detail::Atom::Kind::NumPow:
      return Expr(detail::frac_of_atom(a, Rat(1)));
  }
  return Expr();
}

Expr frac_as_expr(const FracPtr& f) { return Expr(f); }

Expr diff_frac(const FracPtr& f, const std::string& x);

// derivative of a single atom viewed as a function of x
Expr diff_atom(const detail::AtomPtr& a, const std::string& x) {
  switch (a->kind) {
    case detail::Atom::Kind::Coord:
      return a->name == x ? num(1) : Expr();
    case detail::Atom::Kind::Pi:
    case detail::Atom::Kind::NumPow:
      return Expr();
    case detail::Atom::Kind::PowBase:
      return diff_frac(a->sub, x);
    case detail::Atom::Kind::Fun: {
      Expr du = diff_frac(a->sub, x);
      if (du.is_zero()) return Expr();
      Expr u = frac_as_expr(a->sub);
      switch (a->fk) {
        case FuncKind::Exp: return fn(FuncKind::Exp, u) * du;
        case FuncKind::Log: return du / u;
        case FuncKind::Sin: return cos(u) * du;
        case FuncKind::Cos: return -sin(u) * du;
        case FuncKind::ArcSin: return du / sqrt(num(1) - u * u);
        case FuncKind::ArcCos: return -(du / sqrt(num(1) - u * u));
      }
    }
  }
  return Expr();
}

Expr diff_poly(const Poly& p, const std::string& x) {
  Expr out;
  for (const auto& [m, c] : p.ts) {
    for (size_t k = 0; k < m.fs.size(); ++k) {
      Expr da = diff_atom(m.fs[k].first, x);
      if (da.is_zero()) continue;
      Expr t = num(c) * num(m.fs[k].second) * da *
               pow(atom_as_expr(m.fs[k].first), m.fs[k].second - 1);
      for (size_t j = 0; j < m.fs.size(); ++j) {
        if (j == k) continue;
        t = t * pow(atom_as_expr(m.fs[j].first), m.fs[j].second);
      }
      out = out + t;
    }
  }
  return out;
}

Expr diff_frac(const FracPtr& f, const std::string& x) {
  Expr dn = diff_poly(f->num, x);
  Expr dd = detail::poly_is_one(f->den) ? Expr() : diff_poly(f->den, x);
  if (dd.is_zero()) {
    if (detail::poly_is_one(f->den)) return dn;
    Expr den = Expr(detail::make_canonical(f->den, detail::poly_one()));
    return dn / den;
  }
  Expr n = Expr(detail::make_canonical(f->num, detail::poly_one()));
  Expr den = Expr(detail::make_canonical(f->den, detail::poly_one()));
  return (dn * den - n * dd) / (den * den);
}

}  // namespace

Expr diff(const Expr& e, const std::string& coord) {
  return diff_frac(e.frac(), coord);
}

// ------------------------------------------------------------- substitute

namespace {

Expr subst_frac(const FracPtr& f, const std::map<std::string, Expr>& repl);

Expr subst_atom_pow(const detail::AtomPtr& a, const Rat& e,
                    const std::map<std::string, Expr>& repl) {
  switch (a->kind) {
    case detail::Atom::Kind::Coord: {
      auto it = repl.find(a->name);
      Expr base = it == repl.end() ? sym(a->name) : it->second;
      return pow(base, e);
    }
    case detail::Atom::Kind::Pi:
      return pow(pi_const(), e);
    case detail::Atom::Kind::NumPow:
      return pow(num(a->numbase), e);
    case detail::Atom::Kind::Fun:
      return pow(fn(a->fk, subst_frac(a->sub, repl)), e);
    case detail::Atom::Kind::PowBase:
      return pow(subst_frac(a->sub, repl), e);
  }
  return Expr();
}

Expr subst_poly(const Poly& p, const std::map<std::string, Expr>& repl) {
  Expr out;
  for (const auto& [m, c] : p.ts) {
    Expr t = num(c);
    for (const auto& [a, e] : m.fs) t = t * subst_atom_pow(a, e, repl);
    out = out + t;
  }
  return out;
}

Expr subst_frac(const FracPtr& f, const std::map<std::string, Expr>& repl) {
  Expr n = subst_poly(f->num, repl);
  if (detail::poly_is_one(f->den)) return n;
  Expr d = subst_poly(f->den, repl);
  if (d.is_zero())
    fail(Errc::DomainViolation, "substitution produced a zero denominator");
  return n / d;
}

}  // namespace

Expr substitute(const Expr& e, const std::map<std::string, Expr>& repl) {
  return subst_frac(e.frac(), repl);
}

// ------------------------------------------------------------------- eval

namespace {

struct EvalCtx {
  const std::map<std::string, double>& pt;
  double scale = 0;

  void upd(double v) {
    if (!std::isfinite(v))
      fail(Errc::DomainViolation, "numeric overflow during evaluation");
    double a = std::fabs(v);
    if (a > scale) scale = a;
  }
};

double eval_frac_num(const FracPtr& f, EvalCtx& ctx);

double eval_atom(const detail::Atom& a, EvalCtx& ctx) {
  switch (a.kind) {
    case detail::Atom::Kind::Coord: {
      auto it = ctx.pt.find(a.name);
      if (it == ctx.pt.end()) fail(Errc::UnknownCoordinate, a.name);
      return it->second;
    }
    case detail::Atom::Kind::Pi:
      return M_PI;
    case detail::Atom::Kind::NumPow:
      return a.numbase.get_d();
    case detail::Atom::Kind::PowBase:
      return eval_frac_num(a.sub, ctx);
    case detail::Atom::Kind::Fun: {
      double u = eval_frac_num(a.sub, ctx);
      switch (a.fk) {
        case FuncKind::Exp: {
          double v = std::exp(u);
          if (!std::isfinite(v))
            fail(Errc::DomainViolation, "exp overflow");
          return v;
        }
        case FuncKind::Log:
          if (u <= 0) fail(Errc::DomainViolation, "log of nonpositive value");
          return std::log(u);
        case FuncKind::Sin: return std::sin(u);
        case FuncKind::Cos: return std::cos(u);
        case FuncKind::ArcSin:
          if (u < -1 || u > 1)
            fail(Errc::DomainViolation, "arcsin argument outside [-1, 1]");
          return std::asin(u);
        case FuncKind::ArcCos:
          if (u < -1 || u > 1)
            fail(Errc::DomainViolation, "arccos argument outside [-1, 1]");
          return std::acos(u);
      }
    }
  }
  return 0;
}

double eval_pow(double base, const Rat& e, EvalCtx& ctx) {
  double ed = e.get_d();
  double v;
  if (base > 0) {
    v = std::pow(base, ed);
  } else if (base == 0) {
    if (e < 0) fail(Errc::DomainViolation, "zero to negative power");
    v = 0;
  } else {
    bool odd_root = mpz_odd_p(e.get_den().get_mpz_t());
    if (!odd_root)
      fail(Errc::DomainViolation, "even root of negative value");
    double m = std::pow(-base, ed);
    v = mpz_odd_p(e.get_num().get_mpz_t()) ? -m : m;
  }
  ctx.upd(v);
  return v;
}

double eval_poly_num(const Poly& p, EvalCtx& ctx) {
  double sum = 0;
  for (const auto& [m, c] : p.ts) {
    double t = c.get_d();
    for (const auto& [a, e] : m.fs) {
      double av = eval_atom(*a, ctx);
      ctx.upd(av);
      t *= (e == 1) ? av : eval_pow(av, e, ctx);
    }
    ctx.upd(t);
    sum += t;
  }
  ctx.upd(sum);
  return sum;
}

double eval_frac_num(const FracPtr& f, EvalCtx& ctx) {
  double n = eval_poly_num(f->num, ctx);
  if (detail::poly_is_one(f->den)) return n;
  double d = eval_poly_num(f->den, ctx);
  if (d == 0) fail(Errc::DomainViolation, "denominator vanished at point");
  double v = n / d;
  ctx.upd(v);
  return v;
}

}  // namespace

EvalResult eval_numeric(const Expr& e, const std::map<std::string, double>& pt) {
  EvalCtx ctx{pt};
  double v = eval_frac_num(e.frac(), ctx);
  return {v, ctx.scale};
}

// ------------------------------------------------------------ free coords

namespace {

void collect_coords(const FracPtr& f, std::set<std::string>& out);

void collect_coords_poly(const Poly& p, std::set<std::string>& out) {
  for (const auto& [m, c] : p.ts)
    for (const auto& [a, e] : m.fs) {
      switch (a->kind) {
        case detail::Atom::Kind::Coord: out.insert(a->name); break;
        case detail::Atom::Kind::Fun:
        case detail::Atom::Kind::PowBase:
          collect_coords(a->sub, out);
          break;
        default: break;
      }
    }
}

void collect_coords(const FracPtr& f, std::set<std::string>& out) {
  collect_coords_poly(f->num, out);
  collect_coords_poly(f->den, out);
}

}  // namespace

std::set<std::string> free_coords(const Expr& e) {
  std::set<std::string> out;
  collect_coords(e.frac(), out);
  return out;
}

// --------------------------------------------------------------- printing

std::string to_string(const Expr& e) { return e.frac()->key; }

int compare(const Expr& a, const Expr& b) {
  return a.frac()->key.compare(b.frac()->key);
}

bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }
bool operator!=(const Expr& a, const Expr& b) { return compare(a, b) != 0; }

// ------------------------------------------------------------------ views

namespace {

AtomView view_of(const detail::AtomPtr& a) {
  AtomView v;
  v.fk = FuncKind::Exp;
  switch (a->kind) {
    case detail::Atom::Kind::Coord:
      v.kind = AtomView::Kind::Coord;
      v.coord = a->name;
      break;
    case detail::Atom::Kind::Pi:
      v.kind = AtomView::Kind::Pi;
      break;
    case detail::Atom::Kind::Fun:
      v.kind = AtomView::Kind::Func;
      v.fk = a->fk;
      v.sub = Expr(a->sub);
      break;
    case detail::Atom::Kind::PowBase:
      v.kind = AtomView::Kind::PowBase;
      v.sub = Expr(a->sub);
      break;
    case detail::Atom::Kind::NumPow:
      v.kind = AtomView::Kind::NumPow;
      v.num_base = a->numbase;
      break;
  }
  return v;
}

std::vector<TermView> terms_of(const Poly& p) {
  std::vector<TermView> out;
  out.reserve(p.ts.size());
  for (const auto& [m, c] : p.ts) {
    TermView t;
    t.coeff = c;
    for (const auto& [a, e] : m.fs) t.factors.push_back({view_of(a), e});
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

std::vector<TermView> numerator_terms(const Expr& e) {
  return terms_of(e.frac()->num);
}

std::vector<TermView> denominator_terms(const Expr& e) {
  return terms_of(e.frac()->den);
}

// ----------------------------------------------------------------- parser

namespace {

struct Token {
  enum class T { Num, Name, Op, End } t;
  std::string text;
  mpq_class value;
  size_t pos;
};

struct Lexer {
  const std::string& s;
  size_t i = 0;

  Token next() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size()) return {Token::T::End, "", 0, i};
    size_t start = i;
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string digits;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
        digits += s[i++];
      if (i < s.size() && s[i] == '.') {
        ++i;
        std::string frac_digits;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
          frac_digits += s[i++];
        if (frac_digits.empty())
          fail(Errc::SyntaxError,
               "expected digits after decimal point at offset " +
                   std::to_string(i));
        mpz_class scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac_digits.size());
        mpq_class v(mpz_class(digits + frac_digits, 10), scale);
        v.canonicalize();
        return {Token::T::Num, s.substr(start, i - start), v, start};
      }
      return {Token::T::Num, digits, mpq_class(mpz_class(digits, 10)), start};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string name;
      while (i < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
        name += s[i++];
      return {Token::T::Name, name, 0, start};
    }
    if (std::string("+-*/^()").find(c) != std::string::npos) {
      ++i;
      return {Token::T::Op, std::string(1, c), 0, start};
    }
    fail(Errc::SyntaxError, "unexpected character '" + std::string(1, c) +
                                "' at offset " + std::to_string(start));
  }
};

struct Parser {
  std::vector<Token> toks;
  size_t k = 0;

  explicit Parser(const std::string& text) {
    Lexer lx{text};
    for (;;) {
      Token t = lx.next();
      toks.push_back(t);
      if (t.t == Token::T::End) break;
    }
  }

  const Token& peek() const { return toks[k]; }
  Token take() { return toks[k++]; }

  bool accept_op(const char* op) {
    if (peek().t == Token::T::Op && peek().text == op) {
      ++k;
      return true;
    }
    return false;
  }

  void expect_op(const char* op) {
    if (!accept_op(op))
      fail(Errc::SyntaxError, std::string("expected '") + op + "' at offset " +
                                  std::to_string(peek().pos));
  }

  Expr parse_sum() {
    Expr e = parse_term();
    for (;;) {
      if (accept_op("+")) {
        e = e + parse_term();
      } else if (accept_op("-")) {
        e = e - parse_term();
      } else {
        return e;
      }
    }
  }

  Expr parse_term() {
    Expr e = parse_signed();
    for (;;) {
      if (accept_op("*")) {
        e = e * parse_signed();
      } else if (accept_op("/")) {
        e = e / parse_signed();
      } else {
        return e;
      }
    }
  }

  Expr parse_signed() {
    if (accept_op("-")) return -parse_signed();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept_op("^")) {
      Expr e = parse_signed();  // right associative
      auto q = e.as_rational();
      if (!q)
        fail(Errc::SyntaxError, "exponent must be a rational constant");
      return pow(base, *q);
    }
    return base;
  }

  Expr parse_primary() {
    Token t = take();
    if (t.t == Token::T::Num) return num(t.value);
    if (t.t == Token::T::Op && t.text == "(") {
      Expr e = parse_sum();
      expect_op(")");
      return e;
    }
    if (t.t == Token::T::Name) {
      static const std::map<std::string, Expr (*)(const Expr&)> funcs = {
          {"exp", &exp},       {"log", &log},     {"sin", &sin},
          {"cos", &cos},       {"tan", &tan},     {"cot", &cot},
          {"sqrt", &sqrt},     {"arcsin", &arcsin}, {"arccos", &arccos}};
      if (t.text == "pi") return pi_const();
      auto it = funcs.find(t.text);
      if (it != funcs.end()) {
        if (!accept_op("("))
          fail(Errc::SyntaxError, "function '" + t.text +
                                      "' needs a parenthesized argument");
        Expr arg = parse_sum();
        expect_op(")");
        return it->second(arg);
      }
      return sym(t.text);
    }
    fail(Errc::SyntaxError,
         "unexpected token at offset " + std::to_string(t.pos));
  }
};

}  // namespace

Expr parse_expr(const std::string& text) {
  Parser p(text);
  Expr e = p.parse_sum();
  if (p.peek().t != Token::T::End)
    fail(Errc::SyntaxError, "trailing input at offset " +
                                std::to_string(p.peek().pos) + " in '" + text +
                                "'");
  return e;
}

}  // namespace edsym
