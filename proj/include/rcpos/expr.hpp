#pragma once

// Expression trees for metric weights in holomorphic/antiholomorphic
// coordinates. Barred variables (tb1, zb2, ...) are independent symbols, so
// partial derivatives are the Wirtinger derivatives and differentiation is
// exact. Conjugate-consistency of a weight is a validated property, not a
// structural one.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rcpos {

using Cx = std::complex<double>;

struct ParseError : std::runtime_error {
  std::size_t offset;
  ParseError(std::string msg, std::size_t off)
      : std::runtime_error(std::move(msg)), offset(off) {}
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class VarKind : std::uint8_t { Base, BaseBar, Fiber, FiberBar, Param };

/// A coordinate (t/tb/z/zb with 1-based index) or a named real parameter.
struct Var {
  VarKind kind = VarKind::Base;
  int index = 0;     // 1-based; unused for parameters
  std::string name;  // parameter name; empty for coordinates

  static Var base(int i) { return {VarKind::Base, i, {}}; }
  static Var baseBar(int i) { return {VarKind::BaseBar, i, {}}; }
  static Var fiber(int i) { return {VarKind::Fiber, i, {}}; }
  static Var fiberBar(int i) { return {VarKind::FiberBar, i, {}}; }
  static Var param(std::string n) { return {VarKind::Param, 0, std::move(n)}; }

  Var barred() const {
    switch (kind) {
      case VarKind::Base: return baseBar(index);
      case VarKind::BaseBar: return base(index);
      case VarKind::Fiber: return fiberBar(index);
      case VarKind::FiberBar: return fiber(index);
      case VarKind::Param: return *this;
    }
    return *this;
  }

  friend bool operator==(const Var& a, const Var& b) {
    return a.kind == b.kind && a.index == b.index && a.name == b.name;
  }

  std::string text() const {
    switch (kind) {
      case VarKind::Base: return "t" + std::to_string(index);
      case VarKind::BaseBar: return "tb" + std::to_string(index);
      case VarKind::Fiber: return "z" + std::to_string(index);
      case VarKind::FiberBar: return "zb" + std::to_string(index);
      case VarKind::Param: return name;
    }
    return {};
  }
};

/// Declared coordinate dimensions (m base, n fiber) and parameter names.
struct Dims {
  int m = 0;
  int n = 0;
  std::vector<std::string> params;
};

/// Coordinate assignment for evaluation. Barred slots are independent;
/// use conjugatePoint() to build conjugate-consistent points.
struct Point {
  std::vector<Cx> t, tb, z, zb;
  std::map<std::string, double> params;
};

inline Point conjugatePoint(std::vector<Cx> t, std::vector<Cx> z = {},
                            std::map<std::string, double> params = {}) {
  Point p;
  p.tb.reserve(t.size());
  for (const Cx& v : t) p.tb.push_back(std::conj(v));
  p.zb.reserve(z.size());
  for (const Cx& v : z) p.zb.push_back(std::conj(v));
  p.t = std::move(t);
  p.z = std::move(z);
  p.params = std::move(params);
  return p;
}

class Expr;

namespace detail {

enum class Kind : std::uint8_t { Const, Variable, Pow, ExpFn, LogFn, Quot, Prod, Sum };

struct Node {
  Kind kind;
  Cx value{};              // Const
  Var var{};               // Variable
  long long expo = 0;      // Pow
  std::vector<Expr> kids;  // Sum/Prod n-ary; Quot binary; Pow/Exp/Log unary
};

}  // namespace detail

/// Immutable expression handle. Construction goes through the factory
/// functions below, which apply the normal form: flattened n-ary
/// sums/products, folded constants, canonically ordered operands.
class Expr {
 public:
  Expr() : Expr(Cx(0.0)) {}
  /*implicit*/ Expr(double v) : Expr(Cx(v)) {}
  /*implicit*/ Expr(Cx v) {
    auto n = std::make_shared<detail::Node>();
    n->kind = detail::Kind::Const;
    n->value = normalZero(v);
    node_ = std::move(n);
  }
  /*implicit*/ Expr(Var v) {
    auto n = std::make_shared<detail::Node>();
    n->kind = detail::Kind::Variable;
    n->var = std::move(v);
    node_ = std::move(n);
  }

  const detail::Node& node() const { return *node_; }
  detail::Kind kind() const { return node_->kind; }
  bool isConst() const { return node_->kind == detail::Kind::Const; }
  bool isConst(Cx v) const { return isConst() && node_->value == v; }
  Cx constValue() const { return node_->value; }

  static Expr make(detail::Node n) {
    Expr e(Cx(0.0));
    e.node_ = std::make_shared<detail::Node>(std::move(n));
    return e;
  }

 private:
  static Cx normalZero(Cx v) {
    // canonical -0.0 -> 0.0 so prints are stable
    double re = v.real() == 0.0 ? 0.0 : v.real();
    double im = v.imag() == 0.0 ? 0.0 : v.imag();
    return {re, im};
  }
  std::shared_ptr<const detail::Node> node_;
};

// --- total structural order -------------------------------------------------

inline int cmp(const Expr& a, const Expr& b);

namespace detail {

inline int cmp3(double a, double b) { return a < b ? -1 : (a > b ? 1 : 0); }

inline int cmpVar(const Var& a, const Var& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  if (a.index != b.index) return a.index < b.index ? -1 : 1;
  return a.name.compare(b.name) < 0 ? -1 : (a.name == b.name ? 0 : 1);
}

inline int cmpKids(const std::vector<Expr>& a, const std::vector<Expr>& b) {
  std::size_t k = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < k; ++i)
    if (int c = cmp(a[i], b[i])) return c;
  return a.size() < b.size() ? -1 : (a.size() == b.size() ? 0 : 1);
}

}  // namespace detail

inline int cmp(const Expr& a, const Expr& b) {
  const auto& na = a.node();
  const auto& nb = b.node();
  if (na.kind != nb.kind) return na.kind < nb.kind ? -1 : 1;
  switch (na.kind) {
    case detail::Kind::Const:
      if (int c = detail::cmp3(na.value.real(), nb.value.real())) return c;
      return detail::cmp3(na.value.imag(), nb.value.imag());
    case detail::Kind::Variable:
      return detail::cmpVar(na.var, nb.var);
    case detail::Kind::Pow:
      if (na.expo != nb.expo) return na.expo < nb.expo ? -1 : 1;
      return detail::cmpKids(na.kids, nb.kids);
    default:
      return detail::cmpKids(na.kids, nb.kids);
  }
}

// --- factories (normalizing) -------------------------------------------------

Expr sum(std::vector<Expr> terms);
Expr prod(std::vector<Expr> factors);
Expr quot(Expr num, Expr den);
Expr powi(Expr base, long long k);
Expr expFn(Expr a);
Expr logFn(Expr a);

inline Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
inline Expr operator-(const Expr& a, const Expr& b) { return sum({a, prod({Expr(-1.0), b})}); }
inline Expr operator*(const Expr& a, const Expr& b) { return prod({a, b}); }
inline Expr operator/(const Expr& a, const Expr& b) { return quot(a, b); }
inline Expr operator-(const Expr& a) { return prod({Expr(-1.0), a}); }

inline Expr sum(std::vector<Expr> terms) {
  std::vector<Expr> flat;
  Cx c(0.0);
  for (auto& t : terms) {
    if (t.kind() == detail::Kind::Sum) {
      for (const auto& k : t.node().kids) {
        if (k.isConst()) c += k.constValue();
        else flat.push_back(k);
      }
    } else if (t.isConst()) {
      c += t.constValue();
    } else {
      flat.push_back(std::move(t));
    }
  }
  std::sort(flat.begin(), flat.end(), [](const Expr& a, const Expr& b) { return cmp(a, b) < 0; });
  if (c != Cx(0.0) || flat.empty()) flat.insert(flat.begin(), Expr(c));
  if (flat.size() == 1) return flat[0];
  detail::Node n;
  n.kind = detail::Kind::Sum;
  n.kids = std::move(flat);
  return Expr::make(std::move(n));
}

inline Expr prod(std::vector<Expr> factors) {
  std::vector<Expr> flat;
  Cx c(1.0);
  for (auto& f : factors) {
    if (f.kind() == detail::Kind::Prod) {
      for (const auto& k : f.node().kids) {
        if (k.isConst()) c *= k.constValue();
        else flat.push_back(k);
      }
    } else if (f.isConst()) {
      c *= f.constValue();
    } else {
      flat.push_back(std::move(f));
    }
  }
  if (c == Cx(0.0)) return Expr(Cx(0.0));
  std::sort(flat.begin(), flat.end(), [](const Expr& a, const Expr& b) { return cmp(a, b) < 0; });
  if (flat.empty()) return Expr(c);
  if (c != Cx(1.0)) flat.insert(flat.begin(), Expr(c));
  if (flat.size() == 1) return flat[0];
  detail::Node n;
  n.kind = detail::Kind::Prod;
  n.kids = std::move(flat);
  return Expr::make(std::move(n));
}

inline Expr quot(Expr num, Expr den) {
  if (den.isConst(Cx(1.0))) return num;
  if (num.isConst(Cx(0.0)) && !den.isConst(Cx(0.0))) return Expr(Cx(0.0));
  if (num.isConst() && den.isConst() && den.constValue() != Cx(0.0))
    return Expr(num.constValue() / den.constValue());
  detail::Node n;
  n.kind = detail::Kind::Quot;
  n.kids = {std::move(num), std::move(den)};
  return Expr::make(std::move(n));
}

namespace detail {
inline Cx powInt(Cx b, long long k) {
  if (k < 0) {
    if (b == Cx(0.0)) throw EvalError("zero raised to a negative power");
    return Cx(1.0) / powInt(b, -k);
  }
  Cx r(1.0);
  while (k > 0) {
    if (k & 1) r *= b;
    b *= b;
    k >>= 1;
  }
  return r;
}
}  // namespace detail

inline Expr powi(Expr base, long long k) {
  if (k == 0) return Expr(1.0);
  if (k == 1) return base;
  if (base.isConst()) return Expr(detail::powInt(base.constValue(), k));
  if (base.kind() == detail::Kind::Pow) {
    const auto& n = base.node();
    return powi(n.kids[0], n.expo * k);
  }
  if (base.kind() == detail::Kind::Prod) {
    std::vector<Expr> fs;
    for (const auto& f : base.node().kids) fs.push_back(powi(f, k));
    return prod(std::move(fs));
  }
  if (base.kind() == detail::Kind::Quot) {
    const auto& n = base.node();
    if (k > 0) return quot(powi(n.kids[0], k), powi(n.kids[1], k));
    return quot(powi(n.kids[1], -k), powi(n.kids[0], -k));
  }
  detail::Node n;
  n.kind = detail::Kind::Pow;
  n.expo = k;
  n.kids = {std::move(base)};
  return Expr::make(std::move(n));
}

inline Expr expFn(Expr a) {
  if (a.isConst()) return Expr(std::exp(a.constValue()));
  detail::Node n;
  n.kind = detail::Kind::ExpFn;
  n.kids = {std::move(a)};
  return Expr::make(std::move(n));
}

inline Expr logFn(Expr a) {
  if (a.isConst() && a.constValue() != Cx(0.0)) return Expr(std::log(a.constValue()));
  detail::Node n;
  n.kind = detail::Kind::LogFn;
  n.kids = {std::move(a)};
  return Expr::make(std::move(n));
}

// --- evaluation ---------------------------------------------------------------

inline Cx eval(const Expr& e, const Point& p) {
  const auto& n = e.node();
  switch (n.kind) {
    case detail::Kind::Const:
      return n.value;
    case detail::Kind::Variable: {
      const Var& v = n.var;
      auto pick = [&](const std::vector<Cx>& xs, const char* fam) -> Cx {
        if (v.index < 1 || static_cast<std::size_t>(v.index) > xs.size())
          throw EvalError(std::string("unassigned coordinate ") + fam + std::to_string(v.index));
        return xs[static_cast<std::size_t>(v.index) - 1];
      };
      switch (v.kind) {
        case VarKind::Base: return pick(p.t, "t");
        case VarKind::BaseBar: return pick(p.tb, "tb");
        case VarKind::Fiber: return pick(p.z, "z");
        case VarKind::FiberBar: return pick(p.zb, "zb");
        case VarKind::Param: {
          auto it = p.params.find(v.name);
          if (it == p.params.end()) throw EvalError("unassigned parameter " + v.name);
          return Cx(it->second);
        }
      }
      throw EvalError("bad variable");
    }
    case detail::Kind::Pow:
      return detail::powInt(eval(n.kids[0], p), n.expo);
    case detail::Kind::ExpFn:
      return std::exp(eval(n.kids[0], p));
    case detail::Kind::LogFn: {
      Cx a = eval(n.kids[0], p);
      if (a == Cx(0.0)) throw EvalError("log of zero");
      return std::log(a);
    }
    case detail::Kind::Quot: {
      Cx d = eval(n.kids[1], p);
      if (d == Cx(0.0)) throw EvalError("division by zero");
      return eval(n.kids[0], p) / d;
    }
    case detail::Kind::Prod: {
      Cx r(1.0);
      for (const auto& k : n.kids) r *= eval(k, p);
      return r;
    }
    case detail::Kind::Sum: {
      Cx r(0.0);
      for (const auto& k : n.kids) r += eval(k, p);
      return r;
    }
  }
  throw EvalError("bad node");
}

// --- Wirtinger derivative -------------------------------------------------------

/// Exact partial derivative treating barred and unbarred symbols as
/// independent variables.
inline Expr derivative(const Expr& e, const Var& x) {
  if (x.kind == VarKind::Param)
    throw std::invalid_argument("derivative target must be a coordinate");
  const auto& n = e.node();
  switch (n.kind) {
    case detail::Kind::Const:
      return Expr(0.0);
    case detail::Kind::Variable:
      return Expr(n.var == x ? 1.0 : 0.0);
    case detail::Kind::Pow:
      return prod({Expr(static_cast<double>(n.expo)), powi(n.kids[0], n.expo - 1),
                   derivative(n.kids[0], x)});
    case detail::Kind::ExpFn:
      return prod({expFn(n.kids[0]), derivative(n.kids[0], x)});
    case detail::Kind::LogFn:
      return quot(derivative(n.kids[0], x), n.kids[0]);
    case detail::Kind::Quot: {
      const Expr& a = n.kids[0];
      const Expr& b = n.kids[1];
      return quot(sum({prod({derivative(a, x), b}), prod({Expr(-1.0), a, derivative(b, x)})}),
                  powi(b, 2));
    }
    case detail::Kind::Prod: {
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        std::vector<Expr> fs = n.kids;
        fs[i] = derivative(n.kids[i], x);
        terms.push_back(prod(std::move(fs)));
      }
      return sum(std::move(terms));
    }
    case detail::Kind::Sum: {
      std::vector<Expr> terms;
      for (const auto& k : n.kids) terms.push_back(derivative(k, x));
      return sum(std::move(terms));
    }
  }
  throw std::logic_error("bad node");
}

/// Structural conjugate: swap every variable with its barred partner and
/// conjugate all constants. For conjugate-consistent points this evaluates
/// to the conjugate of the original.
inline Expr bar(const Expr& e) {
  const auto& n = e.node();
  switch (n.kind) {
    case detail::Kind::Const:
      return Expr(std::conj(n.value));
    case detail::Kind::Variable:
      return Expr(n.var.barred());
    case detail::Kind::Pow:
      return powi(bar(n.kids[0]), n.expo);
    case detail::Kind::ExpFn:
      return expFn(bar(n.kids[0]));
    case detail::Kind::LogFn:
      return logFn(bar(n.kids[0]));
    case detail::Kind::Quot:
      return quot(bar(n.kids[0]), bar(n.kids[1]));
    case detail::Kind::Prod: {
      std::vector<Expr> fs;
      for (const auto& k : n.kids) fs.push_back(bar(k));
      return prod(std::move(fs));
    }
    case detail::Kind::Sum: {
      std::vector<Expr> ts;
      for (const auto& k : n.kids) ts.push_back(bar(k));
      return sum(std::move(ts));
    }
  }
  throw std::logic_error("bad node");
}

// --- printing --------------------------------------------------------------------

namespace detail {

inline std::string fmtDouble(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// number | number 'i' | "(a+bi)"
inline std::string fmtConst(Cx v, bool atomPos) {
  std::string s;
  if (v.imag() == 0.0) {
    s = fmtDouble(v.real());
    if (atomPos && v.real() < 0.0) return "(" + s + ")";
    return s;
  }
  if (v.real() == 0.0) {
    s = fmtDouble(v.imag()) + "i";
    if (atomPos && v.imag() < 0.0) return "(" + s + ")";
    return s;
  }
  std::string im = fmtDouble(std::abs(v.imag())) + "i";
  s = "(" + fmtDouble(v.real()) + (v.imag() < 0.0 ? " - " : " + ") + im + ")";
  return s;
}

// precedence: Sum=1, Prod/Quot=2, atoms (incl. Pow of atom, func calls)=3
inline int prec(const Expr& e) {
  switch (e.kind()) {
    case Kind::Sum: return 1;
    case Kind::Prod:
    case Kind::Quot: return 2;
    default: return 3;
  }
}

inline std::string print(const Expr& e, int parentPrec);

inline std::string printFactor(const Expr& e) {
  const auto& n = e.node();
  if (n.kind == Kind::Const) return fmtConst(n.value, true);
  return print(e, 2);
}

inline std::string print(const Expr& e, int parentPrec) {
  const auto& n = e.node();
  std::string s;
  switch (n.kind) {
    case Kind::Const:
      s = fmtConst(n.value, parentPrec >= 2);
      break;
    case Kind::Variable:
      s = n.var.text();
      break;
    case Kind::Pow:
      s = print(n.kids[0], 3) + "^" + std::to_string(n.expo);
      break;
    case Kind::ExpFn:
      s = "exp(" + print(n.kids[0], 0) + ")";
      break;
    case Kind::LogFn:
      s = "log(" + print(n.kids[0], 0) + ")";
      break;
    case Kind::Quot: {
      // denominator gets parens whenever it is itself a '*'/'/' chain
      std::string den = print(n.kids[1], 3);
      s = print(n.kids[0], 2) + " / " + den;
      break;
    }
    case Kind::Prod: {
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (i) s += "*";
        s += printFactor(n.kids[i]);
      }
      break;
    }
    case Kind::Sum: {
      bool first = true;
      for (const auto& term : n.kids) {
        // pull a negative real leading coefficient out as a '-' sign
        Cx coeff(1.0);
        const Expr* rest = &term;
        Expr restProd;
        if (term.isConst()) {
          coeff = term.constValue();
          rest = nullptr;
        } else if (term.kind() == Kind::Prod && term.node().kids[0].isConst()) {
          coeff = term.node().kids[0].constValue();
          std::vector<Expr> fs(term.node().kids.begin() + 1, term.node().kids.end());
          restProd = prod(std::move(fs));
          rest = &restProd;
        }
        bool neg = coeff.imag() == 0.0 && coeff.real() < 0.0;
        Cx mag = neg ? -coeff : coeff;
        std::string piece;
        if (!rest) {
          piece = fmtConst(mag, false);
        } else if (mag == Cx(1.0)) {
          piece = print(*rest, 1);
        } else {
          piece = fmtConst(mag, true) + "*" + print(*rest, 2);
        }
        if (first) {
          s = (neg ? "-" : "") + piece;
          first = false;
        } else {
          s += (neg ? " - " : " + ") + piece;
        }
      }
      break;
    }
  }
  if (prec(e) < parentPrec && n.kind != Kind::Const) s = "(" + s + ")";
  return s;
}

}  // namespace detail

inline std::string print(const Expr& e) { return detail::print(e, 0); }

// --- parser ----------------------------------------------------------------------

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, const Dims& dims) : text_(text), dims_(dims) {}

  Expr parse() {
    Expr e = parseExpr();
    skipWs();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  std::string_view text_;
  const Dims& dims_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skipWs() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                   text_[pos_] == '\n' || text_[pos_] == '\r'))
      ++pos_;
  }

  bool eat(char c) {
    skipWs();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skipWs();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Expr parseExpr() {
    bool neg = false;
    skipWs();
    if (peek() == '-') {  // unary minus on the leading term
      ++pos_;
      neg = true;
    }
    Expr e = parseTerm();
    if (neg) e = prod({Expr(-1.0), e});
    for (;;) {
      if (eat('+')) e = sum({e, parseTerm()});
      else if (eat('-')) e = sum({e, prod({Expr(-1.0), parseTerm()})});
      else break;
    }
    return e;
  }

  Expr parseTerm() {
    Expr e = parseFactor();
    for (;;) {
      if (eat('*')) e = prod({e, parseFactor()});
      else if (eat('/')) e = quot(e, parseFactor());
      else break;
    }
    return e;
  }

  Expr parseFactor() {
    Expr b = parseBase();
    if (eat('^')) {
      skipWs();
      bool neg = false;
      if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
        neg = text_[pos_] == '-';
        ++pos_;
      }
      if (pos_ >= text_.size() || !isDigit(text_[pos_])) fail("expected integer exponent");
      long long k = 0;
      while (pos_ < text_.size() && isDigit(text_[pos_])) k = k * 10 + (text_[pos_++] - '0');
      return powi(b, neg ? -k : k);
    }
    return b;
  }

  static bool isDigit(char c) { return c >= '0' && c <= '9'; }
  static bool isAlpha(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool isAlnum(char c) { return isDigit(c) || isAlpha(c); }

  Expr parseBase() {
    skipWs();
    if (pos_ >= text_.size()) fail("expected expression");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parseExpr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (isDigit(c) || c == '.') return parseNumber();
    if (isAlpha(c)) return parseIdent();
    fail(std::string("unexpected character '") + c + "'");
  }

  Expr parseNumber() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && isDigit(text_[pos_])) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && isDigit(text_[pos_])) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && isDigit(text_[pos_])) {
        while (pos_ < text_.size() && isDigit(text_[pos_])) ++pos_;
      } else {
        pos_ = save;  // 'e'/'E' belongs to an identifier boundary, not this number
      }
    }
    double v = 0.0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc()) {
      pos_ = start;
      fail("bad numeric literal");
    }
    // imaginary suffix: number immediately followed by a lone 'i'
    if (pos_ < text_.size() && text_[pos_] == 'i' &&
        (pos_ + 1 >= text_.size() || !isAlnum(text_[pos_ + 1]))) {
      ++pos_;
      return Expr(Cx(0.0, v));
    }
    return Expr(v);
  }

  Expr parseIdent() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && isAlnum(text_[pos_])) ++pos_;
    std::string_view id = text_.substr(start, pos_ - start);
    if (id == "i") return Expr(Cx(0.0, 1.0));
    if (id == "exp" || id == "log") {
      if (!eat('(')) fail(std::string("expected '(' after ") + std::string(id));
      Expr a = parseExpr();
      if (!eat(')')) fail("expected ')'");
      return id == "exp" ? expFn(std::move(a)) : logFn(std::move(a));
    }
    // coordinate patterns t<k>, tb<k>, z<k>, zb<k>
    auto coord = [&](std::string_view sv) -> std::optional<Var> {
      bool barred = false;
      std::size_t i = 1;
      VarKind fam;
      if (sv[0] == 't') fam = VarKind::Base;
      else if (sv[0] == 'z') fam = VarKind::Fiber;
      else return std::nullopt;
      if (i < sv.size() && sv[i] == 'b') {
        barred = true;
        ++i;
      }
      if (i >= sv.size()) return std::nullopt;
      int idx = 0;
      for (; i < sv.size(); ++i) {
        if (!isDigit(sv[i])) return std::nullopt;
        idx = idx * 10 + (sv[i] - '0');
      }
      if (barred) fam = (fam == VarKind::Base) ? VarKind::BaseBar : VarKind::FiberBar;
      Var v;
      v.kind = fam;
      v.index = idx;
      return v;
    };
    if (auto v = coord(id)) {
      int limit = (v->kind == VarKind::Base || v->kind == VarKind::BaseBar) ? dims_.m : dims_.n;
      if (v->index < 1 || v->index > limit) {
        pos_ = start;
        fail("coordinate index out of declared range: " + std::string(id));
      }
      return Expr(*v);
    }
    for (const auto& pn : dims_.params)
      if (id == pn) return Expr(Var::param(std::string(id)));
    pos_ = start;
    fail("unknown identifier: " + std::string(id));
  }
};

}  // namespace detail

/// Parse a metric-weight formula. Throws ParseError with a byte offset.
inline Expr parse(std::string_view text, const Dims& dims) {
  return detail::Parser(text, dims).parse();
}

inline Expr parse(std::string_view text, int m, int n,
                  std::vector<std::string> params = {}) {
  Dims d{m, n, std::move(params)};
  return parse(text, d);
}

// --- conjugate-consistency check ---------------------------------------------------

/// Samples conjugate-consistent points in the polydisc of the declared
/// dimensions and checks that the value is real there (what it means for a
/// weight to be conjugate-consistent). Deterministic in the seed.
inline bool isConjugateConsistent(const Expr& e, const Dims& dims, int samples = 50,
                                  std::uint64_t seed = 1, double tol = 1e-10) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> radial(0.05, 0.9);
  std::uniform_real_distribution<double> angular(0.0, 6.283185307179586);
  std::uniform_real_distribution<double> parm(0.5, 2.0);
  for (int s = 0; s < samples; ++s) {
    std::vector<Cx> t, z;
    for (int j = 0; j < dims.m; ++j)
      t.push_back(std::polar(radial(rng), angular(rng)));
    for (int j = 0; j < dims.n; ++j)
      z.push_back(std::polar(radial(rng), angular(rng)));
    std::map<std::string, double> pv;
    for (const auto& name : dims.params) pv[name] = parm(rng);
    Point p = conjugatePoint(std::move(t), std::move(z), std::move(pv));
    Cx v;
    try {
      v = eval(e, p);
    } catch (const EvalError&) {
      continue;  // singular sample, not evidence either way
    }
    double scale = std::max(1.0, std::abs(v));
    if (std::abs(v.imag()) > tol * scale) return false;
  }
  return true;
}

}  // namespace rcpos
