#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "error.hpp"
#include "smooth.hpp"
#include "taylor.hpp"

namespace whitney {

/// Built-in unary functions of the expression language.
enum class Func { Exp, Sin, Cos, Ln, Sqrt, Cutoff };

inline const char* func_name(Func f) {
  switch (f) {
    case Func::Exp: return "exp";
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Ln: return "ln";
    case Func::Sqrt: return "sqrt";
    case Func::Cutoff: return "cutoff";
  }
  return "?";
}

/// Shortest decimal that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

struct Node {
  enum class Kind { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
  Kind kind;
  double value = 0.0;  // Num
  int index = 0;       // Var: coordinate, Pow: exponent
  Func fn = Func::Exp;
  std::shared_ptr<const Node> a = nullptr, b = nullptr;
};

using NodePtr = std::shared_ptr<const Node>;

inline NodePtr make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }

}  // namespace detail

/// Immutable expression tree in n variables x0..x{n-1}.
class Expr {
 public:
  using Kind = detail::Node::Kind;

  Expr() = default;

  static Expr number(double v, std::size_t n) { return Expr(detail::make_node({Kind::Num, v}), n); }

  static Expr variable(std::size_t i, std::size_t n) {
    if (i >= n) throw InputError("variable x" + std::to_string(i) + " out of range for dimension " + std::to_string(n));
    detail::Node node{Kind::Var};
    node.index = static_cast<int>(i);
    return Expr(detail::make_node(node), n);
  }

  static Expr unary(Func f, const Expr& a) {
    detail::Node node{Kind::Call};
    node.fn = f;
    node.a = a.root_;
    return Expr(detail::make_node(node), a.n_);
  }

  static Expr binary(Kind k, const Expr& a, const Expr& b) {
    if (a.n_ != b.n_) throw InputError("expression dimension mismatch");
    detail::Node node{k};
    node.a = a.root_;
    node.b = b.root_;
    return Expr(detail::make_node(node), a.n_);
  }

  static Expr negate(const Expr& a) {
    detail::Node node{Kind::Neg};
    node.a = a.root_;
    return Expr(detail::make_node(node), a.n_);
  }

  static Expr power(const Expr& a, int e) {
    if (e < 0) throw InputError("negative exponent");
    detail::Node node{Kind::Pow};
    node.index = e;
    node.a = a.root_;
    return Expr(detail::make_node(node), a.n_);
  }

  std::size_t dim() const noexcept { return n_; }
  bool empty() const noexcept { return !root_; }

  template <class T>
  T eval(std::span<const T> x) const {
    if (x.size() != n_) throw InputError("expression expects " + std::to_string(n_) + " coordinates");
    return eval_node<T>(*root_, x);
  }

  double eval(std::span<const double> x) const { return eval<double>(x); }

  /// Order-k expansion at x0.
  TaylorValue taylor(std::span<const double> x0, int k) const {
    std::vector<TaylorValue> vars;
    vars.reserve(x0.size());
    for (std::size_t i = 0; i < x0.size(); ++i) vars.push_back(TaylorValue::variable(x0, i, k));
    return eval<TaylorValue>(vars);
  }

  /// Replaces x_i by subs[i]; the result lives in the dimension of subs.
  Expr substitute(std::span<const Expr> subs) const {
    if (subs.size() != n_) throw InputError("substitute: need one expression per variable");
    if (subs.empty()) throw InputError("substitute: empty substitution");
    const std::size_t m = subs[0].n_;
    for (const auto& s : subs)
      if (s.n_ != m) throw InputError("substitute: mixed dimensions");
    return Expr(subst_node(root_, subs), m);
  }

  /// Fully parenthesized text that parses back to the same tree.
  std::string str() const {
    std::string out;
    print(*root_, out);
    return out;
  }

  const detail::Node& root() const { return *root_; }

 private:
  Expr(detail::NodePtr r, std::size_t n) : root_(std::move(r)), n_(n) {}

  template <class T>
  static T eval_node(const detail::Node& e, std::span<const T> x) {
    using std::cos;
    using std::exp;
    using std::sin;
    switch (e.kind) {
      case Kind::Num: return make_constant(x[0], e.value);
      case Kind::Var: return x[static_cast<std::size_t>(e.index)];
      case Kind::Neg: return -eval_node<T>(*e.a, x);
      case Kind::Add: return eval_node<T>(*e.a, x) + eval_node<T>(*e.b, x);
      case Kind::Sub: return eval_node<T>(*e.a, x) - eval_node<T>(*e.b, x);
      case Kind::Mul: return eval_node<T>(*e.a, x) * eval_node<T>(*e.b, x);
      case Kind::Div: {
        T den = eval_node<T>(*e.b, x);
        if (constant_of(den) == 0.0) throw DomainError("division by zero");
        return eval_node<T>(*e.a, x) / den;
      }
      case Kind::Pow: {
        T base = eval_node<T>(*e.a, x);
        if constexpr (std::is_same_v<T, double>)
          return ipow(base, e.index);
        else
          return pow(base, e.index);
      }
      case Kind::Call: {
        T a = eval_node<T>(*e.a, x);
        switch (e.fn) {
          case Func::Exp: return exp(a);
          case Func::Sin: return sin(a);
          case Func::Cos: return cos(a);
          case Func::Ln:
            if (!(constant_of(a) > 0.0)) throw DomainError("ln of a non-positive value");
            if constexpr (std::is_same_v<T, double>)
              return std::log(a);
            else
              return log(a);
          case Func::Sqrt:
            if constexpr (std::is_same_v<T, double>) {
              if (a < 0.0) throw DomainError("sqrt of a negative value");
              return std::sqrt(a);
            } else {
              return sqrt(a);
            }
          case Func::Cutoff: return cutoff(a);
        }
      }
    }
    throw std::logic_error("unreachable expression node");
  }

  static detail::NodePtr subst_node(const detail::NodePtr& e, std::span<const Expr> subs) {
    switch (e->kind) {
      case Kind::Num: return e;
      case Kind::Var: return subs[static_cast<std::size_t>(e->index)].root_;
      default: {
        detail::Node copy = *e;
        if (copy.a) copy.a = subst_node(copy.a, subs);
        if (copy.b) copy.b = subst_node(copy.b, subs);
        return detail::make_node(std::move(copy));
      }
    }
  }

  static void print(const detail::Node& e, std::string& out) {
    auto bin = [&](const char* op) {
      out += '(';
      print(*e.a, out);
      out += op;
      print(*e.b, out);
      out += ')';
    };
    switch (e.kind) {
      case Kind::Num:
        if (std::signbit(e.value)) {
          out += "(-" + format_double(-e.value) + ")";
        } else {
          out += format_double(e.value);
        }
        return;
      case Kind::Var: out += "x" + std::to_string(e.index); return;
      case Kind::Neg:
        out += "(-";
        print(*e.a, out);
        out += ')';
        return;
      case Kind::Add: bin(" + "); return;
      case Kind::Sub: bin(" - "); return;
      case Kind::Mul: bin(" * "); return;
      case Kind::Div: bin(" / "); return;
      case Kind::Pow:
        out += '(';
        print(*e.a, out);
        out += "^" + std::to_string(e.index) + ")";
        return;
      case Kind::Call:
        out += func_name(e.fn);
        out += '(';
        print(*e.a, out);
        out += ')';
        return;
    }
  }

  detail::NodePtr root_;
  std::size_t n_ = 0;
};

inline Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(Expr::Kind::Add, a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(Expr::Kind::Sub, a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(Expr::Kind::Mul, a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(Expr::Kind::Div, a, b); }

namespace detail {

class Parser {
 public:
  Parser(std::string_view src, std::size_t n) : s_(src), n_(n) {}

  Expr run() {
    Expr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }
  [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const { throw ParseError(msg, at); }

  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= s_.size()) fail(std::string("expected '") + c + "' but input ended");
      fail(std::string("expected '") + c + "'");
    }
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (accept('+'))
        e = e + term();
      else if (accept('-'))
        e = e - term();
      else
        return e;
    }
  }

  Expr term() {
    Expr e = factor();
    for (;;) {
      if (accept('*'))
        e = e * factor();
      else if (accept('/'))
        e = e / factor();
      else
        return e;
    }
  }

  Expr factor() {
    if (accept('-')) return Expr::negate(power());
    return power();
  }

  Expr power() {
    Expr base = atom();
    if (accept('^')) {
      skip();
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("exponent must be a non-negative integer");
      int e = 0;
      auto res = std::from_chars(s_.data() + start, s_.data() + pos_, e);
      if (res.ec != std::errc()) fail_at("exponent out of range", start);
      return Expr::power(base, e);
    }
    return base;
  }

  Expr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t d = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      return pos_ - d;
    };
    std::size_t count = digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) fail_at("malformed number", start);
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail_at("malformed exponent in number", start);
    }
    double v = 0.0;
    auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != s_.data() + pos_ || !std::isfinite(v))
      fail_at("malformed number", start);
    return Expr::number(v, n_);
  }

  Expr ident() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string_view name = s_.substr(start, pos_ - start);
    skip();
    const bool call = pos_ < s_.size() && s_[pos_] == '(';
    if (!call) {
      if (name.size() >= 2 && name[0] == 'x' &&
          name.find_first_not_of("0123456789", 1) == std::string_view::npos) {
        std::size_t idx = 0;
        auto res = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
        if (res.ec != std::errc() || idx >= n_)
          fail_at("variable " + std::string(name) + " out of range for dimension " + std::to_string(n_), start);
        return Expr::variable(idx, n_);
      }
      fail_at("unknown identifier '" + std::string(name) + "'", start);
    }
    Func f;
    if (name == "exp")
      f = Func::Exp;
    else if (name == "sin")
      f = Func::Sin;
    else if (name == "cos")
      f = Func::Cos;
    else if (name == "ln")
      f = Func::Ln;
    else if (name == "sqrt")
      f = Func::Sqrt;
    else if (name == "cutoff")
      f = Func::Cutoff;
    else
      fail_at("unknown function '" + std::string(name) + "'", start);
    ++pos_;  // '('
    skip();
    if (pos_ < s_.size() && s_[pos_] == ')') fail(std::string(name) + " takes exactly one argument");
    Expr arg = expr();
    skip();
    if (pos_ < s_.size() && s_[pos_] == ',') fail(std::string(name) + " takes exactly one argument");
    expect(')');
    return Expr::unary(f, arg);
  }

  std::string_view s_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse(std::string_view src, std::size_t n) {
  if (n < 1) throw InputError("expression dimension must be >= 1");
  return detail::Parser(src, n).run();
}

/// A map R^n -> R^m given componentwise.
class VectorExpr {
 public:
  VectorExpr() = default;
  explicit VectorExpr(std::vector<Expr> comps) : c_(std::move(comps)) {
    if (c_.empty()) throw InputError("vector expression needs at least one component");
    for (const auto& e : c_)
      if (e.dim() != c_[0].dim()) throw InputError("vector expression components disagree on dimension");
  }

  static VectorExpr parse(std::span<const std::string> src, std::size_t n) {
    std::vector<Expr> c;
    for (const auto& s : src) c.push_back(whitney::parse(s, n));
    return VectorExpr(std::move(c));
  }

  static VectorExpr identity(std::size_t n) {
    std::vector<Expr> c;
    for (std::size_t i = 0; i < n; ++i) c.push_back(Expr::variable(i, n));
    return VectorExpr(std::move(c));
  }

  std::size_t in_dim() const { return c_.at(0).dim(); }
  std::size_t out_dim() const noexcept { return c_.size(); }
  const Expr& operator[](std::size_t i) const { return c_[i]; }
  const std::vector<Expr>& components() const noexcept { return c_; }

  std::vector<double> eval(std::span<const double> x) const {
    std::vector<double> r;
    r.reserve(c_.size());
    for (const auto& e : c_) r.push_back(e.eval(x));
    return r;
  }

  std::vector<TaylorValue> eval(std::span<const TaylorValue> x) const {
    std::vector<TaylorValue> r;
    r.reserve(c_.size());
    for (const auto& e : c_) r.push_back(e.eval<TaylorValue>(x));
    return r;
  }

  std::vector<TaylorValue> taylor(std::span<const double> x0, int k) const {
    std::vector<TaylorValue> vars;
    for (std::size_t i = 0; i < x0.size(); ++i) vars.push_back(TaylorValue::variable(x0, i, k));
    return eval(std::span<const TaylorValue>(vars));
  }

  /// this ∘ inner
  VectorExpr compose(const VectorExpr& inner) const {
    std::vector<Expr> c;
    for (const auto& e : c_) c.push_back(e.substitute(inner.c_));
    return VectorExpr(std::move(c));
  }

  std::vector<std::string> strs() const {
    std::vector<std::string> r;
    for (const auto& e : c_) r.push_back(e.str());
    return r;
  }

 private:
  std::vector<Expr> c_;
};

}  // namespace whitney
