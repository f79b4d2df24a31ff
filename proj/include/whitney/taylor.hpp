#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "error.hpp"
#include "multiindex.hpp"

namespace whitney {

/// Truncated multivariate Taylor expansion of order k in n variables.
///
/// Coefficient alpha stores d^alpha f(x0) / alpha! (Taylor normalization), so
/// multiplication is a plain truncated convolution driven by the precomputed
/// pair table of the shared IndexSet. derivative() converts back to raw
/// partial derivatives.
class TaylorValue {
 public:
  TaylorValue(std::size_t n, int k, double constant = 0.0)
      : set_(IndexSet::get(n, k)), c_(set_->size(), 0.0) {
    c_[0] = constant;
  }

  explicit TaylorValue(std::shared_ptr<const IndexSet> set, double constant = 0.0)
      : set_(std::move(set)), c_(set_->size(), 0.0) {
    c_[0] = constant;
  }

  TaylorValue(std::shared_ptr<const IndexSet> set, std::vector<double> coefficients)
      : set_(std::move(set)), c_(std::move(coefficients)) {
    if (c_.size() != set_->size()) throw std::invalid_argument("TaylorValue: coefficient count mismatch");
  }

  /// The coordinate function x_i expanded at x0.
  static TaylorValue variable(std::span<const double> x0, std::size_t i, int k) {
    if (i >= x0.size()) throw std::out_of_range("TaylorValue::variable: coordinate index out of range");
    TaylorValue v(x0.size(), k, x0[i]);
    if (k >= 1) v.c_[1 + i] = 1.0;
    return v;
  }

  /// A constant with the same layout as `like`.
  static TaylorValue constant_like(const TaylorValue& like, double v) { return TaylorValue(like.set_, v); }

  std::size_t dim() const noexcept { return set_->dim(); }
  int order() const noexcept { return set_->order(); }
  std::size_t size() const noexcept { return c_.size(); }
  const std::shared_ptr<const IndexSet>& index_set() const noexcept { return set_; }

  double constant() const noexcept { return c_[0]; }
  double operator[](std::size_t i) const { return c_[i]; }
  double& operator[](std::size_t i) { return c_[i]; }
  std::span<const double> coefficients() const noexcept { return c_; }
  std::span<double> coefficients() noexcept { return c_; }

  double coefficient(const MultiIndex& a) const { return c_[set_->index_of(a)]; }

  /// d^alpha f(x0) = alpha! * coefficient.
  double derivative(const MultiIndex& a) const {
    if (a.size() != dim()) throw std::invalid_argument("derivative: dimension mismatch");
    if (a.order() > order()) throw std::out_of_range("derivative: |alpha| exceeds the expansion order");
    const std::size_t i = set_->index_of(a);
    return static_cast<double>(set_->factorial_of(i)) * c_[i];
  }

  double derivative_at(std::size_t i) const { return static_cast<double>(set_->factorial_of(i)) * c_[i]; }

  /// Drops every term of order > l.
  TaylorValue truncate(int l) const {
    if (l > order()) throw std::invalid_argument("truncate: target order exceeds current order");
    auto s = IndexSet::get(dim(), l);
    return TaylorValue(s, std::vector<double>(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(s->size())));
  }

  bool same_layout(const TaylorValue& o) const noexcept { return set_ == o.set_; }

  bool is_zero() const noexcept {
    return std::all_of(c_.begin(), c_.end(), [](double v) { return v == 0.0; });
  }

  TaylorValue& operator+=(const TaylorValue& o) {
    check(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  TaylorValue& operator-=(const TaylorValue& o) {
    check(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  TaylorValue& operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
  }
  TaylorValue& operator+=(double s) {
    c_[0] += s;
    return *this;
  }

  /// this += s * o
  void add_scaled(const TaylorValue& o, double s) {
    check(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += s * o.c_[i];
  }

  friend TaylorValue operator+(TaylorValue a, const TaylorValue& b) { return a += b; }
  friend TaylorValue operator-(TaylorValue a, const TaylorValue& b) { return a -= b; }
  friend TaylorValue operator+(TaylorValue a, double s) { return a += s; }
  friend TaylorValue operator+(double s, TaylorValue a) { return a += s; }
  friend TaylorValue operator-(TaylorValue a, double s) { return a += -s; }
  friend TaylorValue operator-(double s, TaylorValue a) {
    a *= -1.0;
    return a += s;
  }
  friend TaylorValue operator*(TaylorValue a, double s) { return a *= s; }
  friend TaylorValue operator*(double s, TaylorValue a) { return a *= s; }
  friend TaylorValue operator/(TaylorValue a, double s) {
    if (s == 0.0) throw DomainError("division by zero");
    return a *= 1.0 / s;
  }
  friend TaylorValue operator-(TaylorValue a) { return a *= -1.0; }

  friend TaylorValue operator*(const TaylorValue& a, const TaylorValue& b) {
    a.check(b);
    TaylorValue r(a.set_);
    r.c_[0] = 0.0;
    const double* x = a.c_.data();
    const double* y = b.c_.data();
    double* z = r.c_.data();
    for (const auto& p : a.set_->products()) z[p.target] += x[p.lhs] * y[p.rhs];
    return r;
  }

  friend TaylorValue operator/(const TaylorValue& a, const TaylorValue& b);

 private:
  void check(const TaylorValue& o) const {
    if (set_ != o.set_) throw std::invalid_argument("TaylorValue: mismatched dimension or order");
  }

  std::shared_ptr<const IndexSet> set_;
  std::vector<double> c_;
};

/// f(a) for a univariate f given by its Taylor coefficients at a's constant
/// term: d[m] = f^(m)(a0) / m!. Horner in the nilpotent part h = a - a0.
inline TaylorValue apply_series(const TaylorValue& a, std::span<const double> d) {
  TaylorValue h = a;
  h[0] = 0.0;
  const int k = a.order();
  TaylorValue r = TaylorValue::constant_like(a, d[static_cast<std::size_t>(k)]);
  for (int m = k - 1; m >= 0; --m) {
    r = r * h;
    r[0] += d[static_cast<std::size_t>(m)];
  }
  return r;
}

inline TaylorValue reciprocal(const TaylorValue& b) {
  const double b0 = b.constant();
  if (b0 == 0.0) throw DomainError("division by a series with zero constant term");
  std::vector<double> d(static_cast<std::size_t>(b.order()) + 1);
  double p = 1.0 / b0;
  for (auto& v : d) {
    v = p;
    p *= -1.0 / b0;
  }
  return apply_series(b, d);
}

inline TaylorValue operator/(const TaylorValue& a, const TaylorValue& b) { return a * reciprocal(b); }

inline TaylorValue operator/(double s, const TaylorValue& b) { return s * reciprocal(b); }

inline TaylorValue exp(const TaylorValue& a) {
  std::vector<double> d(static_cast<std::size_t>(a.order()) + 1);
  double p = std::exp(a.constant());
  for (std::size_t m = 0; m < d.size(); ++m) {
    d[m] = p;
    p /= static_cast<double>(m + 1);
  }
  return apply_series(a, d);
}

inline TaylorValue sin(const TaylorValue& a) {
  const double s = std::sin(a.constant()), c = std::cos(a.constant());
  const double cyc[4] = {s, c, -s, -c};
  std::vector<double> d(static_cast<std::size_t>(a.order()) + 1);
  double inv_fact = 1.0;
  for (std::size_t m = 0; m < d.size(); ++m) {
    d[m] = cyc[m % 4] * inv_fact;
    inv_fact /= static_cast<double>(m + 1);
  }
  return apply_series(a, d);
}

inline TaylorValue cos(const TaylorValue& a) {
  const double s = std::sin(a.constant()), c = std::cos(a.constant());
  const double cyc[4] = {c, -s, -c, s};
  std::vector<double> d(static_cast<std::size_t>(a.order()) + 1);
  double inv_fact = 1.0;
  for (std::size_t m = 0; m < d.size(); ++m) {
    d[m] = cyc[m % 4] * inv_fact;
    inv_fact /= static_cast<double>(m + 1);
  }
  return apply_series(a, d);
}

/// Natural logarithm; the constant term must be positive.
inline TaylorValue log(const TaylorValue& a) {
  const double a0 = a.constant();
  if (!(a0 > 0.0)) throw DomainError("ln of a non-positive value");
  std::vector<double> d(static_cast<std::size_t>(a.order()) + 1);
  d[0] = std::log(a0);
  double p = 1.0 / a0;
  for (std::size_t m = 1; m < d.size(); ++m) {
    d[m] = ((m % 2) ? 1.0 : -1.0) * p / static_cast<double>(m);
    p /= a0;
  }
  return apply_series(a, d);
}

/// Square root; the constant term must be positive (zero only at order 0).
inline TaylorValue sqrt(const TaylorValue& a) {
  const double a0 = a.constant();
  if (a0 < 0.0 || (a0 == 0.0 && a.order() > 0)) throw DomainError("sqrt of a non-positive value");
  std::vector<double> d(static_cast<std::size_t>(a.order()) + 1);
  // binom(1/2, m) * a0^(1/2 - m)
  double coef = 1.0, p = std::sqrt(a0);
  for (std::size_t m = 0; m < d.size(); ++m) {
    d[m] = coef * p;
    coef *= (0.5 - static_cast<double>(m)) / static_cast<double>(m + 1);
    p /= a0;
  }
  return apply_series(a, d);
}

/// a^e for integer e >= 0 by repeated squaring.
inline TaylorValue pow(const TaylorValue& a, int e) {
  if (e < 0) throw DomainError("negative integer exponent");
  TaylorValue r = TaylorValue::constant_like(a, 1.0);
  TaylorValue base = a;
  while (e > 0) {
    if (e & 1) r = r * base;
    e >>= 1;
    if (e) base = base * base;
  }
  return r;
}

inline double ipow(double x, int e) {
  if (e < 0) throw DomainError("negative integer exponent");
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

/// Substitutes the series `inner` (one per variable of `outer`, sharing a
/// common layout) into the expansion `outer`: the result is outer(c + inner - c)
/// with c the constant terms of `inner`, i.e. the Taylor series of the
/// composition when `outer` is expanded at c.
inline TaylorValue compose(const TaylorValue& outer, std::span<const TaylorValue> inner) {
  if (inner.size() != outer.dim()) throw std::invalid_argument("compose: inner count must equal outer dimension");
  if (inner.empty()) throw std::invalid_argument("compose: empty inner");
  const int k = inner[0].order();
  if (outer.order() < k) throw std::invalid_argument("compose: outer order below target order");
  const auto& oset = *outer.index_set();
  // powers[i][p] = (inner_i - c_i)^p
  std::vector<std::vector<TaylorValue>> powers(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) {
    TaylorValue h = inner[i];
    h[0] = 0.0;
    powers[i].push_back(TaylorValue::constant_like(inner[0], 1.0));
    for (int p = 1; p <= k; ++p) powers[i].push_back(powers[i].back() * h);
  }
  TaylorValue r = TaylorValue::constant_like(inner[0], 0.0);
  const std::size_t count = oset.count_upto(k);
  for (std::size_t g = 0; g < count; ++g) {
    const double coef = outer[g];
    if (coef == 0.0) continue;
    const MultiIndex& gamma = oset[g];
    TaylorValue term = TaylorValue::constant_like(inner[0], coef);
    for (std::size_t i = 0; i < gamma.size(); ++i)
      if (gamma[i] > 0) term = term * powers[i][static_cast<std::size_t>(gamma[i])];
    r += term;
  }
  return r;
}

}  // namespace whitney
