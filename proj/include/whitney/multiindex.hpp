#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "error.hpp"

namespace whitney {

/// Exponent vector alpha in N_0^n. Indexes partial derivatives, monomials and
/// jet components throughout the library.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t n) : e_(n, 0) {}
  MultiIndex(std::initializer_list<int> e) : e_(e) { check(); }
  explicit MultiIndex(std::vector<int> e) : e_(std::move(e)) { check(); }

  static MultiIndex unit(std::size_t n, std::size_t i) {
    MultiIndex a(n);
    a.e_.at(i) = 1;
    return a;
  }

  std::size_t size() const noexcept { return e_.size(); }
  int operator[](std::size_t i) const { return e_[i]; }
  int& operator[](std::size_t i) { return e_[i]; }
  auto begin() const noexcept { return e_.begin(); }
  auto end() const noexcept { return e_.end(); }
  const std::vector<int>& exponents() const noexcept { return e_; }

  /// |alpha| = alpha_1 + ... + alpha_n
  int order() const noexcept { return std::accumulate(e_.begin(), e_.end(), 0); }

  bool is_zero() const noexcept {
    return std::all_of(e_.begin(), e_.end(), [](int v) { return v == 0; });
  }

  /// Componentwise partial order beta <= alpha.
  bool leq(const MultiIndex& other) const {
    same_dim(other);
    for (std::size_t i = 0; i < e_.size(); ++i)
      if (e_[i] > other.e_[i]) return false;
    return true;
  }

  MultiIndex operator+(const MultiIndex& other) const {
    same_dim(other);
    MultiIndex r(*this);
    for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] += other.e_[i];
    return r;
  }

  /// alpha - beta; requires beta <= alpha.
  MultiIndex operator-(const MultiIndex& other) const {
    if (!other.leq(*this))
      throw std::invalid_argument("MultiIndex subtraction requires beta <= alpha");
    MultiIndex r(*this);
    for (std::size_t i = 0; i < e_.size(); ++i) r.e_[i] -= other.e_[i];
    return r;
  }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex& a, const MultiIndex& b) { return a.e_ <=> b.e_; }

  /// JSON-style key, e.g. "[1,0,2]".
  std::string str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < e_.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(e_[i]);
    }
    return s + "]";
  }

  void same_dim(const MultiIndex& other) const {
    if (other.size() != size())
      throw std::invalid_argument("MultiIndex dimension mismatch: " + str() + " vs " + other.str());
  }

 private:
  void check() const {
    for (int v : e_)
      if (v < 0) throw std::invalid_argument("MultiIndex entries must be non-negative");
  }

  std::vector<int> e_;
};

inline int order(const MultiIndex& a) { return a.order(); }

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("integer overflow in multi-index arithmetic");
  return r;
}

inline std::uint64_t factorial(int v) {
  std::uint64_t r = 1;
  for (int i = 2; i <= v; ++i) r = checked_mul(r, static_cast<std::uint64_t>(i));
  return r;
}

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    // r * (n-k+i) / i is exact at every step
    r = checked_mul(r, static_cast<std::uint64_t>(n - k + i)) / static_cast<std::uint64_t>(i);
  }
  return r;
}

}  // namespace detail

/// alpha! = alpha_1! ... alpha_n!; throws std::overflow_error past 64 bits.
inline std::uint64_t factorial(const MultiIndex& a) {
  std::uint64_t r = 1;
  for (int v : a) r = detail::checked_mul(r, detail::factorial(v));
  return r;
}

/// Product of entrywise binomial coefficients; 0 unless b <= a.
inline std::uint64_t binom(const MultiIndex& a, const MultiIndex& b) {
  a.same_dim(b);
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (b[i] > a[i]) return 0;
    r = detail::checked_mul(r, detail::binomial(a[i], b[i]));
  }
  return r;
}

/// x^alpha with the convention 0^0 = 1.
inline double monomial(std::span<const double> x, const MultiIndex& a) {
  if (x.size() != a.size()) throw std::invalid_argument("monomial: dimension mismatch");
  double r = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int p = 0; p < a[i]; ++p) r *= x[i];
  return r;
}

namespace detail {

// Appends every alpha in N_0^n with |alpha| == d, first coordinate descending.
inline void enumerate_degree(std::size_t n, int d, std::vector<int>& cur, std::size_t pos,
                             std::vector<MultiIndex>& out) {
  if (pos + 1 == n) {
    cur[pos] = d;
    out.emplace_back(cur);
    return;
  }
  for (int v = d; v >= 0; --v) {
    cur[pos] = v;
    enumerate_degree(n, d - v, cur, pos + 1, out);
  }
  cur[pos] = 0;
}

}  // namespace detail

/// All alpha with |alpha| <= k in graded-lexicographic order: by |alpha|, and
/// within one order lexicographically from the largest leading exponent down,
/// so n=2, k=1 gives (0,0), (1,0), (0,1).
inline std::vector<MultiIndex> enumerate_upto(std::size_t n, int k) {
  if (n < 1) throw std::invalid_argument("enumerate_upto: n must be >= 1");
  if (k < 0) throw std::invalid_argument("enumerate_upto: k must be >= 0");
  std::vector<MultiIndex> out;
  std::vector<int> cur(n, 0);
  for (int d = 0; d <= k; ++d) detail::enumerate_degree(n, d, cur, 0, out);
  return out;
}

/// Immutable, shared description of the index set {alpha : |alpha| <= k} in n
/// variables: the graded-lex list, a reverse lookup, and the table of index
/// pairs whose sum stays within order k (the truncated-product schedule).
class IndexSet {
 public:
  struct Product {
    std::uint32_t lhs, rhs, target;
  };

  /// Shared instance per (n, k); safe to call from several threads.
  static std::shared_ptr<const IndexSet> get(std::size_t n, int k) {
    static std::mutex mu;
    static std::map<std::pair<std::size_t, int>, std::shared_ptr<const IndexSet>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{n, k}];
    if (!slot) slot = std::shared_ptr<const IndexSet>(new IndexSet(n, k));
    return slot;
  }

  std::size_t dim() const noexcept { return n_; }
  int order() const noexcept { return k_; }
  std::size_t size() const noexcept { return list_.size(); }
  const MultiIndex& operator[](std::size_t i) const { return list_[i]; }
  const std::vector<MultiIndex>& indices() const noexcept { return list_; }
  auto begin() const noexcept { return list_.begin(); }
  auto end() const noexcept { return list_.end(); }

  /// Number of indices with |alpha| <= l (a prefix of the graded order).
  std::size_t count_upto(int l) const {
    if (l < 0) return 0;
    return prefix_.at(static_cast<std::size_t>(std::min(l, k_)));
  }

  int order_of(std::size_t i) const noexcept { return orders_[i]; }
  std::uint64_t factorial_of(std::size_t i) const noexcept { return factorials_[i]; }

  std::optional<std::size_t> find(const MultiIndex& a) const {
    if (a.size() != n_ || a.order() > k_) return std::nullopt;
    auto it = lookup_.find(key(a));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(const MultiIndex& a) const {
    auto i = find(a);
    if (!i) throw std::out_of_range("multi-index " + a.str() + " not in index set of order " + std::to_string(k_));
    return *i;
  }

  const std::vector<Product>& products() const noexcept { return products_; }

 private:
  IndexSet(std::size_t n, int k) : n_(n), k_(k), list_(enumerate_upto(n, k)) {
    for (std::size_t i = 0; i < list_.size(); ++i) {
      lookup_.emplace(key(list_[i]), i);
      orders_.push_back(list_[i].order());
      factorials_.push_back(factorial(list_[i]));
    }
    for (int l = 0; l <= k; ++l) prefix_.push_back(detail::binomial(static_cast<int>(n) + l, l));
    for (std::size_t i = 0; i < list_.size(); ++i) {
      const std::size_t jmax = count_upto(k - orders_[i]);
      for (std::size_t j = 0; j < jmax; ++j) {
        products_.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                             static_cast<std::uint32_t>(lookup_.at(key(list_[i] + list_[j])))});
      }
    }
  }

  std::uint64_t key(const MultiIndex& a) const {
    std::uint64_t h = 0;
    for (int v : a) h = h * static_cast<std::uint64_t>(k_ + 1) + static_cast<std::uint64_t>(v);
    return h;
  }

  std::size_t n_;
  int k_;
  std::vector<MultiIndex> list_;
  std::vector<int> orders_;
  std::vector<std::uint64_t> factorials_;
  std::vector<std::size_t> prefix_;
  std::unordered_map<std::uint64_t, std::size_t> lookup_;
  std::vector<Product> products_;
};

/// Parses "[1,0,2]" or "(1,0,2)" (whitespace allowed).
inline MultiIndex parse_multi_index(std::string_view s) {
  std::vector<int> e;
  std::size_t i = 0;
  auto skip = [&] {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  };
  skip();
  if (i >= s.size() || (s[i] != '[' && s[i] != '('))
    throw InputError("multi-index must start with '[' or '(': " + std::string(s));
  const char close = s[i] == '[' ? ']' : ')';
  ++i;
  skip();
  while (i < s.size() && s[i] != close) {
    std::size_t start = i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
    if (start == i) throw InputError("bad multi-index: " + std::string(s));
    e.push_back(std::stoi(std::string(s.substr(start, i - start))));
    skip();
    if (i < s.size() && s[i] == ',') {
      ++i;
      skip();
    }
  }
  if (i >= s.size()) throw InputError("unterminated multi-index: " + std::string(s));
  ++i;
  skip();
  if (i != s.size() || e.empty()) throw InputError("bad multi-index: " + std::string(s));
  return MultiIndex(std::move(e));
}

}  // namespace whitney
