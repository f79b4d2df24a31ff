#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "error.hpp"
#include "expr.hpp"
#include "multiindex.hpp"
#include "taylor.hpp"

namespace whitney {

using Point = std::vector<double>;
using Vec = std::vector<double>;

/// Seminorm selector on E = R^m: q_i(v) = |v_i| for i >= 0, q_max for Q_MAX.
constexpr int Q_MAX = -1;

inline double apply_q(std::span<const double> v, int q) {
  if (q == Q_MAX) {
    double r = 0.0;
    for (double x : v) r = std::max(r, std::abs(x));
    return r;
  }
  if (q < 0 || static_cast<std::size_t>(q) >= v.size()) throw InputError("seminorm component out of range");
  return std::abs(v[static_cast<std::size_t>(q)]);
}

inline double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// A k-jet on a finite point set: f_alpha(p) in R^m for every point p and
/// every |alpha| <= k. Values are stored per point in graded-lex order.
class Jet {
 public:
  Jet(std::size_t n, int k, std::size_t m) : set_(IndexSet::get(n, k)), m_(m) {
    if (n < 1) throw InputError("jet dimension must be >= 1");
    if (k < 0) throw InputError("jet order must be >= 0");
    if (m < 1) throw InputError("jet output dimension must be >= 1");
  }

  std::size_t dim() const noexcept { return set_->dim(); }
  int order() const noexcept { return set_->order(); }
  std::size_t outdim() const noexcept { return m_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  const IndexSet& indices() const noexcept { return *set_; }
  const std::shared_ptr<const IndexSet>& index_set() const noexcept { return set_; }

  const std::string& id(std::size_t p) const { return ids_[p]; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const Point& point(std::size_t p) const { return pts_[p]; }
  const std::vector<Point>& points() const noexcept { return pts_; }

  std::optional<std::size_t> find(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(const std::string& id) const {
    auto p = find(id);
    if (!p) throw InputError("unknown point id '" + id + "'");
    return *p;
  }

  /// Point whose coordinates equal x bit for bit, if any.
  std::optional<std::size_t> find_exact(std::span<const double> x) const {
    for (std::size_t p = 0; p < pts_.size(); ++p)
      if (std::equal(x.begin(), x.end(), pts_[p].begin(), pts_[p].end())) return p;
    return std::nullopt;
  }

  /// Appends a point with all values zero; returns its index.
  std::size_t add_point(std::string id, Point x) {
    if (x.size() != dim()) throw InputError("point '" + id + "' has wrong dimension");
    for (double v : x)
      if (!std::isfinite(v)) throw InputError("point '" + id + "' has non-finite coordinates");
    if (by_id_.count(id)) throw InputError("duplicate point id '" + id + "'");
    if (find_exact(x)) throw InputError("point '" + id + "' duplicates the coordinates of another point");
    by_id_.emplace(id, ids_.size());
    ids_.push_back(std::move(id));
    pts_.push_back(std::move(x));
    vals_.emplace_back(set_->size() * m_, 0.0);
    return ids_.size() - 1;
  }

  /// f_alpha(p) as a span of m values; alpha given by its graded-lex position.
  std::span<const double> value(std::size_t p, std::size_t a) const { return {vals_[p].data() + a * m_, m_}; }
  std::span<double> value(std::size_t p, std::size_t a) { return {vals_[p].data() + a * m_, m_}; }
  std::span<const double> value(std::size_t p, const MultiIndex& a) const { return value(p, set_->index_of(a)); }
  std::span<double> value(std::size_t p, const MultiIndex& a) { return value(p, set_->index_of(a)); }

  /// All values of one point, graded-lex major, component minor.
  std::span<const double> raw(std::size_t p) const { return vals_[p]; }
  std::span<double> raw(std::size_t p) { return vals_[p]; }

  /// T^l_y f(x) with y the point at index p.
  Vec taylor_poly(std::size_t p, int l, std::span<const double> x) const {
    if (l > order() || l < 0) throw InputError("Taylor order must lie in [0, k]");
    if (x.size() != dim()) throw InputError("taylor_poly: point has wrong dimension");
    Vec h(dim());
    for (std::size_t i = 0; i < dim(); ++i) h[i] = x[i] - pts_[p][i];
    Vec r(m_, 0.0);
    const std::size_t count = set_->count_upto(l);
    for (std::size_t a = 0; a < count; ++a) {
      const double w = monomial(h, (*set_)[a]) / static_cast<double>(set_->factorial_of(a));
      auto v = value(p, a);
      for (std::size_t c = 0; c < m_; ++c) r[c] += w * v[c];
    }
    return r;
  }

  /// R^l_y f(x) = f_0(x) - T^l_y f(x) for jet points x, y.
  Vec remainder(std::size_t y, int l, std::size_t x) const {
    Vec t = taylor_poly(y, l, pts_[x]);
    auto f0 = value(x, 0);
    for (std::size_t c = 0; c < m_; ++c) t[c] = f0[c] - t[c];
    return t;
  }

  /// The shifted jet (f_{alpha+beta})_{|beta| <= k-|alpha|}.
  Jet shift(const MultiIndex& alpha) const {
    if (alpha.size() != dim()) throw InputError("shift: dimension mismatch");
    if (alpha.order() > order()) throw InputError("shift: |alpha| exceeds the jet order");
    Jet r(dim(), order() - alpha.order(), m_);
    for (std::size_t p = 0; p < size(); ++p) {
      const std::size_t q = r.add_point(ids_[p], pts_[p]);
      for (std::size_t b = 0; b < r.indices().size(); ++b) {
        auto src = value(p, alpha + r.indices()[b]);
        std::copy(src.begin(), src.end(), r.value(q, b).begin());
      }
    }
    return r;
  }

  /// pr_l: keep |alpha| <= l.
  Jet project(int l) const {
    if (l < 0 || l > order()) throw InputError("project: order must lie in [0, k]");
    Jet r(dim(), l, m_);
    const std::size_t len = r.indices().size() * m_;
    for (std::size_t p = 0; p < size(); ++p) {
      const std::size_t q = r.add_point(ids_[p], pts_[p]);
      std::copy(vals_[p].begin(), vals_[p].begin() + static_cast<std::ptrdiff_t>(len), r.vals_[q].begin());
    }
    return r;
  }

  /// Restriction to the listed ids, in the order given.
  Jet restrict(std::span<const std::string> keep) const {
    Jet r(dim(), order(), m_);
    for (const auto& id : keep) {
      const std::size_t p = index_of(id);
      const std::size_t q = r.add_point(id, pts_[p]);
      r.vals_[q] = vals_[p];
    }
    return r;
  }

  /// Componentwise a*f + b*g on the same points.
  friend Jet combine(double a, const Jet& f, double b, const Jet& g) {
    if (f.dim() != g.dim() || f.order() != g.order() || f.outdim() != g.outdim() || f.size() != g.size())
      throw InputError("combine: jets have different shapes");
    Jet r(f.dim(), f.order(), f.outdim());
    for (std::size_t p = 0; p < f.size(); ++p) {
      if (f.pts_[p] != g.pts_[p]) throw InputError("combine: jets live on different points");
      const std::size_t q = r.add_point(f.ids_[p], f.pts_[p]);
      for (std::size_t i = 0; i < r.vals_[q].size(); ++i) r.vals_[q][i] = a * f.vals_[p][i] + b * g.vals_[p][i];
    }
    return r;
  }

 private:
  std::shared_ptr<const IndexSet> set_;
  std::size_t m_;
  std::vector<std::string> ids_;
  std::vector<Point> pts_;
  std::vector<std::vector<double>> vals_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// Jet of a smooth map: f_alpha(p) = d^alpha f(p).
inline Jet jet_from_expr(const VectorExpr& f, std::span<const Point> points, int k,
                         std::span<const std::string> ids = {}) {
  if (!ids.empty() && ids.size() != points.size()) throw InputError("jet_from_expr: id count mismatch");
  Jet j(f.in_dim(), k, f.out_dim());
  for (std::size_t p = 0; p < points.size(); ++p) {
    const std::size_t q = j.add_point(ids.empty() ? "p" + std::to_string(p) : ids[p], points[p]);
    const auto t = f.taylor(points[p], k);
    for (std::size_t a = 0; a < j.indices().size(); ++a)
      for (std::size_t c = 0; c < f.out_dim(); ++c) j.value(q, a)[c] = t[c].derivative_at(a);
  }
  return j;
}

namespace detail {

inline std::vector<std::size_t> resolve_subset(const Jet& f, std::span<const std::string> K) {
  std::vector<std::size_t> idx;
  if (K.empty()) {
    for (std::size_t p = 0; p < f.size(); ++p) idx.push_back(p);
  } else {
    for (const auto& id : K) idx.push_back(f.index_of(id));
  }
  return idx;
}

// q(R^{l-|alpha|}_y d^alpha f(x)) / |x-y|^{l-|alpha|} maximized over alpha.
inline double pair_quotient(const Jet& f, int l, int q, std::size_t x, std::size_t y) {
  const IndexSet& set = f.indices();
  const std::size_t n = f.dim();
  const std::size_t m = f.outdim();
  Vec h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = f.point(x)[i] - f.point(y)[i];
  const double dist = euclid(f.point(x), f.point(y));
  double best = 0.0;
  Vec r(m);
  for (std::size_t a = 0; a < set.count_upto(l); ++a) {
    const MultiIndex& alpha = set[a];
    const int rest = l - alpha.order();
    auto fx = f.value(x, a);
    std::copy(fx.begin(), fx.end(), r.begin());
    for (std::size_t b = 0; b < set.count_upto(rest); ++b) {
      const double w = monomial(h, set[b]) / static_cast<double>(set.factorial_of(b));
      auto fy = f.value(y, alpha + set[b]);
      for (std::size_t c = 0; c < m; ++c) r[c] -= w * fy[c];
    }
    best = std::max(best, apply_q(r, q) / std::pow(dist, rest));
  }
  return best;
}

}  // namespace detail

/// ||f||'_{l,q,K}: the largest q(f_alpha(x)) over x in K, |alpha| <= l.
/// An empty K means every jet point.
inline double seminorm_prime(const Jet& f, int l, int q, std::span<const std::string> K = {}) {
  if (l < 0 || l > f.order()) throw InputError("seminorm order must lie in [0, k]");
  double best = 0.0;
  for (std::size_t p : detail::resolve_subset(f, K))
    for (std::size_t a = 0; a < f.indices().count_upto(l); ++a) best = std::max(best, apply_q(f.value(p, a), q));
  return best;
}

/// ||f||''_{l,q,K}: the largest normalized remainder over distinct pairs.
inline double seminorm_dprime(const Jet& f, int l, int q, std::span<const std::string> K = {}) {
  if (l < 0 || l > f.order()) throw InputError("seminorm order must lie in [0, k]");
  const auto idx = detail::resolve_subset(f, K);
  double best = 0.0;
  for (std::size_t x : idx)
    for (std::size_t y : idx)
      if (x != y) best = std::max(best, detail::pair_quotient(f, l, q, x, y));
  return best;
}

inline double seminorm(const Jet& f, int l, int q, std::span<const std::string> K = {}) {
  return seminorm_prime(f, l, q, K) + seminorm_dprime(f, l, q, K);
}

/// Whitney-condition diagnostic: the remainder quotient maximized over pairs
/// closer than delta (q = q_max). Zero when no such pair exists.
inline double whitney_modulus(const Jet& f, int l, double delta) {
  if (!(delta > 0.0)) throw InputError("whitney_modulus: delta must be positive");
  if (l < 0 || l > f.order()) throw InputError("modulus order must lie in [0, k]");
  double best = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x)
    for (std::size_t y = 0; y < f.size(); ++y) {
      if (x == y) continue;
      const double d = euclid(f.point(x), f.point(y));
      if (d > 0.0 && d < delta) best = std::max(best, detail::pair_quotient(f, l, Q_MAX, x, y));
    }
  return best;
}

inline double diameter(const Jet& f, std::span<const std::string> K = {}) {
  const auto idx = detail::resolve_subset(f, K);
  double d = 0.0;
  for (std::size_t x : idx)
    for (std::size_t y : idx) d = std::max(d, euclid(f.point(x), f.point(y)));
  return d;
}

struct JetPiece {
  Jet jet;
  std::vector<std::string> ids;  // empty: all points of jet
};

/// The jet on the union of the pieces that restricts to each piece.
/// Overlapping points must carry identical coordinates and values within tol.
inline Jet glue(std::span<const JetPiece> pieces, double tol = 1e-12) {
  if (pieces.empty()) throw InputError("glue: no pieces");
  const Jet& first = pieces[0].jet;
  Jet r(first.dim(), first.order(), first.outdim());
  for (const auto& piece : pieces) {
    const Jet& j = piece.jet;
    if (j.dim() != r.dim() || j.order() != r.order() || j.outdim() != r.outdim())
      throw InputError("glue: pieces have different shapes");
    std::vector<std::string> ids = piece.ids.empty() ? j.ids() : piece.ids;
    for (const auto& id : ids) {
      const std::size_t p = j.index_of(id);
      if (auto q = r.find(id)) {
        double dev = 0.0;
        for (std::size_t i = 0; i < r.dim(); ++i) dev = std::max(dev, std::abs(r.point(*q)[i] - j.point(p)[i]));
        auto a = r.raw(*q);
        auto b = j.raw(p);
        for (std::size_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - b[i]));
        if (dev > tol)
          throw ConsistencyError("glue: pieces disagree at point '" + id + "' by " + format_double(dev));
      } else {
        const std::size_t q2 = r.add_point(id, j.point(p));
        auto src = j.raw(p);
        std::copy(src.begin(), src.end(), r.raw(q2).begin());
      }
    }
  }
  return r;
}

}  // namespace whitney
