#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "jet.hpp"

namespace whitney {

/// Closed axis-aligned box [lo_i, hi_i].
struct Box {
  Point lo, hi;
};

/// A non-empty closed set: finitely many points or a finite union of boxes.
class ClosedSet {
 public:
  static ClosedSet points(std::vector<Point> pts) {
    if (pts.empty()) throw InputError("closed set must be non-empty");
    ClosedSet s;
    s.n_ = pts[0].size();
    if (s.n_ < 1) throw InputError("closed set dimension must be >= 1");
    for (const auto& p : pts)
      if (p.size() != s.n_) throw InputError("closed set points disagree on dimension");
    s.pts_ = std::move(pts);
    return s;
  }

  static ClosedSet boxes(std::vector<Box> bs) {
    if (bs.empty()) throw InputError("closed set must be non-empty");
    ClosedSet s;
    s.n_ = bs[0].lo.size();
    if (s.n_ < 1) throw InputError("closed set dimension must be >= 1");
    for (const auto& b : bs) {
      if (b.lo.size() != s.n_ || b.hi.size() != s.n_) throw InputError("box dimension mismatch");
      for (std::size_t i = 0; i < s.n_; ++i)
        if (!(b.lo[i] <= b.hi[i])) throw InputError("box has lo > hi");
    }
    s.boxes_ = std::move(bs);
    return s;
  }

  std::size_t dim() const noexcept { return n_; }
  bool is_points() const noexcept { return !pts_.empty(); }
  const std::vector<Point>& point_list() const noexcept { return pts_; }
  const std::vector<Box>& box_list() const noexcept { return boxes_; }

  /// Squared distance from the closed box [lo, hi] (a point when lo == hi).
  double distance2(std::span<const double> lo, std::span<const double> hi) const {
    double best = INFINITY;
    if (is_points()) {
      for (const auto& p : pts_) best = std::min(best, gap2(lo, hi, p, p));
    } else {
      for (const auto& b : boxes_) best = std::min(best, gap2(lo, hi, b.lo, b.hi));
    }
    return best;
  }

  double distance(std::span<const double> x) const { return std::sqrt(distance2(x, x)); }

  /// Exact membership; unlike distance() == 0 it does not underflow.
  bool contains(std::span<const double> x) const {
    if (is_points()) {
      for (const auto& p : pts_)
        if (std::equal(x.begin(), x.end(), p.begin(), p.end())) return true;
      return false;
    }
    for (const auto& b : boxes_) {
      bool in = true;
      for (std::size_t i = 0; i < n_ && in; ++i) in = b.lo[i] <= x[i] && x[i] <= b.hi[i];
      if (in) return true;
    }
    return false;
  }

  /// Lexicographically smallest nearest point to y.
  Point nearest(std::span<const double> y) const {
    Point best;
    double bd = INFINITY;
    auto consider = [&](Point c) {
      double d = 0.0;
      for (std::size_t i = 0; i < n_; ++i) d += (c[i] - y[i]) * (c[i] - y[i]);
      if (d < bd || (d == bd && c < best)) {
        bd = d;
        best = std::move(c);
      }
    };
    if (is_points()) {
      for (const auto& p : pts_) consider(p);
    } else {
      for (const auto& b : boxes_) {
        Point c(n_);
        for (std::size_t i = 0; i < n_; ++i) c[i] = std::clamp(y[i], b.lo[i], b.hi[i]);
        consider(std::move(c));
      }
    }
    return best;
  }

 private:
  static double gap2(std::span<const double> alo, std::span<const double> ahi, std::span<const double> blo,
                     std::span<const double> bhi) {
    double s = 0.0;
    for (std::size_t i = 0; i < alo.size(); ++i) {
      const double g = std::max({0.0, alo[i] - bhi[i], blo[i] - ahi[i]});
      s += g * g;
    }
    return s;
  }

  std::size_t n_ = 0;
  std::vector<Point> pts_;
  std::vector<Box> boxes_;
};

/// Dyadic cube prod [z_i / 2^j, (z_i + 1) / 2^j].
struct WhitneyCube {
  int level = 0;
  std::vector<std::int64_t> corner;

  double side() const { return std::ldexp(1.0, -level); }
  Point lo() const {
    Point p(corner.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::ldexp(static_cast<double>(corner[i]), -level);
    return p;
  }
  Point hi() const {
    Point p(corner.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::ldexp(static_cast<double>(corner[i] + 1), -level);
    return p;
  }
  Point center() const {
    Point p(corner.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::ldexp(static_cast<double>(corner[i]) + 0.5, -level);
    return p;
  }
  WhitneyCube parent() const {
    WhitneyCube c{level - 1, corner};
    for (auto& z : c.corner) z = z >= 0 ? z / 2 : -((-z + 1) / 2);  // floor division
    return c;
  }

  friend bool operator==(const WhitneyCube&, const WhitneyCube&) = default;
  friend auto operator<=>(const WhitneyCube& a, const WhitneyCube& b) {
    if (auto c = a.level <=> b.level; c != 0) return c;
    return a.corner <=> b.corner;
  }

  std::string str() const {
    std::string s = "L" + std::to_string(level) + "[";
    for (std::size_t i = 0; i < corner.size(); ++i) s += (i ? "," : "") + std::to_string(corner[i]);
    return s + "]";
  }
};

/// Closed cubes touch when their boxes intersect.
inline bool touching(const WhitneyCube& a, const WhitneyCube& b) {
  const Point alo = a.lo(), ahi = a.hi(), blo = b.lo(), bhi = b.hi();
  for (std::size_t i = 0; i < alo.size(); ++i)
    if (ahi[i] < blo[i] || bhi[i] < alo[i]) return false;
  return true;
}

/// x in D_C: sup-distance to the center strictly below 3/4 of the side.
inline bool enlarged_cube_contains(const WhitneyCube& c, std::span<const double> x) {
  const Point y = c.center();
  const double r = 0.75 * c.side();
  for (std::size_t i = 0; i < y.size(); ++i)
    if (!(std::abs(x[i] - y[i]) < r)) return false;
  return true;
}

constexpr int DEFAULT_MAX_LEVEL = 52;

/// The Whitney decomposition of R^n \ A, resolved lazily per query.
class Decomposition {
 public:
  explicit Decomposition(ClosedSet a, int max_level = DEFAULT_MAX_LEVEL) : a_(std::move(a)), jmax_(max_level) {
    if (max_level < 0 || max_level > 60) throw InputError("max level must lie in [0, 60]");
  }

  const ClosedSet& set() const noexcept { return a_; }
  std::size_t dim() const noexcept { return a_.dim(); }
  int max_level() const noexcept { return jmax_; }

  double cube_distance(const WhitneyCube& c) const { return std::sqrt(cube_distance2(c)); }

  double cube_distance2(const WhitneyCube& c) const { return a_.distance2(c.lo(), c.hi()); }

  /// d(C, A) >= 4 sqrt(n) / 2^j, compared in squares.
  bool criterion(const WhitneyCube& c) const {
    const double rhs = std::ldexp(16.0 * static_cast<double>(dim()), -2 * c.level);
    return cube_distance2(c) >= rhs;
  }

  /// C belongs to W: it qualifies and its parent does not. The criterion is
  /// inherited by subcubes, so the parent test settles every coarser level.
  bool member(const WhitneyCube& c) const {
    if (c.level < 0 || c.level > jmax_) return false;
    if (!criterion(c)) return false;
    return c.level == 0 || !criterion(c.parent());
  }

  /// Dyadic cube of level j containing x under the half-open convention.
  WhitneyCube cube_at(std::span<const double> x, int j) const {
    WhitneyCube c{j, std::vector<std::int64_t>(x.size())};
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double s = std::floor(std::ldexp(x[i], j));
      if (!(std::abs(s) < 0x1p62)) throw ResolutionExceeded("coordinate too large for dyadic level " + std::to_string(j));
      c.corner[i] = static_cast<std::int64_t>(s);
    }
    return c;
  }

  WhitneyCube locate(std::span<const double> x) const {
    if (x.size() != dim()) throw InputError("locate: point has wrong dimension");
    if (a_.contains(x)) throw OnSet("point " + point_str(x) + " lies on the closed set");
    for (int j = 0; j <= jmax_; ++j) {
      WhitneyCube c = cube_at(x, j);
      if (criterion(c)) return c;
    }
    throw ResolutionExceeded("no Whitney cube up to level " + std::to_string(jmax_) + " resolves point " +
                             point_str(x));
  }

  /// All W-cubes touching c (c included), sorted.
  std::vector<WhitneyCube> neighbors(const WhitneyCube& c) const {
    std::vector<WhitneyCube> out;
    const Point lo = c.lo(), hi = c.hi();
    const std::size_t n = dim();
    for (int L = std::max(0, c.level - 1); L <= std::min(jmax_, c.level + 1); ++L) {
      std::vector<std::int64_t> from(n), to(n);
      for (std::size_t i = 0; i < n; ++i) {
        from[i] = static_cast<std::int64_t>(std::ceil(std::ldexp(lo[i], L))) - 1;
        to[i] = static_cast<std::int64_t>(std::floor(std::ldexp(hi[i], L)));
      }
      WhitneyCube cand{L, from};
      for (;;) {
        if (member(cand)) out.push_back(cand);
        std::size_t i = 0;
        while (i < n && cand.corner[i] == to[i]) cand.corner[i] = from[i], ++i;
        if (i == n) break;
        ++cand.corner[i];
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Every W-cube whose enlarged cube D_C contains x.
  std::vector<WhitneyCube> supporting_cubes(std::span<const double> x) const {
    std::vector<WhitneyCube> out;
    for (auto& c : neighbors(locate(x)))
      if (enlarged_cube_contains(c, x)) out.push_back(std::move(c));
    return out;
  }

  Point anchor(const WhitneyCube& c) const { return a_.nearest(c.center()); }

  /// W-cubes meeting the closed box [lo, hi], for reporting. Cubes finer
  /// than max_level are never produced; the walk descends from level 0.
  std::vector<WhitneyCube> cubes_in_box(std::span<const double> lo, std::span<const double> hi,
                                        std::size_t limit = 1000000) const {
    std::vector<WhitneyCube> out;
    const std::size_t n = dim();
    std::vector<std::int64_t> from(n), to(n);
    for (std::size_t i = 0; i < n; ++i) {
      from[i] = static_cast<std::int64_t>(std::floor(lo[i])) - 1;
      to[i] = static_cast<std::int64_t>(std::floor(hi[i]));
    }
    WhitneyCube c{0, from};
    std::function<void(const WhitneyCube&)> walk = [&](const WhitneyCube& q) {
      // q is a dyadic cube meeting the box that does not lie in an earlier W-cube
      const Point qlo = q.lo(), qhi = q.hi();
      for (std::size_t i = 0; i < n; ++i)
        if (qhi[i] < lo[i] || hi[i] < qlo[i]) return;
      if (criterion(q)) {
        if (out.size() >= limit) throw ResolutionExceeded("decomposition exceeds the cube limit");
        out.push_back(q);
        return;
      }
      if (q.level >= jmax_) return;
      for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        WhitneyCube child{q.level + 1, q.corner};
        for (std::size_t i = 0; i < n; ++i) child.corner[i] = 2 * child.corner[i] + ((mask >> i) & 1);
        walk(child);
      }
    };
    for (;;) {
      walk(c);
      std::size_t i = 0;
      while (i < n && c.corner[i] == to[i]) c.corner[i] = from[i], ++i;
      if (i == n) break;
      ++c.corner[i];
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  static std::string point_str(std::span<const double> x) {
    std::string s = "(";
    for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "," : "") + format_double(x[i]);
    return s + ")";
  }

  ClosedSet a_;
  int jmax_;
};

}  // namespace whitney
