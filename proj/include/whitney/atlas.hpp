#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "decomp.hpp"
#include "error.hpp"
#include "expr.hpp"
#include "extend.hpp"
#include "fdb.hpp"
#include "jet.hpp"

namespace whitney {

constexpr double OVERLAP_SLACK = 1e-12;

/// A chart phi: U_phi -> V_phi, addressed through its codomain V_phi.
/// forward / inverse are optional maps to and from a reference chart; when
/// both charts of a pair carry them, the transition can be derived.
struct Chart {
  std::string id;
  std::optional<Box> codomain;  // nullopt: all of R^n
  std::optional<VectorExpr> forward, inverse;

  bool contains(std::span<const double> y, double slack = OVERLAP_SLACK) const {
    for (double v : y)
      if (!std::isfinite(v)) return false;
    if (!codomain) return true;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double lo = codomain->lo[i], hi = codomain->hi[i];
      if (y[i] < lo - slack * std::max(1.0, std::abs(lo)) || y[i] > hi + slack * std::max(1.0, std::abs(hi)))
        return false;
    }
    return true;
  }
};

/// psi o phi^-1 as a map from phi coordinates to psi coordinates.
struct Transition {
  std::string from, to;
  VectorExpr map;
};

class FiniteAtlas {
 public:
  FiniteAtlas(std::size_t n, std::vector<Chart> charts, std::vector<Transition> transitions = {})
      : n_(n), charts_(std::move(charts)) {
    if (n_ < 1) throw InputError("atlas dimension must be >= 1");
    if (charts_.empty()) throw InputError("atlas has no charts");
    std::set<std::string> seen;
    for (const auto& c : charts_) {
      if (!seen.insert(c.id).second) throw InputError("duplicate chart id '" + c.id + "'");
      if (c.codomain && (c.codomain->lo.size() != n_ || c.codomain->hi.size() != n_))
        throw InputError("chart '" + c.id + "' codomain has wrong dimension");
      for (const auto* m : {&c.forward, &c.inverse})
        if (*m && ((*m)->in_dim() != n_ || (*m)->out_dim() != n_))
          throw InputError("chart '" + c.id + "' map has wrong dimension");
    }
    for (auto& t : transitions) {
      chart(t.from);
      chart(t.to);
      if (t.map.in_dim() != n_ || t.map.out_dim() != n_)
        throw InputError("transition " + t.from + "->" + t.to + " has wrong dimension");
      if (!trans_.emplace(std::make_pair(t.from, t.to), std::move(t.map)).second)
        throw InputError("duplicate transition " + t.from + "->" + t.to);
    }
  }

  std::size_t dim() const noexcept { return n_; }
  const std::vector<Chart>& charts() const noexcept { return charts_; }

  const Chart& chart(const std::string& id) const {
    for (const auto& c : charts_)
      if (c.id == id) return c;
    throw InputError("unknown chart '" + id + "'");
  }

  bool has_chart(const std::string& id) const {
    return std::any_of(charts_.begin(), charts_.end(), [&](const Chart& c) { return c.id == id; });
  }

  /// to o from^-1: explicit, identity, or derived from reference maps.
  /// nullopt means the charts are treated as disjoint.
  std::optional<VectorExpr> transition(const std::string& from, const std::string& to) const {
    if (from == to) {
      chart(from);
      return VectorExpr::identity(n_);
    }
    if (auto it = trans_.find({from, to}); it != trans_.end()) return it->second;
    const Chart &a = chart(from), &b = chart(to);
    if (a.inverse && b.forward) return b.forward->compose(*a.inverse);
    return std::nullopt;
  }

  /// Coordinates in chart `to` of the point with coordinates x in `from`,
  /// when it lies in the overlap.
  std::optional<Point> map_point(const std::string& from, const std::string& to, std::span<const double> x) const {
    const auto t = transition(from, to);
    if (!t) return std::nullopt;
    Point y;
    try {
      y = t->eval(x);
    } catch (const DomainError&) {
      return std::nullopt;
    }
    if (!chart(to).contains(y)) return std::nullopt;
    return y;
  }

  FiniteAtlas sub(std::span<const std::string> keep) const {
    std::vector<Chart> cs;
    for (const auto& id : keep) cs.push_back(chart(id));
    std::vector<Transition> ts;
    for (const auto& [key, map] : trans_)
      if (std::find(keep.begin(), keep.end(), key.first) != keep.end() &&
          std::find(keep.begin(), keep.end(), key.second) != keep.end())
        ts.push_back({key.first, key.second, map});
    return FiniteAtlas(n_, std::move(cs), std::move(ts));
  }

  /// Worst |from->to->from (x) - x| over the given chart points, scaled by max(1, |x|).
  double roundtrip_residual(const std::string& from, const std::string& to, std::span<const Point> xs) const {
    double r = 0.0;
    for (const auto& x : xs) {
      const auto y = map_point(from, to, x);
      if (!y) continue;
      const auto back = map_point(to, from, *y);
      if (!back) return INFINITY;
      for (std::size_t i = 0; i < n_; ++i) r = std::max(r, std::abs((*back)[i] - x[i]) / std::max(1.0, std::abs(x[i])));
    }
    return r;
  }

 private:
  std::size_t n_;
  std::vector<Chart> charts_;
  std::map<std::pair<std::string, std::string>, VectorExpr> trans_;
};

/// Per-chart jets (f_phi) on the chart images of A; point ids identify the
/// same manifold point across charts.
class AtlasJet {
 public:
  AtlasJet(std::size_t n, int k, std::size_t m) : n_(n), k_(k), m_(m) {}

  std::size_t dim() const noexcept { return n_; }
  int order() const noexcept { return k_; }
  std::size_t outdim() const noexcept { return m_; }

  void set(const std::string& chart, Jet f) {
    if (f.dim() != n_ || f.order() != k_ || f.outdim() != m_)
      throw InputError("jet for chart '" + chart + "' has the wrong shape");
    for (auto& [id, j] : jets_)
      if (id == chart) {
        j = std::move(f);
        return;
      }
    jets_.emplace_back(chart, std::move(f));
  }

  const Jet* find(const std::string& chart) const {
    for (const auto& [id, j] : jets_)
      if (id == chart) return &j;
    return nullptr;
  }

  const Jet& at(const std::string& chart) const {
    if (const Jet* j = find(chart)) return *j;
    throw InputError("no jet for chart '" + chart + "'");
  }

  const std::vector<std::pair<std::string, Jet>>& charts() const noexcept { return jets_; }

  std::set<std::string> point_ids() const {
    std::set<std::string> out;
    for (const auto& [c, j] : jets_) out.insert(j.ids().begin(), j.ids().end());
    return out;
  }

  AtlasJet project(int l) const {
    AtlasJet r(n_, l, m_);
    for (const auto& [c, j] : jets_) r.set(c, j.project(l));
    return r;
  }

 private:
  std::size_t n_;
  int k_;
  std::size_t m_;
  std::vector<std::pair<std::string, Jet>> jets_;
};

namespace detail {

inline void check_same_point(const Point& got, const Point& want, const std::string& id, double tol) {
  for (std::size_t i = 0; i < got.size(); ++i)
    if (std::abs(got[i] - want[i]) > tol * std::max(1.0, std::abs(want[i])))
      throw ConsistencyError("point '" + id + "' has inconsistent coordinates across charts");
}

inline double max_scaled_dev(std::span<const double> a, std::span<const double> b) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  return r;
}

/// (to o from^-1)-pullback machinery: the jet of `src` (in chart `src_chart`)
/// pulled to chart `dst_chart` at the given destination coordinates.
inline Jet pull_between(const FiniteAtlas& atlas, const Jet& src, const std::string& src_chart,
                        const std::string& dst_chart, std::span<const Point> dst_pts,
                        std::span<const std::size_t> src_index, double coord_tol) {
  const auto back = atlas.transition(dst_chart, src_chart);
  if (!back) throw InputError("missing transition " + dst_chart + "->" + src_chart);
  std::vector<std::vector<TaylorValue>> g_at;
  std::vector<std::string> ids;
  for (std::size_t p = 0; p < dst_pts.size(); ++p) {
    g_at.push_back(back->taylor(dst_pts[p], src.order()));
    Point img;
    for (const auto& g : g_at.back()) img.push_back(g.constant());
    check_same_point(img, src.point(src_index[p]), src.id(src_index[p]), coord_tol);
    ids.push_back(src.id(src_index[p]));
  }
  return jet_pullback_series(g_at, src, dst_pts, src_index, ids);
}

}  // namespace detail

struct CorrespondenceReport {
  std::string phi, psi;
  std::size_t shared = 0;
  double residual = 0.0;  // max |pulled - f_phi| / max(1, |f_phi|)
  std::string worst;      // point id attaining it
  bool pass = false;
};

/// Compares (psi o phi^-1)^* f_psi with f_phi on the shared points.
inline CorrespondenceReport correspondence_check(const AtlasJet& aj, const FiniteAtlas& atlas, const std::string& phi,
                                                 const std::string& psi, double tol = 1e-9) {
  const Jet& fphi = aj.at(phi);
  const Jet& fpsi = aj.at(psi);
  if (!atlas.transition(phi, psi)) throw InputError("missing transition " + phi + "->" + psi);
  std::vector<Point> A;
  std::vector<std::size_t> at_phi, at_psi;
  for (std::size_t p = 0; p < fphi.size(); ++p)
    if (auto q = fpsi.find(fphi.id(p))) {
      A.push_back(fphi.point(p));
      at_phi.push_back(p);
      at_psi.push_back(*q);
    }
  if (A.empty()) throw InputError("charts '" + phi + "' and '" + psi + "' share no jet points");
  const Jet pulled = detail::pull_between(atlas, fpsi, psi, phi, A, at_psi, 1e-9);
  CorrespondenceReport r{phi, psi, A.size(), 0.0, {}, false};
  for (std::size_t i = 0; i < A.size(); ++i) {
    const double d = detail::max_scaled_dev(pulled.raw(i), fphi.raw(at_phi[i]));
    if (d > r.residual || r.worst.empty()) {
      r.residual = std::max(r.residual, d);
      r.worst = fphi.id(at_phi[i]);
    }
  }
  r.pass = r.residual <= tol;
  return r;
}

/// Every ordered chart pair sharing jet points.
inline std::vector<CorrespondenceReport> correspondence_all(const AtlasJet& aj, const FiniteAtlas& atlas,
                                                            double tol = 1e-9) {
  std::vector<CorrespondenceReport> out;
  for (const auto& [a, fa] : aj.charts())
    for (const auto& [b, fb] : aj.charts()) {
      if (a == b) continue;
      const bool shared = std::any_of(fa.ids().begin(), fa.ids().end(), [&](const std::string& id) {
        return fb.find(id).has_value();
      });
      if (shared) out.push_back(correspondence_check(aj, atlas, a, b, tol));
    }
  return out;
}

/// The jet of chart psi carried into chart phi on the points of f_psi that
/// lie in the overlap. Empty when the charts are disjoint.
inline Jet transport(const Jet& fpsi, const FiniteAtlas& atlas, const std::string& psi, const std::string& phi) {
  Jet empty(fpsi.dim(), fpsi.order(), fpsi.outdim());
  if (!atlas.transition(psi, phi) || !atlas.transition(phi, psi)) return empty;
  std::vector<Point> pts;
  std::vector<std::size_t> src;
  for (std::size_t p = 0; p < fpsi.size(); ++p)
    if (auto y = atlas.map_point(psi, phi, fpsi.point(p))) {
      pts.push_back(std::move(*y));
      src.push_back(p);
    }
  if (pts.empty()) return empty;
  return detail::pull_between(atlas, fpsi, psi, phi, pts, src, 1e-9);
}

/// f_phi rebuilt from the other charts: transport from each and glue.
/// Disagreeing sources raise ConsistencyError.
inline Jet reconstruct(const AtlasJet& aj, const FiniteAtlas& atlas, const std::string& phi, double tol = 1e-9) {
  atlas.chart(phi);
  std::vector<JetPiece> pieces;
  if (const Jet* own = aj.find(phi)) pieces.push_back({*own, {}});
  for (const auto& [psi, f] : aj.charts()) {
    if (psi == phi) continue;
    Jet t = transport(f, atlas, psi, phi);
    if (!t.empty()) pieces.push_back({std::move(t), {}});
  }
  if (pieces.empty()) return Jet(aj.dim(), aj.order(), aj.outdim());
  return glue(pieces, tol);
}

/// Restriction to the charts in `keep`; every jet point must stay charted.
inline AtlasJet atlas_project(const AtlasJet& aj, const FiniteAtlas& atlas, std::span<const std::string> keep) {
  AtlasJet r(aj.dim(), aj.order(), aj.outdim());
  std::set<std::string> covered;
  for (const auto& id : keep) {
    atlas.chart(id);
    if (const Jet* f = aj.find(id)) {
      r.set(id, *f);
      covered.insert(f->ids().begin(), f->ids().end());
    }
  }
  for (const auto& id : aj.point_ids())
    if (!covered.count(id)) throw CoverageError("point '" + id + "' is not covered by the remaining charts");
  return r;
}

/// Every chart's jet induced by one function F given in chart `base`: the
/// chart-c jet is that of F o (c -> base) at the chart-c images of the points.
inline void induce_atlas_jet(AtlasJet& aj, const FiniteAtlas& atlas, const std::string& base, const VectorExpr& F,
                             const std::vector<std::pair<std::string, Point>>& base_pts) {
  for (const auto& c : atlas.charts()) {
    std::vector<Point> pts;
    std::vector<std::string> ids;
    for (const auto& [id, x] : base_pts)
      if (auto y = atlas.map_point(base, c.id, x)) {
        pts.push_back(*y);
        ids.push_back(id);
      }
    if (pts.empty()) continue;
    const auto back = atlas.transition(c.id, base);
    if (!back) throw InputError("missing transition " + c.id + "->" + base);
    aj.set(c.id, jet_from_expr(F.compose(*back), pts, aj.order(), ids));
  }
}

/// One term h_i of the manifold partition of unity, in chart coordinates.
struct PouTerm {
  std::string chart;
  Expr h;
};

/// F = sum_i h_i * F_i, with F_i the Whitney extension of the chart-i jet.
class ManifoldExtension {
 public:
  ManifoldExtension(AtlasJet aj, FiniteAtlas atlas, std::vector<PouTerm> pou, int max_level = DEFAULT_MAX_LEVEL,
                    double deficit_tol = 1e-9)
      : aj_(std::move(aj)), atlas_(std::move(atlas)), pou_(std::move(pou)) {
    if (pou_.empty()) throw InputError("partition of unity is empty");
    for (const auto& t : pou_) {
      atlas_.chart(t.chart);
      if (t.h.dim() != atlas_.dim()) throw InputError("bump for chart '" + t.chart + "' has wrong dimension");
      const Jet* f = aj_.find(t.chart);
      if (!f || f->empty()) throw InputError("chart '" + t.chart + "' carries a bump but no jet points");
      ext_.emplace_back(*f, max_level);
    }
    deficit_ = 0.0;
    for (const auto& [c, f] : aj_.charts())
      for (std::size_t p = 0; p < f.size(); ++p) {
        double s = 0.0;
        for (const auto& t : pou_)
          if (auto y = atlas_.map_point(c, t.chart, f.point(p))) s += t.h.eval(*y);
        const double d = std::abs(s - 1.0);
        deficit_ = std::max(deficit_, d);
        if (d > deficit_tol)
          throw DomainError("partition deficit " + format_double(d) + " at point '" + f.id(p) + "' in chart '" + c +
                            "'");
      }
  }

  const AtlasJet& jet() const noexcept { return aj_; }
  const FiniteAtlas& atlas() const noexcept { return atlas_; }
  double deficit() const noexcept { return deficit_; }

  /// Expansion of F o chart^-1 at x to order `upto`, one series per component.
  std::vector<TaylorValue> evaluate(const std::string& chart, std::span<const double> x, int upto) const {
    if (x.size() != atlas_.dim()) throw InputError("query point has wrong dimension");
    if (!atlas_.chart(chart).contains(x)) throw InputError("query point lies outside chart '" + chart + "'");
    std::vector<TaylorValue> out(aj_.outdim(), TaylorValue(x.size(), upto));
    for (std::size_t i = 0; i < pou_.size(); ++i) {
      const auto& term = pou_[i];
      auto y = atlas_.map_point(chart, term.chart, x);
      if (!y) continue;
      const auto ts = atlas_.transition(chart, term.chart)->taylor(x, upto);
      const TaylorValue h = compose(term.h.taylor(*y, upto), ts);
      if (h.is_zero()) continue;
      // land exactly on a jet point when the transition rounds next to it
      const Jet& f = ext_[i].jet();
      if (auto p = match_point(f, *y, OVERLAP_SLACK)) *y = f.point(*p);
      const Evaluation ev = ext_[i].evaluate(*y, upto);
      for (std::size_t c = 0; c < out.size(); ++c) out[c] += h * compose(ev.F[c], ts);
    }
    return out;
  }

  Vec eval(const std::string& chart, std::span<const double> x) const {
    Vec v;
    for (const auto& s : evaluate(chart, x, 0)) v.push_back(s.constant());
    return v;
  }

  std::vector<Vec> eval_derivs(const std::string& chart, std::span<const double> x,
                               std::span<const MultiIndex> alphas) const {
    int upto = 0;
    for (const auto& a : alphas) upto = std::max(upto, a.order());
    const auto s = evaluate(chart, x, upto);
    std::vector<Vec> out;
    for (const auto& a : alphas) {
      Vec v;
      for (const auto& c : s) v.push_back(c.derivative(a));
      out.push_back(std::move(v));
    }
    return out;
  }

 private:
  AtlasJet aj_;
  FiniteAtlas atlas_;
  std::vector<PouTerm> pou_;
  std::vector<Extension> ext_;
  double deficit_ = 0.0;
};

}  // namespace whitney
