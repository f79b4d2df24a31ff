#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "decomp.hpp"
#include "jet.hpp"
#include "pou.hpp"
#include "taylor.hpp"

namespace whitney {

/// Thresholds delta_1 > delta_2 > ... with delta_{i+1} < delta_i / 2. A cube
/// whose center lies closer to A than delta_i uses Taylor degree >= i.
class DegreeSchedule {
 public:
  DegreeSchedule() = default;
  explicit DegreeSchedule(std::vector<double> deltas) : d_(std::move(deltas)) {
    for (std::size_t i = 0; i < d_.size(); ++i) {
      if (!(d_[i] > 0.0) || !std::isfinite(d_[i])) throw InputError("schedule thresholds must be positive");
      if (i && !(d_[i] < d_[i - 1] / 2)) throw InputError("schedule must satisfy delta_{i+1} < delta_i / 2");
    }
  }

  /// max{i : dist < delta_i}, or 0.
  int degree(double dist) const {
    int g = 0;
    for (std::size_t i = 0; i < d_.size(); ++i)
      if (dist < d_[i]) g = static_cast<int>(i) + 1;
    return g;
  }

  const std::vector<double>& thresholds() const noexcept { return d_; }

 private:
  std::vector<double> d_;
};

/// Result of one evaluation: per output component the order-`upto`
/// expansion of F at x (coefficients d^alpha F(x) / alpha!).
struct Evaluation {
  std::vector<TaylorValue> F;
  bool on_set = false;
  std::size_t cubes = 0;  // contributing Whitney cubes
  int max_degree = 0;     // largest Taylor degree used

  double derivative(std::size_t component, const MultiIndex& a) const { return F.at(component).derivative(a); }

  Vec value() const {
    Vec v;
    for (const auto& f : F) v.push_back(f.constant());
    return v;
  }
};

/// T^g_{y} f expanded at x to order `upto`, one series per component:
/// the coefficient of gamma is sum_{beta >= gamma} f_beta(y) / (gamma! (beta-gamma)!) h^(beta-gamma)
/// with h = x - y.
inline std::vector<TaylorValue> taylor_poly_series(const Jet& f, std::size_t y, int g, std::span<const double> x,
                                                   int upto) {
  const IndexSet& set = f.indices();
  const auto out = IndexSet::get(f.dim(), upto);
  const std::size_t m = f.outdim();
  Vec h(f.dim());
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = x[i] - f.point(y)[i];
  std::vector<TaylorValue> r(m, TaylorValue(out));
  const std::size_t nb = set.count_upto(g);
  const std::size_t ng = out->count_upto(std::min(g, upto));
  for (std::size_t b = 0; b < nb; ++b) {
    const MultiIndex& beta = set[b];
    auto fb = f.value(y, b);
    for (std::size_t c = 0; c < ng; ++c) {
      const MultiIndex& gamma = (*out)[c];
      if (!gamma.leq(beta)) continue;
      const MultiIndex rest = beta - gamma;
      const double w = monomial(h, rest) / static_cast<double>(factorial(gamma) * factorial(rest));
      for (std::size_t i = 0; i < m; ++i) r[i][c] += w * fb[i];
    }
  }
  return r;
}

/// The Whitney extension F of a jet on a finite set A:
/// F = f_0 on A and F = sum_C phi_C T^{g_C}_{x_C} f off A, where g_C = k
/// (fixed degree) or comes from a DegreeSchedule (adaptive degree).
class Extension {
 public:
  explicit Extension(Jet f, int max_level = DEFAULT_MAX_LEVEL, std::optional<DegreeSchedule> schedule = std::nullopt)
      : f_(std::move(f)), d_(ClosedSet::points(check_nonempty(f_).points()), max_level), sched_(std::move(schedule)) {}

  const Jet& jet() const noexcept { return f_; }
  const Decomposition& decomposition() const noexcept { return d_; }
  bool adaptive() const noexcept { return sched_.has_value(); }

  /// Degree used on cube c.
  int degree(const WhitneyCube& c) const {
    if (!sched_) return f_.order();
    const int g = sched_->degree(d_.set().distance(c.center()));
    if (g > f_.order())
      throw ScheduleExhausted("cube " + c.str() + " needs Taylor degree " + std::to_string(g) +
                              " but the jet has order " + std::to_string(f_.order()));
    return g;
  }

  /// All d^alpha F(x) with |alpha| <= upto.
  ///
  /// Off A the sum is arranged as P_0 + sum_C phi_C (P_C - P_0) with P_0 the
  /// polynomial of the cube containing x. Since sum phi_C = 1 this equals
  /// sum_C phi_C P_C, but the differences P_C - P_0 stay small near A while
  /// the derivatives of phi_C grow like d(x,A)^-|alpha|.
  Evaluation evaluate(std::span<const double> x, int upto) const {
    check_query(x, upto);
    Evaluation ev;
    if (auto p = f_.find_exact(x)) {
      ev.on_set = true;
      ev.F = stored(*p, upto);
      ev.max_degree = f_.order();
      return ev;
    }
    const PartitionAt part = partition_at(d_, x, upto);
    const auto base = poly(part.home, x, upto, ev.max_degree);
    ev.F = base;
    ev.cubes = part.cubes.size();
    for (std::size_t i = 0; i < part.cubes.size(); ++i) {
      if (part.cubes[i] == part.home) continue;
      const auto pc = poly(part.cubes[i], x, upto, ev.max_degree);
      for (std::size_t c = 0; c < ev.F.size(); ++c) ev.F[c] += part.phi[i] * (pc[c] - base[c]);
    }
    return ev;
  }

  /// The literal sum_C phi_C T_{x_C} f, without the reference polynomial.
  Evaluation evaluate_direct(std::span<const double> x, int upto) const {
    check_query(x, upto);
    Evaluation ev;
    if (auto p = f_.find_exact(x)) {
      ev.on_set = true;
      ev.F = stored(*p, upto);
      return ev;
    }
    const PartitionAt part = partition_at(d_, x, upto);
    ev.F.assign(f_.outdim(), TaylorValue(x.size(), upto));
    ev.cubes = part.cubes.size();
    for (std::size_t i = 0; i < part.cubes.size(); ++i) {
      const auto pc = poly(part.cubes[i], x, upto, ev.max_degree);
      for (std::size_t c = 0; c < ev.F.size(); ++c) ev.F[c] += part.phi[i] * pc[c];
    }
    return ev;
  }

  Vec eval(std::span<const double> x) const { return evaluate(x, 0).value(); }

  /// d^alpha F(x) for each requested alpha, component-major rows.
  std::vector<Vec> eval_derivs(std::span<const double> x, std::span<const MultiIndex> alphas) const {
    int upto = 0;
    for (const auto& a : alphas) upto = std::max(upto, a.order());
    const Evaluation ev = evaluate(x, upto);
    std::vector<Vec> out;
    for (const auto& a : alphas) {
      Vec v;
      for (std::size_t c = 0; c < ev.F.size(); ++c) v.push_back(ev.derivative(c, a));
      out.push_back(std::move(v));
    }
    return out;
  }

 private:
  static const Jet& check_nonempty(const Jet& f) {
    if (f.empty()) throw InputError("cannot extend a jet without points");
    return f;
  }

  void check_query(std::span<const double> x, int upto) const {
    if (x.size() != f_.dim()) throw InputError("query point has wrong dimension");
    if (upto < 0 || upto > f_.order()) throw InputError("derivative order exceeds the jet order");
    for (double v : x)
      if (!std::isfinite(v)) throw InputError("query point has non-finite coordinates");
  }

  std::vector<TaylorValue> stored(std::size_t p, int upto) const {
    const auto set = IndexSet::get(f_.dim(), upto);
    std::vector<TaylorValue> r(f_.outdim(), TaylorValue(set));
    for (std::size_t a = 0; a < set->size(); ++a)
      for (std::size_t c = 0; c < f_.outdim(); ++c)
        r[c][a] = f_.value(p, a)[c] / static_cast<double>(set->factorial_of(a));
    return r;
  }

  std::vector<TaylorValue> poly(const WhitneyCube& c, std::span<const double> x, int upto, int& max_degree) const {
    const Point anchor = d_.anchor(c);
    const auto p = f_.find_exact(anchor);
    if (!p) throw std::logic_error("anchor is not a jet point");
    const int g = degree(c);
    max_degree = std::max(max_degree, g);
    return taylor_poly_series(f_, *p, g, x, upto);
  }

  Jet f_;
  Decomposition d_;
  std::optional<DegreeSchedule> sched_;
};

/// max-norm of Phi(a f + b g)(x) - a Phi(f)(x) - b Phi(g)(x).
inline double linearity_probe(const Jet& f, const Jet& g, double a, double b, std::span<const double> x,
                              int max_level = DEFAULT_MAX_LEVEL) {
  const Extension ef(f, max_level), eg(g, max_level), eh(combine(a, f, b, g), max_level);
  const Vec vf = ef.eval(x), vg = eg.eval(x), vh = eh.eval(x);
  double r = 0.0;
  for (std::size_t c = 0; c < vf.size(); ++c) r = std::max(r, std::abs(vh[c] - a * vf[c] - b * vg[c]));
  return r;
}

}  // namespace whitney
