#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "decomp.hpp"
#include "smooth.hpp"
#include "taylor.hpp"

namespace whitney {

/// One-dimensional profile: 1 on [-1/2, 1/2], 0 outside (-3/4, 3/4).
inline double bump_profile(double t) {
  const double a = std::abs(t);
  return flat_ratio(0.75 - a, a - 0.5);
}

/// Univariate order-k series of the profile at t0, as coefficients
/// s^(m)(t0) / m!. Exact constants on the plateau and outside the support.
inline std::vector<double> bump_series(double t0, int k) {
  std::vector<double> out(static_cast<std::size_t>(k) + 1, 0.0);
  const double a = std::abs(t0);
  if (a <= 0.5) {
    out[0] = 1.0;
    return out;
  }
  if (a >= 0.75) return out;
  const double x0[1] = {t0};
  TaylorValue t = TaylorValue::variable(x0, 0, k);
  if (t0 < 0.0) t = -t;  // |t| is smooth away from 0
  const TaylorValue s = flat_ratio(0.75 - t, t - 0.5);
  for (std::size_t m = 0; m < out.size(); ++m) out[m] = s[m];
  return out;
}

/// Multiplies per-axis univariate series into one n-variate series.
inline TaylorValue tensor_series(const std::shared_ptr<const IndexSet>& set,
                                 const std::vector<std::vector<double>>& axes) {
  TaylorValue r(set);
  for (std::size_t a = 0; a < set->size(); ++a) {
    const MultiIndex& alpha = (*set)[a];
    double v = 1.0;
    for (std::size_t i = 0; i < axes.size() && v != 0.0; ++i) v *= axes[i][static_cast<std::size_t>(alpha[i])];
    r[a] = v;
  }
  return r;
}

/// psi(x) = prod_i s(x_i), expanded to order k at x.
inline TaylorValue psi(std::span<const double> x, int k) {
  std::vector<std::vector<double>> axes;
  for (double xi : x) axes.push_back(bump_series(xi, k));
  return tensor_series(IndexSet::get(x.size(), k), axes);
}

/// psi_C(x) = psi((x - y_C) / l_C); the chain rule through the affine map
/// scales the m-th coefficient by l_C^-m.
inline TaylorValue psi_cube(const WhitneyCube& c, std::span<const double> x, int k) {
  const Point y = c.center();
  const double l = c.side();
  std::vector<std::vector<double>> axes;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto s = bump_series((x[i] - y[i]) / l, k);
    double scale = 1.0;
    for (auto& v : s) {
      v *= scale;
      scale /= l;
    }
    axes.push_back(std::move(s));
  }
  return tensor_series(IndexSet::get(x.size(), k), axes);
}

#if defined(__SIZEOF_FLOAT128__)
using wide_real = __float128;
#else
using wide_real = long double;
#endif

/// Series in extended precision, used only for the normalization step of the
/// partition. The coefficients of phi_C grow like l_C^-k times the profile's
/// steep derivatives, so a double-precision normalization leaves rounding
/// residue far above the size of the identity sum phi_C = 1 being checked.
struct WideSeries {
  std::shared_ptr<const IndexSet> set;
  std::vector<wide_real> c;

  explicit WideSeries(std::shared_ptr<const IndexSet> s) : set(std::move(s)), c(set->size(), 0) {}
  explicit WideSeries(const TaylorValue& t) : set(t.index_set()), c(t.size()) {
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = t[i];
  }

  WideSeries& operator+=(const WideSeries& o) {
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += o.c[i];
    return *this;
  }

  friend WideSeries operator*(const WideSeries& a, const WideSeries& b) {
    WideSeries r(a.set);
    for (const auto& p : a.set->products()) r.c[p.target] += a.c[p.lhs] * b.c[p.rhs];
    return r;
  }

  WideSeries reciprocal() const {
    // 1/(b0 + h) = sum_m (-1)^m h^m / b0^(m+1), by Horner in h
    const wide_real b0 = c[0];
    WideSeries h = *this;
    h.c[0] = 0;
    const int k = set->order();
    std::vector<wide_real> d(static_cast<std::size_t>(k) + 1);
    wide_real p = 1 / b0;
    for (auto& v : d) {
      v = p;
      p = -p / b0;
    }
    WideSeries r(set);
    r.c[0] = d[static_cast<std::size_t>(k)];
    for (int m = k - 1; m >= 0; --m) {
      r = r * h;
      r.c[0] += d[static_cast<std::size_t>(m)];
    }
    return r;
  }

  TaylorValue to_double() const {
    std::vector<double> v(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) v[i] = static_cast<double>(c[i]);
    return TaylorValue(set, std::move(v));
  }
};

/// The partition functions phi_C that do not vanish at x, with their cubes.
struct PartitionAt {
  std::vector<WhitneyCube> cubes;
  std::vector<TaylorValue> phi;      // rounded to double
  std::vector<WideSeries> phi_wide;  // as computed
  WhitneyCube home;                  // locate(x)

  /// Largest coefficient of (sum_C phi_C) - 1, summed in extended precision.
  double sum_residual() const {
    if (phi_wide.empty()) return INFINITY;
    WideSeries s(phi_wide[0].set);
    for (const auto& f : phi_wide) s += f;
    s.c[0] -= 1;
    double r = 0;
    for (auto v : s.c) r = std::max(r, std::abs(static_cast<double>(v)));
    return r;
  }
};

/// phi_C = psi_C / sum psi_C'. Only cubes with x in D_C carry a non-zero
/// psi_C series at x, so the denominator runs over supporting_cubes(x).
inline PartitionAt partition_at(const Decomposition& d, std::span<const double> x, int k) {
  PartitionAt r;
  r.home = d.locate(x);
  for (auto& c : d.neighbors(r.home))
    if (enlarged_cube_contains(c, x)) r.cubes.push_back(std::move(c));
  std::vector<WideSeries> psis;
  WideSeries sum(IndexSet::get(x.size(), k));
  for (const auto& c : r.cubes) {
    psis.emplace_back(psi_cube(c, x, k));
    sum += psis.back();
  }
  // the home cube's plateau covers x, so the constant term is >= 1
  const WideSeries inv = sum.reciprocal();
  for (const auto& p : psis) {
    r.phi_wide.push_back(p * inv);
    r.phi.push_back(r.phi_wide.back().to_double());
  }
  return r;
}

/// phi_C(x) for one cube; the zero series when x is outside D_C.
inline TaylorValue phi_cube(const Decomposition& d, const WhitneyCube& c, std::span<const double> x, int k) {
  if (!enlarged_cube_contains(c, x)) return TaylorValue(x.size(), k);
  const PartitionAt p = partition_at(d, x, k);
  for (std::size_t i = 0; i < p.cubes.size(); ++i)
    if (p.cubes[i] == c) return p.phi[i];
  // x in D_C but C not found among the supporting cubes: C is not in W
  return TaylorValue(x.size(), k);
}

}  // namespace whitney
