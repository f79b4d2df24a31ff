#pragma once

#include <cmath>

#include "taylor.hpp"

namespace whitney {

// Scalar traits shared by code that runs over double and TaylorValue alike.
inline double constant_of(double v) { return v; }
inline double constant_of(const TaylorValue& v) { return v.constant(); }

inline double make_constant(double, double v) { return v; }
inline TaylorValue make_constant(const TaylorValue& like, double v) { return TaylorValue::constant_like(like, v); }

/// B(u) / (B(u) + B(v)) with B(t) = exp(-1/t) for t > 0 and 0 otherwise.
///
/// Callers guarantee u + v > 0 at the expansion point. The two flat branches
/// are taken on the constant terms, so the essential singularity of B is never
/// expanded: where B(u) vanishes to infinite order the series is exactly 0,
/// where B(v) does it is exactly 1.
template <class T>
T flat_ratio(const T& u, const T& v) {
  const double u0 = constant_of(u), v0 = constant_of(v);
  if (u0 <= 0.0) return make_constant(u, 0.0);
  if (v0 <= 0.0) return make_constant(u, 1.0);
  using std::exp;
  const T bu = exp(-1.0 / u);
  const T bv = exp(-1.0 / v);
  return bu / (bu + bv);
}

/// Smooth step: 1 for t <= 0, 0 for t >= 1, strictly between on (0, 1).
template <class T>
T cutoff(const T& t) {
  return flat_ratio(1.0 - t, t);
}

}  // namespace whitney
