#pragma once

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <whitney/expr.hpp>
#include <whitney/multiindex.hpp>

namespace testing {

using whitney::MultiIndex;

inline double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

/// Sparse polynomial with analytic derivatives; the oracle for anything that
/// differentiates through Taylor arithmetic.
struct Poly {
  std::size_t n = 1;
  std::map<MultiIndex, double> terms;

  std::string expr() const {
    std::string s;
    for (const auto& [e, c] : terms) {
      if (!s.empty()) s += " + ";
      s += "(" + whitney::format_double(c) + ")";
      for (std::size_t i = 0; i < n; ++i)
        if (e[i] > 0) s += " * x" + std::to_string(i) + "^" + std::to_string(e[i]);
    }
    return s.empty() ? "0" : s;
  }

  double deriv(const MultiIndex& a, const std::vector<double>& x) const {
    double r = 0.0;
    for (const auto& [e, c] : terms) {
      if (!a.leq(e)) continue;
      double t = c;
      for (std::size_t i = 0; i < n; ++i) {
        for (int p = 0; p < a[i]; ++p) t *= e[i] - p;
        t *= std::pow(x[i], e[i] - a[i]);
      }
      r += t;
    }
    return r;
  }

  double eval(const std::vector<double>& x) const { return deriv(MultiIndex(n), x); }
};

inline Poly random_poly(std::mt19937_64& rng, std::size_t n, int degree, int nterms = 5) {
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  const auto all = whitney::enumerate_upto(n, degree);
  std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
  Poly p;
  p.n = n;
  for (int t = 0; t < nterms; ++t) p.terms[all[pick(rng)]] += coef(rng);
  return p;
}

inline std::vector<double> random_point(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

}  // namespace testing

#include <whitney/jet.hpp>

namespace testing {

/// Jet with independent random values (not induced by any function).
inline whitney::Jet random_jet(std::mt19937_64& rng, std::size_t n, int k, std::size_t m, std::size_t npts,
                               double spread = 2.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  whitney::Jet j(n, k, m);
  while (j.size() < npts) {
    auto x = random_point(rng, n, -spread, spread);
    if (j.find_exact(x)) continue;
    const auto p = j.add_point("p" + std::to_string(j.size()), x);
    for (double& v : j.raw(p)) v = u(rng);
  }
  return j;
}

}  // namespace testing
