#pragma once

// Property suites behind `whitney verify`. Each returns a Report with one
// line per check plus the estimated constants (c, N_k, C-hat).

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "atlas.hpp"
#include "decomp.hpp"
#include "extend.hpp"
#include "io.hpp"
#include "jet.hpp"
#include "pou.hpp"

namespace whitney::verify {

struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct Report {
  std::string suite;
  std::vector<Check> checks;
  std::map<std::string, double> constants;

  bool pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }

  /// value <= bound
  void at_most(std::string name, double value, double bound) {
    checks.push_back({std::move(name), value, bound, value <= bound});
  }

  std::string text() const {
    std::string s = "suite " + suite + "\n";
    for (const auto& c : checks)
      s += std::string(c.pass ? "  ok    " : "  FAIL  ") + c.name + ": " + format_double(c.value) + " (bound " +
           format_double(c.bound) + ")\n";
    for (const auto& [k, v] : constants) s += "  const " + k + " = " + format_double(v) + "\n";
    s += pass() ? "PASS\n" : "FAIL\n";
    return s;
  }

  io::json to_json() const {
    io::json cs = io::json::array();
    for (const auto& c : checks) cs.push_back({{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"pass", c.pass}});
    return {{"suite", suite}, {"pass", pass()}, {"checks", cs}, {"constants", constants}};
  }
};

constexpr std::uint64_t SAMPLE_SEED = 0x5eedf00dULL;

/// Query points around A: half uniform in the bounding box grown by 2, half at
/// distances 10^-u (u in [0, 4]) from a random point of A.
inline std::vector<Point> sample_points(const ClosedSet& a, std::size_t count, std::uint64_t seed = SAMPLE_SEED) {
  const std::size_t n = a.dim();
  Point lo(n, INFINITY), hi(n, -INFINITY);
  std::vector<Point> anchors;
  if (a.is_points()) {
    anchors = a.point_list();
  } else {
    for (const auto& b : a.box_list()) {
      anchors.push_back(b.lo);
      anchors.push_back(b.hi);
    }
  }
  for (const auto& p : anchors)
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss;
  std::vector<Point> out;
  while (out.size() < count) {
    Point x(n);
    if (out.size() % 2 == 0) {
      for (std::size_t i = 0; i < n; ++i) x[i] = lo[i] - 2.0 + unit(rng) * (hi[i] - lo[i] + 4.0);
    } else {
      // near A: start from an anchor (for boxes, a random point of the box)
      const std::size_t which = std::min(anchors.size() - 1, static_cast<std::size_t>(unit(rng) * anchors.size()));
      Point base = anchors[which];
      if (!a.is_points()) {
        const Box& b = a.box_list()[which / 2];
        for (std::size_t i = 0; i < n; ++i) base[i] = b.lo[i] + unit(rng) * (b.hi[i] - b.lo[i]);
      }
      double norm = 0.0;
      Point u(n);
      for (auto& v : u) {
        v = gauss(rng);
        norm += v * v;
      }
      norm = std::sqrt(norm);
      const double r = std::pow(10.0, -4.0 * unit(rng));
      for (std::size_t i = 0; i < n; ++i) x[i] = base[i] + r * u[i] / norm;
    }
    if (!a.contains(x) && a.distance(x) > 0.0) out.push_back(std::move(x));
  }
  return out;
}

/// W-cubes with x in D_C found by scanning every level, independent of the
/// neighbor shortcut.
inline std::vector<WhitneyCube> exhaustive_supporting(const Decomposition& d, std::span<const double> x) {
  std::vector<WhitneyCube> out;
  const std::size_t n = x.size();
  for (int j = 0; j <= d.max_level(); ++j) {
    const double l = std::ldexp(1.0, -j);
    std::vector<std::int64_t> from(n), to(n);
    for (std::size_t i = 0; i < n; ++i) {
      from[i] = static_cast<std::int64_t>(std::floor(x[i] / l - 1.25));
      to[i] = static_cast<std::int64_t>(std::ceil(x[i] / l + 0.25));
    }
    WhitneyCube c{j, from};
    for (;;) {
      if (enlarged_cube_contains(c, x) && d.member(c)) out.push_back(c);
      std::size_t i = 0;
      while (i < n && c.corner[i] == to[i]) c.corner[i] = from[i], ++i;
      if (i == n) break;
      ++c.corner[i];
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Sum of the partition, support, range, and the derivative-bound estimate N_j.
inline Report partition_suite(const ClosedSet& a, int k, std::size_t samples = 1000, double tol = 1e-11,
                              int max_level = DEFAULT_MAX_LEVEL) {
  Report r{"partition", {}, {}};
  const Decomposition d(a, max_level);
  const auto pts = sample_points(a, samples);
  const double near = 4.0 * std::sqrt(static_cast<double>(a.dim()));
  double residual = 0.0, range_bad = 0.0, support_bad = 0.0;
  std::vector<double> nk(static_cast<std::size_t>(k) + 1, 0.0), nk_half = nk;
  std::size_t max_cubes = 0;
  for (std::size_t s = 0; s < pts.size(); ++s) {
    const auto& x = pts[s];
    const PartitionAt p = partition_at(d, x, k);
    residual = std::max(residual, p.sum_residual());
    max_cubes = std::max(max_cubes, p.cubes.size());
    for (const auto& phi : p.phi)
      if (phi.constant() < 0.0 || phi.constant() > 1.0) range_bad += 1;
    // neighbors whose enlarged cube misses x must contribute the zero series
    for (const auto& c : d.neighbors(p.home))
      if (!enlarged_cube_contains(c, x) && !psi_cube(c, x, k).is_zero()) support_bad += 1;
    const double dist = a.distance(x);
    if (dist < near) {
      const auto& set = *IndexSet::get(a.dim(), k);
      for (const auto& phi : p.phi)
        for (std::size_t i = 0; i < set.size(); ++i) {
          const int ord = set.order_of(i);
          const double v = std::abs(phi.derivative_at(i)) * std::pow(dist, ord);
          nk[static_cast<std::size_t>(ord)] = std::max(nk[static_cast<std::size_t>(ord)], v);
          if (s < pts.size() / 2) nk_half[static_cast<std::size_t>(ord)] = std::max(nk_half[static_cast<std::size_t>(ord)], v);
        }
    }
  }
  r.at_most("sum of phi minus 1, all coefficients", residual, tol);
  r.at_most("phi values outside [0,1]", range_bad, 0);
  r.at_most("non-zero psi outside D_C", support_bad, 0);
  for (int j = 0; j <= k; ++j) {
    r.constants["N_" + std::to_string(j)] = nk[static_cast<std::size_t>(j)];
    r.constants["N_" + std::to_string(j) + " (half sample)"] = nk_half[static_cast<std::size_t>(j)];
  }
  r.constants["max supporting cubes"] = static_cast<double>(max_cubes);
  return r;
}

/// The geometric statements about W, each checked on cubes met by samples.
inline Report lemma_l_suite(const ClosedSet& a, std::size_t samples = 1000, int max_level = DEFAULT_MAX_LEVEL) {
  Report r{"lemma-l", {}, {}};
  const Decomposition d(a, max_level);
  const double n = static_cast<double>(a.dim());
  const double rn = std::sqrt(n);
  const auto pts = sample_points(a, samples);
  std::set<WhitneyCube> cubes;
  double support_mismatch = 0;
  for (const auto& x : pts) {
    const auto c = d.locate(x);
    cubes.insert(c);
    for (const auto& nb : d.neighbors(c)) cubes.insert(nb);
    if (d.supporting_cubes(x) != exhaustive_supporting(d, x)) support_mismatch += 1;
  }
  double lower_bad = 0, upper_bad = 0, ratio_bad = 0, f_bad = 0, g_bad = 0, c_max = 0;
  auto corners = [](const WhitneyCube& c) {
    std::vector<Point> out;
    const Point lo = c.lo(), hi = c.hi();
    for (std::size_t mask = 0; mask < (std::size_t{1} << lo.size()); ++mask) {
      Point p(lo.size());
      for (std::size_t i = 0; i < lo.size(); ++i) p[i] = (mask >> i) & 1 ? hi[i] : lo[i];
      out.push_back(std::move(p));
    }
    return out;
  };
  for (const auto& c : cubes) {
    const double l = c.side();
    const double d2 = d.cube_distance2(c);
    if (d2 < 16.0 * n * l * l) lower_bad += 1;
    if (c.level >= 1 && !(d2 < 100.0 * n * l * l)) upper_bad += 1;
    const auto nbs = d.neighbors(c);
    c_max = std::max(c_max, static_cast<double>(nbs.size()));
    // probe just outside every face and corner; whatever cube holds the probe
    // and touches c must have a side ratio in {1/2, 1, 2}
    const Point ctr = c.center();
    const std::size_t dirs = static_cast<std::size_t>(std::pow(3.0, n));
    for (std::size_t code = 0; code < dirs; ++code) {
      Point probe = ctr;
      std::size_t rest = code;
      bool moved = false;
      for (std::size_t i = 0; i < ctr.size(); ++i, rest /= 3) {
        const int s = static_cast<int>(rest % 3) - 1;
        probe[i] += s * (0.5 + 1.0 / 256) * l;
        moved |= s != 0;
      }
      if (!moved || a.contains(probe)) continue;
      WhitneyCube other;
      try {
        other = d.locate(probe);
      } catch (const NumericError&) {
        continue;
      }
      if (!touching(c, other)) continue;
      const int dl = other.level - c.level;
      if (dl < -1 || dl > 1) ratio_bad += 1;
    }
    const auto cc = corners(c);
    for (const auto& nb : nbs) {
      for (const auto& y : cc)
        for (const auto& ys : corners(nb))
          if (!(a.distance(y) < 2.0 * a.distance(ys))) f_bad += 1;
    }
    if (c.level >= 1) {
      auto probe = cc;
      probe.push_back(ctr);
      for (const auto& y : probe)
        if (!(a.distance(y) < 14.0 * rn * l)) g_bad += 1;
    }
  }
  r.at_most("cubes with d(C,A) < 4 sqrt(n) / 2^j", lower_bad, 0);
  r.at_most("level >= 1 cubes with d(C,A) >= 10 sqrt(n) / 2^j", upper_bad, 0);
  r.at_most("touching cubes with side ratio outside {1/2,1,2}", ratio_bad, 0);
  r.at_most("corner pairs of touching cubes with d(y,A) >= 2 d(y*,A)", f_bad, 0);
  r.at_most("points of level >= 1 cubes with d(y,A) >= 14 sqrt(n) l_C", g_bad, 0);
  r.at_most("supporting_cubes differing from the exhaustive scan", support_mismatch, 0);
  r.constants["c (max touching cubes)"] = c_max + 1;
  r.constants["cubes checked"] = static_cast<double>(cubes.size());
  return r;
}

/// Jet recovery on A, limits at distance 1e-4, and the operator-norm estimate C-hat.
inline Report extension_suite(const Jet& f, std::size_t samples = 200, double limit_factor = 1e-3,
                              int max_level = DEFAULT_MAX_LEVEL) {
  Report r{"extension", {}, {}};
  const Extension e(f, max_level);
  const int k = f.order();
  const auto alphas = enumerate_upto(f.dim(), k);
  double exact_bad = 0;
  for (std::size_t p = 0; p < f.size(); ++p) {
    const auto d = e.eval_derivs(f.point(p), alphas);
    for (std::size_t a = 0; a < alphas.size(); ++a)
      for (std::size_t c = 0; c < f.outdim(); ++c)
        if (d[a][c] != f.value(p, a)[c]) exact_bad += 1;
  }
  r.at_most("stored values not returned exactly on A", exact_bad, 0);

  const double norm = seminorm(f, k, Q_MAX);
  std::mt19937_64 rng(SAMPLE_SEED);
  std::normal_distribution<double> gauss;
  double limit_dev = 0;
  for (std::size_t p = 0; p < f.size(); ++p)
    for (int dir = 0; dir < 8; ++dir) {
      Point u(f.dim());
      double nu = 0;
      for (auto& v : u) {
        v = gauss(rng);
        nu += v * v;
      }
      Point x = f.point(p);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += 1e-4 * u[i] / std::sqrt(nu);
      const auto d = e.eval_derivs(x, alphas);
      for (std::size_t a = 0; a < alphas.size(); ++a)
        for (std::size_t c = 0; c < f.outdim(); ++c) limit_dev = std::max(limit_dev, std::abs(d[a][c] - f.value(p, a)[c]));
    }
  r.at_most("derivative deviation at distance 1e-4", limit_dev, limit_factor * (1.0 + norm));

  // C-hat: sup |d^alpha F| over samples in K (around A) per unit jet norm;
  // homogeneity is checked by re-running on 2f
  const auto pts = sample_points(ClosedSet::points(f.points()), samples);
  const Extension e2(combine(2.0, f, 0.0, f), max_level);
  double sup = 0, sup2 = 0;
  for (const auto& x : pts) {
    const auto d = e.eval_derivs(x, alphas);
    const auto d2 = e2.eval_derivs(x, alphas);
    for (std::size_t a = 0; a < alphas.size(); ++a)
      for (std::size_t c = 0; c < f.outdim(); ++c) {
        sup = std::max(sup, std::abs(d[a][c]));
        sup2 = std::max(sup2, std::abs(d2[a][c]));
      }
  }
  const double chat = norm > 0 ? sup / norm : 0.0;
  const double chat2 = norm > 0 ? sup2 / (2 * norm) : 0.0;
  r.at_most("C-hat change under scaling the jet by 2", std::abs(chat2 - chat), 1e-12 * std::max(1.0, chat));
  r.constants["C_hat"] = chat;
  r.constants["jet norm"] = norm;
  return r;
}

/// Seminorm monotonicity between orders, with the explicit constant.
inline Report jet_suite(const Jet& f) {
  Report r{"jet", {}, {}};
  const int k = f.order();
  const double diam = diameter(f);
  const double n = static_cast<double>(f.dim());
  double worst = 0;
  for (int l = 0; l <= k; ++l)
    for (int j = 0; j <= l; ++j) {
      const double m = 1.0 + (1.0 + std::pow(l + 1.0, n)) * std::pow(std::max(1.0, diam), l - j);
      const double lhs = seminorm(f, j, Q_MAX), rhs = m * seminorm(f, l, Q_MAX);
      if (rhs > 0) worst = std::max(worst, lhs / rhs);
      else if (lhs > 0) worst = INFINITY;
    }
  r.at_most("largest |f|_j / (m |f|_l) over j <= l", worst, 1.0);
  r.constants["diameter"] = diam;
  r.constants["seminorm'"] = seminorm_prime(f, k, Q_MAX);
  r.constants["seminorm''"] = seminorm_dprime(f, k, Q_MAX);
  r.constants["modulus(diam)"] = diam > 0 ? whitney_modulus(f, k, 2 * diam) : 0.0;
  return r;
}

/// Transition round trips and chart correspondence for every pair sharing points.
inline Report correspondence_suite(const AtlasJet& aj, const FiniteAtlas& atlas, double tol = 1e-9) {
  Report r{"correspondence", {}, {}};
  double rt = 0;
  for (const auto& [c, f] : aj.charts())
    for (const auto& other : atlas.charts())
      if (other.id != c) rt = std::max(rt, atlas.roundtrip_residual(c, other.id, f.points()));
  r.at_most("transition round trip on jet points", rt, 1e-9);
  const auto reports = correspondence_all(aj, atlas, tol);
  for (const auto& c : reports)
    r.at_most("correspondence " + c.phi + " <- " + c.psi + " (" + std::to_string(c.shared) + " shared)", c.residual, tol);
  if (reports.empty()) r.at_most("chart pairs sharing points", 0, -1);
  return r;
}

/// d^alpha (F o phi^-1) at the jet points against f_phi.
inline Report manifold_suite(const AtlasJet& aj, const FiniteAtlas& atlas, const std::vector<PouTerm>& pou,
                             double tol = 1e-8, int max_level = DEFAULT_MAX_LEVEL) {
  Report r{"manifold", {}, {}};
  const ManifoldExtension F(aj, atlas, pou, max_level);
  r.constants["partition deficit"] = F.deficit();
  const auto alphas = enumerate_upto(aj.dim(), aj.order());
  double worst = 0;
  for (const auto& [c, f] : aj.charts())
    for (std::size_t p = 0; p < f.size(); ++p) {
      const auto d = F.eval_derivs(c, f.point(p), alphas);
      for (std::size_t a = 0; a < alphas.size(); ++a)
        for (std::size_t i = 0; i < f.outdim(); ++i)
          worst = std::max(worst, std::abs(d[a][i] - f.value(p, a)[i]) / std::max(1.0, std::abs(f.value(p, a)[i])));
    }
  r.at_most("jet recovery in every chart", worst, tol);
  return r;
}

}  // namespace whitney::verify
