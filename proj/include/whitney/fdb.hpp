#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "expr.hpp"
#include "jet.hpp"
#include "multiindex.hpp"
#include "taylor.hpp"

namespace whitney {

constexpr int FDB_MAX_ORDER = 8;

/// Partition of {0, ..., k-1} into non-empty blocks, blocks ordered by their
/// smallest element.
using SetPartition = std::vector<std::vector<int>>;

/// All partitions of a k-set into exactly j blocks, in lexicographic order of
/// their restricted growth strings. The count is the Stirling number S(k, j).
inline std::vector<SetPartition> set_partitions(int k, int j) {
  if (k < 1 || k > FDB_MAX_ORDER || j < 1 || j > k)
    throw InputError("set_partitions needs 1 <= j <= k <= " + std::to_string(FDB_MAX_ORDER));
  std::vector<SetPartition> out;
  std::vector<int> rgs(static_cast<std::size_t>(k), 0);
  // rgs[i] <= max(rgs[0..i-1]) + 1, rgs[0] = 0
  auto rec = [&](auto&& self, int i, int mx) -> void {
    if (i == k) {
      if (mx + 1 != j) return;
      SetPartition p(static_cast<std::size_t>(j));
      for (int e = 0; e < k; ++e) p[static_cast<std::size_t>(rgs[static_cast<std::size_t>(e)])].push_back(e);
      out.push_back(std::move(p));
      return;
    }
    if (mx + 1 + (k - i) < j) return;  // not enough elements left to open the remaining blocks
    for (int b = 0; b <= std::min(mx + 1, j - 1); ++b) {
      rgs[static_cast<std::size_t>(i)] = b;
      self(self, i + 1, std::max(mx, b));
    }
  };
  rgs[0] = 0;
  rec(rec, 1, 0);
  return out;
}

/// One factor x_{gamma, i} = d^gamma g_i of a Faa di Bruno monomial.
struct FdBFactor {
  MultiIndex gamma;
  int comp = 0;
  friend auto operator<=>(const FdBFactor&, const FdBFactor&) = default;
};

struct FdBMonomial {
  long long coef = 0;
  std::vector<FdBFactor> factors;  // sorted
};

/// The polynomials p_{alpha,beta} for one alpha in N^s and target dimension t.
class FdBTable {
 public:
  FdBTable(MultiIndex alpha, std::size_t t) : alpha_(std::move(alpha)), t_(t) {
    const int k = alpha_.order();
    if (k > FDB_MAX_ORDER) throw InputError("Faa di Bruno tables are limited to |alpha| <= 8");
    if (t_ < 1) throw InputError("target dimension must be >= 1");
    const std::size_t s = alpha_.size();
    if (k == 0) {
      terms_[MultiIndex(t_)].push_back({1, {}});
      return;
    }
    // j_1 <= ... <= j_k: coordinate i repeated alpha_i times
    std::vector<std::size_t> jl;
    for (std::size_t i = 0; i < s; ++i)
      for (int r = 0; r < alpha_[i]; ++r) jl.push_back(i);

    std::map<MultiIndex, std::map<std::vector<FdBFactor>, long long>> acc;
    for (int j = 1; j <= k; ++j) {
      for (const auto& part : set_partitions(k, j)) {
        std::vector<MultiIndex> blocks;
        for (const auto& block : part) {
          MultiIndex g(s);
          for (int e : block) g[jl[static_cast<std::size_t>(e)]] += 1;
          blocks.push_back(std::move(g));
        }
        // every assignment (i_1, ..., i_j) in {0..t-1}^j
        std::vector<int> assign(static_cast<std::size_t>(j), 0);
        for (;;) {
          MultiIndex beta(t_);
          std::vector<FdBFactor> f;
          for (std::size_t b = 0; b < blocks.size(); ++b) {
            beta[static_cast<std::size_t>(assign[b])] += 1;
            f.push_back({blocks[b], assign[b]});
          }
          std::sort(f.begin(), f.end());
          acc[beta][f] += 1;
          std::size_t pos = 0;
          while (pos < assign.size() && assign[pos] == static_cast<int>(t_) - 1) assign[pos++] = 0;
          if (pos == assign.size()) break;
          ++assign[pos];
        }
      }
    }
    for (auto& [beta, monos] : acc)
      for (auto& [factors, c] : monos) terms_[beta].push_back({c, factors});
  }

  const MultiIndex& alpha() const noexcept { return alpha_; }
  std::size_t target_dim() const noexcept { return t_; }

  /// Monomials of p_{alpha,beta}; empty means the zero polynomial.
  const std::vector<FdBMonomial>& terms(const MultiIndex& beta) const {
    static const std::vector<FdBMonomial> none;
    auto it = terms_.find(beta);
    return it == terms_.end() ? none : it->second;
  }

  const std::map<MultiIndex, std::vector<FdBMonomial>>& all() const noexcept { return terms_; }

  /// p_{alpha,beta} evaluated on raw derivatives dg(i, gamma) = d^gamma g_i.
  template <class DG>
  double eval(const MultiIndex& beta, DG&& dg) const {
    double r = 0.0;
    for (const auto& m : terms(beta)) {
      double v = static_cast<double>(m.coef);
      for (const auto& f : m.factors) v *= dg(static_cast<std::size_t>(f.comp), f.gamma);
      r += v;
    }
    return r;
  }

  /// Stable text, e.g. "p[(2),(2)] = 1 * g^(1)_0 * g^(1)_0".
  std::string str() const {
    std::string out;
    for (const auto& beta : enumerate_upto(t_, alpha_.order())) {
      std::string line = "p[" + paren(alpha_) + "," + paren(beta) + "] = ";
      const auto& ms = terms(beta);
      if (ms.empty()) {
        line += "0";
      } else {
        for (std::size_t i = 0; i < ms.size(); ++i) {
          if (i) line += " + ";
          line += std::to_string(ms[i].coef);
          for (const auto& f : ms[i].factors) line += " * g^" + paren(f.gamma) + "_" + std::to_string(f.comp);
        }
      }
      out += line + "\n";
    }
    return out;
  }

  static std::string paren(const MultiIndex& a) {
    std::string s = "(";
    for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + std::to_string(a[i]);
    return s + ")";
  }

 private:
  MultiIndex alpha_;
  std::size_t t_;
  std::map<MultiIndex, std::vector<FdBMonomial>> terms_;
};

/// Shared table per (s, t, alpha); building is idempotent, so a transparent memo.
inline std::shared_ptr<const FdBTable> fdb_table(const MultiIndex& alpha, std::size_t t) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, MultiIndex>, std::shared_ptr<const FdBTable>> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({t, alpha});
    if (it != cache.end()) return it->second;
  }
  auto table = std::make_shared<const FdBTable>(alpha, t);
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(std::make_pair(t, alpha), table).first->second;
}

inline FdBTable build_table(const MultiIndex& alpha, std::size_t t) { return *fdb_table(alpha, t); }

/// Pulls the values of one jet point back through g.
///
/// g_series: expansions of g_1..g_t at the source point (order >= k);
/// fvals(beta) returns the m values f_beta(g(x)). Output is graded-lex over
/// the s-variate index set of order k, component minor.
template <class FV>
std::vector<double> pullback_values(std::span<const TaylorValue> g_series, int k, std::size_t m, FV&& fvals) {
  const std::size_t t = g_series.size();
  if (t == 0) throw InputError("pullback: empty map");
  const std::size_t s = g_series[0].dim();
  const auto out = IndexSet::get(s, k);
  std::vector<double> r(out->size() * m, 0.0);
  auto dg = [&](std::size_t i, const MultiIndex& gamma) { return g_series[i].derivative(gamma); };
  for (std::size_t a = 0; a < out->size(); ++a) {
    const auto table = fdb_table((*out)[a], t);
    for (const auto& [beta, monos] : table->all()) {
      const double p = table->eval(beta, dg);
      if (p == 0.0) continue;
      const auto fb = fvals(beta);
      for (std::size_t c = 0; c < m; ++c) r[a * m + c] += p * fb[c];
    }
  }
  return r;
}

/// The Faa di Bruno sum for d^alpha (f o g)(x).
inline Vec chain_derivative(const VectorExpr& f, const VectorExpr& g, const MultiIndex& alpha,
                            std::span<const double> x) {
  if (f.in_dim() != g.out_dim()) throw InputError("chain_derivative: f and g do not compose");
  if (alpha.size() != g.in_dim()) throw InputError("chain_derivative: alpha has wrong dimension");
  const int k = alpha.order();
  const auto gs = g.taylor(x, k);
  Point y;
  for (const auto& gi : gs) y.push_back(gi.constant());
  const auto fs = f.taylor(y, k);
  const auto table = fdb_table(alpha, g.out_dim());
  auto dg = [&](std::size_t i, const MultiIndex& gamma) { return gs[i].derivative(gamma); };
  Vec r(f.out_dim(), 0.0);
  for (const auto& [beta, monos] : table->all()) {
    const double p = table->eval(beta, dg);
    for (std::size_t c = 0; c < r.size(); ++c) r[c] += p * fs[c].derivative(beta);
  }
  return r;
}

/// Index of the jet point matching y coordinatewise within tol * max(1, |y_i|).
inline std::optional<std::size_t> match_point(const Jet& f, std::span<const double> y, double tol = 1e-12) {
  std::optional<std::size_t> best;
  double bd = INFINITY;
  for (std::size_t p = 0; p < f.size(); ++p) {
    bool ok = true;
    double d = 0;
    for (std::size_t i = 0; i < y.size() && ok; ++i) {
      const double dev = std::abs(f.point(p)[i] - y[i]);
      ok = dev <= tol * std::max(1.0, std::abs(y[i]));
      d = std::max(d, dev);
    }
    if (ok && d < bd) {
      bd = d;
      best = p;
    }
  }
  return best;
}

/// (g|_A)^* f for g given by its expansions at each point of A.
/// match[p] names the point of f's set hit by g(A[p]).
inline Jet jet_pullback_series(const std::vector<std::vector<TaylorValue>>& g_at, const Jet& f,
                               std::span<const Point> A, std::span<const std::size_t> match,
                               std::span<const std::string> ids) {
  const int k = f.order();
  const std::size_t m = f.outdim();
  const std::size_t s = A.empty() ? 1 : A[0].size();
  Jet r(s, k, m);
  for (std::size_t p = 0; p < A.size(); ++p) {
    const std::size_t q = match[p];
    auto fvals = [&](const MultiIndex& beta) { return f.value(q, beta); };
    const auto vals = pullback_values(g_at[p], k, m, fvals);
    const std::size_t idx = r.add_point(ids.empty() ? f.id(q) : ids[p], A[p]);
    std::copy(vals.begin(), vals.end(), r.raw(idx).begin());
  }
  return r;
}

/// (g|_A)^* f: A in R^s, g: R^s -> R^t, f a jet on B in R^t with g(A) in B.
/// Result ids default to the ids of the matched points of B.
inline Jet jet_pullback(const VectorExpr& g, const Jet& f, std::span<const Point> A,
                        std::span<const std::string> ids = {}, double tol = 1e-12) {
  if (g.out_dim() != f.dim()) throw InputError("pullback: map target dimension differs from the jet's");
  if (!ids.empty() && ids.size() != A.size()) throw InputError("pullback: id count mismatch");
  std::vector<std::vector<TaylorValue>> g_at;
  std::vector<std::size_t> match;
  for (const auto& a : A) {
    if (a.size() != g.in_dim()) throw InputError("pullback: source point has wrong dimension");
    g_at.push_back(g.taylor(a, f.order()));
    Point y;
    for (const auto& gi : g_at.back()) y.push_back(gi.constant());
    const auto q = match_point(f, y, tol);
    if (!q) {
      std::string where;
      for (double v : y) where += (where.empty() ? "" : ",") + format_double(v);
      throw InputError("pullback: image point (" + where + ") is not a point of the jet");
    }
    match.push_back(*q);
  }
  return jet_pullback_series(g_at, f, A, match, ids);
}

/// Projection pi: R^s x R^t -> R^s and inclusion x -> (x, b) as maps.
inline VectorExpr projection_map(std::size_t s, std::size_t t) {
  std::vector<Expr> c;
  for (std::size_t i = 0; i < s; ++i) c.push_back(Expr::variable(i, s + t));
  return VectorExpr(std::move(c));
}

inline VectorExpr inclusion_map(std::size_t s, std::span<const double> b) {
  std::vector<Expr> c;
  for (std::size_t i = 0; i < s; ++i) c.push_back(Expr::variable(i, s));
  for (double v : b) c.push_back(Expr::number(v, s));
  return VectorExpr(std::move(c));
}

/// pi^* f on A x B: the product jet, constant in the B directions. Point ids
/// are "<a>|<b>" in row-major order.
inline Jet product_jet(const Jet& f, std::span<const Point> B, std::span<const std::string> b_ids = {}) {
  if (B.empty()) throw InputError("product_jet: empty second factor");
  const std::size_t s = f.dim(), t = B[0].size();
  std::vector<Point> pts;
  std::vector<std::string> ids;
  for (std::size_t p = 0; p < f.size(); ++p)
    for (std::size_t q = 0; q < B.size(); ++q) {
      Point x = f.point(p);
      x.insert(x.end(), B[q].begin(), B[q].end());
      pts.push_back(std::move(x));
      ids.push_back(f.id(p) + "|" + (b_ids.empty() ? std::to_string(q) : b_ids[q]));
    }
  return jet_pullback(projection_map(s, t), f, pts, ids);
}

}  // namespace whitney
