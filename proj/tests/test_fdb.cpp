#include <catch_amalgamated.hpp>

#include <random>
#include <set>
#include <thread>

#include <whitney/fdb.hpp>

#include "support.hpp"

using namespace whitney;
using testing::rel_err;

namespace {

long long stirling2(int k, int j) {
  // S(k, j) = j S(k-1, j) + S(k-1, j-1)
  std::vector<std::vector<long long>> s(static_cast<std::size_t>(k) + 1, std::vector<long long>(static_cast<std::size_t>(k) + 1, 0));
  s[0][0] = 1;
  for (int a = 1; a <= k; ++a)
    for (int b = 1; b <= a; ++b)
      s[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
          b * s[static_cast<std::size_t>(a) - 1][static_cast<std::size_t>(b)] + s[static_cast<std::size_t>(a) - 1][static_cast<std::size_t>(b) - 1];
  return s[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
}

VectorExpr random_map(std::mt19937_64& rng, std::size_t s, std::size_t t, int degree) {
  std::vector<std::string> src;
  std::uniform_int_distribution<int> kind(0, 3);
  for (std::size_t i = 0; i < t; ++i) {
    std::string e = testing::random_poly(rng, s, degree, 4).expr();
    switch (kind(rng)) {
      case 0: e = "sin(" + e + ")"; break;
      case 1: e = "exp(0.3*(" + e + "))"; break;
      default: break;
    }
    src.push_back(e);
  }
  return VectorExpr::parse(src, s);
}

double max_rel(const Jet& a, const Jet& b) {
  REQUIRE(a.size() == b.size());
  double r = 0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    auto x = a.raw(p), y = b.raw(p);
    for (std::size_t i = 0; i < x.size(); ++i) r = std::max(r, rel_err(x[i], y[i]));
  }
  return r;
}

}  // namespace

TEST_CASE("set partitions are counted by Stirling numbers", "[fdb]") {
  CHECK(set_partitions(3, 2).size() == 3);
  CHECK(set_partitions(4, 2).size() == 7);
  auto single = set_partitions(5, 5);
  REQUIRE(single.size() == 1);
  for (std::size_t b = 0; b < 5; ++b) CHECK(single[0][b] == std::vector<int>{static_cast<int>(b)});

  for (int k = 1; k <= 8; ++k)
    for (int j = 1; j <= k; ++j) {
      const auto parts = set_partitions(k, j);
      CHECK(static_cast<long long>(parts.size()) == stirling2(k, j));
      std::set<SetPartition> distinct(parts.begin(), parts.end());
      CHECK(distinct.size() == parts.size());
      for (const auto& p : parts) {
        std::vector<int> seen(static_cast<std::size_t>(k), 0);
        int prev_min = -1;
        for (const auto& block : p) {
          REQUIRE_FALSE(block.empty());
          CHECK(block.front() > prev_min);
          prev_min = block.front();
          for (int e : block) ++seen[static_cast<std::size_t>(e)];
        }
        for (int c : seen) CHECK(c == 1);
      }
    }
  CHECK_THROWS_AS(set_partitions(9, 2), InputError);
  CHECK_THROWS_AS(set_partitions(3, 4), InputError);
  CHECK_THROWS_AS(set_partitions(3, 0), InputError);
}

TEST_CASE("second derivative table in one variable", "[fdb]") {
  const auto t = build_table(MultiIndex{2}, 1);
  const auto& p1 = t.terms(MultiIndex{1});
  REQUIRE(p1.size() == 1);
  CHECK(p1[0].coef == 1);
  REQUIRE(p1[0].factors.size() == 1);
  CHECK(p1[0].factors[0].gamma == MultiIndex{2});
  const auto& p2 = t.terms(MultiIndex{2});
  REQUIRE(p2.size() == 1);
  CHECK(p2[0].factors.size() == 2);
  CHECK(p2[0].factors[0].gamma == MultiIndex{1});
  CHECK(t.terms(MultiIndex{0}).empty());
  CHECK(t.str() == "p[(2),(0)] = 0\np[(2),(1)] = 1 * g^(2)_0\np[(2),(2)] = 1 * g^(1)_0 * g^(1)_0\n");

  const auto z = build_table(MultiIndex{0, 0}, 2);
  REQUIRE(z.terms(MultiIndex{0, 0}).size() == 1);
  CHECK(z.terms(MultiIndex{0, 0})[0].coef == 1);
  CHECK(z.terms(MultiIndex{0, 0})[0].factors.empty());
  CHECK(z.all().size() == 1);

  // third derivative: g''' f' + 3 g' g'' f'' + g'^3 f'''
  const auto c = build_table(MultiIndex{3}, 1);
  REQUIRE(c.terms(MultiIndex{2}).size() == 1);
  CHECK(c.terms(MultiIndex{2})[0].coef == 3);
  CHECK_THROWS_AS(build_table(MultiIndex{9}, 1), InputError);
  CHECK_THROWS_AS(build_table(MultiIndex{5, 4}, 1), InputError);
}

TEST_CASE("table monomial multiplicity matches partition enumeration", "[fdb]") {
  for (std::size_t s = 1; s <= 3; ++s)
    for (std::size_t t = 1; t <= 3; ++t)
      for (const auto& alpha : enumerate_upto(s, 4)) {
        const int k = alpha.order();
        if (k == 0) continue;
        const auto table = build_table(alpha, t);
        long long total = 0;
        for (const auto& [beta, monos] : table.all()) {
          CHECK(beta.order() >= 1);
          CHECK(beta.order() <= k);
          for (const auto& m : monos) {
            total += m.coef;
            CHECK(static_cast<int>(m.factors.size()) == beta.order());
            MultiIndex sum(s);
            for (const auto& f : m.factors) sum = sum + f.gamma;
            CHECK(sum == alpha);
          }
        }
        long long want = 0;
        for (int j = 1; j <= k; ++j) {
          long long tj = 1;
          for (int i = 0; i < j; ++i) tj *= static_cast<long long>(t);
          want += stirling2(k, j) * tj;
        }
        CHECK(total == want);
      }
}

TEST_CASE("chain_derivative small cases", "[fdb]") {
  const std::string f1[] = {"x0^2"}, g1[] = {"x0^2"};
  const auto f = VectorExpr::parse(f1, 1), g = VectorExpr::parse(g1, 1);
  const double one[] = {1.0};
  CHECK(chain_derivative(f, g, MultiIndex{2}, one)[0] == Catch::Approx(12.0).epsilon(1e-14));
  CHECK(chain_derivative(f, g, MultiIndex{0}, one)[0] == 1.0);

  const std::string h[] = {"sin(x0)*x1", "exp(x0 - x1)"};
  const auto F = VectorExpr::parse(h, 2);
  const double x[] = {0.3, -0.7};
  const auto id = VectorExpr::identity(2);
  for (const auto& a : enumerate_upto(2, 4)) {
    const auto got = chain_derivative(F, id, a, x);
    const auto ts = F.taylor(x, 4);
    for (std::size_t c = 0; c < 2; ++c) CHECK(rel_err(got[c], ts[c].derivative(a)) < 1e-14);
  }
}

TEST_CASE("chain_derivative agrees with Taylor arithmetic on the composition", "[fdb]") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> dim(1, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t s = dim(rng), t = dim(rng), m = dim(rng);
    const auto g = random_map(rng, s, t, 3);
    const auto f = random_map(rng, t, m, 3);
    const auto x = testing::random_point(rng, s, -1.0, 1.0);
    const auto all = enumerate_upto(s, 4);
    const auto& alpha = all[std::uniform_int_distribution<std::size_t>(0, all.size() - 1)(rng)];
    const auto got = chain_derivative(f, g, alpha, x);
    const auto want = f.compose(g).taylor(x, alpha.order());
    for (std::size_t c = 0; c < m; ++c) CHECK(rel_err(got[c], want[c].derivative(alpha)) < 1e-10);
  }
}

TEST_CASE("pullback of an induced jet is the induced jet of the composition", "[fdb]") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t s = 1 + trial % 3, t = 1 + (trial / 3) % 3;
    const auto g = random_map(rng, s, t, 2);
    const auto F = random_map(rng, t, 2, 3);
    std::vector<Point> A, B;
    for (int i = 0; i < 4; ++i) {
      A.push_back(testing::random_point(rng, s, -1, 1));
      B.push_back(g.eval(A.back()));
    }
    const int k = 1 + trial % 4;
    const Jet fb = jet_from_expr(F, B, k);
    const Jet pulled = jet_pullback(g, fb, A);
    const Jet direct = jet_from_expr(F.compose(g), A, k);
    CHECK(max_rel(pulled, direct) < 1e-10);
    for (std::size_t p = 0; p < A.size(); ++p) CHECK(pulled.id(p) == fb.id(p));
  }
}

TEST_CASE("identity pullback is exact and pullback is linear", "[fdb]") {
  std::mt19937_64 rng(21);
  for (std::size_t n = 1; n <= 3; ++n) {
    const Jet f = testing::random_jet(rng, n, 3, 2, 6);
    const Jet g = [&] {
      Jet h = combine(0.0, f, 1.0, f);
      for (std::size_t p = 0; p < h.size(); ++p)
        for (auto& v : h.raw(p)) v = std::uniform_real_distribution<double>(-1, 1)(rng);
      return h;
    }();
    const Jet same = jet_pullback(VectorExpr::identity(n), f, f.points());
    for (std::size_t p = 0; p < f.size(); ++p) {
      CHECK(same.id(p) == f.id(p));
      for (std::size_t i = 0; i < f.raw(p).size(); ++i) CHECK(same.raw(p)[i] == f.raw(p)[i]);
    }
    std::vector<std::string> src;
    for (std::size_t i = 0; i < n; ++i) src.push_back("x" + std::to_string(i) + " + 0.2*x" + std::to_string((i + 1) % n) + "^2");
    const auto map = VectorExpr::parse(src, n);
    // sources chosen so that map(A) hits the jet points: invert numerically is
    // awkward, so pull back along the map from points whose images we store
    std::vector<Point> A;
    for (std::size_t p = 0; p < f.size(); ++p) A.push_back(testing::random_point(rng, n, -1, 1));
    Jet fi(n, 3, 2), gi(n, 3, 2);
    for (std::size_t p = 0; p < A.size(); ++p) {
      const auto y = map.eval(A[p]);
      fi.add_point(f.id(p), y);
      gi.add_point(f.id(p), y);
      std::copy(f.raw(p).begin(), f.raw(p).end(), fi.raw(p).begin());
      std::copy(g.raw(p).begin(), g.raw(p).end(), gi.raw(p).begin());
    }
    const Jet lhs = jet_pullback(map, combine(2.5, fi, -0.75, gi), A);
    const Jet rhs = combine(2.5, jet_pullback(map, fi, A), -0.75, jet_pullback(map, gi, A));
    CHECK(max_rel(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("pullback is functorial", "[fdb]") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> dim(1, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t s = dim(rng), t = dim(rng), u = dim(rng);
    const auto g = random_map(rng, s, t, 2);
    const auto h = random_map(rng, t, u, 2);
    std::vector<Point> A, B, C;
    for (int i = 0; i < 3; ++i) {
      A.push_back(testing::random_point(rng, s, -1, 1));
      B.push_back(g.eval(A.back()));
      C.push_back(h.eval(B.back()));
    }
    const int k = 1 + trial % 4;
    Jet f(u, k, 2);
    for (std::size_t p = 0; p < C.size(); ++p) {
      f.add_point("q" + std::to_string(p), C[p]);
      for (auto& v : f.raw(p)) v = std::uniform_real_distribution<double>(-1, 1)(rng);
    }
    const Jet two_step = jet_pullback(g, jet_pullback(h, f, B), A);
    const Jet one_step = jet_pullback(h.compose(g), f, A);
    CHECK(max_rel(two_step, one_step) < 1e-9);
  }
}

TEST_CASE("product embedding round trip", "[fdb]") {
  std::mt19937_64 rng(41);
  const Jet f = testing::random_jet(rng, 2, 3, 2, 5);
  const std::vector<Point> B = {{0.5}, {-1.25}, {3.0}};
  const Jet prod = product_jet(f, B);
  CHECK(prod.size() == 15);
  CHECK(prod.dim() == 3);
  // derivatives along the second factor vanish
  for (std::size_t p = 0; p < prod.size(); ++p)
    for (std::size_t a = 0; a < prod.indices().size(); ++a)
      if (prod.indices()[a][2] > 0)
        for (double v : prod.value(p, a)) CHECK(v == 0.0);
  for (const auto& b : B) {
    const Jet back = jet_pullback(inclusion_map(2, b), prod, f.points(), f.ids());
    for (std::size_t p = 0; p < f.size(); ++p)
      for (std::size_t i = 0; i < f.raw(p).size(); ++i) CHECK(back.raw(p)[i] == f.raw(p)[i]);
  }
}

TEST_CASE("unmatched image points are rejected", "[fdb]") {
  Jet f(1, 1, 1);
  f.add_point("a", {1.0});
  const std::string g[] = {"x0 + 1e-9"};
  const std::vector<Point> A = {{1.0}};
  CHECK_THROWS_AS(jet_pullback(VectorExpr::parse(g, 1), f, A), InputError);
  const std::string close[] = {"x0 + 1e-13"};
  CHECK_NOTHROW(jet_pullback(VectorExpr::parse(close, 1), f, A));
}

TEST_CASE("concurrent table builds agree", "[fdb]") {
  const MultiIndex alpha{2, 1, 1};
  std::vector<std::string> out(4);
  std::vector<std::thread> th;
  for (std::size_t i = 0; i < out.size(); ++i) th.emplace_back([&, i] { out[i] = fdb_table(alpha, 3)->str(); });
  for (auto& t : th) t.join();
  for (const auto& s : out) CHECK(s == out[0]);
  CHECK(fdb_table(alpha, 3).get() == fdb_table(alpha, 3).get());
}
