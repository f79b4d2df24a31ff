#include <catch_amalgamated.hpp>

#include <whitney/multiindex.hpp>

using namespace whitney;

TEST_CASE("order, factorial and binom on small indices", "[multiindex]") {
  CHECK(order(MultiIndex{1, 2}) == 3);
  CHECK(order(MultiIndex{0, 0, 0}) == 0);
  CHECK(order(MultiIndex{4}) == 4);

  CHECK(factorial(MultiIndex{2, 3}) == 12);
  CHECK(factorial(MultiIndex{0, 0}) == 1);
  CHECK(factorial(MultiIndex{1, 1, 1}) == 1);

  CHECK(binom(MultiIndex{2, 1}, MultiIndex{1, 0}) == 2);
  CHECK(binom(MultiIndex{3, 4}, MultiIndex{3, 4}) == 1);
  CHECK(binom(MultiIndex{1, 0}, MultiIndex{0, 2}) == 0);
  CHECK_THROWS_AS(binom(MultiIndex{1}, MultiIndex{1, 0}), std::invalid_argument);
}

TEST_CASE("factorial overflow is reported", "[multiindex]") {
  CHECK(factorial(MultiIndex{20}) == 2432902008176640000ULL);
  CHECK_THROWS_AS(factorial(MultiIndex{21}), std::overflow_error);
}

TEST_CASE("monomial uses 0^0 = 1", "[multiindex]") {
  const double x[] = {2, 3};
  CHECK(monomial(x, MultiIndex{1, 2}) == 18);
  CHECK(monomial(x, MultiIndex{0, 0}) == 1);
  const double z[] = {0, 5};
  CHECK(monomial(z, MultiIndex{0, 1}) == 5);
}

TEST_CASE("enumerate_upto is graded and starts each degree at the largest leading exponent", "[multiindex]") {
  auto e = enumerate_upto(2, 1);
  REQUIRE(e.size() == 3);
  CHECK(e[0] == MultiIndex{0, 0});
  CHECK(e[1] == MultiIndex{1, 0});
  CHECK(e[2] == MultiIndex{0, 1});

  auto one = enumerate_upto(1, 3);
  REQUIRE(one.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(one[static_cast<std::size_t>(i)] == MultiIndex{i});

  CHECK(enumerate_upto(3, 2).size() == 10);

  auto two = enumerate_upto(2, 2);
  CHECK(two[3] == MultiIndex{2, 0});
  CHECK(two[4] == MultiIndex{1, 1});
  CHECK(two[5] == MultiIndex{0, 2});
}

TEST_CASE("multi-index identities hold exhaustively for n<=4, k<=6", "[multiindex][property]") {
  for (std::size_t n = 1; n <= 4; ++n)
    for (int k = 0; k <= 6; ++k) {
      const auto all = enumerate_upto(n, k);
      CHECK(all.size() == detail::binomial(static_cast<int>(n) + k, static_cast<int>(n)));
      for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].order() <= all[i].order());
      if (k > 3) continue;
      for (const auto& a : all)
        for (const auto& b : all) {
          CHECK(order(a + b) == order(a) + order(b));
          if (b.leq(a)) CHECK(binom(a, b) * factorial(b) * factorial(a - b) == factorial(a));
        }
    }
}

TEST_CASE("IndexSet lookup and product table", "[multiindex]") {
  auto s = IndexSet::get(3, 4);
  CHECK(s == IndexSet::get(3, 4));
  for (std::size_t i = 0; i < s->size(); ++i) CHECK(s->index_of((*s)[i]) == i);
  CHECK_FALSE(s->find(MultiIndex{5, 0, 0}).has_value());
  CHECK(s->count_upto(0) == 1);
  CHECK(s->count_upto(1) == 4);
  CHECK(s->count_upto(4) == s->size());
  for (const auto& p : s->products()) CHECK((*s)[p.lhs] + (*s)[p.rhs] == (*s)[p.target]);
  // every pair with |a|+|b| <= k appears once
  std::size_t expected = 0;
  for (const auto& a : *s)
    for (const auto& b : *s)
      if (a.order() + b.order() <= 4) ++expected;
  CHECK(s->products().size() == expected);
}

TEST_CASE("parse_multi_index accepts both bracket styles", "[multiindex]") {
  CHECK(parse_multi_index("[1,0,2]") == MultiIndex{1, 0, 2});
  CHECK(parse_multi_index(" ( 2 , 1 ) ") == MultiIndex{2, 1});
  CHECK_THROWS_AS(parse_multi_index("[1,-1]"), InputError);
  CHECK_THROWS_AS(parse_multi_index("1,0"), InputError);
  CHECK_THROWS_AS(parse_multi_index("[]"), InputError);
}
