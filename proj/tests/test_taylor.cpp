#include <catch_amalgamated.hpp>

#include <random>

#include <whitney/expr.hpp>
#include <whitney/taylor.hpp>

#include "support.hpp"

using namespace whitney;
using Catch::Approx;

namespace {

std::vector<double> coeffs(const TaylorValue& t) { return {t.coefficients().begin(), t.coefficients().end()}; }

TaylorValue random_series(std::mt19937_64& rng, std::size_t n, int k, double c0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TaylorValue t(n, k, c0);
  for (std::size_t i = 1; i < t.size(); ++i) t[i] = u(rng);
  return t;
}

}  // namespace

TEST_CASE("seed_variable", "[taylor]") {
  const double x3[] = {3};
  CHECK(coeffs(TaylorValue::variable(x3, 0, 2)) == std::vector<double>{3, 1, 0});
  CHECK(coeffs(TaylorValue::variable(x3, 0, 0)) == std::vector<double>{3});
  const double x05[] = {0, 5};
  auto v = TaylorValue::variable(x05, 1, 1);
  CHECK(v.constant() == 5);
  CHECK(v.coefficient(MultiIndex{0, 1}) == 1);
  CHECK(v.coefficient(MultiIndex{1, 0}) == 0);
  CHECK_THROWS_AS(TaylorValue::variable(x05, 2, 1), std::out_of_range);
}

TEST_CASE("ring operations follow the spec examples", "[taylor]") {
  const double x3[] = {3};
  auto x = TaylorValue::variable(x3, 0, 2);
  CHECK(coeffs(x * x) == std::vector<double>{9, 6, 1});
  CHECK(coeffs(x * TaylorValue::constant_like(x, 1.0)) == coeffs(x));

  const double x1[] = {1};
  auto y = TaylorValue::variable(x1, 0, 2);
  auto inv = TaylorValue::constant_like(y, 1.0) / y;
  CHECK(coeffs(inv) == std::vector<double>{1, -1, 1});  // geometric series of 1/(1+h)
  CHECK_THROWS_AS(TaylorValue::constant_like(y, 1.0) / TaylorValue(1, 2, 0.0), DomainError);
}

TEST_CASE("elementary functions", "[taylor]") {
  const double z[] = {0};
  auto h = TaylorValue::variable(z, 0, 2);
  CHECK(coeffs(exp(h)) == std::vector<double>{1, 1, 0.5});
  auto s = sin(TaylorValue(1, 3, 0.0));
  for (double c : coeffs(s)) CHECK(c == 0.0);

  const double one[] = {1};
  auto l = log(TaylorValue::variable(one, 0, 3));
  CHECK(l[0] == 0.0);
  CHECK(l[1] == Approx(1.0));
  CHECK(l[2] == Approx(-0.5));
  CHECK(l[3] == Approx(1.0 / 3.0));

  CHECK_THROWS_AS(log(TaylorValue(1, 2, -1.0)), DomainError);
  CHECK_THROWS_AS(sqrt(TaylorValue(1, 2, -1.0)), DomainError);

  // sqrt(4+h) = 2 + h/4 - h^2/64 + h^3/512
  const double four[] = {4};
  auto r = sqrt(TaylorValue::variable(four, 0, 3));
  CHECK(r[0] == Approx(2.0));
  CHECK(r[1] == Approx(0.25));
  CHECK(r[2] == Approx(-1.0 / 64));
  CHECK(r[3] == Approx(1.0 / 512));

  // cos(h) = 1 - h^2/2 + h^4/24
  auto c = cos(TaylorValue::variable(z, 0, 4));
  CHECK(coeffs(c)[2] == Approx(-0.5));
  CHECK(coeffs(c)[4] == Approx(1.0 / 24));

  auto p = pow(TaylorValue::variable(one, 0, 5), 5);  // (1+h)^5
  const std::vector<double> want{1, 5, 10, 10, 5, 1};
  CHECK(coeffs(p) == want);
}

TEST_CASE("extract_derivative", "[taylor]") {
  const double x3[] = {3};
  auto x = TaylorValue::variable(x3, 0, 2);
  CHECK((x * x).derivative(MultiIndex{2}) == 2);
  CHECK((x * x).derivative(MultiIndex{0}) == 9);
  const double z[] = {0};
  auto e = exp(TaylorValue::variable(z, 0, 3));
  CHECK(e.derivative(MultiIndex{3}) == Approx(1.0));
  CHECK_THROWS_AS(e.derivative(MultiIndex{4}), std::out_of_range);
}

TEST_CASE("ring laws on random series", "[taylor][property]") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const int k = 1 + trial % 5;
    auto a = random_series(rng, n, k, 0.7);
    auto b = random_series(rng, n, k, -0.4);
    auto c = random_series(rng, n, k, 1.3);
    auto l = (a * b) * c, r = a * (b * c);
    auto d1 = a * (b + c), d2 = a * b + a * c;
    auto q = (a * b) / b;
    auto comm1 = a * b, comm2 = b * a;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(testing::rel_err(l[i], r[i]) < 1e-12);
      CHECK(testing::rel_err(d1[i], d2[i]) < 1e-12);
      CHECK(testing::rel_err(q[i], a[i]) < 1e-10);
      CHECK(testing::rel_err(comm1[i], comm2[i]) < 1e-14);
    }
  }
}

TEST_CASE("polynomial derivatives match analytic differentiation", "[taylor][property]") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const int deg = 1 + trial % 6;
    auto p = testing::random_poly(rng, n, deg, 6);
    auto e = parse(p.expr(), n);
    auto x = testing::random_point(rng, n, -1.5, 1.5);
    auto t = e.taylor(x, deg);
    for (const auto& a : enumerate_upto(n, deg)) CHECK(testing::rel_err(t.derivative(a), p.deriv(a, x)) < 1e-12);
  }
}

TEST_CASE("first derivatives agree with central differences at O(h^2)", "[taylor][property]") {
  auto e = parse("exp(sin(x0)) * cos(x0*x0) + ln(2 + x0)", 1);
  const double x0 = 0.37;
  const double xs[] = {x0};
  const double d = e.taylor(xs, 1).derivative(MultiIndex{1});
  auto fd = [&](double h) {
    const double a[] = {x0 + h}, b[] = {x0 - h};
    return (e.eval(a) - e.eval(b)) / (2 * h);
  };
  const double e1 = std::abs(fd(1e-2) - d), e2 = std::abs(fd(5e-3) - d);
  const double observed = std::log2(e1 / e2);
  CHECK(observed > 1.8);
  CHECK(observed < 2.2);
}

TEST_CASE("compose substitutes series into an expansion", "[taylor]") {
  // outer = exp expanded at c = (1), inner = sin(x) at x0 = 1 with c = sin(1)
  const double x0[] = {1.0};
  auto inner = sin(TaylorValue::variable(x0, 0, 4));
  const double c[] = {inner.constant()};
  auto outer = exp(TaylorValue::variable(c, 0, 4));
  const TaylorValue in[] = {inner};
  auto got = compose(outer, in);
  auto want = exp(sin(TaylorValue::variable(x0, 0, 4)));
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == Approx(want[i]).epsilon(1e-13));
}
