#include <catch_amalgamated.hpp>

#include <whitney/atlas.hpp>

#include "atlas_fixtures.hpp"
#include "support.hpp"

using namespace whitney;
using testing::rel_err;

namespace {

double jet_dev(const Jet& got, const Jet& want) {
  double r = 0;
  for (std::size_t p = 0; p < want.size(); ++p) {
    const auto q = got.find(want.id(p));
    REQUIRE(q);
    for (std::size_t i = 0; i < want.raw(p).size(); ++i) r = std::max(r, rel_err(got.raw(*q)[i], want.raw(p)[i]));
  }
  return r;
}

}  // namespace

TEST_CASE("induced atlas jets correspond", "[atlas]") {
  for (auto fx : {fixtures::exp_line(), fixtures::shear_plane(), fixtures::exp_line(3, true),
                  fixtures::affine_line("x0^2", 2)}) {
    const auto reports = correspondence_all(fx.jet, fx.atlas);
    CHECK_FALSE(reports.empty());
    for (const auto& r : reports) {
      CHECK(r.pass);
      CHECK(r.residual < 1e-9);
      CHECK(r.shared > 0);
    }
    for (const auto& [c, f] : fx.jet.charts()) {
      const auto self = correspondence_check(fx.jet, fx.atlas, c, c);
      CHECK(self.residual == 0.0);
    }
  }
}

TEST_CASE("perturbed chart value breaks correspondence", "[atlas]") {
  auto fx = fixtures::exp_line();
  Jet fb = fx.jet.at("b");
  fb.value(fb.index_of("p2"), MultiIndex{1})[0] += 1e-3;
  fx.jet.set("b", fb);
  const auto r = correspondence_check(fx.jet, fx.atlas, "a", "b");
  CHECK_FALSE(r.pass);
  CHECK(r.worst == "p2");
  CHECK(r.residual > 1e-4);
}

TEST_CASE("missing transitions", "[atlas]") {
  const auto base = fixtures::exp_line();
  FiniteAtlas bare(1, base.atlas.charts());
  CHECK_FALSE(bare.transition("a", "b"));
  CHECK_THROWS_AS(correspondence_check(base.jet, bare, "a", "b"), InputError);
  CHECK(transport(base.jet.at("b"), bare, "b", "a").empty());
  CHECK_THROWS_AS(FiniteAtlas(1, base.atlas.charts(), {{"a", "zz", fixtures::vexpr({"x0"}, 1)}}), InputError);
}

TEST_CASE("transitions derived from reference maps", "[atlas]") {
  std::vector<Chart> charts = {{"a", std::nullopt, fixtures::vexpr({"x0"}, 1), fixtures::vexpr({"x0"}, 1)},
                               {"d", std::nullopt, fixtures::vexpr({"2*x0"}, 1), fixtures::vexpr({"x0/2"}, 1)}};
  FiniteAtlas atlas(1, charts);
  const double x[] = {0.75};
  CHECK(atlas.transition("a", "d")->eval(x)[0] == 1.5);
  CHECK(atlas.transition("d", "a")->eval(x)[0] == 0.375);
  // the x^2 example: charts id and x -> 2x
  AtlasJet aj(1, 2, 1);
  const auto F = fixtures::vexpr({"x0^2"}, 1);
  fixtures::induce(aj, atlas, "a", F, {{"s0", {0.5}}, {"s1", {-1.25}}});
  for (const auto& r : correspondence_all(aj, atlas)) CHECK(r.residual < 1e-12);
  const std::vector<Point> pts = {{0.5}, {-1.25}, {3.0}};
  CHECK(atlas.roundtrip_residual("a", "d", pts) == 0.0);
}

TEST_CASE("transport there and back", "[atlas]") {
  for (auto fx : {fixtures::exp_line(), fixtures::shear_plane(3)}) {
    const Jet& fb = fx.jet.at("b");
    const Jet in_a = transport(fb, fx.atlas, "b", "a");
    CHECK(in_a.size() == 3);
    CHECK(jet_dev(in_a, fx.jet.at("a").restrict(in_a.ids())) < 1e-9);
    const Jet back = transport(in_a, fx.atlas, "a", "b");
    CHECK(jet_dev(back, fb.restrict(back.ids())) < 1e-9);
  }
}

TEST_CASE("identity transition transports by restriction", "[atlas]") {
  std::vector<Chart> charts = {{"a", fixtures::box({-10}, {10}), {}, {}}, {"b", fixtures::box({0}, {5}), {}, {}}};
  FiniteAtlas atlas(1, charts, {{"a", "b", fixtures::vexpr({"x0"}, 1)}, {"b", "a", fixtures::vexpr({"x0"}, 1)}});
  std::mt19937_64 rng(3);
  Jet f(1, 3, 2);
  for (double x : {-4.0, 0.5, 2.0, 7.0}) {
    f.add_point("t" + format_double(x), {x});
    for (auto& v : f.raw(f.size() - 1)) v = std::uniform_real_distribution<double>(-3, 3)(rng);
  }
  const Jet t = transport(f, atlas, "a", "b");
  REQUIRE(t.size() == 2);
  const Jet want = f.restrict(t.ids());
  for (std::size_t p = 0; p < t.size(); ++p) {
    CHECK(t.point(p) == want.point(p));
    for (std::size_t i = 0; i < want.raw(p).size(); ++i) CHECK(t.raw(p)[i] == want.raw(p)[i]);
  }
}

TEST_CASE("project then reconstruct", "[atlas]") {
  const auto fx = fixtures::exp_line(3, true);
  const std::vector<std::string> all = {"a", "b", "c"};
  const auto same = atlas_project(fx.jet, fx.atlas, all);
  for (const auto& [c, f] : fx.jet.charts()) CHECK(jet_dev(same.at(c), f) == 0.0);

  const std::vector<std::string> keep = {"a", "b"};
  const auto projected = atlas_project(fx.jet, fx.atlas, keep);
  CHECK(projected.find("c") == nullptr);
  const Jet rebuilt = reconstruct(projected, fx.atlas, "c");
  CHECK(rebuilt.size() == fx.jet.at("c").size());
  CHECK(jet_dev(rebuilt, fx.jet.at("c")) < 1e-9);

  const std::vector<std::string> only_a = {"a"};
  CHECK_THROWS_AS(atlas_project(fx.jet, fx.atlas, only_a), CoverageError);

  // two sources that disagree cannot be glued
  auto bad = projected;
  Jet fb = bad.at("b");
  fb.value(fb.index_of("p3"), std::size_t{0})[1] += 1e-3;
  bad.set("b", fb);
  CHECK_THROWS_AS(reconstruct(bad, fx.atlas, "c"), ConsistencyError);
}

TEST_CASE("projection to lower order commutes with transport", "[atlas]") {
  for (auto fx : {fixtures::exp_line(4), fixtures::shear_plane(4)}) {
    for (int l = 0; l <= 3; ++l) {
      const Jet a = transport(fx.jet.at("b"), fx.atlas, "b", "a").project(l);
      const Jet b = transport(fx.jet.at("b").project(l), fx.atlas, "b", "a");
      REQUIRE(a.size() == b.size());
      for (std::size_t p = 0; p < a.size(); ++p)
        for (std::size_t i = 0; i < a.raw(p).size(); ++i) CHECK(a.raw(p)[i] == b.raw(p)[i]);
    }
  }
}

TEST_CASE("manifold extension matches the chart jets", "[atlas]") {
  for (auto fx : {fixtures::exp_line(), fixtures::shear_plane()}) {
    const ManifoldExtension F(fx.jet, fx.atlas, fx.pou);
    CHECK(F.deficit() < 1e-12);
    const auto alphas = enumerate_upto(fx.atlas.dim(), 2);
    for (const auto& [c, f] : fx.jet.charts())
      for (std::size_t p = 0; p < f.size(); ++p) {
        const auto d = F.eval_derivs(c, f.point(p), alphas);
        for (std::size_t a = 0; a < alphas.size(); ++a)
          for (std::size_t i = 0; i < f.outdim(); ++i) CHECK(rel_err(d[a][i], f.value(p, a)[i]) < 1e-8);
      }
  }
}

TEST_CASE("single chart with h = 1 is the plain extension", "[atlas]") {
  const auto fx = fixtures::exp_line();
  FiniteAtlas one(1, {fx.atlas.chart("a")});
  AtlasJet aj(1, 2, 2);
  aj.set("a", fx.jet.at("a"));
  const ManifoldExtension F(aj, one, {{"a", parse("1", 1)}});
  const Extension E(fx.jet.at("a"));
  for (double x : {-3.0, -0.9, 0.0, 0.35, 0.95}) {
    const double p[] = {x};
    CHECK(F.eval("a", p) == E.eval(p));
  }
}

TEST_CASE("manifold extension reproduces polynomials", "[atlas]") {
  const auto fx = fixtures::affine_line("1 - 2*x0 + 0.5*x0^2", 2);
  const ManifoldExtension F(fx.jet, fx.atlas, fx.pou);
  for (int i = -30; i <= 9; ++i) {
    const double x[] = {i / 10.0};
    CHECK(rel_err(F.eval("a", x)[0], 1 - 2 * x[0] + 0.5 * x[0] * x[0]) < 1e-9);
    const double v[] = {2 * x[0] + 1 + 4.0};
    const double u = (v[0] - 1) / 2;
    CHECK(rel_err(F.eval("b", v)[0], 1 - 2 * u + 0.5 * u * u) < 1e-9);
  }
}

TEST_CASE("partition deficit and query errors", "[atlas]") {
  auto fx = fixtures::exp_line();
  std::vector<PouTerm> half = {fx.pou[0]};
  CHECK_THROWS_AS(ManifoldExtension(fx.jet, fx.atlas, half), DomainError);
  const ManifoldExtension F(fx.jet, fx.atlas, fx.pou);
  const double outside[] = {5.0};
  CHECK_THROWS_AS(F.eval("a", outside), InputError);
  CHECK_THROWS_AS(F.eval("zz", outside), InputError);
}
