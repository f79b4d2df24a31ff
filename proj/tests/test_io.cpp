#include <catch_amalgamated.hpp>

#include <whitney/extend.hpp>
#include <whitney/io.hpp>

#include "support.hpp"

using namespace whitney;
namespace wio = whitney::io;

static const std::string SAMPLES = WHITNEY_SAMPLES_DIR;

TEST_CASE("jet json round trip keeps every value bit for bit", "[io]") {
  std::mt19937_64 rng(17);
  for (std::size_t n = 1; n <= 3; ++n) {
    const Jet f = testing::random_jet(rng, n, 2, 2, 5);
    const Jet g = wio::jet_from_json(wio::parse_json(wio::jet_to_json(f).dump()));
    REQUIRE(g.size() == f.size());
    REQUIRE(g.order() == f.order());
    for (std::size_t p = 0; p < f.size(); ++p) {
      CHECK(g.id(p) == f.id(p));
      CHECK(g.point(p) == f.point(p));
      CHECK(std::equal(f.raw(p).begin(), f.raw(p).end(), g.raw(p).begin()));
    }
  }
}

TEST_CASE("induced jet matches the expression", "[io]") {
  const Jet f = wio::jet_from_json(wio::read_json(SAMPLES + "/surface_jet.json"));
  CHECK(f.dim() == 2);
  CHECK(f.order() == 2);
  CHECK(f.outdim() == 2);
  const Jet k1 = wio::jet_from_json(wio::read_json(SAMPLES + "/surface_jet.json"), 1);
  CHECK(k1.order() == 1);
  for (std::size_t p = 0; p < k1.size(); ++p)
    for (std::size_t i = 0; i < k1.raw(p).size(); ++i) CHECK(k1.raw(p)[i] == f.raw(p)[i]);
}

TEST_CASE("explicit jet must list every multi-index", "[io]") {
  auto j = wio::parse_json(R"({"dim":1,"order":1,"outdim":1,"points":[{"id":"a","x":[0],"values":{"[0]":[0]}}]})");
  CHECK_THROWS_AS(wio::jet_from_json(j), InputError);
  j["points"][0]["values"]["[1]"] = {2.0};
  const Jet f = wio::jet_from_json(j);
  CHECK(f.value(0, 1)[0] == 2.0);
}

TEST_CASE("malformed input is an InputError", "[io]") {
  CHECK_THROWS_AS(wio::parse_json("{"), InputError);
  CHECK_THROWS_AS(wio::read_json(SAMPLES + "/does_not_exist.json"), InputError);
  CHECK_THROWS_AS(wio::set_from_json(wio::parse_json(R"({"dim":2,"points":[]})")), InputError);
  CHECK_THROWS_AS(wio::set_from_json(wio::parse_json(R"({"dim":2,"points":[[0,0],[1]]})")), InputError);
  CHECK_THROWS_AS(wio::jet_from_json(wio::parse_json(
                      R"({"dim":1,"order":0,"outdim":1,"points":[{"id":"a","x":[0],"values":{"[0]":[1]}},{"id":"a","x":[1],"values":{"[0]":[1]}}]})")),
                  InputError);
}

TEST_CASE("closed sets from points, boxes and jets", "[io]") {
  CHECK(wio::set_from_json(wio::read_json(SAMPLES + "/origin.json")).is_points());
  const auto b = wio::set_from_json(wio::read_json(SAMPLES + "/boxes.json"));
  CHECK_FALSE(b.is_points());
  CHECK(b.dim() == 3);
  CHECK(wio::set_from_json(wio::read_json(SAMPLES + "/line_jet.json")).point_list().size() == 1);
}

TEST_CASE("atlas files load charts, jets and the partition", "[io]") {
  const auto af = wio::atlas_from_json(wio::read_json(SAMPLES + "/exp_atlas.json"));
  CHECK(af.atlas.charts().size() == 2);
  CHECK(af.pou.size() == 2);
  const Jet& u = af.jet.at("u");
  const Jet& v = af.jet.at("v");
  // p4 = 2.5 lies outside u's box, p0 maps below v's box
  CHECK(u.size() == 4);
  CHECK_FALSE(u.find("p4").has_value());
  CHECK(v.size() == 4);
  CHECK_FALSE(v.find("p0").has_value());
  const auto q = v.index_of("p3");
  CHECK(v.point(q)[0] == Catch::Approx(std::exp(0.9)).epsilon(1e-15));
}

TEST_CASE("grid, multi-index and number lists", "[io]") {
  const auto g = wio::parse_grid("0:1:0.5,-1:1:1", 2);
  REQUIRE(g.size() == 9);
  CHECK(g[0] == Point{0, -1});
  CHECK(g[1] == Point{0, 0});
  CHECK(g[3] == Point{0.5, -1});
  CHECK(g[8] == Point{1, 1});
  CHECK(wio::parse_grid("0:0.3:0.1", 1).size() == 4);
  CHECK_THROWS_AS(wio::parse_grid("0:1:0.5", 2), InputError);
  CHECK_THROWS_AS(wio::parse_grid("0:1:-1", 1), InputError);
  CHECK_THROWS_AS(wio::parse_grid("0;1;1", 1), InputError);

  const auto ms = wio::parse_multi_list("(1,0) (0,2);[3,1]");
  REQUIRE(ms.size() == 3);
  CHECK(ms[1] == MultiIndex({0, 2}));
  CHECK_THROWS_AS(wio::parse_multi_list("(1,0"), InputError);

  CHECK(wio::parse_doubles("1, 2.5,-3") == std::vector<double>{1, 2.5, -3});
  CHECK_THROWS_AS(wio::parse_doubles("1,x"), InputError);
}

TEST_CASE("csv rows use round-trip formatting", "[io]") {
  wio::Csv csv({"a", "b"});
  csv.row(std::vector<double>{0.1, 1.0 / 3.0});
  const std::string s = csv.str();
  CHECK(s.starts_with("a,b\n0.1,"));
  const double back = std::stod(s.substr(s.rfind(',') + 1));
  CHECK(back == 1.0 / 3.0);
}
