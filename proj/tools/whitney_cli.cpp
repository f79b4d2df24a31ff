// whitney: command-line front end for the extension library.
//
// Exit codes: 0 ok, 1 suite failure, 2 input error, 3 numeric error.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <whitney/atlas.hpp>
#include <whitney/decomp.hpp>
#include <whitney/extend.hpp>
#include <whitney/fdb.hpp>
#include <whitney/io.hpp>
#include <whitney/parallel.hpp>
#include <whitney/verify.hpp>

namespace {

using namespace whitney;
using io::json;

enum Exit { OK = 0, SUITE_FAILED = 1, BAD_INPUT = 2, NUMERIC = 3 };

struct Options {
  std::string input, out, grid, derivs, schedule, box, alpha, chart, suite;
  std::optional<int> k;
  int max_level = DEFAULT_MAX_LEVEL;
  std::optional<double> tol;
  std::size_t target_dim = 1, samples = 1000, limit = 1'000'000;
  unsigned threads = 0;
};

void emit(const Options& o, const std::string& text) {
  if (o.out.empty() || o.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw InputError("cannot write '" + o.out + "'");
  f << text;
}

std::string point_str(std::span<const double> x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "," : "") + format_double(x[i]);
  return s + ")";
}

std::vector<std::string> numbered(const std::string& stem, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

/// Rows of x..., F..., d^alpha F... for each grid point, evaluated in parallel.
template <class Eval>
std::string derivative_csv(const std::vector<Point>& grid, std::size_t n, std::size_t m,
                           const std::vector<MultiIndex>& derivs, unsigned threads, Eval&& eval) {
  std::vector<std::string> header = numbered("x", n);
  for (auto& h : numbered("F", m)) header.push_back(h);
  for (const auto& a : derivs)
    for (std::size_t c = 0; c < m; ++c) header.push_back("d" + io::key(a) + "F" + std::to_string(c));
  std::vector<MultiIndex> all = {MultiIndex(n)};
  for (const auto& a : derivs) {
    if (a.size() != n) throw InputError("derivative " + io::key(a) + " does not match dimension " + std::to_string(n));
    all.push_back(a);
  }
  std::vector<std::vector<double>> rows(grid.size());
  parallel_for(
      grid.size(),
      [&](std::size_t i) {
        std::vector<Vec> d;
        try {
          d = eval(grid[i], all);
        } catch (const NumericError& e) {
          throw NumericError(std::string(e.what()) + " at x = " + point_str(grid[i]));
        }
        auto& row = rows[i];
        row = grid[i];
        for (const auto& v : d) row.insert(row.end(), v.begin(), v.end());
      },
      threads);
  io::Csv csv(header);
  for (const auto& r : rows) csv.row(r);
  return csv.str();
}

int cmd_decompose(const Options& o) {
  const json j = io::read_json(o.input);
  const ClosedSet a = io::set_from_json(j);
  if (o.box.empty()) throw InputError("decompose needs --box lo:hi,...");
  std::vector<double> lo, hi;
  {
    std::stringstream ss(o.box);
    std::string part;
    while (std::getline(ss, part, ',')) {
      const auto colon = part.find(':');
      if (colon == std::string::npos) throw InputError("bad box axis '" + part + "', expected lo:hi");
      lo.push_back(io::parse_doubles(part.substr(0, colon))[0]);
      hi.push_back(io::parse_doubles(part.substr(colon + 1))[0]);
      if (!(lo.back() <= hi.back())) throw InputError("bad box axis '" + part + "'");
    }
  }
  if (lo.size() != a.dim()) throw InputError("box has " + std::to_string(lo.size()) + " axes, the set has dimension " +
                                             std::to_string(a.dim()));
  const Decomposition d(a, o.max_level);
  const auto cubes = d.cubes_in_box(lo, hi, o.limit);
  const std::size_t n = a.dim();
  std::vector<std::string> header = {"level"};
  for (auto& h : numbered("corner", n)) header.push_back(h);
  for (auto& h : numbered("center", n)) header.push_back(h);
  header.push_back("side");
  header.push_back("distance");
  for (auto& h : numbered("anchor", n)) header.push_back(h);
  io::Csv csv(header);
  for (const auto& c : cubes) {
    std::vector<std::string> row = {std::to_string(c.level)};
    for (auto z : c.corner) row.push_back(std::to_string(z));
    for (double v : c.center()) row.push_back(format_double(v));
    row.push_back(format_double(c.side()));
    row.push_back(format_double(d.cube_distance(c)));
    for (double v : d.anchor(c)) row.push_back(format_double(v));
    csv.row_strings(row);
  }
  emit(o, csv.str());
  return OK;
}

int cmd_extend(const Options& o) {
  const Jet f = io::jet_from_json(io::read_json(o.input), o.k);
  std::optional<DegreeSchedule> sched;
  if (!o.schedule.empty()) sched = DegreeSchedule(io::parse_doubles(o.schedule));
  const Extension e(f, o.max_level, sched);
  if (o.grid.empty()) throw InputError("extend needs --grid lo:hi:step,...");
  const auto grid = io::parse_grid(o.grid, f.dim());
  const auto derivs = o.derivs.empty() ? std::vector<MultiIndex>{} : io::parse_multi_list(o.derivs);
  emit(o, derivative_csv(grid, f.dim(), f.outdim(), derivs, o.threads,
                         [&](const Point& x, const std::vector<MultiIndex>& all) { return e.eval_derivs(x, all); }));
  return OK;
}

int cmd_check_jet(const Options& o) {
  const Jet f = io::jet_from_json(io::read_json(o.input), o.k);
  const int k = f.order();
  std::string s;
  s += "dim " + std::to_string(f.dim()) + "\n";
  s += "order " + std::to_string(k) + "\n";
  s += "outdim " + std::to_string(f.outdim()) + "\n";
  s += "points " + std::to_string(f.size()) + "\n";
  const double diam = diameter(f);
  s += "diameter " + format_double(diam) + "\n";
  s += "seminorm' " + format_double(seminorm_prime(f, k, Q_MAX)) + "\n";
  s += "seminorm'' " + format_double(seminorm_dprime(f, k, Q_MAX)) + "\n";
  s += "seminorm " + format_double(seminorm(f, k, Q_MAX)) + "\n";
  s += "modulus " + format_double(diam > 0 ? whitney_modulus(f, k, 2 * diam) : 0.0) + "\n";
  emit(o, s);
  return OK;
}

int cmd_fdb(const Options& o) {
  if (o.alpha.empty()) throw InputError("fdb needs --alpha, e.g. \"(2)\"");
  const MultiIndex alpha = parse_multi_index(o.alpha);
  emit(o, build_table(alpha, o.target_dim).str());
  return OK;
}

int cmd_pullback(const Options& o) {
  const json j = io::read_json(o.input);
  if (!j.is_object() || !j.contains("map") || !j.contains("points") || !j.contains("jet"))
    throw InputError("pullback input needs \"map\", \"points\" and \"jet\"");
  const Jet f = io::jet_from_json(j.at("jet"), o.k);
  std::vector<Point> A;
  std::vector<std::string> ids;
  bool named = false;
  for (std::size_t i = 0; i < j.at("points").size(); ++i) {
    const json& p = j.at("points")[i];
    auto [id, x] = io::detail::id_point(p, i, "pullback");
    named |= p.is_object() && p.contains("id");
    ids.push_back(id);
    A.push_back(std::move(x));
  }
  if (A.empty()) throw InputError("pullback needs source points");
  const auto map = VectorExpr::parse(io::detail::strings(j.at("map"), "pullback map"), A[0].size());
  const Jet g = jet_pullback(map, f, A, named ? std::span<const std::string>(ids) : std::span<const std::string>{},
                             o.tol.value_or(1e-12));
  emit(o, io::jet_to_json(g).dump(2) + "\n");
  return OK;
}

int cmd_manifold_extend(const Options& o) {
  const auto file = io::atlas_from_json(io::read_json(o.input), o.k);
  if (file.pou.empty()) throw InputError("atlas file has no \"pou\"");
  const ManifoldExtension F(file.jet, file.atlas, file.pou, o.max_level);
  const std::string chart = o.chart.empty() ? file.atlas.charts().front().id : o.chart;
  file.atlas.chart(chart);
  if (o.grid.empty()) throw InputError("manifold-extend needs --grid lo:hi:step,...");
  const auto grid = io::parse_grid(o.grid, file.atlas.dim());
  const auto derivs = o.derivs.empty() ? std::vector<MultiIndex>{} : io::parse_multi_list(o.derivs);
  emit(o, derivative_csv(grid, file.atlas.dim(), file.jet.outdim(), derivs, o.threads,
                         [&](const Point& x, const std::vector<MultiIndex>& all) { return F.eval_derivs(chart, x, all); }));
  return OK;
}

int cmd_verify(const Options& o) {
  const json j = io::read_json(o.input);
  verify::Report r;
  const std::string& s = o.suite;
  if (s == "partition" || s == "lemma-l") {
    const ClosedSet a = io::set_from_json(j);
    if (s == "partition") {
      int k = o.k.value_or(2);
      if (!o.k && (j.contains("order") || j.contains("induce"))) k = io::jet_from_json(j).order();
      r = verify::partition_suite(a, k, o.samples, o.tol.value_or(1e-11), o.max_level);
    } else {
      r = verify::lemma_l_suite(a, o.samples, o.max_level);
    }
  } else if (s == "extension") {
    r = verify::extension_suite(io::jet_from_json(j, o.k), std::min<std::size_t>(o.samples, 200), o.tol.value_or(1e-3),
                                o.max_level);
  } else if (s == "jet") {
    r = verify::jet_suite(io::jet_from_json(j, o.k));
  } else if (s == "correspondence" || s == "manifold") {
    const auto file = io::atlas_from_json(j, o.k);
    if (s == "correspondence") {
      r = verify::correspondence_suite(file.jet, file.atlas, o.tol.value_or(1e-9));
    } else {
      if (file.pou.empty()) throw InputError("atlas file has no \"pou\"");
      r = verify::manifold_suite(file.jet, file.atlas, file.pou, o.tol.value_or(1e-8), o.max_level);
    }
  } else {
    throw InputError("unknown suite '" + s +
                     "' (partition, lemma-l, extension, jet, correspondence, manifold)");
  }
  std::cout << r.text();
  if (!o.out.empty()) emit(o, r.to_json().dump(2) + "\n");
  return r.pass() ? OK : SUITE_FAILED;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Whitney extension of vector-valued jets"};
  app.require_subcommand(1);
  Options o;

  auto input = [&](CLI::App* c) { c->add_option("--input,-i", o.input, "input JSON file")->required(); };
  auto out = [&](CLI::App* c) { c->add_option("--out,-o", o.out, "output file (default stdout)"); };
  auto level = [&](CLI::App* c) { c->add_option("--max-level", o.max_level, "finest dyadic level")->check(CLI::Range(0, 60)); };
  auto order = [&](CLI::App* c) { c->add_option("--k", o.k, "jet order for induced jets")->check(CLI::Range(0, 16)); };
  auto tol = [&](CLI::App* c) { c->add_option("--tol", o.tol, "tolerance override"); };
  auto grid = [&](CLI::App* c) {
    c->add_option("--grid", o.grid, "query grid lo:hi:step per axis, comma separated");
    c->add_option("--derivs", o.derivs, "extra derivative columns, e.g. \"(1,0) (0,1)\"");
    c->add_option("--threads", o.threads, "worker threads (0: all cores)");
  };

  auto* dec = app.add_subcommand("decompose", "list the Whitney cubes meeting a box");
  input(dec), out(dec), level(dec), tol(dec);
  dec->add_option("--box", o.box, "box lo:hi per axis, comma separated");
  dec->add_option("--limit", o.limit, "maximum number of cubes");

  auto* ext = app.add_subcommand("extend", "evaluate the extension on a grid");
  input(ext), out(ext), level(ext), order(ext), tol(ext), grid(ext);
  ext->add_option("--schedule", o.schedule, "adaptive degree thresholds d1,d2,...");

  auto* chk = app.add_subcommand("check-jet", "validate a jet file and print its seminorms");
  input(chk), out(chk), order(chk), tol(chk);

  auto* fdb = app.add_subcommand("fdb", "print the Faa di Bruno polynomials p[alpha,beta]");
  out(fdb), tol(fdb);
  fdb->add_option("--alpha", o.alpha, "multi-index, e.g. \"(2,1)\"");
  fdb->add_option("--target-dim,-t", o.target_dim, "dimension of the inner map's target")->check(CLI::Range(1, 8));

  auto* pb = app.add_subcommand("pullback", "pull a jet back along a map");
  input(pb), out(pb), order(pb), tol(pb);

  auto* man = app.add_subcommand("manifold-extend", "evaluate the manifold extension in one chart");
  input(man), out(man), level(man), order(man), tol(man), grid(man);
  man->add_option("--chart", o.chart, "chart of the query coordinates");

  auto* ver = app.add_subcommand("verify", "run a property suite");
  input(ver), out(ver), level(ver), order(ver), tol(ver);
  ver->add_option("--suite", o.suite, "partition | lemma-l | extension | jet | correspondence | manifold")->required();
  ver->add_option("--samples", o.samples, "random samples per check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return BAD_INPUT;
  }

  try {
    if (dec->parsed()) return cmd_decompose(o);
    if (ext->parsed()) return cmd_extend(o);
    if (chk->parsed()) return cmd_check_jet(o);
    if (fdb->parsed()) return cmd_fdb(o);
    if (pb->parsed()) return cmd_pullback(o);
    if (man->parsed()) return cmd_manifold_extend(o);
    if (ver->parsed()) return cmd_verify(o);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return BAD_INPUT;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return NUMERIC;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return NUMERIC;
  }
  return BAD_INPUT;
}
