#pragma once

// JSON jet / set / atlas files and CSV output. Needs nlohmann's json.hpp on
// the include path.

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "atlas.hpp"
#include "decomp.hpp"
#include "error.hpp"
#include "expr.hpp"
#include "jet.hpp"
#include "multiindex.hpp"

namespace whitney::io {

using json = nlohmann::ordered_json;

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(e.what());
  }
}

/// "[a,b,...]" as used for JSON keys and CSV headers.
inline std::string key(const MultiIndex& a) {
  std::string s = "[";
  for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + std::to_string(a[i]);
  return s + "]";
}

namespace detail {

inline const json& field(const json& j, const char* name, const std::string& where) {
  if (!j.is_object() || !j.contains(name)) throw InputError(where + ": missing \"" + name + "\"");
  return j.at(name);
}

inline double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw InputError(where + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InputError(where + ": non-finite number");
  return d;
}

inline Point point(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw InputError(where + ": expected a non-empty coordinate array");
  Point p;
  for (const auto& c : v) p.push_back(number(c, where));
  return p;
}

inline std::vector<std::string> strings(const json& v, const std::string& where) {
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array() || v.empty()) throw InputError(where + ": expected a string or a list of strings");
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string()) throw InputError(where + ": expected strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

inline int integer(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 64)
    throw InputError(where + ": expected a small non-negative integer");
  return v.get<int>();
}

/// A point entry: either a bare coordinate array or {"id", "x"}.
inline std::pair<std::string, Point> id_point(const json& v, std::size_t index, const std::string& where) {
  if (v.is_array()) return {"p" + std::to_string(index), point(v, where)};
  const std::string w = where + " point " + std::to_string(index);
  std::string id = "p" + std::to_string(index);
  if (v.contains("id")) {
    if (!v.at("id").is_string()) throw InputError(w + ": id must be a string");
    id = v.at("id").get<std::string>();
  }
  return {id, point(field(v, "x", w), w)};
}

inline void check_dim(std::size_t n, const Point& x, const std::string& where) {
  if (x.size() != n) throw InputError(where + ": point has " + std::to_string(x.size()) + " coordinates, expected " +
                                      std::to_string(n));
}

/// Explicit points with "values" maps; every |alpha| <= k must be present.
inline Jet explicit_jet(const json& points, std::size_t n, int k, std::optional<std::size_t> m_hint,
                        const std::string& where) {
  if (!points.is_array() || points.empty()) throw InputError(where + ": \"points\" must be a non-empty list");
  const auto set = IndexSet::get(n, k);
  std::optional<std::size_t> m = m_hint;
  if (!m) {
    const auto& vals = field(points[0], "values", where);
    if (!vals.is_object() || vals.empty()) throw InputError(where + ": empty \"values\"");
    m = vals.begin()->size();
  }
  if (*m < 1) throw InputError(where + ": outdim must be >= 1");
  Jet f(n, k, *m);
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto [id, x] = id_point(points[i], i, where);
    const std::string w = where + " point '" + id + "'";
    check_dim(n, x, w);
    const std::size_t p = f.add_point(id, x);
    const auto& vals = field(points[i], "values", w);
    if (!vals.is_object()) throw InputError(w + ": \"values\" must be an object");
    std::set<std::size_t> seen;
    for (const auto& [name, v] : vals.items()) {
      const MultiIndex a = parse_multi_index(name);
      if (a.size() != n || a.order() > k) throw InputError(w + ": index " + name + " does not fit dim/order");
      const std::size_t idx = set->index_of(a);
      if (!seen.insert(idx).second) throw InputError(w + ": index " + name + " given twice");
      if (!v.is_array() || v.size() != *m) throw InputError(w + ": index " + name + " needs " + std::to_string(*m) + " values");
      for (std::size_t c = 0; c < *m; ++c) f.value(p, idx)[c] = number(v[c], w);
    }
    if (seen.size() != set->size())
      throw InputError(w + ": values for " + std::to_string(set->size() - seen.size()) + " multi-indices are missing");
  }
  return f;
}

}  // namespace detail

/// Jet spec: explicit {"dim","order","outdim","points"} or
/// {"induce": {"expr", "points"}, "order"} (order may sit inside "induce";
/// `k_override` takes precedence for induced jets).
inline Jet jet_from_json(const json& j, std::optional<int> k_override = std::nullopt) {
  const std::string where = "jet spec";
  if (!j.is_object()) throw InputError(where + ": expected an object");
  if (j.contains("induce")) {
    const json& ind = j.at("induce");
    const auto exprs = detail::strings(detail::field(ind, "expr", where), where);
    const json& pts = detail::field(ind, "points", where);
    if (!pts.is_array() || pts.empty()) throw InputError(where + ": induce needs points");
    std::optional<int> k = k_override;
    if (!k && ind.contains("order")) k = detail::integer(ind.at("order"), where);
    if (!k && j.contains("order")) k = detail::integer(j.at("order"), where);
    if (!k) throw InputError(where + ": induced jet needs an order (\"order\" or --k)");
    std::vector<Point> xs;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      auto [id, x] = detail::id_point(pts[i], i, where);
      ids.push_back(id);
      xs.push_back(std::move(x));
    }
    const std::size_t n = j.contains("dim") ? static_cast<std::size_t>(detail::integer(j.at("dim"), where)) : xs[0].size();
    for (const auto& x : xs) detail::check_dim(n, x, where);
    return jet_from_expr(VectorExpr::parse(exprs, n), xs, *k, ids);
  }
  const auto n = static_cast<std::size_t>(detail::integer(detail::field(j, "dim", where), where));
  const int k = detail::integer(detail::field(j, "order", where), where);
  std::optional<std::size_t> m;
  if (j.contains("outdim")) m = static_cast<std::size_t>(detail::integer(j.at("outdim"), where));
  if (n < 1) throw InputError(where + ": dim must be >= 1");
  return detail::explicit_jet(detail::field(j, "points", where), n, k, m, where);
}

inline json jet_to_json(const Jet& f) {
  json pts = json::array();
  for (std::size_t p = 0; p < f.size(); ++p) {
    json vals = json::object();
    for (std::size_t a = 0; a < f.indices().size(); ++a) {
      json v = json::array();
      for (double x : f.value(p, a)) v.push_back(x);
      vals[key(f.indices()[a])] = v;
    }
    pts.push_back({{"id", f.id(p)}, {"x", f.point(p)}, {"values", vals}});
  }
  return {{"dim", f.dim()}, {"order", f.order()}, {"outdim", f.outdim()}, {"points", pts}};
}

/// Closed set: {"boxes": [{"lo","hi"}]} or anything with point entries
/// (plain coordinate arrays, {"id","x"} objects, or a jet spec).
inline ClosedSet set_from_json(const json& j) {
  const std::string where = "set spec";
  if (!j.is_object()) throw InputError(where + ": expected an object");
  if (j.contains("boxes")) {
    const json& bs = j.at("boxes");
    if (!bs.is_array() || bs.empty()) throw InputError(where + ": \"boxes\" must be a non-empty list");
    std::vector<Box> boxes;
    for (const auto& b : bs)
      boxes.push_back({detail::point(detail::field(b, "lo", where), where), detail::point(detail::field(b, "hi", where), where)});
    return ClosedSet::boxes(std::move(boxes));
  }
  const json* pts = nullptr;
  if (j.contains("induce")) pts = &detail::field(j.at("induce"), "points", where);
  else pts = &detail::field(j, "points", where);
  if (!pts->is_array() || pts->empty()) throw InputError(where + ": the set is empty");
  std::vector<Point> xs;
  for (std::size_t i = 0; i < pts->size(); ++i) xs.push_back(detail::id_point((*pts)[i], i, where).second);
  if (j.contains("dim")) {
    const auto n = static_cast<std::size_t>(detail::integer(j.at("dim"), where));
    for (const auto& x : xs) detail::check_dim(n, x, where);
  }
  return ClosedSet::points(std::move(xs));
}

struct AtlasFile {
  FiniteAtlas atlas;
  AtlasJet jet;
  std::vector<PouTerm> pou;
};

/// {"dim", "order", "charts", "transitions", "jets", "pou"}; "jets" entries are
/// explicit per-chart point lists or {"chart", "induce": {"expr", "points"}}.
/// A top-level {"induce": {"chart", "expr", "points"}} induces every chart
/// from one function given in the named chart.
inline AtlasFile atlas_from_json(const json& j, std::optional<int> k_override = std::nullopt) {
  const std::string where = "atlas";
  if (!j.is_object()) throw InputError(where + ": expected an object");
  const auto n = static_cast<std::size_t>(detail::integer(detail::field(j, "dim", where), where));
  if (n < 1) throw InputError(where + ": dim must be >= 1");
  std::vector<Chart> charts;
  const json& cs = detail::field(j, "charts", where);
  if (!cs.is_array() || cs.empty()) throw InputError(where + ": \"charts\" must be a non-empty list");
  for (const auto& c : cs) {
    const json& idv = detail::field(c, "id", where);
    if (!idv.is_string()) throw InputError(where + ": chart id must be a string");
    Chart ch{idv.get<std::string>(), std::nullopt, std::nullopt, std::nullopt};
    const std::string w = where + " chart '" + ch.id + "'";
    if (c.contains("codomain")) {
      const json& cd = c.at("codomain");
      if (cd.is_string()) {
        if (cd.get<std::string>() != "all") throw InputError(w + ": codomain must be \"all\" or {\"box\": ...}");
      } else {
        const json& b = detail::field(cd, "box", w);
        if (!b.is_array() || b.size() != n) throw InputError(w + ": box needs one [lo,hi] per dimension");
        Box box;
        for (const auto& iv : b) {
          if (!iv.is_array() || iv.size() != 2) throw InputError(w + ": box interval must be [lo,hi]");
          box.lo.push_back(detail::number(iv[0], w));
          box.hi.push_back(detail::number(iv[1], w));
          if (!(box.lo.back() < box.hi.back())) throw InputError(w + ": empty box interval");
        }
        ch.codomain = std::move(box);
      }
    }
    if (c.contains("forward")) ch.forward = VectorExpr::parse(detail::strings(c.at("forward"), w), n);
    if (c.contains("inverse")) ch.inverse = VectorExpr::parse(detail::strings(c.at("inverse"), w), n);
    charts.push_back(std::move(ch));
  }
  std::vector<Transition> trans;
  if (j.contains("transitions")) {
    for (const auto& t : j.at("transitions")) {
      const json &from = detail::field(t, "from", where), &to = detail::field(t, "to", where);
      if (!from.is_string() || !to.is_string()) throw InputError(where + ": transition ends must be chart ids");
      trans.push_back({from.get<std::string>(), to.get<std::string>(),
                       VectorExpr::parse(detail::strings(detail::field(t, "map", where), where), n)});
    }
  }
  FiniteAtlas atlas(n, std::move(charts), std::move(trans));

  std::optional<int> k = k_override;
  if (!k && j.contains("order")) k = detail::integer(j.at("order"), where);

  std::optional<AtlasJet> aj;
  auto ensure = [&](std::size_t m) -> AtlasJet& {
    if (!k) throw InputError(where + ": \"order\" is required");
    if (!aj) aj.emplace(n, *k, m);
    if (aj->outdim() != m) throw InputError(where + ": chart jets disagree on outdim");
    return *aj;
  };

  if (j.contains("induce")) {
    const json& ind = j.at("induce");
    const json& base = detail::field(ind, "chart", where);
    if (!base.is_string()) throw InputError(where + ": induce chart must be a string");
    const auto F = VectorExpr::parse(detail::strings(detail::field(ind, "expr", where), where), n);
    const json& pts = detail::field(ind, "points", where);
    std::vector<std::pair<std::string, Point>> xs;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      xs.push_back(detail::id_point(pts[i], i, where));
      detail::check_dim(n, xs.back().second, where);
    }
    induce_atlas_jet(ensure(F.out_dim()), atlas, base.get<std::string>(), F, xs);
  }
  if (j.contains("jets")) {
    for (const auto& e : j.at("jets")) {
      const json& cid = detail::field(e, "chart", where);
      if (!cid.is_string()) throw InputError(where + ": jet chart must be a string");
      const std::string chart = cid.get<std::string>();
      atlas.chart(chart);
      const std::string w = where + " jet for chart '" + chart + "'";
      if (e.contains("induce")) {
        const json& ind = e.at("induce");
        const auto F = VectorExpr::parse(detail::strings(detail::field(ind, "expr", w), w), n);
        const json& pts = detail::field(ind, "points", w);
        std::vector<Point> xs;
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < pts.size(); ++i) {
          auto [id, x] = detail::id_point(pts[i], i, w);
          detail::check_dim(n, x, w);
          ids.push_back(id);
          xs.push_back(std::move(x));
        }
        AtlasJet& dst = ensure(F.out_dim());
        dst.set(chart, jet_from_expr(F, xs, dst.order(), ids));
      } else {
        if (!k) throw InputError(where + ": \"order\" is required");
        std::optional<std::size_t> m;
        if (aj) m.emplace(aj->outdim());
        Jet f = detail::explicit_jet(detail::field(e, "points", w), n, *k, m, w);
        ensure(f.outdim()).set(chart, std::move(f));
      }
    }
  }
  if (!aj) throw InputError(where + ": no jets given");

  std::vector<PouTerm> pou;
  if (j.contains("pou")) {
    for (const auto& p : j.at("pou")) {
      const json& cid = detail::field(p, "chart", where);
      if (!cid.is_string()) throw InputError(where + ": pou chart must be a string");
      const auto h = detail::strings(detail::field(p, "h", where), where);
      if (h.size() != 1) throw InputError(where + ": each bump is a single expression");
      atlas.chart(cid.get<std::string>());
      pou.push_back({cid.get<std::string>(), parse(h[0], n)});
    }
  }
  return {std::move(atlas), std::move(*aj), std::move(pou)};
}

/// CSV writer with shortest round-trip floats.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : cols_(header.size()) { row_strings(header); }

  void row(std::span<const double> values) {
    if (values.size() != cols_) throw std::logic_error("csv: row width differs from header");
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
    out_ << '\n';
  }

  void row_strings(std::span<const std::string> values) {
    if (values.size() != cols_) throw std::logic_error("csv: row width differs from header");
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << values[i];
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  std::size_t cols_;
  std::ostringstream out_;
};

/// "lo:hi:step,lo:hi:step,..." -> grid points, first coordinate slowest.
/// Inclusive of hi when it lies on the lattice (up to 1e-9 of a step).
inline std::vector<Point> parse_grid(const std::string& spec, std::size_t n) {
  std::vector<std::vector<double>> axes;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    double lo, hi, step;
    char c1, c2;
    std::istringstream ps(part);
    if (!(ps >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !(ps >> std::ws).eof())
      throw InputError("bad grid axis '" + part + "', expected lo:hi:step");
    if (!(step > 0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi))
      throw InputError("bad grid axis '" + part + "'");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    if (count > 10'000'000) throw InputError("grid axis '" + part + "' is too large");
    std::vector<double> ax;
    for (std::size_t i = 0; i < count; ++i) ax.push_back(lo + static_cast<double>(i) * step);
    axes.push_back(std::move(ax));
  }
  if (axes.size() != n)
    throw InputError("grid has " + std::to_string(axes.size()) + " axes, the jet has dimension " + std::to_string(n));
  std::vector<Point> out;
  Point x(n);
  auto rec = [&](auto&& self, std::size_t d) -> void {
    if (d == n) {
      out.push_back(x);
      return;
    }
    for (double v : axes[d]) {
      x[d] = v;
      self(self, d + 1);
    }
  };
  rec(rec, 0);
  return out;
}

/// Multi-index lists like "(1,0) (0,1)" or "[2];[1]"; every group is one index.
inline std::vector<MultiIndex> parse_multi_list(const std::string& spec) {
  std::vector<MultiIndex> out;
  std::size_t i = 0;
  while (i < spec.size()) {
    const char c = spec[i];
    if (c == '(' || c == '[') {
      const char close = c == '(' ? ')' : ']';
      const std::size_t end = spec.find(close, i);
      if (end == std::string::npos) throw InputError("unterminated multi-index in '" + spec + "'");
      out.push_back(parse_multi_index(spec.substr(i, end - i + 1)));
      i = end + 1;
    } else if (c == ' ' || c == ',' || c == ';' || c == '\t') {
      ++i;
    } else {
      throw InputError("bad multi-index list '" + spec + "'");
    }
  }
  return out;
}

/// "a,b,c" -> doubles.
inline std::vector<double> parse_doubles(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      throw InputError("bad number '" + part + "'");
    }
    if ((part.find_first_not_of(" \t", used) != std::string::npos) || !std::isfinite(v))
      throw InputError("bad number '" + part + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InputError("empty number list");
  return out;
}

}  // namespace whitney::io
