#ifndef GRAPHSEG_IO_HPP
#define GRAPHSEG_IO_HPP

// File formats: data series, graph JSON mirror, segmentation JSON.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphseg/error.hpp"
#include "graphseg/format.hpp"
#include "graphseg/graph.hpp"
#include "graphseg/solver.hpp"

namespace graphseg {

using ordered_json = nlohmann::ordered_json;

/// Reads one number per line, or one CSV column when `column` is given (a
/// header name or 1-based index). A non-numeric first line is a header.
inline std::vector<double> read_series(std::istream& in, const std::string& source,
                                       const std::string& column = "") {
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  std::size_t col = 0;
  bool first = true;
  bool by_index = false;
  if (!column.empty()) {
    auto v = parse_number(column);
    by_index = v.has_value();
    if (by_index) {
      if (*v < 1 || *v != std::floor(*v))
        throw parse_error(source, 0, "column index must be a positive integer");
      col = static_cast<std::size_t>(*v) - 1;
    }
  }
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<std::string> cells = column.empty()
                                         ? std::vector<std::string>{std::string(t)}
                                         : detail::split_csv_line(t);
    if (first) {
      first = false;
      if (!column.empty() && !by_index) {
        auto it = std::find(cells.begin(), cells.end(), column);
        if (it == cells.end())
          throw parse_error(source, lineno, "no column named '" + column + "'");
        col = static_cast<std::size_t>(it - cells.begin());
        continue;
      }
      if (col < cells.size() && !parse_number(cells[col])) continue;
    }
    if (col >= cells.size())
      throw parse_error(source, lineno, "missing column " + std::to_string(col + 1));
    auto v = parse_number(cells[col]);
    if (!v || !std::isfinite(*v))
      throw parse_error(source, lineno, "not a finite number: '" + cells[col] + "'");
    out.push_back(*v);
  }
  return out;
}

inline std::vector<double> read_series_file(const std::string& path,
                                            const std::string& column = "") {
  std::ifstream in(path);
  if (!in) throw parse_error(path, 0, "cannot open file");
  return read_series(in, path, column);
}

inline std::string write_series(const std::vector<double>& y) {
  std::string out;
  for (double v : y) {
    out += shortest(v);
    out += '\n';
  }
  return out;
}

// ------------------------------------------------------------ graph JSON

namespace detail {

inline ordered_json json_number(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  return x;
}

}  // namespace detail

/// Array of row objects with the CSV column names; NA is null, infinities
/// are the strings "Inf" and "-Inf".
inline std::string write_graph_json(const Graph& g) {
  ordered_json rows = ordered_json::array();
  const double na = std::numeric_limits<double>::quiet_NaN();
  auto row = [&](const std::string& s1, const std::string& s2, const std::string& type,
                 double param, double pen, double K, double a, double mn, double mx) {
    ordered_json r;
    r["state1"] = s1;
    r["state2"] = s2.empty() ? ordered_json(nullptr) : ordered_json(s2);
    r["type"] = type;
    r["parameter"] = detail::json_number(param);
    r["penalty"] = detail::json_number(pen);
    r["K"] = detail::json_number(K);
    r["a"] = detail::json_number(a);
    r["min"] = detail::json_number(mn);
    r["max"] = detail::json_number(mx);
    rows.push_back(std::move(r));
  };
  for (const Edge& e : g.edges)
    row(e.state1, e.state2, to_string(e.type), e.parameter(), e.penalty, e.K, e.a, na, na);
  for (const auto& s : g.start_states) row(s, "", "start", na, na, na, na, na, na);
  for (const auto& s : g.end_states) row(s, "", "end", na, na, na, na, na, na);
  for (const auto& r : g.node_ranges)
    row(r.state, r.state, "node", na, na, na, na,
        std::isinf(r.min) ? na : r.min, std::isinf(r.max) ? na : r.max);
  return rows.dump(2) + "\n";
}

inline Graph read_graph_json(const std::string& text,
                             const std::string& source = "<graph.json>") {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error(source, 0, e.what());
  }
  if (doc.is_object() && doc.contains("rows")) doc = doc["rows"];
  if (!doc.is_array()) throw parse_error(source, 0, "expected an array of rows");
  // Rebuild the CSV text so both encodings share one parser.
  std::string csv(kGraphHeader);
  csv += '\n';
  const char* keys[] = {"state1", "state2", "type", "parameter", "penalty",
                        "K",      "a",      "min",  "max"};
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& r = doc[i];
    if (!r.is_object())
      throw parse_error(source, i + 1, "row " + std::to_string(i + 1) + " is not an object");
    for (int k = 0; k < 9; ++k) {
      if (k) csv += ',';
      if (!r.contains(keys[k]) || r[keys[k]].is_null()) {
        csv += "NA";
      } else if (r[keys[k]].is_string()) {
        const auto s = r[keys[k]].get<std::string>();
        if (s.find(',') != std::string::npos)
          throw parse_error(source, i + 1, "comma in field '" + std::string(keys[k]) + "'");
        csv += s;
      } else if (r[keys[k]].is_number()) {
        csv += shortest(r[keys[k]].get<double>());
      } else {
        throw parse_error(source, i + 1, "bad value for '" + std::string(keys[k]) + "'");
      }
    }
    csv += '\n';
  }
  std::istringstream in(csv);
  try {
    return read_graph(in, source);
  } catch (const parse_error& e) {
    // Line numbers of the rebuilt CSV are row numbers plus one.
    throw parse_error(source, e.line() > 1 ? e.line() - 1 : 0, e.detail());
  }
}

/// CSV graph file, or the JSON mirror when the name ends in .json.
inline Graph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error(path, 0, "cannot open file");
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  if (!json) return read_graph(in, path);
  std::stringstream ss;
  ss << in.rdbuf();
  return read_graph_json(ss.str(), path);
}

// ----------------------------------------------------- segmentation JSON

inline double round12(double x) {
  if (!std::isfinite(x)) return x;
  return std::stod(sig12(x));
}

/// JSON object with keys changepoints, states, forced, parameters,
/// globalCost; numbers carry 12 significant digits.
inline std::string segmentation_json(const Segmentation& s) {
  ordered_json j;
  j["changepoints"] = s.changepoints;
  j["states"] = s.states;
  j["forced"] = s.forced;
  ordered_json params = ordered_json::array();
  for (double p : s.parameters) params.push_back(round12(p));
  j["parameters"] = params;
  j["globalCost"] = round12(s.globalCost);
  return j.dump(2) + "\n";
}

inline Segmentation segmentation_from_json(const std::string& text) {
  const auto j = ordered_json::parse(text);
  Segmentation s;
  s.changepoints = j.at("changepoints").get<std::vector<std::size_t>>();
  s.states = j.at("states").get<std::vector<std::string>>();
  s.forced = j.at("forced").get<std::vector<int>>();
  s.parameters = j.at("parameters").get<std::vector<double>>();
  s.globalCost = j.at("globalCost").get<double>();
  return s;
}

}  // namespace graphseg

#endif  // GRAPHSEG_IO_HPP
