#ifndef GRAPHSEG_GRAPH_HPP
#define GRAPHSEG_GRAPH_HPP

// Collapsed constraint graph: typed edges between named states, start and
// end states, and per-state parameter ranges. Tabular encoding is a CSV with
// header state1,state2,type,parameter,penalty,K,a,min,max.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "graphseg/error.hpp"
#include "graphseg/format.hpp"
#include "graphseg/losses.hpp"
#include "graphseg/piecewise.hpp"

namespace graphseg {

enum class EdgeType { Null, Std, Up, Down, Abs };

inline const char* to_string(EdgeType t) {
  switch (t) {
    case EdgeType::Null: return "null";
    case EdgeType::Std: return "std";
    case EdgeType::Up: return "up";
    case EdgeType::Down: return "down";
    case EdgeType::Abs: return "abs";
  }
  return "?";
}

inline std::optional<EdgeType> parse_edge_type(std::string_view s) {
  if (s == "null") return EdgeType::Null;
  if (s == "std") return EdgeType::Std;
  if (s == "up") return EdgeType::Up;
  if (s == "down") return EdgeType::Down;
  if (s == "abs") return EdgeType::Abs;
  return std::nullopt;
}

struct Edge {
  std::string state1;
  std::string state2;
  EdgeType type = EdgeType::Null;
  double penalty = 0.0;
  double decay = 1.0;  // null edges
  double gap = 0.0;    // up, down, abs
  double K = kInf;
  double a = kInf;

  /// Value of the `parameter` column.
  double parameter() const { return type == EdgeType::Null ? decay : gap; }
  Robust robust() const { return {K, a}; }
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct NodeRange {
  std::string state;
  double min = -kInf;
  double max = kInf;
  friend bool operator==(const NodeRange&, const NodeRange&) = default;
};

struct Graph {
  std::vector<Edge> edges;
  std::vector<std::string> start_states;  // empty: every state
  std::vector<std::string> end_states;    // empty: every state
  std::vector<NodeRange> node_ranges;

  /// Distinct states in order of first appearance in the edge list.
  std::vector<std::string> states() const {
    std::vector<std::string> out;
    auto add = [&](const std::string& s) {
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    };
    for (const Edge& e : edges) {
      add(e.state1);
      add(e.state2);
    }
    return out;
  }

  friend bool operator==(const Graph&, const Graph&) = default;
};

// ---------------------------------------------------------------- builders

inline Edge make_edge(std::string s1, std::string s2, EdgeType type,
                      double penalty = 0.0,
                      double parameter = std::numeric_limits<double>::quiet_NaN(),
                      double K = kInf, double a = kInf) {
  Edge e{std::move(s1), std::move(s2), type, penalty, 1.0, 0.0, K, a};
  if (!std::isnan(parameter)) {
    if (type == EdgeType::Null)
      e.decay = parameter;
    else
      e.gap = parameter;
  }
  return e;
}

enum class GraphType { Std, Isotonic, UpDown, Relevant };

inline std::optional<GraphType> parse_graph_type(std::string_view s) {
  if (s == "std") return GraphType::Std;
  if (s == "isotonic") return GraphType::Isotonic;
  if (s == "updown") return GraphType::UpDown;
  if (s == "relevant") return GraphType::Relevant;
  return std::nullopt;
}

/// The standard graphs: std, isotonic, updown, relevant. `gap` applies to
/// up/down/abs edges; K and a to every edge.
inline Graph build_default_graph(GraphType type, double penalty,
                                 double gap = 0.0, double K = kInf,
                                 double a = kInf) {
  Graph g;
  auto edge = [&](const char* s1, const char* s2, EdgeType t, double beta) {
    Edge e{s1, s2, t, beta, 1.0, 0.0, K, a};
    if (t == EdgeType::Up || t == EdgeType::Down || t == EdgeType::Abs)
      e.gap = gap;
    g.edges.push_back(e);
  };
  switch (type) {
    case GraphType::Std:
      edge("Std", "Std", EdgeType::Null, 0.0);
      edge("Std", "Std", EdgeType::Std, penalty);
      break;
    case GraphType::Isotonic:
      edge("Iso", "Iso", EdgeType::Null, 0.0);
      edge("Iso", "Iso", EdgeType::Up, penalty);
      break;
    case GraphType::UpDown:
      edge("Dw", "Dw", EdgeType::Null, 0.0);
      edge("Up", "Up", EdgeType::Null, 0.0);
      edge("Dw", "Up", EdgeType::Up, penalty);
      edge("Up", "Dw", EdgeType::Down, penalty);
      break;
    case GraphType::Relevant:
      edge("Abs", "Abs", EdgeType::Null, 0.0);
      edge("Abs", "Abs", EdgeType::Abs, penalty);
      break;
  }
  return g;
}

/// Adds a null self-edge (penalty 0, decay 1) to every state lacking an
/// identical one.
inline Graph with_all_null_edges(Graph g) {
  for (const std::string& s : g.states()) {
    Edge e{s, s, EdgeType::Null, 0.0, 1.0, 0.0, kInf, kInf};
    if (std::find(g.edges.begin(), g.edges.end(), e) == g.edges.end())
      g.edges.push_back(e);
  }
  return g;
}

// -------------------------------------------------------------- validation

enum class Severity { Warning, Error };

struct Diagnostic {
  Severity severity;
  std::string message;
};

inline bool has_errors(const std::vector<Diagnostic>& d) {
  return std::any_of(d.begin(), d.end(), [](const Diagnostic& x) {
    return x.severity == Severity::Error;
  });
}

/// Structural and parameter checks for `g` used with `family`.
inline std::vector<Diagnostic> validate(const Graph& g,
                                        Family family = Family::Gauss) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string m) { out.push_back({Severity::Error, std::move(m)}); };
  auto warn = [&](std::string m) { out.push_back({Severity::Warning, std::move(m)}); };
  const Basis basis = basis_of(family);
  if (g.edges.empty()) error("graph has no edges");
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const Edge& e = g.edges[i];
    const std::string where = "edge " + std::to_string(i + 1) + " (" +
                              e.state1 + " -> " + e.state2 + ", " +
                              to_string(e.type) + "): ";
    if (e.state1.empty() || e.state2.empty()) error(where + "empty state name");
    if (!(e.penalty >= 0.0)) error(where + "penalty must be >= 0");
    if (e.type == EdgeType::Null) {
      if (!(e.decay > 0.0 && e.decay <= 1.0))
        error(where + "decay must lie in (0, 1]");
      else if (e.decay != 1.0 && basis == Basis::LogLog)
        error(where + "decay is not expressible for the " +
              std::string(to_string(family)) + " loss");
    } else if (e.type != EdgeType::Std) {
      if (!(e.gap >= 0.0) || !std::isfinite(e.gap))
        error(where + "gap must be finite and >= 0");
      else if (e.gap != 0.0 && basis == Basis::LogLog)
        error(where + "gap is not expressible for the " +
              std::string(to_string(family)) + " loss");
      else if (e.gap != 0.0 && e.gap < 1.0 && basis == Basis::LinLog)
        error(where + "a " + std::string(to_string(family)) +
              " gap is a ratio and must be 0 or >= 1");
    }
    if (!(e.K > 0.0)) error(where + "K must be > 0");
    if (!(e.a >= 0.0)) error(where + "a must be >= 0");
    if (std::isfinite(e.K) && family != Family::Gauss)
      error(where + "robust losses require the mean (Gauss) loss");
  }
  const auto states = g.states();
  auto known = [&](const std::string& s) {
    return std::find(states.begin(), states.end(), s) != states.end();
  };
  for (const auto& s : g.start_states)
    if (!known(s)) error("start state '" + s + "' does not appear in any edge");
  for (const auto& s : g.end_states)
    if (!known(s)) error("end state '" + s + "' does not appear in any edge");
  for (const auto& r : g.node_ranges) {
    if (!known(r.state))
      error("node state '" + r.state + "' does not appear in any edge");
    if (!(r.min <= r.max))
      error("node '" + r.state + "': min exceeds max");
  }
  for (const auto& s : states) {
    const bool self_null = std::any_of(g.edges.begin(), g.edges.end(), [&](const Edge& e) {
      return e.type == EdgeType::Null && e.state1 == s && e.state2 == s;
    });
    if (!self_null)
      warn("state '" + s + "' has no null self-edge: a change is forced at every step");
  }
  return out;
}

// ------------------------------------------------------------- compilation

/// Edge as used by the solver: abs expanded, robust parameters resolved.
struct CompiledEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  EdgeType type = EdgeType::Null;  // never Abs
  double penalty = 0.0;
  double decay = 1.0;
  double gap = 0.0;
  Robust robust;
  std::size_t source = 0;  // index into Graph::edges
};

struct CompiledGraph {
  std::vector<std::string> states;
  std::vector<CompiledEdge> edges;
  std::vector<bool> is_start;
  std::vector<bool> is_end;
  std::vector<Interval> ranges;       // per state, unbounded when absent
  std::vector<Robust> start_robust;   // robust parameters of the start edge
  std::vector<double> self_decay;     // decay of the null self-edge, 1 if none

  std::size_t index_of(const std::string& s) const {
    auto it = std::find(states.begin(), states.end(), s);
    if (it == states.end()) throw contract_error("unknown state '" + s + "'");
    return static_cast<std::size_t>(it - states.begin());
  }
};

/// Validates and expands `g`. Edge robust parameters override the loss
/// defaults when the edge K is finite.
inline CompiledGraph compile(const Graph& g, const LossSpec& loss) {
  const auto diags = validate(g, loss.family);
  for (const auto& d : diags)
    if (d.severity == Severity::Error) throw contract_error("graph: " + d.message);
  CompiledGraph c;
  c.states = g.states();
  const std::size_t S = c.states.size();
  const Robust fallback{loss.K, loss.a};
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const Edge& e = g.edges[i];
    CompiledEdge ce;
    ce.from = c.index_of(e.state1);
    ce.to = c.index_of(e.state2);
    ce.penalty = e.penalty;
    ce.decay = e.type == EdgeType::Null ? e.decay : 1.0;
    ce.gap = (e.type == EdgeType::Null || e.type == EdgeType::Std) ? 0.0 : e.gap;
    ce.robust = std::isfinite(e.K) ? e.robust() : fallback;
    ce.source = i;
    if (e.type == EdgeType::Abs) {
      ce.type = EdgeType::Up;
      c.edges.push_back(ce);
      ce.type = EdgeType::Down;
      c.edges.push_back(ce);
    } else {
      ce.type = e.type;
      c.edges.push_back(ce);
    }
  }
  c.is_start.assign(S, g.start_states.empty());
  c.is_end.assign(S, g.end_states.empty());
  for (const auto& s : g.start_states) c.is_start[c.index_of(s)] = true;
  for (const auto& s : g.end_states) c.is_end[c.index_of(s)] = true;
  c.ranges.assign(S, Interval{-kInf, kInf});
  for (const auto& r : g.node_ranges) {
    Interval& iv = c.ranges[c.index_of(r.state)];
    iv = intersect(iv, Interval{r.min, r.max});
  }
  c.start_robust.assign(S, fallback);
  std::vector<bool> seen(S, false);
  for (const auto& e : c.edges)
    if (!seen[e.to]) {
      seen[e.to] = true;
      c.start_robust[e.to] = e.robust;
    }
  c.self_decay.assign(S, 1.0);
  std::vector<bool> decay_seen(S, false);
  for (const auto& e : c.edges)
    if (e.type == EdgeType::Null && e.from == e.to && !decay_seen[e.from]) {
      decay_seen[e.from] = true;
      c.self_decay[e.from] = e.decay;
    }
  return c;
}

// ----------------------------------------------------------- CSV encoding

inline constexpr std::string_view kGraphHeader =
    "state1,state2,type,parameter,penalty,K,a,min,max";

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.emplace_back(trim(cur));
  return out;
}

}  // namespace detail

/// Parses the tabular graph encoding. `source` names the input in errors.
inline Graph read_graph(std::istream& in, const std::string& source = "<graph>") {
  Graph g;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto cols = detail::split_csv_line(t);
    if (!header) {
      std::string joined;
      for (std::size_t i = 0; i < cols.size(); ++i)
        joined += (i ? "," : "") + cols[i];
      if (joined != kGraphHeader)
        throw parse_error(source, lineno,
                          "expected header '" + std::string(kGraphHeader) + "'");
      header = true;
      continue;
    }
    if (cols.size() != 9)
      throw parse_error(source, lineno,
                        "expected 9 columns, found " + std::to_string(cols.size()));
    auto number = [&](std::size_t i, double na_value) {
      if (is_na(cols[i])) return na_value;
      auto v = parse_number(cols[i]);
      if (!v)
        throw parse_error(source, lineno, "bad number '" + cols[i] + "'");
      return *v;
    };
    const std::string& s1 = cols[0];
    const std::string& s2 = cols[1];
    const std::string& type = cols[2];
    if (is_na(s1)) throw parse_error(source, lineno, "missing state1");
    if (type == "start") {
      g.start_states.push_back(s1);
    } else if (type == "end") {
      g.end_states.push_back(s1);
    } else if (type == "node") {
      g.node_ranges.push_back({s1, number(7, -kInf), number(8, kInf)});
    } else if (auto et = parse_edge_type(type)) {
      if (is_na(s2)) throw parse_error(source, lineno, "missing state2");
      Edge e{s1, s2, *et, number(4, 0.0), 1.0, 0.0, number(5, kInf),
             number(6, kInf)};
      if (*et == EdgeType::Null)
        e.decay = number(3, 1.0);
      else
        e.gap = number(3, 0.0);
      g.edges.push_back(e);
    } else {
      throw parse_error(source, lineno, "unknown type '" + type + "'");
    }
  }
  if (!header) throw parse_error(source, lineno, "empty graph file");
  return g;
}

inline Graph read_graph_string(const std::string& text,
                               const std::string& source = "<graph>") {
  std::istringstream in(text);
  return read_graph(in, source);
}

/// Canonical CSV: edges, then start rows, end rows, node rows.
inline std::string write_graph(const Graph& g) {
  std::string out(kGraphHeader);
  out += '\n';
  auto row = [&](std::initializer_list<std::string> cols) {
    bool first = true;
    for (const auto& c : cols) {
      if (!first) out += ',';
      out += c;
      first = false;
    }
    out += '\n';
  };
  for (const Edge& e : g.edges)
    row({e.state1, e.state2, to_string(e.type), shortest(e.parameter()),
         shortest(e.penalty), shortest(e.K), shortest(e.a), "NA", "NA"});
  for (const auto& s : g.start_states)
    row({s, "NA", "start", "NA", "NA", "NA", "NA", "NA", "NA"});
  for (const auto& s : g.end_states)
    row({s, "NA", "end", "NA", "NA", "NA", "NA", "NA", "NA"});
  for (const auto& r : g.node_ranges)
    row({r.state, r.state, "node", "NA", "NA", "NA", "NA",
         std::isinf(r.min) && r.min < 0 ? "NA" : shortest(r.min),
         std::isinf(r.max) && r.max > 0 ? "NA" : shortest(r.max)});
  return out;
}

}  // namespace graphseg

#endif  // GRAPHSEG_GRAPH_HPP
