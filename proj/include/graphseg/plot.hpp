#ifndef GRAPHSEG_PLOT_HPP
#define GRAPHSEG_PLOT_HPP

// Static renderings of data with a fitted segmentation: a gnuplot-ready
// overlay file and a standalone SVG.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "graphseg/error.hpp"
#include "graphseg/format.hpp"
#include "graphseg/solver.hpp"

namespace graphseg {

using DecayMap = std::vector<std::pair<std::string, double>>;

struct SegmentTrace {
  std::size_t first;  // 1-based
  std::size_t last;
  std::vector<double> values;  // fitted value at first..last
  bool constant;
};

/// Fitted values per segment; decaying segments are rebuilt backwards from
/// their last-point parameter.
inline std::vector<SegmentTrace> segment_traces(const Segmentation& s, std::size_t n,
                                                const DecayMap& decay = {}) {
  if (!check_segmentation(s, n).empty())
    throw contract_error("plot: segmentation does not describe the data length");
  std::vector<SegmentTrace> out;
  std::size_t first = 1;
  for (std::size_t k = 0; k < s.changepoints.size(); ++k) {
    const std::size_t last = s.changepoints[k];
    double alpha = 1.0;
    for (const auto& [name, a] : decay)
      if (name == s.states[k]) alpha = a;
    SegmentTrace tr{first, last, std::vector<double>(last - first + 1), alpha == 1.0};
    double v = s.parameters[k];
    for (std::size_t i = last - first + 1; i-- > 0;) {
      tr.values[i] = v;
      v /= alpha;
    }
    out.push_back(std::move(tr));
    first = last + 1;
  }
  return out;
}

/// Two gnuplot data blocks: "index value" for each point, then the fit with
/// two rows (first and last index) per constant segment and one row per
/// point of a decaying segment, segments separated by blank lines.
inline std::string overlay_dat(const std::vector<double>& y, const Segmentation& s,
                               const DecayMap& decay = {}) {
  const auto traces = segment_traces(s, y.size(), decay);
  std::string out = "# data: index value\n";
  for (std::size_t i = 0; i < y.size(); ++i)
    out += std::to_string(i + 1) + ' ' + shortest(y[i]) + '\n';
  out += "\n\n# fit: index value\n";
  for (const auto& tr : traces) {
    if (tr.constant) {
      out += std::to_string(tr.first) + ' ' + shortest(tr.values.front()) + '\n';
      out += std::to_string(tr.last) + ' ' + shortest(tr.values.back()) + '\n';
    } else {
      for (std::size_t i = 0; i < tr.values.size(); ++i)
        out += std::to_string(tr.first + i) + ' ' + shortest(tr.values[i]) + '\n';
    }
    out += '\n';
  }
  return out;
}

/// SVG with a circle per point and one stroke per segment: a line for a
/// constant segment, a polyline for a decaying one.
inline std::string render_svg(const std::vector<double>& y, const Segmentation& s,
                              const DecayMap& decay = {}, int width = 800,
                              int height = 400) {
  const auto traces = segment_traces(s, y.size(), decay);
  double lo = *std::min_element(y.begin(), y.end());
  double hi = *std::max_element(y.begin(), y.end());
  for (const auto& tr : traces)
    for (double v : tr.values)
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  if (hi == lo) {
    lo -= 1;
    hi += 1;
  }
  const double margin = 20;
  const double n = static_cast<double>(y.size());
  auto px = [&](double t) { return margin + (t - 0.5) / n * (width - 2 * margin); };
  auto py = [&](double v) {
    return height - margin - (v - lo) / (hi - lo) * (height - 2 * margin);
  };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
         std::to_string(width) + ' ' + std::to_string(height) + "\">\n";
  out += "<style>circle{fill:#7f7f7f;} .segment{stroke:#d62728;stroke-width:2;fill:none;}</style>\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<g class=\"data\">\n";
  for (std::size_t i = 0; i < y.size(); ++i)
    out += "<circle cx=\"" + num(px(static_cast<double>(i + 1))) + "\" cy=\"" + num(py(y[i])) +
           "\" r=\"1.5\"/>\n";
  out += "</g>\n<g class=\"fit\">\n";
  for (const auto& tr : traces) {
    if (tr.constant) {
      out += "<line class=\"segment\" x1=\"" + num(px(static_cast<double>(tr.first) - 0.5)) +
             "\" y1=\"" + num(py(tr.values.front())) + "\" x2=\"" +
             num(px(static_cast<double>(tr.last) + 0.5)) + "\" y2=\"" +
             num(py(tr.values.back())) + "\"/>\n";
    } else {
      out += "<polyline class=\"segment\" points=\"";
      for (std::size_t i = 0; i < tr.values.size(); ++i) {
        if (i) out += ' ';
        out += num(px(static_cast<double>(tr.first + i))) + ',' + num(py(tr.values[i]));
      }
      out += "\"/>\n";
    }
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace graphseg

#endif  // GRAPHSEG_PLOT_HPP
