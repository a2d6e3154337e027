#include <catch_amalgamated.hpp>

#include <regex>
#include <sstream>

#include "graphseg/io.hpp"
#include "graphseg/plot.hpp"

using namespace graphseg;

namespace {

std::vector<double> series(const std::string& text, const std::string& column = "") {
  std::istringstream in(text);
  return read_series(in, "<test>", column);
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t c = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++c;
  return c;
}

// Open and close tags balance and nest; self-closing tags are skipped.
bool tags_balanced(const std::string& xml) {
  std::vector<std::string> stack;
  std::regex tag(R"(<(/?)([A-Za-z][\w:-]*)[^>]*?(/?)>)");
  for (auto it = std::sregex_iterator(xml.begin(), xml.end(), tag); it != std::sregex_iterator();
       ++it) {
    const auto& m = *it;
    if (m[3].length()) continue;
    if (m[1].length()) {
      if (stack.empty() || stack.back() != m[2].str()) return false;
      stack.pop_back();
    } else {
      stack.push_back(m[2].str());
    }
  }
  return stack.empty();
}

}  // namespace

TEST_CASE("series reading") {
  CHECK(series("1\n2.5\n\n# note\n-3e2\n") == std::vector<double>{1, 2.5, -300});
  CHECK(series("value\n4\n5\n") == std::vector<double>{4, 5});
  CHECK(series("t,y\n1,10\n2,20\n", "y") == std::vector<double>{10, 20});
  CHECK(series("1,10\n2,20\n", "2") == std::vector<double>{10, 20});
  try {
    series("1\n2\nabc\n");
    FAIL("expected a parse error");
  } catch (const parse_error& e) {
    CHECK(e.line() == 3);
    CHECK(e.source() == "<test>");
  }
  CHECK_THROWS_AS(series("a,b\n1,2\n", "c"), parse_error);
  CHECK_THROWS_AS(series("1,2\n3\n", "2"), parse_error);
  CHECK_THROWS_AS(series("1\nInf\n"), parse_error);
  CHECK_THROWS_AS(read_series_file("/nonexistent/file.txt"), parse_error);

  std::vector<double> y{0.1, -2.0, 1e-300, 12345.678901234567};
  CHECK(series(write_series(y)) == y);
}

TEST_CASE("segmentation JSON") {
  Segmentation s{{3, 7, 10}, {"Dw", "Up", "Dw"}, {1, 0}, {0.1234567890123456, 2.0, -1.0 / 3},
                 12.000000000000002};
  const auto text = segmentation_json(s);
  const auto keys = std::vector<std::string>{"changepoints", "states", "forced", "parameters",
                                             "globalCost"};
  std::size_t prev = 0;
  for (const auto& k : keys) {
    const auto p = text.find("\"" + k + "\"");
    REQUIRE(p != std::string::npos);
    CHECK(p >= prev);
    prev = p;
  }
  const auto back = segmentation_from_json(text);
  CHECK(back.changepoints == s.changepoints);
  CHECK(back.states == s.states);
  CHECK(back.forced == s.forced);
  CHECK(back.parameters[0] == 0.123456789012);
  CHECK(back.parameters[2] == -0.333333333333);
  CHECK(back.globalCost == 12.0);
  CHECK(round12(1.0 / 7) == 0.142857142857);
}

TEST_CASE("overlay rows") {
  std::vector<double> y{1, 1.1, 0.9, 3, 3.2, 2.8, 3, 0};
  Segmentation s{{3, 7, 8}, {"A", "A", "A"}, {0, 0}, {1, 3, 0}, 0.1};
  const auto dat = overlay_dat(y, s);
  std::size_t rows = 0;
  std::istringstream in(dat);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') ++rows;
  CHECK(rows == y.size() + 2 * s.changepoints.size());
  CHECK(dat.find("4 3\n7 3\n") != std::string::npos);

  Segmentation d{{4, 8}, {"D", "D"}, {0}, {0.125, 1}, 0};
  const auto traces = segment_traces(d, 8, {{"D", 0.5}});
  CHECK(traces[0].values == std::vector<double>{1, 0.5, 0.25, 0.125});
  CHECK(!traces[0].constant);
  const auto ddat = overlay_dat(y, d, {{"D", 0.5}});
  rows = 0;
  std::istringstream in2(ddat);
  while (std::getline(in2, line))
    if (!line.empty() && line[0] != '#') ++rows;
  CHECK(rows == y.size() + 8);

  Segmentation bad{{3, 5}, {"A", "A"}, {0}, {1, 2}, 0};
  CHECK_THROWS_AS(overlay_dat(y, bad), contract_error);
}

TEST_CASE("svg strokes and structure") {
  std::vector<double> y{1, 1.1, 0.9, 3, 3.2, 2.8, 3, 0};
  Segmentation s{{3, 7, 8}, {"A", "A", "A"}, {0, 0}, {1, 3, 0}, 0.1};
  const auto svg = render_svg(y, s);
  CHECK(count(svg, "class=\"segment\"") == s.changepoints.size());
  CHECK(count(svg, "<circle") == y.size());
  CHECK(tags_balanced(svg));
  CHECK(svg.rfind("</svg>") != std::string::npos);

  Segmentation d{{4, 8}, {"D", "D"}, {0}, {0.125, 1}, 0};
  const auto dsvg = render_svg(y, d, {{"D", 0.5}});
  CHECK(count(dsvg, "<polyline class=\"segment\"") == 2);
  CHECK(tags_balanced(dsvg));

  std::vector<double> flat(5, 2.0);
  Segmentation one{{5}, {"A"}, {}, {2.0}, 0};
  CHECK(tags_balanced(render_svg(flat, one)));
}
