#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "genlab/svg_plot.hpp"

using namespace genlab;
namespace fs = std::filesystem;

namespace {

// A finished row with made-up but finite metrics, varied enough that every
// series has something to draw.
SweepRow make_row(std::size_t width, std::uint64_t seed, double base) {
  SweepRow r;
  r.width = width;
  r.seed = seed;
  r.ok = true;
  r.l_orig_train1 = base;
  r.l_orig_test = base + 0.010;
  r.l_aux_train1 = base + 0.020;
  r.l_aux_test = base + 0.030;
  r.l_ind_match_train1 = base + 0.040;
  r.l_ind_match_train2 = base + 0.050;
  r.l_ind_match_test = base + 0.060;
  r.l_ind_base_train1 = base + 0.070;
  r.l_ind_base_train2 = base + 0.080;
  r.l_ind_base_test = base + 0.090;
  r.l_ind_match_train2self = base + 0.100;
  r.l_ind_base_train2self = base + 0.110;
  r.generator_gap = base - 0.25;  // mixed signs across rows
  r.generator_gap_se = 0.01;
  r.frechet_train1 = 0.5 + base;
  r.frechet_test = 0.6 + base;
  return r;
}

std::vector<SweepRow> grid_rows() {
  std::vector<SweepRow> rows;
  double base = 0.1;
  for (std::size_t width : {4, 16, 64})
    for (std::uint64_t seed : {1, 2})
      rows.push_back(make_row(width, seed, base += 0.05));
  return rows;
}

std::string render(const std::vector<SweepRow>& rows, PlotKind kind,
                   const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("genlab_svg_test_" + name);
  write_svg_plot(rows, kind, p.string());
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is);
  std::ostringstream os;
  os << is.rdbuf();
  fs::remove(p);
  return os.str();
}

std::size_t count_occurrences(const std::string& text,
                              const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size()))
    ++n;
  return n;
}

}  // namespace

TEST_CASE("plot kind names round-trip") {
  for (PlotKind kind : {PlotKind::DivergenceVsWidth, PlotKind::GapVsWidth,
                        PlotKind::FrechetVsDivergence})
    CHECK(plot_kind_from_string(plot_kind_name(kind)) == kind);
  CHECK_THROWS_AS(plot_kind_from_string("pie_chart"), ConfigError);
}

TEST_CASE("divergence plot draws all eight series") {
  const std::vector<SweepRow> rows = grid_rows();
  const std::string svg =
      render(rows, PlotKind::DivergenceVsWidth, "divergence.svg");

  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<svg xmlns=") != std::string::npos);
  CHECK(svg.substr(svg.size() - 7) == "</svg>\n");

  // 8 series x 6 rows of markers; every series has 3 widths, so 8 medians.
  CHECK(count_occurrences(svg, "<circle") == 48);
  CHECK(count_occurrences(svg, "<polyline") == 8);
  // Test-set series are dashed with open markers.
  CHECK(count_occurrences(svg, "fill=\"white\" stroke=") == 24);
  CHECK(svg.find("stroke-dasharray=\"6 4\"") != std::string::npos);

  for (const char* label :
       {"orig train1", "orig test", "aux train1", "aux test",
        "ind base train1", "ind base test", "ind match train1",
        "ind match test"})
    CHECK(svg.find(label) != std::string::npos);

  // Width ticks are labeled with the raw widths.
  for (const char* w : {">4<", ">16<", ">64<"})
    CHECK(svg.find(w) != std::string::npos);
}

TEST_CASE("a single width yields markers but no median line") {
  std::vector<SweepRow> rows;
  rows.push_back(make_row(16, 1, 0.10));
  rows.push_back(make_row(16, 2, 0.14));
  rows.push_back(make_row(16, 3, 0.18));
  const std::string svg =
      render(rows, PlotKind::DivergenceVsWidth, "onewidth.svg");
  CHECK(count_occurrences(svg, "<circle") == 24);
  CHECK(count_occurrences(svg, "<polyline") == 0);
}

TEST_CASE("gap plot shows both gaps and the zero reference") {
  const std::string svg = render(grid_rows(), PlotKind::GapVsWidth, "gap.svg");
  CHECK(svg.find("generator gap") != std::string::npos);
  CHECK(svg.find("disc train-test gap") != std::string::npos);
  CHECK(count_occurrences(svg, "<circle") == 12);
  CHECK(count_occurrences(svg, "<polyline") == 2);
  // generator_gap spans negative to positive, so the zero line appears.
  CHECK(svg.find("stroke-dasharray=\"2 4\"") != std::string::npos);
}

TEST_CASE("scatter plot pairs the two metric families") {
  const std::string svg =
      render(grid_rows(), PlotKind::FrechetVsDivergence, "scatter.svg");
  CHECK(svg.find("Frechet metric vs independent-critic divergence") !=
        std::string::npos);
  CHECK(count_occurrences(svg, "<circle") == 12);
  CHECK(count_occurrences(svg, "<polyline") == 0);
}

TEST_CASE("failed rows are skipped and contribute nothing") {
  std::vector<SweepRow> rows = grid_rows();
  rows[0].ok = false;
  rows[0].failure = "diverged";
  const std::string svg =
      render(rows, PlotKind::DivergenceVsWidth, "skipfail.svg");
  CHECK(count_occurrences(svg, "<circle") == 40);  // 8 series x 5 rows
}

TEST_CASE("rendering the same rows twice is byte-identical") {
  const std::vector<SweepRow> rows = grid_rows();
  const std::string a = render(rows, PlotKind::DivergenceVsWidth, "det_a.svg");
  const std::string b = render(rows, PlotKind::DivergenceVsWidth, "det_b.svg");
  CHECK(a == b);
}

TEST_CASE("plots with nothing to draw are refused") {
  std::vector<SweepRow> rows;
  SweepRow bad;
  bad.width = 4;
  bad.seed = 1;
  bad.ok = false;
  bad.failure = "diverged";
  rows.push_back(bad);
  for (PlotKind kind : {PlotKind::DivergenceVsWidth, PlotKind::GapVsWidth,
                        PlotKind::FrechetVsDivergence}) {
    const fs::path p = fs::temp_directory_path() / "genlab_svg_test_none.svg";
    CHECK_THROWS_AS(write_svg_plot(rows, kind, p.string()), ContractError);
  }
}
