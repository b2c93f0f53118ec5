#include "genlab/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace genlab {

namespace {

struct Pt {
  double x, y;
};

// One plottable series: scatter markers per row plus an optional median
// polyline.  Dashed series render with open markers and a dash pattern.
struct Series {
  std::string label;
  const char* color;
  bool dashed = false;
  std::vector<Pt> markers;
  std::vector<Pt> line;
};

constexpr const char* kBlue = "#1f77b4";
constexpr const char* kRed = "#d62728";
constexpr const char* kGreen = "#2ca02c";
constexpr const char* kPurple = "#9467bd";

std::string fmt(const char* f, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Scatter + per-width median against log2(width).
Series width_series(const std::vector<SweepRow>& rows, const std::string& label,
                    const char* color, bool dashed,
                    double (*pick)(const SweepRow&)) {
  Series s{label, color, dashed, {}, {}};
  std::map<std::size_t, std::vector<double>> by_width;
  for (const SweepRow& r : rows) {
    if (!r.ok) continue;
    const double v = pick(r);
    if (!std::isfinite(v)) continue;
    const double x = std::log2(static_cast<double>(r.width));
    s.markers.push_back({x, v});
    by_width[r.width].push_back(v);
  }
  for (const auto& [w, vals] : by_width)
    s.line.push_back({std::log2(static_cast<double>(w)), median(vals)});
  if (s.line.size() < 2) s.line.clear();
  return s;
}

std::vector<Series> build_series(const std::vector<SweepRow>& rows,
                                 PlotKind kind) {
  std::vector<Series> out;
  switch (kind) {
    case PlotKind::DivergenceVsWidth:
      out.push_back(width_series(rows, "orig train1", kBlue, false,
                                 [](const SweepRow& r) { return r.l_orig_train1; }));
      out.push_back(width_series(rows, "orig test", kBlue, true,
                                 [](const SweepRow& r) { return r.l_orig_test; }));
      out.push_back(width_series(rows, "aux train1", kRed, false,
                                 [](const SweepRow& r) { return r.l_aux_train1; }));
      out.push_back(width_series(rows, "aux test", kRed, true,
                                 [](const SweepRow& r) { return r.l_aux_test; }));
      out.push_back(
          width_series(rows, "ind base train1", kGreen, false,
                       [](const SweepRow& r) { return r.l_ind_base_train1; }));
      out.push_back(
          width_series(rows, "ind base test", kGreen, true,
                       [](const SweepRow& r) { return r.l_ind_base_test; }));
      out.push_back(
          width_series(rows, "ind match train1", kPurple, false,
                       [](const SweepRow& r) { return r.l_ind_match_train1; }));
      out.push_back(
          width_series(rows, "ind match test", kPurple, true,
                       [](const SweepRow& r) { return r.l_ind_match_test; }));
      break;
    case PlotKind::GapVsWidth:
      out.push_back(width_series(rows, "generator gap", kBlue, false,
                                 [](const SweepRow& r) { return r.generator_gap; }));
      out.push_back(width_series(
          rows, "disc train-test gap", kRed, false,
          [](const SweepRow& r) { return r.l_orig_train1 - r.l_orig_test; }));
      break;
    case PlotKind::FrechetVsDivergence: {
      Series train{"train1", kBlue, false, {}, {}};
      Series test{"test", kRed, true, {}, {}};
      for (const SweepRow& r : rows) {
        if (!r.ok) continue;
        if (std::isfinite(r.l_ind_base_train1) && std::isfinite(r.frechet_train1))
          train.markers.push_back({r.l_ind_base_train1, r.frechet_train1});
        if (std::isfinite(r.l_ind_base_test) && std::isfinite(r.frechet_test))
          test.markers.push_back({r.l_ind_base_test, r.frechet_test});
      }
      out.push_back(std::move(train));
      out.push_back(std::move(test));
      break;
    }
  }
  // Keep every series (legend stability); plottability is checked globally.
  return out;
}

struct Limits {
  double lo, hi;
  void expand(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

std::vector<double> nice_ticks(double lo, double hi) {
  const double range = hi - lo;
  const double raw = range / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step =
      mag * (norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0);
  std::vector<double> ticks;
  double t = std::ceil(lo / step) * step;
  for (; t <= hi + 1e-9 * range; t += step) {
    // Snap near-zero ticks so labels do not show "-0".
    ticks.push_back(std::fabs(t) < step * 1e-6 ? 0.0 : t);
  }
  return ticks;
}

}  // namespace

PlotKind plot_kind_from_string(const std::string& name) {
  if (name == "divergence_vs_width") return PlotKind::DivergenceVsWidth;
  if (name == "gap_vs_width") return PlotKind::GapVsWidth;
  if (name == "frechet_vs_divergence") return PlotKind::FrechetVsDivergence;
  throw ConfigError("unknown plot kind '" + name +
                    "' (expected divergence_vs_width, gap_vs_width or "
                    "frechet_vs_divergence)");
}

std::string plot_kind_name(PlotKind kind) {
  switch (kind) {
    case PlotKind::DivergenceVsWidth: return "divergence_vs_width";
    case PlotKind::GapVsWidth: return "gap_vs_width";
    case PlotKind::FrechetVsDivergence: return "frechet_vs_divergence";
  }
  return "unknown";
}

void write_svg_plot(const std::vector<SweepRow>& rows, PlotKind kind,
                    const std::string& path) {
  const std::vector<Series> series = build_series(rows, kind);

  Limits xl{1e300, -1e300}, yl{1e300, -1e300};
  std::size_t n_points = 0;
  for (const Series& s : series) {
    for (const Pt& p : s.markers) {
      xl.expand(p.x);
      yl.expand(p.y);
      ++n_points;
    }
    for (const Pt& p : s.line) {
      xl.expand(p.x);
      yl.expand(p.y);
    }
  }
  if (n_points == 0)
    throw ContractError("svg plot: no plottable rows for " +
                        plot_kind_name(kind));

  auto pad = [](Limits& l) {
    if (l.hi - l.lo < 1e-12) {
      const double w = std::max(0.5, std::fabs(l.lo) * 0.1);
      l.lo -= w;
      l.hi += w;
    } else {
      const double w = 0.05 * (l.hi - l.lo);
      l.lo -= w;
      l.hi += w;
    }
  };
  pad(xl);
  pad(yl);

  const double W = 860, H = 520;
  const double ML = 70, MR = 210, MT = 30, MB = 60;
  const double PW = W - ML - MR, PH = H - MT - MB;
  auto px = [&](double x) { return ML + (x - xl.lo) / (xl.hi - xl.lo) * PW; };
  auto py = [&](double y) { return MT + (yl.hi - y) / (yl.hi - yl.lo) * PH; };

  const bool width_axis = kind != PlotKind::FrechetVsDivergence;
  std::string x_label, y_label, title;
  switch (kind) {
    case PlotKind::DivergenceVsWidth:
      title = "Estimated divergence vs discriminator width";
      x_label = "width multiplier";
      y_label = "estimated divergence";
      break;
    case PlotKind::GapVsWidth:
      title = "Train/test gaps vs discriminator width";
      x_label = "width multiplier";
      y_label = "gap";
      break;
    case PlotKind::FrechetVsDivergence:
      title = "Frechet metric vs independent-critic divergence";
      x_label = "independent baseline divergence";
      y_label = "Frechet metric";
      break;
  }

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H
      << "\">\n"
      << "<rect width=\"" << W << "\" height=\"" << H
      << "\" fill=\"white\"/>\n"
      << "<text x=\"" << ML << "\" y=\"20\" font-family=\"sans-serif\" "
         "font-size=\"14\" font-weight=\"bold\">"
      << title << "</text>\n";

  // Axes.
  svg << "<line x1=\"" << ML << "\" y1=\"" << MT + PH << "\" x2=\"" << ML + PW
      << "\" y2=\"" << MT + PH << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML
      << "\" y2=\"" << MT + PH << "\" stroke=\"black\"/>\n";

  // X ticks: widths sit at their log2 positions; scatter axes use nice ticks.
  if (width_axis) {
    std::vector<std::size_t> widths;
    for (const SweepRow& r : rows)
      if (r.ok && std::find(widths.begin(), widths.end(), r.width) ==
                      widths.end())
        widths.push_back(r.width);
    std::sort(widths.begin(), widths.end());
    for (std::size_t w : widths) {
      const double x = px(std::log2(static_cast<double>(w)));
      svg << "<line x1=\"" << fmt("%.2f", x) << "\" y1=\"" << MT + PH
          << "\" x2=\"" << fmt("%.2f", x) << "\" y2=\"" << MT + PH + 5
          << "\" stroke=\"black\"/>\n"
          << "<text x=\"" << fmt("%.2f", x) << "\" y=\"" << MT + PH + 20
          << "\" font-family=\"sans-serif\" font-size=\"12\" "
             "text-anchor=\"middle\">"
          << w << "</text>\n";
    }
  } else {
    for (double t : nice_ticks(xl.lo, xl.hi)) {
      const double x = px(t);
      svg << "<line x1=\"" << fmt("%.2f", x) << "\" y1=\"" << MT + PH
          << "\" x2=\"" << fmt("%.2f", x) << "\" y2=\"" << MT + PH + 5
          << "\" stroke=\"black\"/>\n"
          << "<text x=\"" << fmt("%.2f", x) << "\" y=\"" << MT + PH + 20
          << "\" font-family=\"sans-serif\" font-size=\"12\" "
             "text-anchor=\"middle\">"
          << fmt("%.6g", t) << "</text>\n";
    }
  }
  for (double t : nice_ticks(yl.lo, yl.hi)) {
    const double y = py(t);
    svg << "<line x1=\"" << ML - 5 << "\" y1=\"" << fmt("%.2f", y)
        << "\" x2=\"" << ML << "\" y2=\"" << fmt("%.2f", y)
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << ML - 9 << "\" y=\"" << fmt("%.2f", y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"end\">"
        << fmt("%.6g", t) << "</text>\n";
  }

  // Zero reference when it crosses the plot.
  if (yl.lo < 0.0 && yl.hi > 0.0)
    svg << "<line x1=\"" << ML << "\" y1=\"" << fmt("%.2f", py(0.0))
        << "\" x2=\"" << ML + PW << "\" y2=\"" << fmt("%.2f", py(0.0))
        << "\" stroke=\"#cccccc\" stroke-dasharray=\"2 4\"/>\n";

  // Axis labels.
  svg << "<text x=\"" << ML + PW / 2 << "\" y=\"" << H - 15
      << "\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\">"
      << x_label << "</text>\n"
      << "<text x=\"18\" y=\"" << MT + PH / 2
      << "\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << MT + PH / 2 << ")\">" << y_label << "</text>\n";

  // Median polylines, then markers on top.
  for (const Series& s : series) {
    if (s.line.size() >= 2) {
      svg << "<polyline fill=\"none\" stroke=\"" << s.color
          << "\" stroke-width=\"1.5\"";
      if (s.dashed) svg << " stroke-dasharray=\"6 4\"";
      svg << " points=\"";
      for (std::size_t i = 0; i < s.line.size(); ++i) {
        if (i) svg << ' ';
        svg << fmt("%.2f", px(s.line[i].x)) << ',' << fmt("%.2f", py(s.line[i].y));
      }
      svg << "\"/>\n";
    }
    for (const Pt& p : s.markers) {
      svg << "<circle cx=\"" << fmt("%.2f", px(p.x)) << "\" cy=\""
          << fmt("%.2f", py(p.y)) << "\" r=\"3\"";
      if (s.dashed)
        svg << " fill=\"white\" stroke=\"" << s.color << "\"";
      else
        svg << " fill=\"" << s.color << "\"";
      svg << "/>\n";
    }
  }

  // Legend.
  double ly = MT + 10;
  const double lx = W - MR + 20;
  for (const Series& s : series) {
    svg << "<line x1=\"" << lx << "\" y1=\"" << fmt("%.2f", ly) << "\" x2=\""
        << lx + 24 << "\" y2=\"" << fmt("%.2f", ly) << "\" stroke=\""
        << s.color << "\" stroke-width=\"1.5\"";
    if (s.dashed) svg << " stroke-dasharray=\"6 4\"";
    svg << "/>\n"
        << "<text x=\"" << lx + 30 << "\" y=\"" << fmt("%.2f", ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label
        << "</text>\n";
    ly += 18;
  }

  svg << "</svg>\n";

  std::ofstream os(path, std::ios::binary);
  if (!os) throw ContractError("cannot open " + path + " for writing");
  os << svg.str();
  if (!os) throw ContractError("failed writing " + path);
}

}  // namespace genlab
