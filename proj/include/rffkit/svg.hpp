#pragma once
// Minimal SVG line charts: axes, ticks, legend, optional log-scale y.
// Charts are rendered from plain (x, y) series so they can be regenerated
// from an exported CSV without recomputation.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rffkit {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

inline void write_line_chart(const std::string& path, const std::string& title,
                             const std::string& xlabel, const std::string& ylabel,
                             const std::vector<PlotSeries>& series,
                             bool log_y = false) {
  static const char* colors[] = {"#1f6fb2", "#d1495b", "#3e8e5a",
                                 "#8d6cab", "#c98a2b", "#50a8a0"};
  const double W = 800, H = 500, ml = 70, mr = 20, mt = 40, mb = 55;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("write_line_chart: series length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double yv = s.y[i];
      if (log_y && !(yv > 0.0)) continue;
      if (log_y) yv = std::log10(yv);
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, yv);
      ymax = std::max(ymax, yv);
    }
  }
  if (!(xmin < xmax)) { xmin -= 0.5; xmax += 0.5; }
  if (!(ymin < ymax)) { ymin -= 0.5; ymax += 0.5; }
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto py = [&](double yv) {
    if (log_y) yv = std::log10(yv);
    return H - mb - (yv - ymin) / (ymax - ymin) * (H - mt - mb);
  };
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return std::string(buf);
  };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_line_chart: cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";

  // axes
  out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
      << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << H - mb << "\" stroke=\"black\"/>\n";
  const int nticks = 5;
  for (int i = 0; i <= nticks; ++i) {
    double xv = xmin + i * (xmax - xmin) / nticks;
    double X = px(xv);
    out << "<line x1=\"" << X << "\" y1=\"" << H - mb << "\" x2=\"" << X
        << "\" y2=\"" << H - mb + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << X << "\" y=\"" << H - mb + 18
        << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
    double yv = ymin + i * (ymax - ymin) / nticks;
    double Y = H - mb - i * (H - mt - mb) / nticks;
    out << "<line x1=\"" << ml - 5 << "\" y1=\"" << Y << "\" x2=\"" << ml
        << "\" y2=\"" << Y << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << Y + 4
        << "\" text-anchor=\"end\">"
        << fmt(log_y ? std::pow(10.0, yv) : yv) << "</text>\n";
  }
  out << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  out << "<text x=\"18\" y=\"" << (mt + H - mb) / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << (mt + H - mb) / 2 << ")\">" << ylabel
      << (log_y ? " (log scale)" : "") << "</text>\n";

  // series
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = colors[si % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (log_y && !(s.y[i] > 0.0)) continue;
      out << px(s.x[i]) << "," << py(s.y[i]) << " ";
    }
    out << "\"/>\n";
    double ly = mt + 16.0 * (si + 1);
    out << "<line x1=\"" << W - mr - 150 << "\" y1=\"" << ly << "\" x2=\""
        << W - mr - 125 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << W - mr - 120 << "\" y=\"" << ly + 4 << "\">" << s.name
        << "</text>\n";
  }
  out << "</svg>\n";
}

} // namespace rffkit
