#include "omav/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "omav/csvio.hpp"

namespace omav {

namespace {

const char* kPalette[] = {"#1f6feb", "#d73a49", "#2da44e", "#bf8700",
                          "#8250df", "#0a7b83"};
constexpr int kPaletteSize = 6;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void normalize() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi == lo) {
      lo -= 1.0;
      hi += 1.0;
    }
  }
};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string svg_plot(const std::string& title, const std::string& xlabel,
                     const std::string& ylabel,
                     const std::vector<SvgSeries>& series, int width,
                     int height) {
  const double ml = 64, mr = 16, mt = 32, mb = 46;
  const double pw = width - ml - mr, ph = height - mt - mb;
  if (pw <= 0 || ph <= 0) throw std::invalid_argument("svg size too small");

  Range rx, ry;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("series x/y size mismatch: " + s.label);
    for (double v : s.x) rx.include(v);
    for (double v : s.y) ry.include(v);
  }
  rx.normalize();
  ry.normalize();

  auto px = [&](double v) {
    return ml + (v - rx.lo) / (rx.hi - rx.lo) * pw;
  };
  auto py = [&](double v) {
    return mt + (ry.hi - v) / (ry.hi - ry.lo) * ph;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(ml + pw / 2) +
         "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">" +
         escape(title) + "</text>\n";

  // Grid and tick labels, 5 intervals per axis.
  for (int i = 0; i <= 5; ++i) {
    const double fx = rx.lo + (rx.hi - rx.lo) * i / 5.0;
    const double fy = ry.lo + (ry.hi - ry.lo) * i / 5.0;
    svg += "<line x1=\"" + fmt(px(fx)) + "\" y1=\"" + fmt(mt) +
           "\" x2=\"" + fmt(px(fx)) + "\" y2=\"" + fmt(mt + ph) +
           "\" stroke=\"#dddddd\"/>\n";
    svg += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(py(fy)) +
           "\" x2=\"" + fmt(ml + pw) + "\" y2=\"" + fmt(py(fy)) +
           "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + fmt(px(fx)) + "\" y=\"" + fmt(mt + ph + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           fmt(fx) + "</text>\n";
    svg += "<text x=\"" + fmt(ml - 6) + "\" y=\"" + fmt(py(fy) + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           fmt(fy) + "</text>\n";
  }
  svg += "<rect x=\"" + fmt(ml) + "\" y=\"" + fmt(mt) + "\" width=\"" +
         fmt(pw) + "\" height=\"" + fmt(ph) +
         "\" fill=\"none\" stroke=\"#333333\"/>\n";
  svg += "<text x=\"" + fmt(ml + pw / 2) + "\" y=\"" +
         fmt(height - 10.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">" +
         escape(xlabel) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + fmt(mt + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 16 " + fmt(mt + ph / 2) +
         ")\">" +
         escape(ylabel) + "</text>\n";

  int color_idx = 0;
  for (const auto& s : series) {
    const std::string color =
        s.color.empty() ? kPalette[color_idx % kPaletteSize] : s.color;
    ++color_idx;
    if (!s.x.empty()) {
      std::string pts;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (i) pts += ' ';
        pts += fmt(px(s.x[i])) + "," + fmt(py(s.y[i]));
      }
      svg += "<polyline points=\"" + pts +
             "\" fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"1.5\"/>\n";
    }
    const double ly = mt + 14.0 * color_idx;
    svg += "<line x1=\"" + fmt(ml + pw - 130) + "\" y1=\"" + fmt(ly) +
           "\" x2=\"" + fmt(ml + pw - 110) + "\" y2=\"" + fmt(ly) +
           "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt(ml + pw - 104) + "\" y=\"" + fmt(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" +
           escape(s.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<SvgSeries>& series, int width,
                    int height) {
  write_text_file(path, svg_plot(title, xlabel, ylabel, series, width,
                                 height));
}

}  // namespace omav
