#pragma once

#include <string>
#include <vector>

namespace omav {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;  // empty: palette by index
};

// Self-contained line chart; output depends only on the arguments.
std::string svg_plot(const std::string& title, const std::string& xlabel,
                     const std::string& ylabel,
                     const std::vector<SvgSeries>& series, int width = 900,
                     int height = 480);

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& xlabel, const std::string& ylabel,
                    const std::vector<SvgSeries>& series, int width = 900,
                    int height = 480);

}  // namespace omav
