#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace hydronls::cli {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Minimal line plot: framed axes, one polyline per series, axis ranges as labels.
void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<Series>& series);

}  // namespace hydronls::cli
