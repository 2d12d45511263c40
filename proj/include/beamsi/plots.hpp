#pragma once

// Minimal self-contained SVG output: line plots and heat maps.

#include <filesystem>
#include <string>
#include <vector>

#include "beamsi/beam_model.hpp"

namespace beamsi {

struct Series {
  std::string label;
  Vec x, y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

std::string line_plot_svg(const std::string& title, const std::string& xlabel,
                          const std::string& ylabel, const std::vector<Series>& series);

/// values(row, col) drawn with rows along the vertical axis (time) and
/// columns along the horizontal axis (node). Symmetric colour scale when
/// diverging is set.
std::string heatmap_svg(const std::string& title, const Mat& values, bool diverging = false);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace beamsi
