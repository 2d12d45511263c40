#include "beamsi/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace beamsi {

namespace {

constexpr double kWidth = 640, kHeight = 400, kLeft = 80, kRight = 150, kTop = 40, kBottom = 50;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string open_svg(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<text x=\"" + num(kWidth / 2) +
         "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) + "</text>\n";
}

// Viridis-like ramp and a blue-white-red ramp.
std::string colour(double s, bool diverging) {
  s = std::clamp(s, 0.0, 1.0);
  int r, g, b;
  if (diverging) {
    if (s < 0.5) {
      const double t = s / 0.5;
      r = static_cast<int>(40 + 215 * t), g = static_cast<int>(80 + 175 * t), b = 220 + static_cast<int>(35 * t);
    } else {
      const double t = (s - 0.5) / 0.5;
      r = 255, g = static_cast<int>(255 - 190 * t), b = static_cast<int>(255 - 200 * t);
    }
  } else {
    r = static_cast<int>(68 + s * (253 - 68));
    g = static_cast<int>(1 + s * (231 - 1));
    b = static_cast<int>(84 + s * (37 - 84));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string line_plot_svg(const std::string& title, const std::string& xlabel,
                          const std::string& ylabel, const std::vector<Series>& series) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (Eigen::Index i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]), x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]), y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
  if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad, y1 += pad;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  const auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

  std::string svg = open_svg(title);
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) +
         "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    svg += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(kTop + ph + 16) +
           "\" text-anchor=\"middle\">" + num(xv) + "</text>\n";
    svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(yv) + 4) +
           "\" text-anchor=\"end\">" + num(yv) + "</text>\n";
  }
  svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 10) +
         "\" text-anchor=\"middle\">" + escape(xlabel) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(kTop + ph / 2) + ")\">" + escape(ylabel) + "</text>\n";
  int row = 0;
  for (const auto& s : series) {
    std::string pts;
    for (Eigen::Index i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      pts += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\"" +
           (s.dashed ? " stroke-dasharray=\"5,3\"" : "") + " points=\"" + pts + "\"/>\n";
    const double ly = kTop + 12 + 18 * row++;
    svg += "<line x1=\"" + num(kWidth - kRight + 10) + "\" y1=\"" + num(ly) + "\" x2=\"" +
           num(kWidth - kRight + 30) + "\" y2=\"" + num(ly) + "\" stroke=\"" + s.color + "\"" +
           (s.dashed ? " stroke-dasharray=\"5,3\"" : "") + "/>\n";
    svg += "<text x=\"" + num(kWidth - kRight + 35) + "\" y=\"" + num(ly + 4) + "\">" +
           escape(s.label) + "</text>\n";
  }
  return svg + "</svg>\n";
}

std::string heatmap_svg(const std::string& title, const Mat& values, bool diverging) {
  double lo = values.minCoeff(), hi = values.maxCoeff();
  if (diverging) {
    const double m = std::max(std::abs(lo), std::abs(hi));
    lo = -m, hi = m;
  }
  const double span = hi > lo ? hi - lo : 1.0;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const double cw = pw / values.cols(), ch = ph / values.rows();
  std::string svg = open_svg(title);
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      svg += "<rect x=\"" + num(kLeft + c * cw) + "\" y=\"" + num(kTop + r * ch) + "\" width=\"" +
             num(cw + 0.3) + "\" height=\"" + num(ch + 0.3) + "\" fill=\"" +
             colour((values(r, c) - lo) / span, diverging) + "\"/>\n";
    }
  }
  svg += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 20) +
         "\" text-anchor=\"middle\">node</text>\n";
  svg += "<text x=\"" + num(kLeft - 10) + "\" y=\"" + num(kTop + ph / 2) +
         "\" text-anchor=\"end\">time</text>\n";
  for (int k = 0; k <= 10; ++k) {
    const double s = 1.0 - k / 10.0;
    svg += "<rect x=\"" + num(kWidth - kRight + 20) + "\" y=\"" + num(kTop + k * ph / 11) +
           "\" width=\"20\" height=\"" + num(ph / 11 + 0.5) + "\" fill=\"" + colour(s, diverging) + "\"/>\n";
  }
  svg += "<text x=\"" + num(kWidth - kRight + 45) + "\" y=\"" + num(kTop + 10) + "\">" + num(hi) + "</text>\n";
  svg += "<text x=\"" + num(kWidth - kRight + 45) + "\" y=\"" + num(kTop + ph) + "\">" + num(lo) + "</text>\n";
  return svg + "</svg>\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out << text;
}

}  // namespace beamsi
