#include "fieldnav/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fieldnav/errors.hpp"

namespace fieldnav {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct WorldToPixel {
  double min_x, min_y, scale, height_px, margin;

  double px(double x) const { return margin + (x - min_x) * scale; }
  double py(double y) const { return height_px - margin - (y - min_y) * scale; }
};

void emit_star(std::ostringstream& svg, double cx, double cy) {
  constexpr double r_outer = 6.0, r_inner = 2.5;
  svg << "  <polygon class=\"star\" fill=\"#2a9d3f\" stroke=\"none\" points=\"";
  for (int i = 0; i < 10; ++i) {
    const double r = (i % 2 == 0) ? r_outer : r_inner;
    const double a = -kPi / 2.0 + i * kPi / 5.0;
    if (i) svg << " ";
    svg << fmt(cx + r * std::cos(a)) << "," << fmt(cy + r * std::sin(a));
  }
  svg << "\"/>\n";
}

void emit_polyline(std::ostringstream& svg, const std::vector<std::pair<double, double>>& pts,
                   const char* color, double width, const char* cls) {
  if (pts.size() < 2) return;
  svg << "  <polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"" << fmt(width) << "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) svg << " ";
    svg << fmt(pts[i].first) << "," << fmt(pts[i].second);
  }
  svg << "\"/>\n";
}

}  // namespace

std::string render_svg(const Field& field, const std::vector<ReferencePath>& segments,
                       const MissionLog* log) {
  double min_x, min_y, max_x, max_y;
  field.bounding_box(min_x, min_y, max_x, max_y);
  for (const auto& seg : segments) {
    for (const auto& s : seg.samples) {
      min_x = std::min(min_x, s.x);
      min_y = std::min(min_y, s.y);
      max_x = std::max(max_x, s.x);
      max_y = std::max(max_y, s.y);
    }
  }
  if (log) {
    for (const auto& step : log->steps) {
      min_x = std::min(min_x, step.state.x);
      min_y = std::min(min_y, step.state.y);
      max_x = std::max(max_x, step.state.x);
      max_y = std::max(max_y, step.state.y);
    }
  }
  const double pad = 1.0;
  min_x -= pad;
  min_y -= pad;
  max_x += pad;
  max_y += pad;

  const double margin = 20.0;
  const double width_px = 900.0;
  const double span_x = std::max(max_x - min_x, 1e-6);
  const double span_y = std::max(max_y - min_y, 1e-6);
  const double scale = (width_px - 2.0 * margin) / span_x;
  const double height_px = span_y * scale + 2.0 * margin;
  const WorldToPixel m{min_x, min_y, scale, height_px, margin};

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width_px) << "\" height=\""
      << fmt(height_px) << "\" viewBox=\"0 0 " << fmt(width_px) << " " << fmt(height_px)
      << "\">\n";
  svg << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (const auto& seg : segments) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(seg.samples.size());
    for (const auto& s : seg.samples) pts.emplace_back(m.px(s.x), m.py(s.y));
    emit_polyline(svg, pts, "#d0342c", 1.5, "reference");
  }

  // Heading ticks along the reference, one every ~1 m of path.
  svg << "  <g class=\"ticks\" stroke=\"#d0342c\" stroke-width=\"1\">\n";
  for (const auto& seg : segments) {
    const std::size_t stride = std::max<std::size_t>(1, 20);
    for (std::size_t i = 0; i < seg.samples.size(); i += stride) {
      const auto& s = seg.samples[i];
      const double len = 8.0;
      svg << "    <line x1=\"" << fmt(m.px(s.x)) << "\" y1=\"" << fmt(m.py(s.y)) << "\" x2=\""
          << fmt(m.px(s.x) + len * std::cos(s.theta)) << "\" y2=\""
          << fmt(m.py(s.y) - len * std::sin(s.theta)) << "\"/>\n";
    }
  }
  svg << "  </g>\n";

  if (log && !log->steps.empty()) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(log->steps.size() + 1);
    for (const auto& step : log->steps) pts.emplace_back(m.px(step.state.x), m.py(step.state.y));
    emit_polyline(svg, pts, "#2457c5", 2.0, "trajectory");
  }

  for (const auto& t : field.targets) emit_star(svg, m.px(t.x), m.py(t.y));

  svg << "</svg>\n";
  return svg.str();
}

void write_svg(const std::filesystem::path& file, const std::string& svg) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ValidationError("cannot write SVG file '" + file.string() + "'");
  out << svg;
}

}  // namespace fieldnav
