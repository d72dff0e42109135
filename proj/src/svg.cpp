#include "ntile/svg.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

namespace ntile {

namespace {

using Label = std::optional<std::size_t>;
constexpr double kPx = 600.0;

// Golden-angle hues so neighbouring ids differ.
std::string color(Label id) {
  if (!id) return "#ffffff";
  const double h = std::fmod(static_cast<double>(*id) * 137.508, 360.0);
  char buf[40];
  std::snprintf(buf, sizeof buf, "hsl(%.1f,%d%%,%d%%)", h, 55 + static_cast<int>(*id % 3) * 10,
                62 + static_cast<int>(*id % 2) * 10);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;  // picture window in plane coordinates
  double width, height;   // pixels
  double sx(double x) const { return (x - x0) / (x1 - x0) * width; }
  double sy(double y) const { return (y1 - y) / (y1 - y0) * height; }
};

void open(std::ostream& out, const Frame& f, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\""
      << f.height << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\">\n";
  out << "<title>" << escape(title) << "</title>\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
}

// Rows of cells labelled at their midpoints; equal neighbours become one rect.
void raster(std::ostream& out, const Frame& f, std::size_t cols, std::size_t rows,
            const std::function<Label(double, double)>& label) {
  const double w = f.width / static_cast<double>(cols), h = f.height / static_cast<double>(rows);
  const double dx = (f.x1 - f.x0) / static_cast<double>(cols);
  const double dy = (f.y1 - f.y0) / static_cast<double>(rows);
  for (std::size_t row = 0; row < rows; ++row) {
    const double y = f.y1 - (static_cast<double>(row) + 0.5) * dy;
    Label run;
    std::size_t start = 0;
    for (std::size_t col = 0; col <= cols; ++col) {
      Label id;
      if (col < cols) id = label(f.x0 + (static_cast<double>(col) + 0.5) * dx, y);
      if (col < cols && id == run) continue;
      if (run)
        out << "<rect x=\"" << static_cast<double>(start) * w << "\" y=\""
            << static_cast<double>(row) * h << "\" width=\""
            << static_cast<double>(col - start) * w + 0.5 << "\" height=\"" << h + 0.5
            << "\" fill=\"" << color(run) << "\"/>\n";
      run = id;
      start = col;
    }
  }
}

void dot(std::ostream& out, const Frame& f, double x, double y) {
  if (x < f.x0 || x > f.x1 || y < f.y0 || y > f.y1) return;
  out << "<circle cx=\"" << f.sx(x) << "\" cy=\"" << f.sy(y) << "\" r=\"1.8\" fill=\"#222\"/>\n";
}

void circle_arcs(std::ostream& out, const Frame& f, const Tiling& tiling, std::size_t m) {
  const auto& sp = tiling.space();
  std::vector<Vector> pts;
  std::vector<Label> ids;
  for (std::size_t i = 0; i <= m; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(m);
    Vector u{{std::cos(t), std::sin(t)}};
    u /= sp.norm(u);
    pts.push_back(u);
    ids.push_back(tiling.classify(u));
  }
  std::size_t start = 0;
  for (std::size_t i = 1; i <= m; ++i) {
    if (i < m && ids[i] == ids[start]) continue;
    out << "<polyline fill=\"none\" stroke-width=\"6\" stroke=\"" << color(ids[start])
        << "\" points=\"";
    for (std::size_t a = start; a <= i; ++a) out << f.sx(pts[a][0]) << ',' << f.sy(pts[a][1]) << ' ';
    out << "\"/>\n";
    start = i;
  }
}

}  // namespace

void write_svg(const Tiling& tiling, std::ostream& out, const SvgOptions& options) {
  const auto& sp = tiling.space();
  const bool sphere = tiling.geometry() == Geometry::sphere;
  if (sp.dim() != 2 && !(sphere && sp.dim() == 3))
    throw std::invalid_argument("SVG export needs a planar tiling or a tiling of a 2-sphere");
  if (!(options.extent > 0.0) || options.resolution == 0)
    throw std::invalid_argument("SVG extent and resolution must be positive");
  const double e = options.extent;
  const Frame f{-e, e, -e, e, kPx, kPx};
  open(out, f, options.title.empty() ? tiling.describe() : options.title);

  if (sphere && sp.dim() == 2) {
    circle_arcs(out, f, tiling, std::max<std::size_t>(options.arc_points, 8));
  } else if (sphere) {
    // Upper hemisphere seen from above: (u, v, sqrt(1 - u^2 - v^2)) pushed onto the sphere.
    raster(out, f, options.resolution, options.resolution, [&](double u, double v) -> Label {
      const double s = 1.0 - u * u - v * v;
      if (s < 0.0) return std::nullopt;
      Vector w{{u, v, std::sqrt(s)}};
      return tiling.classify(w / sp.norm(w));
    });
  } else {
    raster(out, f, options.resolution, options.resolution,
           [&](double x, double y) { return tiling.classify(Vector{{x, y}}); });
  }

  for (std::size_t id = 0; id < tiling.size(); ++id) {
    const Vector c = tiling.tile(id).center;
    if (sp.dim() == 2 || c[2] >= 0.0) dot(out, f, c[0], c[1]);
  }
  out << "</svg>\n";
}

void write_strip_svg(const StripParams& params, std::ostream& out, std::size_t resolution) {
  if (resolution == 0) throw std::invalid_argument("SVG resolution must be positive");
  const double hw = to_double(params.halfwidth), ye = to_double(params.y_extent());
  const double top = 1.6 * ye;
  const double h = kPx, w = std::max(120.0, kPx * hw / top);
  const Frame f{-hw, hw, -top, top, w, h};
  open(out, f, "strip tiles U0..U4, " + params.tag);
  const auto cols = static_cast<std::size_t>(std::ceil(static_cast<double>(resolution) * w / h));
  raster(out, f, cols, resolution, [&](double x, double y) -> Label {
    for (std::size_t i = 0; i < 5; ++i)
      if (is_inside(plane_membership(params, static_cast<PlaneTile>(i), x, y))) return i;
    return std::nullopt;
  });
  out << "</svg>\n";
}

}  // namespace ntile
