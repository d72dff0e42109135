#pragma once

#include <ostream>
#include <string>

#include "ntile/strip.hpp"
#include "ntile/tiling.hpp"

namespace ntile {

struct SvgOptions {
  double extent = 1.0;           // view box [-extent, extent]^2 in space coordinates
  std::size_t resolution = 240;  // raster cells per side (full tilings)
  std::size_t arc_points = 2000;  // points along the unit circle
  std::string title;
};

/// Picture of a planar tiling, rastered by classification with runs of one
/// tile merged into a rect. Tilings of the circle are drawn as colored arcs
/// and tilings of a 2-sphere as the upper hemisphere seen from above. Tile
/// centers are dots.
void write_svg(const Tiling& tiling, std::ostream& out, const SvgOptions& options = {});

/// The planar tiles U0..U4 on one strip |x| <= halfwidth.
void write_strip_svg(const StripParams& params, std::ostream& out, std::size_t resolution = 300);

}  // namespace ntile
