#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ntile/space.hpp"

namespace ntile {

enum class Membership { outside, inside, strict };

inline bool is_inside(Membership m) { return m != Membership::outside; }
const char* to_string(Membership m);

/// Full-dimensional tiles, or tiles relative to the unit sphere.
enum class Geometry { full, sphere };

struct TileInfo {
  Vector center;
  double inner_radius = 0.0;  // claimed: B(center, inner) inside the tile
  double outer_radius = 0.0;  // claimed: tile inside B(center, outer)
  std::string label;
};

/// Ordered tile collection with membership oracles and a classifier. Tile ids
/// are dense in [0, size()).
class Tiling {
 public:
  virtual ~Tiling() = default;

  virtual const NormedSpace& space() const = 0;
  virtual std::size_t size() const = 0;
  virtual TileInfo tile(std::size_t id) const = 0;
  virtual Membership membership(std::size_t id, const Vector& x) const = 0;

  /// Deterministic classifier; nullopt when no tile accepts x.
  virtual std::optional<std::size_t> classify(const Vector& x) const = 0;

  /// Superset of the tiles that can contain x, ascending. Defaults to all.
  virtual std::vector<std::size_t> candidates(const Vector& x) const;

  virtual Geometry geometry() const { return Geometry::full; }
  virtual std::string describe() const = 0;
};

}  // namespace ntile
