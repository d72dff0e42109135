#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ntile/nets.hpp"
#include "ntile/tiling.hpp"

namespace ntile {

/// Voronoi cells V_i of a 2r-separated net and the starshaped tiles
/// D_i = closure(V_i minus the earlier cells), with d_i as centers.
///
/// The closure is realized predicatively: x is in D_i iff x is in V_i and not
/// strictly interior to any earlier V_j. For strictly convex norms this is
/// just V_i; otherwise interiors are detected with small axis/diagonal probes.
class VoronoiTiling : public Tiling {
 public:
  explicit VoronoiTiling(SeparatedNet net);

  const SeparatedNet& net() const { return net_; }
  double r() const { return net_.separation() / 2.0; }

  Membership voronoi_membership(std::size_t i, const Vector& x) const;
  Membership star_membership(std::size_t i, const Vector& x) const;

  /// Centers whose distance to x is within `extra` of the smallest distance,
  /// as (distance, index) sorted by index.
  std::vector<std::pair<double, std::size_t>> nearest_set(const Vector& x, double extra) const;

  /// Full scan over every center (oracle for tests).
  std::size_t brute_force_classify(const Vector& x) const;

  struct StarProbeViolation {
    Vector sample;
    Vector segment_point;
  };

  /// Draws `samples` points of D_i (rejection in B(d_i, 2r)) and checks the
  /// segments towards d_i on `segment_points` grid values of t.
  std::vector<StarProbeViolation> starshape_probe(std::size_t i, std::size_t samples,
                                                  std::size_t segment_points,
                                                  std::uint64_t seed) const;

  const NormedSpace& space() const override { return net_.space(); }
  std::size_t size() const override { return net_.size(); }
  TileInfo tile(std::size_t id) const override;
  Membership membership(std::size_t id, const Vector& x) const override {
    return star_membership(id, x);
  }
  std::optional<std::size_t> classify(const Vector& x) const override;
  std::vector<std::size_t> candidates(const Vector& x) const override;
  std::string describe() const override;

 private:
  void check_index(std::size_t i) const;
  bool in_closed_cell(std::size_t j, const Vector& x) const;
  bool strictly_interior(std::size_t j, const Vector& x) const;

  SeparatedNet net_;
  bool strictly_convex_;
};

/// Greedy 2r-separated net over `region`: grid candidates at spacing
/// 2r/4.5 followed by `refine` quasirandom points of the region, which
/// fill the pockets the grid misses.
SeparatedNet voronoi_net(const NormedSpace& space, const Region& region, double r,
                         std::uint64_t seed, std::size_t refine = 0);

}  // namespace ntile
