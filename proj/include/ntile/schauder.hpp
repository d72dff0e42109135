#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ntile/nets.hpp"
#include "ntile/strip.hpp"
#include "ntile/tiling.hpp"
#include "ntile/voronoi.hpp"

namespace ntile {

/// One tile of the tiling of W_k: H0, a petal H_j^p (p = 1..4), or a strip
/// H_n (n != 0).
struct HTile {
  enum class Kind { zero, petal, strip };
  Kind kind = Kind::zero;
  std::size_t j = 0;  // petal family index
  int p = 0;          // petal 1..4
  long long n = 0;    // strip index
  std::string label() const;
};

/// Tiling of W_k (coordinates > k) driven by the strip tiles. The direction
/// is e = e_{k+1} with e* its coordinate functional; the biorthogonal family
/// lives in coordinates >= k+2, where w*_j = v*_j and w_j = v_j.
///
/// Tile order: H0, petals by (j, p), strips by (|n|, positive first).
class WLevelTiling {
 public:
  WLevelTiling(NormedSpace space, std::size_t level, StripParams params,
               BiorthogonalFamily family, long long max_strip);

  const NormedSpace& space() const { return space_; }
  std::size_t level() const { return level_; }
  std::size_t direction_index() const { return level_ + 1; }
  const BiorthogonalFamily& family() const { return family_; }
  const StripParams& params() const { return params_; }
  long long max_strip() const { return max_strip_; }

  std::size_t tile_count() const;
  HTile decode(std::size_t idx) const;
  std::size_t encode(const HTile& t) const;

  double e_star(const Vector& w) const { return w[static_cast<Eigen::Index>(level_ + 1)]; }
  /// pi_j(w) = (e*(w), w*_j(w)).
  std::pair<double, double> pi(std::size_t j, const Vector& w) const;

  /// Throws std::invalid_argument unless w has zero coordinates 0..k.
  Membership membership(std::size_t idx, const Vector& w) const;
  Membership membership_unchecked(std::size_t idx, const Vector& w) const;

  /// First tile (in tile order) containing w; nullopt only beyond max_strip.
  std::optional<std::size_t> classify(const Vector& w) const;
  /// Same answer by scanning every tile's membership.
  std::optional<std::size_t> brute_force_classify(const Vector& w) const;

  Vector center(std::size_t idx) const;

 private:
  Membership zero_membership(const Vector& w) const;

  NormedSpace space_;
  std::size_t level_;
  StripParams params_;
  BiorthogonalFamily family_;
  long long max_strip_;
  double hw_, period_, a_, b_;
};

/// Probe results for properties (1)-(4) of a W-level tiling.
struct WLevelBounds {
  double R0 = 0.0;
  bool unit_ball_in_h0 = true;
  bool h0_in_R0_ball = true;
  double h0_max_norm = 0.0;
  bool tail_of_centers = true;   // ||Q_{k+1} h_j|| <= 1 - r
  bool inner_balls = true;       // B(h_j, r) in H_j
  bool affine_bound = true;      // ||h - h_j|| <= hw + c1 + c2 ||Q h||
  std::vector<Vector> witnesses;
  bool all() const {
    return unit_ball_in_h0 && h0_in_R0_ball && tail_of_centers && inner_balls && affine_bound;
  }
};

WLevelBounds w_level_bounds(const WLevelTiling& wt, bool unconditional, std::size_t samples,
                            std::size_t directions, std::uint64_t seed);

struct SchauderConfig {
  std::size_t depth = 2;
  StripParams params;
  bool unconditional = false;
  double region_radius = 10.0;
  std::uint64_t seed = 0;
  std::size_t family_cap = 64;
  std::size_t family_candidates = 4096;
};

struct CompositeIndex {
  std::size_t i = 0;  // Voronoi cell in V_k
  std::size_t j = 0;  // W_k tile
  std::size_t k = 0;  // level
  bool operator==(const CompositeIndex&) const = default;
};

/// Composite tiles C^k_{i,j} = P_k^-1(D_i^k) and Q_k^-1(H_j^k) and the
/// preimages Q_m^-1(H0^m) for k < m <= depth, with k >= 1 forcing j >= 1.
/// Tile ids enumerate (k, j, i) lexicographically.
class SchauderTiling : public Tiling {
 public:
  SchauderTiling(NormedSpace space, SchauderConfig config);

  const SchauderConfig& config() const { return config_; }
  const NormalityConstants& constants() const { return constants_; }
  std::size_t depth() const { return config_.depth; }
  const WLevelTiling& w_level(std::size_t k) const { return levels_[k].h; }
  const VoronoiTiling& cells(std::size_t k) const { return *levels_[k].cells; }

  std::size_t encode(const CompositeIndex& c) const;
  CompositeIndex decode(std::size_t id) const;

  /// Head coordinates 0..k as a vector of V_k, and the tail with them zeroed.
  Vector head(std::size_t k, const Vector& x) const;
  Vector tail(std::size_t k, const Vector& x) const;

  Membership composite_membership(const CompositeIndex& c, const Vector& x) const;
  std::optional<CompositeIndex> composite_classify(const Vector& x) const;
  /// Oracle: scans levels, then every W tile, then every Voronoi center.
  std::optional<CompositeIndex> brute_force_classify(const Vector& x) const;

  const NormedSpace& space() const override { return space_; }
  std::size_t size() const override { return offsets_.back(); }
  TileInfo tile(std::size_t id) const override;
  Membership membership(std::size_t id, const Vector& x) const override {
    return composite_membership(decode(id), x);
  }
  std::optional<std::size_t> classify(const Vector& x) const override;
  std::vector<std::size_t> candidates(const Vector& x) const override;
  std::string describe() const override;

 private:
  struct Level {
    std::unique_ptr<VoronoiTiling> cells;
    WLevelTiling h;
  };

  bool higher_levels_in_h0(std::size_t k, const Vector& x) const;
  std::size_t first_j(std::size_t k) const { return k >= 1 ? 1 : 0; }

  NormedSpace space_;
  SchauderConfig config_;
  NormalityConstants constants_;
  std::vector<Level> levels_;
  std::vector<std::size_t> offsets_;  // size depth + 2
};

BiorthogonalFamily level_family(const NormedSpace& space, std::size_t level, double delta,
                                std::size_t cap, std::size_t candidates, std::uint64_t seed);

}  // namespace ntile
