#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ntile/tiling.hpp"

namespace ntile {

inline constexpr int kReportVersion = 1;

/// Reference normality ratios carried in every report.
nlohmann::json reference_constants();

// Samplers. Ball and box use a seeded Halton sequence (ball by norm
// rejection); the sphere uses normalized Gaussians for l_2 and radial
// projection of ball samples otherwise.
std::vector<Vector> sample_ball(const NormedSpace& space, const Vector& center, double radius,
                                std::size_t n, std::uint64_t seed);
std::vector<Vector> sample_box(const Vector& lo, const Vector& hi, std::size_t n,
                               std::uint64_t seed);
std::vector<Vector> sample_sphere(const NormedSpace& space, std::size_t n, std::uint64_t seed);

struct CoverageResult {
  double fraction = 0.0;
  std::vector<std::optional<std::size_t>> labels;  // classification per sample
  std::vector<Vector> uncovered;                   // first few witnesses
};

CoverageResult check_coverage(const Tiling& tiling, const std::vector<Vector>& samples,
                              std::size_t max_witnesses = 16);

struct OverlapViolation {
  Vector point;
  std::size_t first;
  std::size_t second;
};

/// Samples that are strict members of two distinct tiles.
std::vector<OverlapViolation> check_disjoint_interiors(const Tiling& tiling,
                                                       const std::vector<Vector>& samples);

struct TileCertificate {
  std::size_t id = 0;
  std::string label;
  Vector center;
  double inner_claimed = 0.0;
  double outer_claimed = 0.0;
  std::size_t inner_probes = 0;
  std::size_t inner_failures = 0;
  /// Smallest radius at which a failing direction leaves the tile.
  std::optional<double> min_failing_radius;
  std::size_t classified = 0;
  double outer_observed = 0.0;  // max distance of samples classified here

  bool inner_ok() const { return inner_failures == 0; }
  bool outer_ok(double tol) const { return outer_observed <= outer_claimed + tol; }
};

/// Inner radius: probes center + (inner - tol) u along random unit u must be
/// members (sphere tilings use the chart normalize(c + 0.9 inner u), keeping
/// probes within inner - tol of c). Outer radius: max distance from the
/// center over samples the classifier assigned to the tile.
std::vector<TileCertificate> certify_radii(const Tiling& tiling,
                                           const std::vector<std::size_t>& tiles,
                                           const std::vector<Vector>& samples,
                                           const CoverageResult& coverage,
                                           std::size_t n_directions, double tol,
                                           std::uint64_t seed);

struct StarViolation {
  std::size_t tile;
  Vector sample;
  Vector segment_point;
};

/// For samples classified to each tile, checks that the segment from the tile
/// center to the sample stays in the tile (segment_points grid on [0,1]).
std::vector<StarViolation> check_starshaped(const Tiling& tiling,
                                            const std::vector<Vector>& samples,
                                            const CoverageResult& coverage,
                                            std::size_t per_tile, std::size_t segment_points);

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::size_t directions = 1000;
  double tol = 1e-9;          // used for the inner-probe shrink
  double outer_tol = 1e-9;    // slack on the outer-radius comparison
  bool starshape = false;
  std::size_t star_per_tile = 4;
  std::size_t segment_points = 100;
  /// Tilings with at most this many tiles get every tile certified; larger
  /// ones only the tiles that received samples.
  std::size_t certify_all_below = 4096;
};

struct VerificationReport {
  std::string tiling;
  std::uint64_t seed = 0;
  std::size_t sample_count = 0;
  CoverageResult coverage;
  std::vector<OverlapViolation> violations;
  std::vector<TileCertificate> tiles;
  std::vector<StarViolation> star_violations;
  bool starshape_checked = false;
  double outer_tol = 1e-9;
  double wall_clock_seconds = 0.0;

  bool coverage_ok() const { return coverage.fraction == 1.0; }
  bool disjoint_ok() const { return violations.empty(); }
  bool inner_ok() const;
  bool outer_ok() const;
  bool starshape_ok() const { return star_violations.empty(); }
  bool passed() const;

  /// Largest observed outer distance over the smallest certified inner radius.
  double achieved_ratio() const;

  nlohmann::json to_json(bool include_timing = true) const;
};

VerificationReport verify_tiling(const Tiling& tiling, const std::vector<Vector>& samples,
                                 const VerifyOptions& options);

/// Negative control: a tiling with some tiles removed.
class MaskedTiling : public Tiling {
 public:
  MaskedTiling(const Tiling& base, std::vector<std::size_t> deleted);

  const NormedSpace& space() const override { return base_.space(); }
  std::size_t size() const override { return base_.size(); }
  TileInfo tile(std::size_t id) const override { return base_.tile(id); }
  Membership membership(std::size_t id, const Vector& x) const override;
  std::optional<std::size_t> classify(const Vector& x) const override;
  std::vector<std::size_t> candidates(const Vector& x) const override {
    return base_.candidates(x);
  }
  Geometry geometry() const override { return base_.geometry(); }
  std::string describe() const override;

 private:
  bool deleted(std::size_t id) const;

  const Tiling& base_;
  std::vector<std::size_t> deleted_;
};

/// Closed balls given explicitly; overlapping balls make a broken tiling.
class ExplicitBallTiling : public Tiling {
 public:
  struct Ball {
    Vector center;
    double radius;
  };

  ExplicitBallTiling(NormedSpace space, std::vector<Ball> balls);

  const NormedSpace& space() const override { return space_; }
  std::size_t size() const override { return balls_.size(); }
  TileInfo tile(std::size_t id) const override;
  Membership membership(std::size_t id, const Vector& x) const override;
  std::optional<std::size_t> classify(const Vector& x) const override;
  std::string describe() const override;

 private:
  NormedSpace space_;
  std::vector<Ball> balls_;
};

}  // namespace ntile
