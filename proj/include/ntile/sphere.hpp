#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ntile/tiling.hpp"

namespace ntile {

/// Constants of the sphere construction for a given eps.
struct SphereParams {
  double eps = 0.0;
  double delta = 0.0;    // modulus(eps / 2), certified lower bound
  double r_prime = 0.0;  // tile threshold, 1 - 2 delta < r' < r < 1
  double r = 0.0;
  double rho = 0.0;      // r' (1 - r) / (1 + r)
  double R = 0.0;        // 2 r' / (1 + r)

  nlohmann::json to_json() const;
};

/// rho and R from (r', r) alone; eps and delta stay 0.
SphereParams sphere_constants(double r_prime, double r);
SphereParams sphere_params(const NormedSpace& space, double eps);

/// The point R x + t v of the unit sphere with t >= 0 found by bisection
/// (t -> ||R x + t v|| is convex, below 1 at t = 0 and unbounded).
Vector level_center(const NormedSpace& space, const Vector& x, const Vector& v, double R);

/// Tile (j, p): j indexes the family (0-based), p = 1 for the negative cap
/// and 2 for the positive one.
struct SphereTileIndex {
  std::size_t j = 0;
  int p = 2;

  std::size_t id() const { return 2 * j + (p == 2 ? 1 : 0); }
  static SphereTileIndex from_id(std::size_t id) { return {id / 2, id % 2 == 1 ? 2 : 1}; }
  std::string label() const;
  bool operator==(const SphereTileIndex&) const = default;
};

struct SphereBuildOptions {
  std::size_t samples = 30000;   // construction points on the sphere
  double margin = 0.075;         // threshold slack, as a fraction of 1 - r'
  std::size_t candidates = 48;   // centers tried per step
  std::size_t layer_directions = 0;  // level-set points per layer, 0 = by dimension
  double layer_step = 0.55;          // polar layer spacing, in cap radii
  std::size_t attempts = 4;          // reseeded sweeps while a tile lacks a witness
};

struct SphereBuildStats {
  std::size_t samples = 0;
  std::size_t layered = 0;    // centers of the level-set sweep
  std::size_t greedy = 0;     // repair centers placed at an uncovered point
  std::size_t closed = 0;     // centers that swallowed a whole component
  std::size_t inserted = 0;   // centers inserted earlier in the order
  std::size_t unwitnessed = 0;  // centers placed without a ball witness
  std::size_t level_centers = 0;  // centers on the level set f_j = R
  std::size_t attempts = 0;
  double seconds = 0.0;

  nlohmann::json to_json() const;
};

/// Tiles H_j^p = S_X n f_j^{-1}(U_p) n {|f_i| <= r' : i < j}, with
/// U_1 = (-inf, -r'], U_2 = [r', inf).
class SphereTiling : public Tiling {
 public:
  /// `positive_centers[j]` is h_j^2; h_j^1 = -h_j^2.
  SphereTiling(NormedSpace space, double eps, std::vector<Vector> family,
               std::vector<Vector> positive_centers);

  const SphereParams& params() const { return params_; }
  std::size_t family_size() const { return family_.size(); }
  const Vector& family_vector(std::size_t j) const { return family_.at(j); }
  const Functional& functional(std::size_t j) const { return functionals_.at(j); }
  Vector center(SphereTileIndex t) const;

  Membership tile_membership(SphereTileIndex t, const Vector& x) const;
  std::optional<SphereTileIndex> sphere_classify(const Vector& x) const;
  std::optional<SphereTileIndex> brute_force_classify(const Vector& x) const;

  /// Per-tile check of the ball conditions f_j(h) >= R and |f_i(h)| <= rR
  /// for i < j (sign-adjusted). Returns the failing family indices.
  std::vector<std::size_t> uncertified() const;

  const NormedSpace& space() const override { return space_; }
  std::size_t size() const override { return 2 * family_.size(); }
  TileInfo tile(std::size_t id) const override;
  Membership membership(std::size_t id, const Vector& x) const override;
  std::optional<std::size_t> classify(const Vector& x) const override;
  std::vector<std::size_t> candidates(const Vector& x) const override;
  Geometry geometry() const override { return Geometry::sphere; }
  std::string describe() const override;

  nlohmann::json to_json() const;
  static SphereTiling from_json(const nlohmann::json& j);

 private:
  void check_unit(const Vector& x) const;

  NormedSpace space_;
  SphereParams params_;
  std::vector<Vector> family_;
  std::vector<Functional> functionals_;
  std::vector<Vector> centers_;
};

/// Builds the family by sweeping level sets of |x_0| from the equator to the
/// pole over a random sample of the sphere, then repairing leftover gaps.
/// Every tile gets a center h with f_j(h) >= R and |f_i(h)| <= rR for
/// earlier i where one exists, which puts B(h, rho) n S_X inside it.
SphereTiling build_sphere_tiling(const NormedSpace& space, double eps, std::uint64_t seed,
                                 const SphereBuildOptions& options = {},
                                 SphereBuildStats* stats = nullptr);

}  // namespace ntile
