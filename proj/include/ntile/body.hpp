#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ntile/tiling.hpp"

namespace ntile {

/// {x : f(x) <= level} with ||f||* = 1.
struct Halfspace {
  Functional f;
  double level = 0.0;
};

/// Ball B(ball_center, ball_radius) of a space cut by half-spaces. Bodies
/// for the layered tiling must satisfy B(0, eta) in C in B(0, 1).
class ConvexBody {
 public:
  ConvexBody(NormedSpace space, Vector ball_center, double ball_radius,
             std::vector<Halfspace> halfspaces = {});
  static ConvexBody unit_ball(NormedSpace space);

  const NormedSpace& space() const { return space_; }
  const Vector& ball_center() const { return center_; }
  double ball_radius() const { return radius_; }
  const std::vector<Halfspace>& halfspaces() const { return cuts_; }

  /// Adds f(x) <= level, rescaling f to unit dual norm.
  void cut(const Functional& f, double level);
  /// (C - shift) / scale.
  ConvexBody normalized(const Vector& shift, double scale) const;
  /// s C.
  ConvexBody scaled(double s) const;

  Membership membership(const Vector& x, double tol = kBoundaryTol) const;
  /// Certified radius of a ball about 0 inside C (0 when 0 is not interior).
  double eta() const;
  /// ||ball_center|| + ball_radius, so C lies in B(0, outer()).
  double outer() const;
  /// sup{t >= 0 : t u in C}; requires 0 in C.
  double radial(const Vector& u) const;

  nlohmann::json to_json() const;
  static ConvexBody from_json(const nlohmann::json& j);

 private:
  NormedSpace space_;
  Vector center_;
  double radius_;
  std::vector<Halfspace> cuts_;
};

/// The slice {x in body : f(x) >= level} around the ball B(y0, r_slice);
/// `scale` is the layer factor gamma^(k-1) it was built at.
struct SliceSpec {
  Functional f;
  double level = 0.0;
  Vector y0;
  double r_slice = 0.0;
  int layer = 1;
  double scale = 1.0;

  nlohmann::json to_json() const;
  static SliceSpec from_json(const nlohmann::json& j);
};

/// Slice at x for a body with B(0, eta) in C in B(0, 1): the norming
/// hyperplane of y0 at level 1 - delta, tangent to B(y0, r_slice).
SliceSpec build_slice(const ConvexBody& body, const Vector& x, double delta, double eta);

struct PeelOptions {
  /// Also slice at exit points of rays that leave B(0, sqrt(1 - delta)).
  bool refine = true;
  std::size_t directions = 4000;  // rays per refinement round
  std::size_t rounds = 64;        // fresh ray sets, until one finds nothing to cut
  std::uint64_t seed = 0;
};

struct PeelResult {
  std::vector<SliceSpec> slices;
  ConvexBody core;
  bool certified = false;  // core in B(0, sqrt(1 - delta)) on fresh rays
  std::optional<Vector> offending;  // a ray whose exit point is too far out
  std::string diagnostic;
};

/// Repeatedly slices at the largest surviving point of norm above
/// sqrt(1 - delta). Pool points outside the body are ignored.
PeelResult peel_layer(const ConvexBody& body, double delta, double eta,
                      const std::vector<Vector>& pool, const PeelOptions& options = {});

struct BodyOptions {
  std::size_t pool = 100000;  // quasirandom points per layer
  std::optional<double> eta;  // defaults to the body's certified eta
  PeelOptions peel;
};

/// Slices of all layers in creation order followed by the core
/// C_{n+1} = C n {f_a <= level_a for all a}. Tile a is
/// C n {f_b <= level_b, b < a} n {f_a >= level_a}.
class LayeredTiling : public Tiling {
 public:
  LayeredTiling(ConvexBody body, double eps, double delta, double eta,
                std::vector<SliceSpec> slices, std::vector<double> layer_radii);

  const ConvexBody& body() const { return body_; }
  double eps() const { return eps_; }
  double delta() const { return delta_; }
  double gamma() const { return gamma_; }
  double eta() const { return eta_; }
  int layers() const { return layers_; }
  double rho() const { return rho_; }
  /// Slice radius r_k per layer, in layer coordinates.
  const std::vector<double>& layer_radii() const { return layer_radii_; }
  const std::vector<SliceSpec>& slices() const { return slices_; }
  std::size_t core_id() const { return slices_.size(); }
  ConvexBody core() const;

  const NormedSpace& space() const override { return body_.space(); }
  std::size_t size() const override { return slices_.size() + 1; }
  TileInfo tile(std::size_t id) const override;
  Membership membership(std::size_t id, const Vector& x) const override;
  std::optional<std::size_t> classify(const Vector& x) const override;
  std::vector<std::size_t> candidates(const Vector& x) const override;
  std::string describe() const override;

  std::optional<std::size_t> brute_force_classify(const Vector& x) const;

  nlohmann::json to_json() const;
  static LayeredTiling from_json(const nlohmann::json& j);

 private:
  ConvexBody body_;
  double eps_, delta_, gamma_, eta_;
  int layers_;
  double rho_;
  std::vector<SliceSpec> slices_;
  std::vector<double> layer_radii_;
};

/// Number of layers: minimal n with gamma^n <= eps.
int layer_count(double gamma, double eps);

LayeredTiling build_body_tiling(const ConvexBody& body, double eps, std::uint64_t seed,
                                const BodyOptions& options = {});

}  // namespace ntile
