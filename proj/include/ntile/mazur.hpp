#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "ntile/tiling.hpp"

namespace ntile {

/// M(f) = sign(f) |f|^(2/q), coordinatewise. Carries the l_2 sphere and ball
/// onto those of l_q: ||M f||_q = ||f||_2^(2/q).
Vector mazur(const Vector& f, double q);
/// sign(g) |g|^(q/2), the inverse of mazur(., q).
Vector mazur_inverse(const Vector& g, double q);

/// Common modulus of continuity of M and M^-1 between the unit balls.
/// q = 1: omega(d) = max(2d, 2 sqrt(d)). q = 2: M is the identity and
/// omega(d) = d.
class ModulusOfContinuity {
 public:
  static ModulusOfContinuity identity();
  static ModulusOfContinuity mazur_l1();
  static ModulusOfContinuity for_exponent(double q);

  double q() const { return q_; }
  double operator()(double d) const;
  /// Largest t with omega(t) <= v; throws if that is not positive.
  double inverse(double v) const;
  std::string describe() const;

 private:
  explicit ModulusOfContinuity(double q) : q_(q) {}
  double q_;
};

struct MazurPair {
  Vector f;
  Vector g;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct ModuliReport {
  std::size_t dim = 0;
  std::size_t pairs = 0;
  std::uint64_t seed = 0;
  double tol = 1e-12;
  std::size_t forward_violations = 0;
  std::size_t inverse_violations = 0;
  /// Largest ||Mf - Mg||_1 / ||f - g||_2 (bounded by 2).
  double forward_max_ratio = 0.0;
  /// Largest ||M^-1 f - M^-1 g||_2 / ||f - g||_1^(1/2) (bounded by 2).
  double inverse_max_ratio = 0.0;
  std::optional<MazurPair> forward_witness;
  std::optional<MazurPair> inverse_witness;
  double round_trip_error = 0.0;  // max coordinate error of M^-1 M f
  double norm_error = 0.0;        // max | ||Mf||_1 - ||f||_2^2 |

  bool passed() const;
  nlohmann::json to_json() const;
};

/// q = 1 bounds on random pairs: ||Mf - Mg||_1 <= 2 ||f - g||_2 for f, g in
/// B(l_2^n) and ||M^-1 f - M^-1 g||_2 <= 2 ||f - g||_1^(1/2) for f, g in
/// B(l_1^n). Half the pairs are drawn close together.
ModuliReport verify_moduli(std::size_t dim, std::size_t pairs, std::uint64_t seed,
                           double tol = 1e-12);

/// Image of a tiling of a subset of l_2^n under the Mazur map into l_q^n.
/// Membership is pulled back through M^-1; tile j has center M(c_j), inner
/// radius omega^-1(r_j) and outer radius omega(R_j).
class TransportedTiling : public Tiling {
 public:
  TransportedTiling(std::shared_ptr<const Tiling> source, double q);

  const Tiling& source() const { return *source_; }
  double q() const { return q_; }
  const ModulusOfContinuity& modulus() const { return omega_; }

  const NormedSpace& space() const override { return space_; }
  std::size_t size() const override { return source_->size(); }
  TileInfo tile(std::size_t id) const override;
  Membership membership(std::size_t id, const Vector& x) const override;
  std::optional<std::size_t> classify(const Vector& x) const override;
  std::vector<std::size_t> candidates(const Vector& x) const override;
  Geometry geometry() const override { return source_->geometry(); }
  std::string describe() const override;

  nlohmann::json to_json() const;

 private:
  std::shared_ptr<const Tiling> source_;
  double q_;
  ModulusOfContinuity omega_;
  NormedSpace space_;
};

/// Rebuilds a tiling from its JSON: "sphere", "body" or "transported".
std::shared_ptr<const Tiling> tiling_from_json(const nlohmann::json& j);
/// JSON of a tiling of one of those types; throws for the others.
nlohmann::json tiling_to_json(const Tiling& tiling);

}  // namespace ntile
