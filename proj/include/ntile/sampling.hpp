#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ntile/space.hpp"

namespace ntile {

using Rng = std::mt19937_64;

/// Halton sequence with a seeded Cranley-Patterson rotation, in [0,1)^dim.
class Halton {
 public:
  Halton(std::size_t dim, std::uint64_t seed);
  Vector next();

 private:
  std::vector<unsigned> bases_;
  Vector shift_;
  std::uint64_t index_ = 1;
};

/// Direction of unit norm. Normalized Gaussians for l_2 (uniform on the
/// sphere); otherwise a rejection sample of the ball pushed radially out,
/// i.e. the cone measure of the unit ball.
Vector random_unit(const NormedSpace& space, Rng& rng);

/// Uniform sample of the closed ball B(center, radius) by cube rejection.
Vector random_in_ball(const NormedSpace& space, const Vector& center, double radius,
                      Rng& rng);

/// `count` quasirandom points of B(0, radius): Halton points of the enclosing
/// cube, rejected by norm.
std::vector<Vector> quasirandom_ball(const NormedSpace& space, double radius,
                                     std::size_t count, std::uint64_t seed);

/// `count` directions on the unit sphere of `space`.
std::vector<Vector> random_sphere(const NormedSpace& space, std::size_t count,
                                  std::uint64_t seed);

}  // namespace ntile
