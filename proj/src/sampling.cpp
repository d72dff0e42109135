#include "ntile/sampling.hpp"

#include <cmath>
#include <stdexcept>

namespace ntile {

namespace {

std::vector<unsigned> first_primes(std::size_t count) {
  std::vector<unsigned> primes;
  for (unsigned c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (unsigned q : primes) {
      if (q * q > c) break;
      if (c % q == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

Halton::Halton(std::size_t dim, std::uint64_t seed)
    : bases_(first_primes(dim)), shift_(static_cast<Eigen::Index>(dim)) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Eigen::Index i = 0; i < shift_.size(); ++i) shift_[i] = unif(rng);
}

Vector Halton::next() {
  Vector v(shift_.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double u = radical_inverse(index_, bases_[static_cast<std::size_t>(i)]) + shift_[i];
    v[i] = u - std::floor(u);
  }
  ++index_;
  return v;
}

Vector random_in_ball(const NormedSpace& space, const Vector& center, double radius,
                      Rng& rng) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const auto n = static_cast<Eigen::Index>(space.dim());
  for (;;) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = unif(rng);
    if (space.norm(v) <= 1.0) return center + radius * v;
  }
}

Vector random_unit(const NormedSpace& space, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(space.dim());
  if (space.kind() != NormKind::sup && space.p() == 2.0) {
    std::normal_distribution<double> gauss;
    for (;;) {
      Vector v(n);
      for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
      const double nv = v.norm();
      if (nv > 0.0) return v / nv;
    }
  }
  for (;;) {
    Vector v = random_in_ball(space, Vector::Zero(n), 1.0, rng);
    const double nv = space.norm(v);
    if (nv > 1e-12) return v / nv;
  }
}

std::vector<Vector> quasirandom_ball(const NormedSpace& space, double radius,
                                     std::size_t count, std::uint64_t seed) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball radius must be positive");
  Halton seq(space.dim(), seed);
  std::vector<Vector> out;
  out.reserve(count);
  while (out.size() < count) {
    Vector v = radius * (2.0 * seq.next().array() - 1.0).matrix();
    if (space.norm(v) <= radius) out.push_back(std::move(v));
  }
  return out;
}

std::vector<Vector> random_sphere(const NormedSpace& space, std::size_t count,
                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_unit(space, rng));
  return out;
}

}  // namespace ntile
