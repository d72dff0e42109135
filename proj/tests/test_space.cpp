#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ntile/sampling.hpp"
#include "ntile/space.hpp"

using namespace ntile;

namespace {
Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}
}  // namespace

TEST(Norm, Examples) {
  EXPECT_DOUBLE_EQ(NormedSpace::lp(3, 2).norm(vec({3, 4, 0})), 5.0);
  EXPECT_DOUBLE_EQ(NormedSpace::lp(2, 1).norm(vec({0.5, -0.5})), 1.0);
  EXPECT_NEAR(NormedSpace::renormed_lp(2, 2).norm(vec({1, 1})), std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(NormedSpace::sup(3).norm(vec({1, -7, 2})), 7.0);
}

TEST(Norm, DimensionMismatch) {
  EXPECT_THROW(NormedSpace::lp(3, 2).norm(vec({1, 2})), std::invalid_argument);
  EXPECT_THROW(NormedSpace::lp(0, 2), std::invalid_argument);
  EXPECT_THROW(NormedSpace::lp(2, 0.5), std::invalid_argument);
}

TEST(Norm, Axioms) {
  Rng rng(7);
  std::normal_distribution<double> g;
  for (auto space : {NormedSpace::lp(5, 1), NormedSpace::lp(5, 3), NormedSpace::sup(5),
                     NormedSpace::renormed_lp(5, 1.5)}) {
    EXPECT_EQ(space.norm(Vector::Zero(5)), 0.0);
    for (int s = 0; s < 500; ++s) {
      Vector x(5), y(5);
      for (int i = 0; i < 5; ++i) x[i] = g(rng), y[i] = g(rng);
      const double t = g(rng);
      EXPECT_GT(space.norm(x), 0.0);
      EXPECT_NEAR(space.norm(t * x), std::abs(t) * space.norm(x), 1e-12);
      EXPECT_LE(space.norm(x + y), space.norm(x) + space.norm(y) + 1e-12);
      EXPECT_NEAR(space.distance(x, y), space.norm(x - y), 1e-12);
    }
  }
}

TEST(Renormed, TailProjectionsAreContractions) {
  const auto space = NormedSpace::renormed_lp(6, 3);
  Rng rng(3);
  std::normal_distribution<double> g;
  for (int s = 0; s < 200; ++s) {
    Vector x(6);
    for (int i = 0; i < 6; ++i) x[i] = g(rng);
    double best = 0.0;
    for (std::size_t k = 0; k <= 6; ++k) {
      const double nk = space.norm(tail_projection(space, k, x));
      EXPECT_LE(nk, space.norm(x) + 1e-12);
      best = std::max(best, lp_norm(tail_projection(space, k, x), 3));
    }
    EXPECT_NEAR(space.norm(x), best, 1e-12);
  }
  // Operator norm exactly one: attained on the last basis vector.
  Vector e = Vector::Zero(6);
  e[5] = 1.0;
  for (std::size_t k = 0; k < 6; ++k)
    EXPECT_DOUBLE_EQ(space.norm(tail_projection(space, k, e)), 1.0);
}

TEST(Projection, Examples) {
  const auto space = NormedSpace::lp(3, 2);
  const Vector x = vec({1, 2, 3});
  EXPECT_EQ(tail_projection(space, 0, x), x);
  EXPECT_EQ(tail_projection(space, 3, x), Vector::Zero(3));
  EXPECT_EQ(tail_projection(space, 1, x), vec({0, 2, 3}));
  EXPECT_EQ(head_projection(space, 1, x), vec({1, 0, 0}));
  EXPECT_THROW(tail_projection(space, 4, x), std::out_of_range);
}

TEST(Duality, Examples) {
  auto f = duality_map(NormedSpace::lp(2, 2), vec({0.6, 0.8}));
  EXPECT_NEAR((f.coefficients - vec({0.6, 0.8})).norm(), 0.0, 1e-15);

  const auto l3 = NormedSpace::lp(2, 3);
  f = duality_map(l3, vec({1, 1}));
  const double c = std::pow(2.0, -2.0 / 3.0);
  EXPECT_NEAR(f.coefficients[0], c, 1e-12);
  EXPECT_NEAR(f.coefficients[1], c, 1e-12);
  EXPECT_NEAR(f(vec({1, 1})), std::cbrt(2.0), 1e-12);
  EXPECT_NEAR(l3.dual_norm(f), 1.0, 1e-12);

  f = duality_map(NormedSpace::lp(2, 1), vec({0, -2}));
  EXPECT_EQ(f.coefficients, vec({0, -1}));

  EXPECT_THROW(duality_map(l3, Vector::Zero(2)), std::domain_error);
}

TEST(Duality, NormingAndBounded) {
  Rng rng(11);
  std::normal_distribution<double> g;
  for (auto space : {NormedSpace::lp(4, 1), NormedSpace::lp(4, 1.3), NormedSpace::lp(4, 2),
                     NormedSpace::lp(4, 5), NormedSpace::sup(4),
                     NormedSpace::renormed_lp(4, 3)}) {
    for (int s = 0; s < 50; ++s) {
      Vector x(4);
      for (int i = 0; i < 4; ++i) x[i] = g(rng);
      const auto f = duality_map(space, x);
      EXPECT_NEAR(space.dual_norm(f), 1.0, 1e-10);
      EXPECT_NEAR(f(x), space.norm(x), 1e-10);
      for (int t = 0; t < 20; ++t) {
        Vector y(4);
        for (int i = 0; i < 4; ++i) y[i] = g(rng);
        EXPECT_LE(std::abs(f(y)), space.dual_norm(f) * space.norm(y) + 1e-9);
      }
    }
  }
}

TEST(Modulus, Examples) {
  const auto l2 = NormedSpace::lp(3, 2);
  EXPECT_NEAR(modulus_of_convexity(l2, 2.0).value, 1.0, 1e-15);
  EXPECT_NEAR(modulus_of_convexity(l2, 1.0).value, 1.0 - std::sqrt(3.0) / 2.0, 1e-15);
  EXPECT_TRUE(modulus_of_convexity(l2, 1.0).exact);
  EXPECT_LT(modulus_of_convexity(l2, 1e-6).value, 1e-12);
  EXPECT_THROW(modulus_of_convexity(l2, 0.0), std::domain_error);
  EXPECT_THROW(modulus_of_convexity(l2, 2.5), std::domain_error);
  EXPECT_THROW(modulus_of_convexity(NormedSpace::lp(3, 1), 1.0), std::domain_error);
  EXPECT_THROW(modulus_of_convexity(NormedSpace::sup(3), 1.0), std::domain_error);
  EXPECT_FALSE(modulus_of_convexity(NormedSpace::lp(3, 1.5), 1.0).exact);
}

TEST(Modulus, SamplingCrossCheck) {
  // The sampled minimum is attained by feasible pairs, so it can only sit above
  // the true infimum; for l_2 the closed form is sharp and the two meet.
  const auto l2 = NormedSpace::lp(2, 2);
  const double exact = modulus_of_convexity(l2, 1.0).value;
  const double sampled = sampled_modulus(l2, 1.0, 200000, 5);
  EXPECT_GE(sampled, exact - 1e-9);
  EXPECT_NEAR(sampled, exact, 1e-6);
  for (double p : {1.5, 3.0, 4.0}) {
    const auto sp = NormedSpace::lp(2, p);
    for (double eps : {0.5, 1.0, 1.5})
      EXPECT_LE(modulus_of_convexity(sp, eps).value, sampled_modulus(sp, eps, 20000, 9) + 1e-9)
          << "p=" << p << " eps=" << eps;
  }
}

TEST(Modulus, Monotone) {
  for (double p : {1.2, 2.0, 3.0}) {
    const auto sp = NormedSpace::lp(3, p);
    double prev = 0.0;
    for (int i = 1; i <= 40; ++i) {
      const double v = modulus_of_convexity(sp, 0.05 * i).value;
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(Space, JsonRoundTrip) {
  for (auto space : {NormedSpace::lp(3, 2.5), NormedSpace::sup(2), NormedSpace::renormed_lp(6, 3)})
    EXPECT_EQ(NormedSpace::from_json(space.to_json()), space);
  EXPECT_THROW(NormedSpace::from_json({{"dim", 2}, {"norm_kind", "weird"}, {"p", 2}}),
               std::invalid_argument);
}
