#include <gtest/gtest.h>

#include "ntile/sampling.hpp"
#include "ntile/verify.hpp"
#include "ntile/voronoi.hpp"

using namespace ntile;

namespace {
Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

VoronoiTiling two_centers(const NormedSpace& space) {
  SeparatedNet net(space, BoxRegion{v2(-5, -5), v2(5, 5)}, 2.0, 0);
  net.try_add(v2(0, 0));
  net.try_add(v2(2, 0));
  return VoronoiTiling(std::move(net));
}
}  // namespace

TEST(Voronoi, MembershipExamples) {
  const auto t = two_centers(NormedSpace::lp(2, 2));
  EXPECT_EQ(t.voronoi_membership(0, v2(1, 5)), Membership::inside);
  EXPECT_EQ(t.voronoi_membership(1, v2(1, 5)), Membership::inside);
  EXPECT_EQ(t.voronoi_membership(0, v2(0, 0)), Membership::strict);
  EXPECT_EQ(t.voronoi_membership(1, v2(0, 0)), Membership::outside);
  EXPECT_THROW(t.voronoi_membership(2, v2(0, 0)), std::out_of_range);
}

TEST(Voronoi, StarMembershipExamples) {
  const auto t = two_centers(NormedSpace::lp(2, 3));
  for (const auto& x : {v2(0.3, 0.1), v2(1, 0), v2(5, -2), v2(-3, 1)})
    EXPECT_EQ(t.star_membership(0, x), t.voronoi_membership(0, x));
  EXPECT_EQ(t.star_membership(1, v2(1, 0)), Membership::inside);
  EXPECT_EQ(t.star_membership(1, v2(0.4, 0.3)), Membership::outside);
}

TEST(Voronoi, ClassifyTieGoesToSmallestIndex) {
  const auto t = two_centers(NormedSpace::lp(2, 2));
  EXPECT_EQ(t.classify(v2(1, 3)), 0u);
  EXPECT_EQ(t.classify(v2(2, 0)), 1u);
  EXPECT_EQ(t.classify(v2(0, 0)), 0u);
}

TEST(Voronoi, SupNormPlateausAreNotDoubleCounted) {
  // In l_inf the bisector of (0,0) and (2,0) contains the open cone
  // {x = 1 + s, |y| > 1 + |s|}-like plateau where both distances tie.
  const auto t = two_centers(NormedSpace::sup(2));
  const Vector x = v2(1.2, 4.0);  // |y| dominates: distances tie at 4
  EXPECT_TRUE(is_inside(t.voronoi_membership(1, x)));
  EXPECT_EQ(t.star_membership(1, x), Membership::outside);  // interior of V_0
  EXPECT_TRUE(is_inside(t.star_membership(0, x)));
  EXPECT_EQ(t.classify(x), 0u);
}

TEST(Voronoi, ClassifierMatchesBruteForce) {
  for (auto space : {NormedSpace::lp(2, 2), NormedSpace::lp(2, 3), NormedSpace::lp(3, 2)}) {
    const auto n = static_cast<Eigen::Index>(space.dim());
    const Region box = BoxRegion{Vector::Constant(n, -3), Vector::Constant(n, 3)};
    VoronoiTiling t(voronoi_net(space, box, 0.5, 1));
    for (const auto& x : sample_box(Vector::Constant(n, -3), Vector::Constant(n, 3), 2000, 4)) {
      const auto c = t.classify(x);
      ASSERT_TRUE(c);
      EXPECT_EQ(*c, t.brute_force_classify(x));
    }
  }
}

TEST(Voronoi, StarshapeProbesInL3) {
  const auto space = NormedSpace::lp(2, 3);
  VoronoiTiling t(voronoi_net(space, BoxRegion{v2(-3, -3), v2(3, 3)}, 0.5, 2));
  for (std::size_t i = 0; i < 10; ++i) EXPECT_TRUE(t.starshape_probe(i, 50, 50, 3).empty());
  EXPECT_TRUE(t.starshape_probe(0, 1, 10, 3).empty());
}

TEST(Voronoi, EuclideanHarness) {
  const auto space = NormedSpace::lp(2, 2);
  const Vector lo = v2(-6, -6), hi = v2(6, 6);
  VoronoiTiling t(voronoi_net(space, BoxRegion{lo, hi}, 1.0, 0, 200000));
  VerifyOptions opt;
  opt.directions = 200;
  opt.tol = 1e-3;
  opt.outer_tol = 1e-3;
  const auto rep = verify_tiling(t, sample_box(lo, hi, 5000, 9), opt);
  EXPECT_EQ(rep.coverage.fraction, 1.0);
  EXPECT_TRUE(rep.violations.empty());
  EXPECT_TRUE(rep.inner_ok());
  EXPECT_TRUE(rep.outer_ok());
}
