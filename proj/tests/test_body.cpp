#include <gtest/gtest.h>

#include <cmath>

#include "ntile/body.hpp"
#include "ntile/sampling.hpp"
#include "ntile/verify.hpp"

using namespace ntile;

namespace {

Vector unit(std::size_t n, std::size_t i, double s = 1.0) {
  return s * Vector::Unit(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i));
}

const LayeredTiling& ball3() {
  static const LayeredTiling t =
      build_body_tiling(ConvexBody::unit_ball(NormedSpace::lp(3, 2)), 0.75, 1);
  return t;
}

// Points of a slice tile, by rejection from B(y0, eps).
std::vector<Vector> slice_points(const LayeredTiling& t, std::size_t id, std::size_t n,
                                 std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> out;
  const Vector c = t.tile(id).center;
  for (int tries = 0; out.size() < n && tries < 200000; ++tries) {
    Vector x = random_in_ball(t.space(), c, t.eps(), rng);
    if (is_inside(t.membership(id, x))) out.push_back(std::move(x));
  }
  return out;
}

}  // namespace

TEST(ConvexBody, CutsRadialAndEta) {
  auto b = ConvexBody::unit_ball(NormedSpace::lp(2, 2));
  EXPECT_DOUBLE_EQ(b.eta(), 1.0);
  b.cut(Functional{Vector{{2.0, 0.0}}}, 1.0);  // x_0 <= 1/2 after rescaling
  ASSERT_EQ(b.halfspaces().size(), 1u);
  EXPECT_NEAR(b.space().dual_norm(b.halfspaces()[0].f), 1.0, 1e-12);
  EXPECT_NEAR(b.halfspaces()[0].level, 0.5, 1e-15);
  EXPECT_NEAR(b.radial(unit(2, 0)), 0.5, 1e-15);
  EXPECT_NEAR(b.radial(unit(2, 0, -1.0)), 1.0, 1e-15);
  EXPECT_NEAR(b.eta(), 0.5, 1e-15);
  EXPECT_EQ(b.membership(Vector{{0.5, 0.0}}), Membership::inside);
  EXPECT_EQ(b.membership(Vector{{0.2, 0.1}}), Membership::strict);
  EXPECT_EQ(b.membership(Vector{{0.6, 0.0}}), Membership::outside);
  EXPECT_EQ(b.membership(Vector{{-0.8, 0.8}}), Membership::outside);
  EXPECT_THROW(b.cut(Functional{Vector::Zero(2)}, 1.0), std::invalid_argument);
}

TEST(ConvexBody, NormalizeAndScale) {
  // B(c, 2) with c = (1, 0), cut at x_0 <= 2; normalized about c by 4.
  ConvexBody b(NormedSpace::lp(2, 2), Vector{{1.0, 0.0}}, 2.0);
  b.cut(Functional{Vector{{1.0, 0.0}}}, 2.0);
  const auto n = b.normalized(Vector{{1.0, 0.0}}, 4.0);
  EXPECT_TRUE(n.ball_center().isZero());
  EXPECT_DOUBLE_EQ(n.ball_radius(), 0.5);
  EXPECT_NEAR(n.halfspaces()[0].level, 0.25, 1e-15);
  EXPECT_NEAR(n.eta(), 0.25, 1e-15);
  EXPECT_LE(n.outer(), 1.0);
  for (const auto& x : quasirandom_ball(b.space(), 3.0, 500, 2))
    EXPECT_EQ(b.membership(x + Vector{{1.0, 0.0}}), n.membership((x) / 4.0, kBoundaryTol / 4.0));
  const auto s = n.scaled(2.0);
  EXPECT_DOUBLE_EQ(s.ball_radius(), 1.0);
  EXPECT_NEAR(s.halfspaces()[0].level, 0.5, 1e-15);
  // Off-center ball: radial by bisection.
  EXPECT_NEAR(b.radial(unit(2, 1)), std::sqrt(3.0), 1e-12);
}

TEST(ConvexBody, JsonRoundTrip) {
  ConvexBody b(NormedSpace::lp(3, 3), Vector{{0.1, 0.0, 0.0}}, 0.8);
  b.cut(Functional{Vector{{0.3, -0.2, 0.5}}}, 0.4);
  const auto back = ConvexBody::from_json(b.to_json());
  EXPECT_EQ(back.to_json().dump(), b.to_json().dump());
}

TEST(BuildSlice, HandValues) {
  const auto b = ConvexBody::unit_ball(NormedSpace::lp(2, 2));
  const auto s = build_slice(b, unit(2, 0), 0.19, 1.0);
  EXPECT_NEAR(s.r_slice, 0.81 * 0.09 / 1.71, 1e-15);
  EXPECT_NEAR(s.r_slice, 0.0426316, 1e-7);
  EXPECT_NEAR(s.y0.norm(), 0.9 * 1.62 / 1.71, 1e-15);
  EXPECT_NEAR(s.y0.norm(), 0.8526316, 1e-7);
  EXPECT_NEAR(s.y0.norm() - s.r_slice, 0.81, 1e-12);
  EXPECT_NEAR(s.level, 0.81, 1e-15);
}

TEST(BuildSlice, EuclideanCap) {
  const auto sp = NormedSpace::lp(3, 2);
  const auto b = ConvexBody::unit_ball(sp);
  const double delta = 0.1;
  const auto s = build_slice(b, unit(3, 1), delta, 1.0);
  EXPECT_NEAR(s.y0[0], 0.0, 1e-15);
  EXPECT_NEAR(s.y0[2], 0.0, 1e-15);
  EXPECT_NEAR(s.f.coefficients[1], 1.0, 1e-15);
  EXPECT_NEAR(s.f.coefficients.head(1).norm() + std::abs(s.f.coefficients[2]), 0.0, 1e-15);
  EXPECT_GE(s.f(unit(3, 1)), s.level);
  // Tangency: B(y0, r) touches f = level and stays in the body.
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const Vector p = s.y0 + s.r_slice * random_unit(sp, rng);
    EXPECT_GE(s.f(p), s.level - 1e-12);
    EXPECT_TRUE(is_inside(b.membership(p)));
  }
}

TEST(BuildSlice, DiameterWithinEps) {
  const auto sp = NormedSpace::lp(2, 2);
  const double eps = 0.5;
  const double delta = modulus_of_convexity(sp, eps).value;
  const auto b = ConvexBody::unit_ball(sp);
  const auto s = build_slice(b, Vector{{0.6, 0.8}}, delta, 1.0);
  std::vector<Vector> pts;
  Rng rng(5);
  while (pts.size() < 200) {
    Vector x = random_in_ball(sp, s.y0, 1.0, rng);
    if (is_inside(b.membership(x)) && s.f(x) >= s.level) pts.push_back(x);
  }
  double diam = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) diam = std::max(diam, sp.distance(pts[i], pts[j]));
  EXPECT_LE(diam, eps + 1e-6);
}

TEST(BuildSlice, Errors) {
  const auto b = ConvexBody::unit_ball(NormedSpace::lp(2, 2));
  EXPECT_THROW(build_slice(b, unit(2, 0, 0.5), 0.19, 1.0), std::invalid_argument);
  EXPECT_THROW(build_slice(b, unit(2, 0), 0.19, 0.0), std::invalid_argument);
  EXPECT_THROW(build_slice(b, unit(2, 0), 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(build_slice(b, unit(2, 0, 1.5), 0.19, 1.0), std::invalid_argument);
}

TEST(PeelLayer, DiskTerminatesWithTangency) {
  const auto sp = NormedSpace::lp(2, 2);
  const auto b = ConvexBody::unit_ball(sp);
  const auto res = peel_layer(b, 0.19, 1.0, quasirandom_ball(sp, 1.0, 20000, 1));
  EXPECT_TRUE(res.certified) << res.diagnostic;
  ASSERT_FALSE(res.slices.empty());
  for (const auto& s : res.slices) EXPECT_NEAR(sp.norm(s.y0) - s.r_slice, 0.81, 1e-9);
  EXPECT_EQ(res.core.halfspaces().size(), res.slices.size());
  EXPECT_GE(res.core.eta(), 0.81 - 1e-12);
  for (const auto& u : random_sphere(sp, 2000, 9)) EXPECT_LE(res.core.radial(u), 0.9 + 1e-9);
}

TEST(PeelLayer, BodyAlreadyInside) {
  const auto sp = NormedSpace::lp(2, 2);
  const auto b = ConvexBody::unit_ball(sp).scaled(0.85);
  const auto res = peel_layer(b, 0.19, 0.85, quasirandom_ball(sp, 1.0, 5000, 1));
  EXPECT_TRUE(res.certified);
  EXPECT_TRUE(res.slices.empty());
  EXPECT_EQ(res.core.to_json().dump(), b.to_json().dump());
}

TEST(PeelLayer, SparsePoolDiagnostic) {
  const auto sp = NormedSpace::lp(2, 2);
  PeelOptions o;
  o.refine = false;
  const auto res = peel_layer(ConvexBody::unit_ball(sp), 0.19, 1.0, {Vector::Zero(2)}, o);
  EXPECT_TRUE(res.slices.empty());
  EXPECT_FALSE(res.certified);
  ASSERT_TRUE(res.offending.has_value());
  EXPECT_GT(sp.norm(*res.offending), 0.9);
  EXPECT_NE(res.diagnostic.find("pool too sparse"), std::string::npos);
}

TEST(LayerCount, Values) {
  const double delta = 1.0 - std::sqrt(1.0 - 0.140625);
  EXPECT_NEAR(delta, 0.072975, 1e-6);
  const double g = std::sqrt(1.0 - delta);
  EXPECT_NEAR(g, 0.962821, 1e-6);
  EXPECT_EQ(static_cast<int>(std::ceil(std::log(0.75) / std::log(g))), 8);
  EXPECT_EQ(layer_count(g, 0.75), 8);
  EXPECT_EQ(layer_count(0.5, 0.25), 2);
  EXPECT_EQ(layer_count(0.5, 0.2), 3);
  EXPECT_EQ(layer_count(0.9, 0.95), 1);
}

TEST(BodyTiling, EuclideanBallConstants) {
  const auto& t = ball3();
  EXPECT_NEAR(t.delta(), 1.0 - std::sqrt(1.0 - 0.140625), 1e-12);
  EXPECT_EQ(t.layers(), 8);
  EXPECT_LE(std::pow(t.gamma(), t.layers()), t.eps());
  ASSERT_EQ(t.layer_radii().size(), 8u);
  double rho = std::min(t.eta(), std::pow(t.gamma(), 9));
  for (int k = 1; k <= 8; ++k) rho = std::min(rho, t.layer_radii()[k - 1] * std::pow(t.gamma(), k - 1));
  EXPECT_DOUBLE_EQ(t.rho(), rho);
  for (int k = 1; k <= 8; ++k) {
    bool any = false;
    for (const auto& s : t.slices()) any = any || s.layer == k;
    EXPECT_TRUE(any) << k;
  }
}

TEST(BodyTiling, TangencyPerSlice) {
  const auto& t = ball3();
  for (const auto& s : t.slices()) {
    EXPECT_NEAR(t.space().norm(s.y0) - s.r_slice, (1.0 - t.delta()) * s.scale, 1e-9);
    EXPECT_NEAR(s.level, (1.0 - t.delta()) * s.scale, 1e-12);
    EXPECT_NEAR(s.scale, std::pow(t.gamma(), s.layer - 1), 1e-12);
  }
}

TEST(BodyTiling, MembershipExamples) {
  const auto& t = ball3();
  const auto& sl = t.slices();
  for (std::size_t a = 0; a < sl.size(); a += 37)
    EXPECT_EQ(t.membership(a, sl[a].y0), Membership::strict) << a;
  EXPECT_EQ(t.membership(t.core_id(), Vector::Zero(3)), Membership::strict);
  EXPECT_EQ(t.classify(Vector::Zero(3)), t.core_id());
  EXPECT_FALSE(t.classify(unit(3, 0, 1.01)).has_value());
  EXPECT_THROW(t.membership(t.size(), Vector::Zero(3)), std::out_of_range);

  // The tangency point lies on the hyperplane of slice a: in slice a and in
  // a later tile, strict in neither.
  const std::size_t a = 5;
  const Vector p = (sl[a].level / t.space().norm(sl[a].y0)) * sl[a].y0;
  EXPECT_NEAR(sl[a].f(p), sl[a].level, 1e-12);
  EXPECT_EQ(t.membership(a, p), Membership::inside);
  bool later = false;
  for (std::size_t b = a + 1; b < t.size(); ++b) {
    const auto m = t.membership(b, p);
    EXPECT_NE(m, Membership::strict);
    later = later || is_inside(m);
  }
  EXPECT_TRUE(later);
}

TEST(BodyTiling, InnerBallInsideLayerBody) {
  const auto& t = ball3();
  const auto& sp = t.space();
  Rng rng(12);
  for (std::size_t a = 0; a < t.slices().size(); a += 11) {
    const auto& s = t.slices()[a];
    for (int i = 0; i < 50; ++i) {
      const Vector p = s.y0 + (s.r_slice - 1e-9) * random_unit(sp, rng);
      EXPECT_TRUE(is_inside(t.membership(a, p))) << a;
    }
  }
}

TEST(BodyTiling, SliceDiameters) {
  const auto& t = ball3();
  for (std::size_t a = 0; a < t.slices().size(); a += 97) {
    const auto pts = slice_points(t, a, 100, a);
    ASSERT_GE(pts.size(), 2u);
    double diam = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j)
        diam = std::max(diam, t.space().distance(pts[i], pts[j]));
    EXPECT_LE(diam, t.eps() + 1e-6) << a;
  }
}

TEST(BodyTiling, OracleEquivalence) {
  const auto& t = ball3();
  for (const auto& x : quasirandom_ball(t.space(), 1.02, 1000, 4))
    EXPECT_EQ(t.classify(x), t.brute_force_classify(x));
}

TEST(BodyTiling, Harness) {
  const auto& t = ball3();
  VerifyOptions o;
  o.directions = 100;
  o.seed = 2;
  const auto rep = verify_tiling(t, sample_ball(t.space(), Vector::Zero(3), 1.0, 4000, 6), o);
  EXPECT_TRUE(rep.coverage_ok());
  EXPECT_TRUE(rep.disjoint_ok());
  EXPECT_TRUE(rep.inner_ok());
  EXPECT_TRUE(rep.outer_ok());
}

TEST(BodyTiling, JsonRoundTrip) {
  const auto& t = ball3();
  const auto back = LayeredTiling::from_json(t.to_json());
  EXPECT_EQ(back.to_json().dump(), t.to_json().dump());
  EXPECT_DOUBLE_EQ(back.rho(), t.rho());
  for (const auto& x : quasirandom_ball(t.space(), 1.0, 300, 8)) EXPECT_EQ(back.classify(x), t.classify(x));
}

TEST(BodyTiling, SingleLayer) {
  const auto sp = NormedSpace::lp(2, 2);
  const auto t = build_body_tiling(ConvexBody::unit_ball(sp), 0.99, 3);
  EXPECT_EQ(t.layers(), 1);
  for (const auto& s : t.slices()) EXPECT_EQ(s.layer, 1);
  EXPECT_EQ(t.size(), t.slices().size() + 1);
  VerifyOptions o;
  o.directions = 100;
  EXPECT_TRUE(verify_tiling(t, sample_ball(sp, Vector::Zero(2), 1.0, 2000, 1), o).passed());
}

TEST(BodyTiling, PolytopeCutBody) {
  // Unit l_1.5 ball cut by two half-spaces.
  const auto sp = NormedSpace::lp(2, 1.5);
  ConvexBody b = ConvexBody::unit_ball(sp);
  b.cut(Functional{Vector{{1.0, 1.0}}}, 0.7);
  b.cut(Functional{Vector{{0.0, -1.0}}}, 0.6);
  const auto t = build_body_tiling(b, 0.8, 4);
  Rng rng(7);
  std::vector<Vector> samples;
  for (const auto& x : sample_ball(sp, Vector::Zero(2), 1.0, 6000, 3))
    if (is_inside(b.membership(x))) samples.push_back(x);
  VerifyOptions o;
  o.directions = 100;
  const auto rep = verify_tiling(t, samples, o);
  EXPECT_TRUE(rep.passed());
}

TEST(BodyTiling, Rejections) {
  const auto sp = NormedSpace::lp(2, 2);
  EXPECT_THROW(build_body_tiling(ConvexBody::unit_ball(sp), 1.0, 1), std::invalid_argument);
  EXPECT_THROW(build_body_tiling(ConvexBody::unit_ball(sp).scaled(1.5), 0.5, 1),
               std::invalid_argument);
  EXPECT_THROW(build_body_tiling(ConvexBody::unit_ball(NormedSpace::sup(2)), 0.5, 1),
               std::invalid_argument);
  BodyOptions o;
  o.eta = 2.0;
  EXPECT_THROW(build_body_tiling(ConvexBody::unit_ball(sp), 0.5, 1, o), std::invalid_argument);
}
