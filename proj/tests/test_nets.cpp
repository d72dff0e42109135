#include <gtest/gtest.h>

#include <cmath>

#include "ntile/nets.hpp"
#include "ntile/sampling.hpp"

using namespace ntile;

namespace {
Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

double min_pairwise(const NormedSpace& space, const std::vector<Vector>& pts) {
  double m = INFINITY;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) m = std::min(m, space.distance(pts[i], pts[j]));
  return m;
}

std::vector<Vector> drain(const CandidateStream& s) {
  std::vector<Vector> out;
  while (auto v = s()) out.push_back(*v);
  return out;
}
}  // namespace

TEST(Grid, ShellOrderCoversBox) {
  const auto space = NormedSpace::lp(2, 2);
  const Region box = BoxRegion{v2(-2, -2), v2(2, 2)};
  const auto pts = drain(grid_candidates(space, box, 0.5));
  EXPECT_EQ(pts.size(), 81u);
  EXPECT_EQ(pts.front(), v2(0, 0));
  // Sup norm of emitted points never decreases.
  for (std::size_t i = 1; i < pts.size(); ++i)
    EXPECT_GE(pts[i].cwiseAbs().maxCoeff() + 1e-12, pts[i - 1].cwiseAbs().maxCoeff());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) EXPECT_NE(pts[i], pts[j]);
}

TEST(SeparatedNet, EuclideanSquare) {
  const auto space = NormedSpace::lp(2, 2);
  const Region box = BoxRegion{v2(-2, -2), v2(2, 2)};
  const auto grid = drain(grid_candidates(space, box, 0.25));
  const auto net = greedy_separated_net(space, box, 2.0, list_candidates(grid));
  EXPECT_EQ(net.centers().front(), v2(0, 0));
  EXPECT_GE(min_pairwise(space, net.centers()), 2.0);
  // Maximality relative to the candidates.
  for (const auto& c : grid) {
    double d = INFINITY;
    for (const auto& z : net.centers()) d = std::min(d, space.distance(c, z));
    EXPECT_LT(d, 2.0);
  }
}

TEST(SeparatedNet, HugeSeparationGivesOneCenter) {
  const auto space = NormedSpace::lp(2, 2);
  const Region box = BoxRegion{v2(-2, -2), v2(2, 2)};
  EXPECT_EQ(greedy_separated_net(space, box, 100.0, grid_candidates(space, box, 0.5)).size(), 1u);
}

TEST(SeparatedNet, SupLatticeAllAccepted) {
  const auto space = NormedSpace::sup(2);
  const Region box = BoxRegion{v2(-4, -4), v2(4, 4)};
  const auto lattice = drain(grid_candidates(space, box, 2.0));
  EXPECT_EQ(lattice.size(), 25u);
  const auto net = greedy_separated_net(space, box, 2.0, list_candidates(lattice));
  EXPECT_EQ(net.size(), 25u);
}

TEST(SeparatedNet, EmptyStreamThrows) {
  const auto space = NormedSpace::lp(2, 2);
  EXPECT_THROW(greedy_separated_net(space, BallRegion{v2(0, 0), 1.0}, 1.0, list_candidates({})),
               std::invalid_argument);
}

TEST(SeparatedNet, DeterministicAndHashQueriesMatchBruteForce) {
  const auto space = NormedSpace::lp(3, 3);
  const Region ball = BallRegion{Vector::Zero(3), 3.0};
  auto pts = quasirandom_ball(space, 3.0, 4000, 2);
  const auto a = greedy_separated_net(space, ball, 0.7, list_candidates(pts), 2);
  const auto b = greedy_separated_net(space, ball, 0.7, list_candidates(pts), 2);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.centers()[i], b.centers()[i]);
  EXPECT_GE(min_pairwise(space, a.centers()), 0.7);
  Rng rng(1);
  for (int s = 0; s < 200; ++s) {
    const Vector x = random_in_ball(space, Vector::Zero(3), 3.0, rng);
    std::vector<std::size_t> brute;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (space.distance(x, a.centers()[i]) <= 1.1) brute.push_back(i);
    EXPECT_EQ(a.within(x, 1.1), brute);
  }
}

TEST(Biorthogonal, StandardBasisAccepted) {
  const auto space = NormedSpace::lp(4, 2);
  std::vector<Vector> basis;
  for (int i = 0; i < 4; ++i) basis.push_back(Vector::Unit(4, i));
  const auto fam = greedy_biorthogonal(space, 0.3, list_candidates(basis));
  EXPECT_EQ(fam.size(), 4u);
}

TEST(Biorthogonal, HandComputedPairings) {
  const auto space = NormedSpace::lp(2, 2);
  const double s = std::sqrt(3.0) / 2.0;
  const auto fam = greedy_biorthogonal(space, 0.5, list_candidates({v2(1, 0), v2(s, 0.5), v2(0.5, s)}));
  ASSERT_EQ(fam.size(), 2u);
  EXPECT_NEAR((fam.vectors[1] - v2(0.5, s)).norm(), 0.0, 1e-15);
  EXPECT_THROW(greedy_biorthogonal(space, 1.0, list_candidates({})), std::invalid_argument);
  EXPECT_EQ(greedy_biorthogonal(space, 0.5, list_candidates({})).size(), 0u);
}

TEST(Biorthogonal, PairingMatrixAndSeparation) {
  for (auto space : {NormedSpace::lp(3, 2), NormedSpace::lp(3, 3), NormedSpace::lp(3, 1.5)}) {
    const double delta = 0.9;
    const auto fam = greedy_biorthogonal(space, delta, list_candidates(random_sphere(space, 3000, 4)));
    EXPECT_GT(fam.size(), 6u);
    for (std::size_t j = 0; j < fam.size(); ++j) {
      EXPECT_NEAR(space.norm(fam.vectors[j]), 1.0, 1e-12);
      EXPECT_NEAR(space.dual_norm(fam.functionals[j]), 1.0, 1e-9);
      EXPECT_NEAR(fam.functionals[j](fam.vectors[j]), 1.0, 1e-9);
      for (std::size_t k = j + 1; k < fam.size(); ++k) {
        EXPECT_LE(std::abs(fam.functionals[j](fam.vectors[k])), delta + kBoundaryTol);
        EXPECT_GE(space.distance(fam.vectors[j], fam.vectors[k]), 1.0 - delta - 1e-12);
      }
    }
    const auto back = BiorthogonalFamily::from_json(fam.to_json());
    EXPECT_EQ(back.size(), fam.size());
    EXPECT_EQ(back.vectors.back(), fam.vectors.back());
  }
}

TEST(Norming, DenseCircle) {
  const auto space = NormedSpace::lp(2, 2);
  std::vector<Vector> circle;
  for (int i = 0; i < 2000; ++i) {
    const double t = 2.0 * M_PI * i / 2000.0;
    circle.push_back(v2(std::cos(t), std::sin(t)));
  }
  const auto nf = greedy_norming_family(space, 0.9, list_candidates(circle), 1000, 3);
  for (std::size_t i = 0; i < nf.family.size(); ++i)
    for (std::size_t j = i + 1; j < nf.family.size(); ++j)
      EXPECT_LE(std::abs(nf.family.vectors[i].dot(nf.family.vectors[j])), 0.9 + kBoundaryTol);
  EXPECT_TRUE(nf.failures.empty());
  EXPECT_EQ(nf.probes, 1000u);
}

TEST(Norming, SparseCandidatesReported) {
  const auto space = NormedSpace::lp(2, 2);
  const auto nf = greedy_norming_family(space, 0.5, list_candidates({v2(1, 0)}), 500, 1);
  EXPECT_EQ(nf.family.size(), 1u);
  EXPECT_FALSE(nf.failures.empty());
  EXPECT_EQ(sup_pairing(nf.family, v2(0, 1)), 0.0);
  EXPECT_THROW(greedy_norming_family(space, 1.0, list_candidates({})), std::invalid_argument);
}

TEST(Norming, BasisInL2Cubed) {
  const auto space = NormedSpace::lp(3, 2);
  std::vector<Vector> basis;
  for (int i = 0; i < 3; ++i) basis.push_back(Vector::Unit(3, i));
  EXPECT_EQ(greedy_norming_family(space, 0.5, list_candidates(basis), 10).family.size(), 3u);
}
