// One line per acceptance criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ntile/body.hpp"
#include "ntile/mazur.hpp"
#include "ntile/sampling.hpp"
#include "ntile/schauder.hpp"
#include "ntile/sphere.hpp"
#include "ntile/strip.hpp"
#include "ntile/verify.hpp"
#include "ntile/voronoi.hpp"

using namespace ntile;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [" << what << " failed]";
    }
  }
};

int failures = 0;

void criterion(int n, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.ok = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (s >= budget_s) {
    o.ok = false;
    o.detail << " [over the " << budget_s << " s budget]";
  }
  if (!o.ok) ++failures;
  std::printf("criterion %d: %s (%.2f s)%s\n", n, o.ok ? "PASS" : "FAIL", s, o.detail.str().c_str());
  std::fflush(stdout);
}

Vector origin(std::size_t n) { return Vector::Zero(static_cast<Eigen::Index>(n)); }

double max_outer(const VerificationReport& rep) {
  double m = 0.0;
  for (const auto& t : rep.tiles) m = std::max(m, t.outer_observed);
  return m;
}

// Shared between criteria.
std::unique_ptr<VoronoiTiling> voronoi2;
std::unique_ptr<SchauderTiling> schauder_l2;
std::unique_ptr<SphereTiling> sphere4;
std::string body_json;

}  // namespace

int main() {
  criterion(1, 1.0, [](Outcome& o) {
    const auto f1 = strip_preset("fig1"), f2 = strip_preset("fig2");
    o.require(f1.a == Rational(3, 2) && f1.b == Rational(5, 6) && f1.r == Rational(1, 6) &&
                  f1.delta == Rational(1, 5),
              "fig1 parameters");
    o.require(f2.a == Rational(21, 4) && f2.b == Rational(3, 4) && f2.r == Rational(1, 4) &&
                  f2.delta == Rational(1, 4),
              "fig2 parameters");
    o.require(check_fact_conditions(f1).all(), "fig1 conditions");
    o.require(check_fact_conditions(f2).all(), "fig2 conditions");
    auto same = [](const NormalityConstants& k, Rational R0, Rational R, Rational ratio) {
      return k.R0 == R0 && k.R == R && k.ratio == ratio;
    };
    const auto k1 = normality_constants(f1, false);
    const auto k2 = normality_constants(f2, false);
    const auto k3 = normality_constants(f2, true);
    o.require(same(k1, 22, Rational(145, 3), 290), "fig1 constants");
    o.require(same(k2, Rational(29, 2), 37, 148), "fig2 constants");
    o.require(same(k3, 10, 17, 68), "unconditional constants");
    o.detail << " fig1 (" << to_string(k1.R0) << ", " << to_string(k1.R) << ", "
             << to_string(k1.ratio) << "), fig2 (" << to_string(k2.R0) << ", " << to_string(k2.R)
             << ", " << to_string(k2.ratio) << "), unconditional (" << to_string(k3.R0) << ", "
             << to_string(k3.R) << ", " << to_string(k3.ratio) << ")";
  });

  criterion(2, 5.0, [](Outcome& o) {
    const auto sp = NormedSpace::lp(2, 2);
    const Vector lo = Vector::Constant(2, -6.0), hi = -lo;
    voronoi2 = std::make_unique<VoronoiTiling>(voronoi_net(sp, BoxRegion{lo, hi}, 1.0, 0, 200000));
    VerifyOptions v;
    v.directions = 200;
    v.tol = 1e-3;  // probes at radius 0.999
    v.outer_tol = 1e-3;
    const auto rep = verify_tiling(*voronoi2, sample_box(lo, hi, 10000, 1), v);
    bool claims = true;
    for (std::size_t i = 0; i < voronoi2->size(); ++i) {
      const auto t = voronoi2->tile(i);
      claims = claims && t.inner_radius == 1.0 && t.outer_radius == 2.0;
    }
    o.require(claims, "claimed radii 1 and 2");
    o.require(rep.coverage.fraction == 1.0, "coverage");
    o.require(rep.violations.empty(), "disjointness");
    o.require(rep.inner_ok(), "inner probes at 0.999");
    o.require(max_outer(rep) <= 2.001, "outer <= 2.001");
    o.detail << " " << voronoi2->size() << " cells, coverage " << rep.coverage.fraction << ", "
             << rep.violations.size() << " double-strict, outer max " << max_outer(rep);
  });

  criterion(3, 30.0, [](Outcome& o) {
    struct Case {
      NormedSpace sp;
      double extent;
    };
    for (const auto& c : {Case{NormedSpace::lp(2, 3), 3.0}, Case{NormedSpace::lp(3, 2), 2.0}}) {
      const auto n = static_cast<Eigen::Index>(c.sp.dim());
      const Vector lo = Vector::Constant(n, -c.extent), hi = -lo;
      const VoronoiTiling t(voronoi_net(c.sp, BoxRegion{lo, hi}, 0.5, 3));
      // The 20 cells nearest the origin.
      std::vector<std::size_t> ids(t.size());
      for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
      std::sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
        return t.net().centers()[a].norm() < t.net().centers()[b].norm();
      });
      o.require(ids.size() >= 20, "20 tiles in " + c.sp.describe());
      ids.resize(std::min<std::size_t>(ids.size(), 20));
      std::size_t bad = 0;
      for (std::size_t i : ids) bad += t.starshape_probe(i, 100, 100, 7 + i).size();
      o.require(bad == 0, "starshape in " + c.sp.describe());
      o.detail << " " << c.sp.describe() << ": " << ids.size() << " tiles x 100 x 100, " << bad
               << " violations;";
    }
  });

  criterion(4, 120.0, [](Outcome& o) {
    for (double p : {2.0, 3.0}) {
      const auto sp = NormedSpace::renormed_lp(6, p);
      SchauderConfig cfg;
      cfg.depth = 2;
      cfg.params = strip_preset("fig1");
      cfg.region_radius = 10.0;
      cfg.seed = 1;
      auto t = std::make_unique<SchauderTiling>(sp, cfg);
      VerifyOptions v;
      v.seed = 2;
      v.directions = 50;
      v.tol = 1e-6;
      v.outer_tol = 1e-6;
      v.starshape = true;
      v.star_per_tile = 1;
      v.segment_points = 30;
      const auto rep = verify_tiling(*t, sample_ball(sp, origin(6), 10.0, 10000, 3), v);
      bool claims = true;
      for (const auto& c : rep.tiles)
        claims = claims && c.inner_claimed == 1.0 / 6.0 && c.outer_claimed == 145.0 / 3.0;
      const std::string name = sp.describe();
      o.require(claims, "claimed radii 1/6 and 145/3 in " + name);
      o.require(rep.coverage.fraction == 1.0, "coverage in " + name);
      o.require(rep.violations.empty(), "disjointness in " + name);
      o.require(max_outer(rep) <= 145.0 / 3.0 + 1e-6, "outer bound in " + name);
      o.require(rep.inner_ok(), "inner probes in " + name);
      o.require(rep.starshape_ok(), "starshape in " + name);
      o.detail << " " << name << ": " << t->size() << " tiles, coverage " << rep.coverage.fraction
               << ", outer max " << max_outer(rep) << ", " << rep.tiles.size()
               << " tiles probed;";
      if (p == 2.0) schauder_l2 = std::move(t);
    }
  });

  criterion(5, 60.0, [](Outcome& o) {
    const auto sp = NormedSpace::lp(4, 2);
    const double eps = 0.8;
    SphereBuildStats st;
    sphere4 = std::make_unique<SphereTiling>(build_sphere_tiling(sp, eps, 1, {}, &st));
    const auto& t = *sphere4;
    const auto& p = t.params();
    o.require(std::abs(p.rho - (p.R - p.r_prime)) <= 1e-12, "rho = R - r'");
    o.require(std::abs(p.R - 2.0 * p.r_prime / (1.0 + p.r)) <= 1e-12, "R = 2r'/(1+r)");
    o.require(t.uncertified().empty(), "every tile witnessed");
    const auto samples = sample_sphere(sp, 10000, 2);
    std::size_t unclassified = 0;
    double worst_family = 0.0, worst_center = 0.0;
    for (const auto& x : samples) {
      const auto c = t.sphere_classify(x);
      if (!c) {
        ++unclassified;
        continue;
      }
      const Vector xj = c->p == 2 ? t.family_vector(c->j) : Vector(-t.family_vector(c->j));
      worst_family = std::max(worst_family, sp.distance(x, xj));
      worst_center = std::max(worst_center, sp.distance(x, t.center(*c)));
    }
    o.require(unclassified == 0, "all samples classified");
    o.require(worst_family <= eps / 2.0 + 1e-9, "eps/2 to the family vector");
    o.require(worst_center <= eps + 1e-9, "eps to the center");
    VerifyOptions v;
    v.seed = 3;
    v.directions = 100;
    const auto rep = verify_tiling(t, samples, v);
    o.require(rep.passed(), "harness (coverage, disjointness, rho probes, outer)");
    o.detail << " " << t.size() << " tiles, rho " << p.rho << ", max distance to +-x_j "
             << worst_family << ", to center " << worst_center << ", R/r "
             << rep.achieved_ratio();
  });

  criterion(6, 180.0, [](Outcome& o) {
    const auto sp = NormedSpace::lp(3, 2);
    const double eps = 0.75;
    const auto t = build_body_tiling(ConvexBody::unit_ball(sp), eps, 1);
    body_json = t.to_json().dump();
    double tangency = 0.0;
    for (const auto& s : t.slices())
      tangency = std::max(tangency, std::abs(sp.norm(s.y0) - s.r_slice - (1.0 - t.delta()) * s.scale));
    o.require(tangency <= 1e-9, "tangency identity");
    VerifyOptions v;
    v.seed = 4;
    v.directions = 100;
    const auto rep = verify_tiling(t, sample_ball(sp, origin(3), 1.0, 10000, 5), v);
    o.require(rep.coverage.fraction == 1.0, "coverage");
    o.require(rep.violations.empty(), "disjointness");
    o.require(rep.tiles.size() == t.size(), "every tile certified");
    o.require(rep.inner_ok(), "B(c, rho) probes");
    o.require(max_outer(rep) <= eps + 1e-9, "outer bound eps");
    // Pairwise distances within each tile over 10^5 classified points.
    const auto pts = sample_ball(sp, origin(3), 1.0, 100000, 6);
    std::vector<std::vector<std::size_t>> members(t.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (const auto id = t.classify(pts[i])) members[*id].push_back(i);
    double diam = 0.0;
    for (std::size_t id = 0; id < t.core_id(); ++id) {
      const auto& m = members[id];
      for (std::size_t a = 0; a < m.size(); ++a)
        for (std::size_t b = a + 1; b < m.size(); ++b)
          diam = std::max(diam, sp.distance(pts[m[a]], pts[m[b]]));
    }
    o.require(diam <= eps + 1e-6, "slice diameters");
    o.detail << " " << t.layers() << " layers, " << t.slices().size() << " slices, rho "
             << t.rho() << ", tangency error " << tangency << ", outer max " << max_outer(rep)
             << ", sampled slice diameter " << diam;
  });

  criterion(7, 60.0, [](Outcome& o) {
    const auto m = verify_moduli(8, 100000, 8);
    o.require(m.forward_violations == 0, "forward bound");
    o.require(m.inverse_violations == 0, "inverse bound");
    o.require(m.round_trip_error <= 1e-12, "round trip");
    o.require(m.norm_error <= 1e-12, "norm identity");
    // Round trip again on 10^4 unit-ball vectors of l_2^8.
    double rt = 0.0;
    for (const auto& f : sample_ball(NormedSpace::lp(8, 2), origin(8), 1.0, 10000, 9))
      rt = std::max(rt, (mazur_inverse(mazur(f, 1.0), 1.0) - f).lpNorm<Eigen::Infinity>());
    o.require(rt <= 1e-12, "round trip on 10^4 vectors");
    o.require(!body_json.empty(), "criterion 6 output");
    const auto source = tiling_from_json(nlohmann::json::parse(body_json));
    const TransportedTiling t(source, 1.0);
    const auto* body = dynamic_cast<const LayeredTiling*>(source.get());
    const double rho_p = ModulusOfContinuity::mazur_l1().inverse(body->rho());
    const double outer = ModulusOfContinuity::mazur_l1()(body->eps());
    o.require(t.tile(0).inner_radius == rho_p && t.tile(0).outer_radius == outer,
              "transported radii");
    VerifyOptions v;
    v.seed = 10;
    v.directions = 100;
    const auto rep = verify_tiling(t, sample_ball(t.space(), origin(3), 1.0, 10000, 11), v);
    o.require(rep.coverage.fraction == 1.0, "transported coverage");
    o.require(rep.violations.empty(), "transported disjointness");
    o.require(rep.inner_ok() && rep.outer_ok(), "transported radii probes");
    o.detail << " max ratios " << m.forward_max_ratio << " and " << m.inverse_max_ratio
             << ", round trip " << std::max(rt, m.round_trip_error) << "; l1 ball: rho' "
             << rho_p << ", omega(eps) " << outer << ", outer max " << max_outer(rep);
  });

  criterion(8, 30.0, [](Outcome& o) {
    o.require(sphere4 && schauder_l2, "criteria 4 and 5 outputs");
    std::size_t sd = 0, cd = 0;
    for (const auto& x : random_sphere(sphere4->space(), 1000, 12))
      if (sphere4->sphere_classify(x) != sphere4->brute_force_classify(x)) ++sd;
    for (const auto& x : sample_ball(schauder_l2->space(), origin(6), 10.0, 1000, 13))
      if (schauder_l2->composite_classify(x) != schauder_l2->brute_force_classify(x)) ++cd;
    o.require(sd == 0, "sphere_classify");
    o.require(cd == 0, "composite_classify");
    o.detail << " sphere " << sd << " and composite " << cd << " disagreements in 1000 each";
  });

  criterion(9, 5.0, [](Outcome& o) {
    o.require(voronoi2 != nullptr, "criterion 2 output");
    const Vector lo = Vector::Constant(2, -6.0), hi = -lo;
    const auto samples = sample_box(lo, hi, 10000, 14);
    const std::size_t hole = *voronoi2->classify(Vector::Zero(2));
    const MaskedTiling masked(*voronoi2, {hole});
    const auto cov = check_coverage(masked, samples);
    bool in_hole = !cov.uncovered.empty();
    for (const auto& w : cov.uncovered) in_hole = in_hole && voronoi2->classify(w) == hole;
    o.require(cov.fraction < 1.0, "deleted tile lowers coverage");
    o.require(in_hole, "witnesses lie in the hole");
    const ExplicitBallTiling overlap(NormedSpace::lp(2, 2),
                                     {{Vector::Zero(2), 1.0}, {Vector::Unit(2, 0), 1.0}});
    const auto viol = check_disjoint_interiors(overlap, sample_box(lo / 3.0, hi / 3.0, 2000, 15));
    o.require(!viol.empty(), "overlapping balls flagged");
    const ExplicitBallTiling apart(NormedSpace::lp(2, 2),
                                   {{Vector::Zero(2), 1.0}, {Vector::Constant(2, 3.0), 1.0}});
    o.require(check_disjoint_interiors(apart, samples).empty(), "disjoint balls pass");
    o.detail << " masked coverage " << cov.fraction << ", " << viol.size()
             << " double-strict points for overlapping balls";
  });

  return failures == 0 ? 0 : 1;
}
