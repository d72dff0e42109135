#include "ntile/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ntile/parallel.hpp"
#include "ntile/sampling.hpp"

namespace ntile {

nlohmann::json reference_constants() {
  return {{"preiss", 15}, {"fig1", 290}, {"fig2", 148}, {"unconditional", 68}};
}

std::vector<Vector> sample_ball(const NormedSpace& space, const Vector& center, double radius,
                                std::size_t n, std::uint64_t seed) {
  auto pts = quasirandom_ball(space, radius, n, seed);
  for (auto& p : pts) p += center;
  return pts;
}

std::vector<Vector> sample_box(const Vector& lo, const Vector& hi, std::size_t n,
                               std::uint64_t seed) {
  if (lo.size() != hi.size()) throw std::invalid_argument("box corners differ in dimension");
  Halton seq(static_cast<std::size_t>(lo.size()), seed);
  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(lo + (hi - lo).cwiseProduct(seq.next()));
  return out;
}

std::vector<Vector> sample_sphere(const NormedSpace& space, std::size_t n, std::uint64_t seed) {
  return random_sphere(space, n, seed);
}

CoverageResult check_coverage(const Tiling& tiling, const std::vector<Vector>& samples,
                              std::size_t max_witnesses) {
  CoverageResult out;
  out.labels.resize(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) { out.labels[i] = tiling.classify(samples[i]); });
  std::size_t covered = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (out.labels[i]) {
      ++covered;
    } else if (out.uncovered.size() < max_witnesses) {
      out.uncovered.push_back(samples[i]);
    }
  }
  out.fraction = samples.empty() ? 1.0 : static_cast<double>(covered) / samples.size();
  return out;
}

std::vector<OverlapViolation> check_disjoint_interiors(const Tiling& tiling,
                                                       const std::vector<Vector>& samples) {
  std::vector<std::optional<OverlapViolation>> found(samples.size());
  parallel_for(samples.size(), [&](std::size_t s) {
    std::optional<std::size_t> first;
    for (auto id : tiling.candidates(samples[s])) {
      if (tiling.membership(id, samples[s]) != Membership::strict) continue;
      if (first) {
        found[s] = OverlapViolation{samples[s], *first, id};
        return;
      }
      first = id;
    }
  });
  std::vector<OverlapViolation> out;
  for (auto& f : found)
    if (f) out.push_back(std::move(*f));
  return out;
}

namespace {

// Distance from c of the last point still inside along c + t u, t in [0, hi]
// (renormalized onto the sphere for sphere tilings), by bisection.
double exit_radius(const Tiling& tiling, std::size_t id, const Vector& c, const Vector& u,
                   double hi) {
  const auto& space = tiling.space();
  auto at = [&](double t) -> Vector {
    const Vector y = c + t * u;
    return tiling.geometry() == Geometry::sphere ? Vector(y / space.norm(y)) : y;
  };
  double lo = 0.0;
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    (is_inside(tiling.membership(id, at(mid))) ? lo : hi) = mid;
  }
  return space.distance(at(lo), c);
}

}  // namespace

std::vector<TileCertificate> certify_radii(const Tiling& tiling,
                                           const std::vector<std::size_t>& tiles,
                                           const std::vector<Vector>& samples,
                                           const CoverageResult& coverage,
                                           std::size_t n_directions, double tol,
                                           std::uint64_t seed) {
  const auto& space = tiling.space();
  std::vector<TileCertificate> out(tiles.size());
  std::vector<std::pair<std::size_t, std::size_t>> order;
  for (std::size_t s = 0; s < tiles.size(); ++s) order.emplace_back(tiles[s], s);
  std::sort(order.begin(), order.end());
  auto slot = [&](std::size_t id) -> std::optional<std::size_t> {
    auto it = std::lower_bound(order.begin(), order.end(), std::make_pair(id, std::size_t{0}));
    if (it == order.end() || it->first != id) return std::nullopt;
    return it->second;
  };

  parallel_for(tiles.size(), [&](std::size_t s) {
    auto& cert = out[s];
    const auto info = tiling.tile(tiles[s]);
    cert.id = tiles[s];
    cert.label = info.label;
    cert.center = info.center;
    cert.inner_claimed = info.inner_radius;
    cert.outer_claimed = info.outer_radius;
    Rng rng(seed ^ (0x9e3779b97f4a7c15ull * (tiles[s] + 1)));
    const double r = info.inner_radius - tol;
    if (r <= 0.0) return;
    for (std::size_t d = 0; d < n_directions; ++d) {
      const Vector u = random_unit(space, rng);
      Vector probe;
      if (tiling.geometry() == Geometry::sphere) {
        const Vector y = info.center + 0.9 * info.inner_radius * u;
        probe = y / space.norm(y);
        if (space.distance(probe, info.center) > r) continue;
      } else {
        probe = info.center + r * u;
      }
      ++cert.inner_probes;
      if (is_inside(tiling.membership(tiles[s], probe))) continue;
      ++cert.inner_failures;
      const Vector dir = tiling.geometry() == Geometry::sphere ? Vector(0.9 * info.inner_radius * u)
                                                               : Vector(probe - info.center);
      const double len = space.norm(dir);
      const double exit = exit_radius(tiling, tiles[s], info.center, dir / len, len);
      cert.min_failing_radius = std::min(cert.min_failing_radius.value_or(exit), exit);
    }
  });

  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!coverage.labels[i]) continue;
    const auto s = slot(*coverage.labels[i]);
    if (!s) continue;
    auto& cert = out[*s];
    ++cert.classified;
    cert.outer_observed = std::max(cert.outer_observed, space.distance(samples[i], cert.center));
  }
  return out;
}

std::vector<StarViolation> check_starshaped(const Tiling& tiling,
                                            const std::vector<Vector>& samples,
                                            const CoverageResult& coverage,
                                            std::size_t per_tile, std::size_t segment_points) {
  // First `per_tile` samples of each tile, in sample order.
  std::vector<std::size_t> chosen;
  {
    std::vector<std::pair<std::size_t, std::size_t>> seen;  // (tile, count), sorted
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (!coverage.labels[i]) continue;
      const auto id = *coverage.labels[i];
      auto it = std::lower_bound(seen.begin(), seen.end(), std::make_pair(id, std::size_t{0}),
                                 [](const auto& a, const auto& b) { return a.first < b.first; });
      if (it == seen.end() || it->first != id) it = seen.insert(it, {id, 0});
      if (it->second < per_tile) {
        ++it->second;
        chosen.push_back(i);
      }
    }
  }
  std::vector<std::optional<StarViolation>> found(chosen.size());
  parallel_for(chosen.size(), [&](std::size_t c) {
    const auto& x = samples[chosen[c]];
    const auto id = *coverage.labels[chosen[c]];
    const Vector center = tiling.tile(id).center;
    const std::size_t m = std::max<std::size_t>(segment_points, 2);
    for (std::size_t k = 0; k < m; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(m - 1);
      const Vector p = t * center + (1.0 - t) * x;
      if (!is_inside(tiling.membership(id, p))) {
        found[c] = StarViolation{id, x, p};
        return;
      }
    }
  });
  std::vector<StarViolation> out;
  for (auto& f : found)
    if (f) out.push_back(std::move(*f));
  return out;
}

bool VerificationReport::inner_ok() const {
  return std::all_of(tiles.begin(), tiles.end(), [](const auto& t) { return t.inner_ok(); });
}

bool VerificationReport::outer_ok() const {
  return std::all_of(tiles.begin(), tiles.end(),
                     [&](const auto& t) { return t.outer_ok(outer_tol); });
}

bool VerificationReport::passed() const {
  return coverage_ok() && disjoint_ok() && inner_ok() && outer_ok() && starshape_ok();
}

double VerificationReport::achieved_ratio() const {
  double outer = 0.0, inner = std::numeric_limits<double>::infinity();
  for (const auto& t : tiles) {
    outer = std::max(outer, t.outer_observed);
    if (t.inner_ok() && t.inner_probes > 0) inner = std::min(inner, t.inner_claimed);
  }
  return std::isfinite(inner) && inner > 0.0 ? outer / inner : 0.0;
}

nlohmann::json VerificationReport::to_json(bool include_timing) const {
  using nlohmann::json;
  json uncovered = json::array();
  for (const auto& u : coverage.uncovered) uncovered.push_back(vector_json(u));
  json viol = json::array();
  for (const auto& v : violations)
    viol.push_back({{"point", vector_json(v.point)}, {"tiles", {v.first, v.second}}});
  json tl = json::array();
  for (const auto& t : tiles) {
    json j = {{"id", t.id},
              {"label", t.label},
              {"center", vector_json(t.center)},
              {"inner_claimed", t.inner_claimed},
              {"inner_probes", t.inner_probes},
              {"inner_failures", t.inner_failures},
              {"inner_ok", t.inner_ok()},
              {"outer_claimed", t.outer_claimed},
              {"outer_observed", t.outer_observed},
              {"outer_ok", t.outer_ok(outer_tol)},
              {"classified", t.classified}};
    j["min_failing_radius"] = t.min_failing_radius ? json(*t.min_failing_radius) : json(nullptr);
    tl.push_back(std::move(j));
  }
  json star = json::array();
  for (const auto& s : star_violations)
    star.push_back({{"tile", s.tile},
                    {"sample", vector_json(s.sample)},
                    {"segment_point", vector_json(s.segment_point)}});
  json out = {
      {"version", kReportVersion},
      {"tiling", tiling},
      {"seed", seed},
      {"samples", sample_count},
      {"coverage", coverage.fraction},
      {"uncovered", uncovered},
      {"violations", viol},
      {"tiles", tl},
      {"constants", reference_constants()},
      {"achieved_ratio", achieved_ratio()},
      {"checks",
       {{"coverage", coverage_ok()},
        {"disjoint", disjoint_ok()},
        {"inner", inner_ok()},
        {"outer", outer_ok()},
        {"starshape", starshape_checked ? json(starshape_ok()) : json(nullptr)}}},
      {"passed", passed()},
      {"notes",
       "outer radii are observed maxima over classified samples; inner radii are checked by "
       "directional probes"}};
  if (starshape_checked) out["starshape_violations"] = star;
  if (include_timing) out["wall_clock_seconds"] = wall_clock_seconds;
  return out;
}

VerificationReport verify_tiling(const Tiling& tiling, const std::vector<Vector>& samples,
                                 const VerifyOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  VerificationReport rep;
  rep.tiling = tiling.describe();
  rep.seed = options.seed;
  rep.sample_count = samples.size();
  rep.outer_tol = options.outer_tol;
  rep.coverage = check_coverage(tiling, samples);
  rep.violations = check_disjoint_interiors(tiling, samples);

  std::vector<std::size_t> ids;
  if (tiling.size() <= options.certify_all_below) {
    for (std::size_t i = 0; i < tiling.size(); ++i) ids.push_back(i);
  } else {
    std::set<std::size_t> touched;
    for (const auto& l : rep.coverage.labels)
      if (l) touched.insert(*l);
    ids.assign(touched.begin(), touched.end());
  }
  rep.tiles = certify_radii(tiling, ids, samples, rep.coverage, options.directions, options.tol,
                            options.seed);
  if (options.starshape) {
    rep.starshape_checked = true;
    rep.star_violations = check_starshaped(tiling, samples, rep.coverage, options.star_per_tile,
                                           options.segment_points);
  }
  rep.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

MaskedTiling::MaskedTiling(const Tiling& base, std::vector<std::size_t> deleted)
    : base_(base), deleted_(std::move(deleted)) {
  std::sort(deleted_.begin(), deleted_.end());
}

bool MaskedTiling::deleted(std::size_t id) const {
  return std::binary_search(deleted_.begin(), deleted_.end(), id);
}

Membership MaskedTiling::membership(std::size_t id, const Vector& x) const {
  return deleted(id) ? Membership::outside : base_.membership(id, x);
}

std::optional<std::size_t> MaskedTiling::classify(const Vector& x) const {
  const auto id = base_.classify(x);
  if (!id || !deleted(*id)) return id;
  for (auto c : base_.candidates(x))
    if (!deleted(c) && is_inside(base_.membership(c, x))) return c;
  return std::nullopt;
}

std::string MaskedTiling::describe() const {
  std::ostringstream os;
  os << base_.describe() << " minus " << deleted_.size() << " tile(s)";
  return os.str();
}

ExplicitBallTiling::ExplicitBallTiling(NormedSpace space, std::vector<Ball> balls)
    : space_(std::move(space)), balls_(std::move(balls)) {}

TileInfo ExplicitBallTiling::tile(std::size_t id) const {
  const auto& b = balls_.at(id);
  return {b.center, b.radius, b.radius, "ball " + std::to_string(id)};
}

Membership ExplicitBallTiling::membership(std::size_t id, const Vector& x) const {
  const auto& b = balls_.at(id);
  const double d = space_.distance(x, b.center);
  if (d < b.radius - kBoundaryTol) return Membership::strict;
  if (d <= b.radius + kBoundaryTol) return Membership::inside;
  return Membership::outside;
}

std::optional<std::size_t> ExplicitBallTiling::classify(const Vector& x) const {
  for (std::size_t i = 0; i < balls_.size(); ++i)
    if (is_inside(membership(i, x))) return i;
  return std::nullopt;
}

std::string ExplicitBallTiling::describe() const {
  return std::to_string(balls_.size()) + " explicit balls in " + space_.describe();
}

}  // namespace ntile
