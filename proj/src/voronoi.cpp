#include "ntile/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ntile/sampling.hpp"

namespace ntile {

VoronoiTiling::VoronoiTiling(SeparatedNet net)
    : net_(std::move(net)), strictly_convex_(net_.space().is_strictly_convex()) {
  if (net_.size() == 0) throw std::invalid_argument("Voronoi tiling needs at least one center");
}

void VoronoiTiling::check_index(std::size_t i) const {
  if (i >= net_.size()) throw std::out_of_range("Voronoi cell index out of range");
}

std::vector<std::pair<double, std::size_t>> VoronoiTiling::nearest_set(const Vector& x,
                                                                       double extra) const {
  const auto& space = net_.space();
  const auto& centers = net_.centers();
  double radius = net_.separation();
  for (;;) {
    const auto ids = net_.within(x, radius);
    if (!ids.empty()) {
      double m = std::numeric_limits<double>::infinity();
      std::vector<std::pair<double, std::size_t>> all;
      for (auto id : ids) {
        const double d = space.distance(x, centers[id]);
        all.emplace_back(d, id);
        m = std::min(m, d);
      }
      if (m + extra <= radius) {
        std::vector<std::pair<double, std::size_t>> out;
        for (const auto& [d, id] : all)
          if (d <= m + extra) out.emplace_back(d, id);
        return out;  // ids ascend already
      }
      radius = m + extra;
    } else {
      radius *= 2.0;
    }
  }
}

bool VoronoiTiling::in_closed_cell(std::size_t j, const Vector& x) const {
  const auto near = nearest_set(x, kBoundaryTol);
  return std::any_of(near.begin(), near.end(), [&](const auto& p) { return p.second == j; });
}

bool VoronoiTiling::strictly_interior(std::size_t j, const Vector& x) const {
  // x is interior to V_j when small moves along every axis and diagonal stay
  // in V_j (compared without slack, since plateaus are exact ties).
  const auto& space = net_.space();
  const auto n = static_cast<Eigen::Index>(space.dim());
  const double step = 1e-7 * std::max(1.0, space.norm(x));
  auto stays = [&](const Vector& p) {
    const double dj = space.distance(p, net_.centers()[j]);
    for (auto id : net_.within(p, dj))
      if (space.distance(p, net_.centers()[id]) < dj) return false;
    return true;
  };
  for (Eigen::Index a = 0; a < n; ++a) {
    for (double s : {-1.0, 1.0}) {
      Vector p = x;
      p[a] += s * step;
      if (!stays(p)) return false;
      for (Eigen::Index b = a + 1; b < n; ++b) {
        for (double t : {-1.0, 1.0}) {
          Vector q = p;
          q[b] += t * step;
          if (!stays(q)) return false;
        }
      }
    }
  }
  return true;
}

Membership VoronoiTiling::voronoi_membership(std::size_t i, const Vector& x) const {
  check_index(i);
  check_dim(net_.space(), x);
  const auto near = nearest_set(x, 2.0 * kBoundaryTol);
  const double m = near.empty() ? 0.0 : std::min_element(near.begin(), near.end())->first;
  double di = -1.0;
  for (const auto& [d, id] : near)
    if (id == i) di = d;
  if (di < 0.0 || di > m + kBoundaryTol) return Membership::outside;
  for (const auto& [d, id] : near)
    if (id != i && !(di < d - kBoundaryTol)) return Membership::inside;
  return Membership::strict;
}

Membership VoronoiTiling::star_membership(std::size_t i, const Vector& x) const {
  const auto v = voronoi_membership(i, x);
  if (v != Membership::inside || strictly_convex_) return v;
  for (const auto& [d, j] : nearest_set(x, kBoundaryTol))
    if (j < i && strictly_interior(j, x)) return Membership::outside;
  return v;
}

std::optional<std::size_t> VoronoiTiling::classify(const Vector& x) const {
  check_dim(net_.space(), x);
  for (const auto& [d, id] : nearest_set(x, kBoundaryTol))
    if (strictly_convex_ || is_inside(star_membership(id, x))) return id;
  return std::nullopt;
}

std::size_t VoronoiTiling::brute_force_classify(const Vector& x) const {
  const auto& space = net_.space();
  std::vector<double> d(net_.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = space.distance(x, net_.centers()[i]);
  const double m = *std::min_element(d.begin(), d.end());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] > m + kBoundaryTol) continue;
    if (strictly_convex_ || is_inside(star_membership(i, x))) return i;
  }
  throw std::logic_error("no Voronoi cell accepts the point");
}

std::vector<std::size_t> VoronoiTiling::candidates(const Vector& x) const {
  std::vector<std::size_t> out;
  for (const auto& [d, id] : nearest_set(x, 2.0 * kBoundaryTol)) out.push_back(id);
  return out;
}

TileInfo VoronoiTiling::tile(std::size_t id) const {
  check_index(id);
  return {net_.centers()[id], r(), 2.0 * r(), "D" + std::to_string(id)};
}

std::string VoronoiTiling::describe() const {
  std::ostringstream os;
  os << "voronoi star tiling of " << net_.space().describe() << ", " << net_.size()
     << " centers, r=" << r();
  return os.str();
}

std::vector<VoronoiTiling::StarProbeViolation> VoronoiTiling::starshape_probe(
    std::size_t i, std::size_t samples, std::size_t segment_points, std::uint64_t seed) const {
  check_index(i);
  const auto& space = net_.space();
  const Vector& c = net_.centers()[i];
  Rng rng(seed ^ (0x9e3779b97f4a7c15ull * (i + 1)));
  std::vector<StarProbeViolation> out;
  const std::size_t m = std::max<std::size_t>(segment_points, 2);
  std::size_t drawn = 0, tries = 0;
  // The tile may poke out of B(d_i, 2r) when the net is only maximal on its
  // candidates, so draw from a slightly larger ball.
  while (drawn < samples && tries < 1000 * samples) {
    ++tries;
    const Vector x = random_in_ball(space, c, 2.2 * r(), rng);
    if (!is_inside(star_membership(i, x))) continue;
    ++drawn;
    for (std::size_t k = 0; k < m; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(m - 1);
      const Vector p = t * c + (1.0 - t) * x;
      if (!is_inside(star_membership(i, p))) {
        out.push_back({x, p});
        break;
      }
    }
  }
  return out;
}

SeparatedNet voronoi_net(const NormedSpace& space, const Region& region, double r,
                         std::uint64_t seed, std::size_t refine) {
  if (!(r > 0.0)) throw std::invalid_argument("Voronoi radius must be positive");
  const double sep = 2.0 * r;
  SeparatedNet net(space, region, sep, seed);
  auto grid = grid_candidates(space, region, sep / 4.5);
  while (auto c = grid()) net.try_add(*c);
  if (refine > 0) {
    std::vector<Vector> pts;
    if (const auto* ball = std::get_if<BallRegion>(&region)) {
      pts = quasirandom_ball(space, ball->radius, refine, seed);
      for (auto& p : pts) p += ball->center;
    } else {
      const auto& box = std::get<BoxRegion>(region);
      Halton seq(space.dim(), seed);
      for (std::size_t k = 0; k < refine; ++k)
        pts.push_back(box.lo + (box.hi - box.lo).cwiseProduct(seq.next()));
    }
    for (const auto& p : pts) net.try_add(p);
  }
  if (net.size() == 0) throw std::invalid_argument("region produced no candidates");
  return net;
}

}  // namespace ntile
