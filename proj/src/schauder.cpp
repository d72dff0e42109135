#include "ntile/schauder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ntile/sampling.hpp"

namespace ntile {

std::string HTile::label() const {
  switch (kind) {
    case Kind::zero:
      return "H0";
    case Kind::petal:
      return "H" + std::to_string(j) + "^" + std::to_string(p);
    case Kind::strip:
      return "Hn" + std::to_string(n);
  }
  return "?";
}

WLevelTiling::WLevelTiling(NormedSpace space, std::size_t level, StripParams params,
                           BiorthogonalFamily family, long long max_strip)
    : space_(std::move(space)),
      level_(level),
      params_(std::move(params)),
      family_(std::move(family)),
      max_strip_(max_strip),
      hw_(to_double(params_.halfwidth)),
      period_(to_double(params_.period)),
      a_(to_double(params_.a)),
      b_(to_double(params_.b)) {
  if (level_ + 1 >= space_.dim())
    throw std::invalid_argument("W level needs a direction coordinate inside the space");
}

std::size_t WLevelTiling::tile_count() const {
  return 1 + 4 * family_.size() + 2 * static_cast<std::size_t>(max_strip_);
}

HTile WLevelTiling::decode(std::size_t idx) const {
  if (idx >= tile_count()) throw std::out_of_range("W tile index out of range");
  HTile t;
  if (idx == 0) return t;
  const std::size_t petals = 4 * family_.size();
  if (idx <= petals) {
    t.kind = HTile::Kind::petal;
    t.j = (idx - 1) / 4;
    t.p = static_cast<int>((idx - 1) % 4) + 1;
    return t;
  }
  const std::size_t s = idx - 1 - petals;
  t.kind = HTile::Kind::strip;
  t.n = static_cast<long long>(s / 2 + 1) * (s % 2 == 0 ? 1 : -1);
  return t;
}

std::size_t WLevelTiling::encode(const HTile& t) const {
  switch (t.kind) {
    case HTile::Kind::zero:
      return 0;
    case HTile::Kind::petal:
      if (t.j >= family_.size() || t.p < 1 || t.p > 4)
        throw std::out_of_range("petal index out of range");
      return 1 + 4 * t.j + static_cast<std::size_t>(t.p - 1);
    case HTile::Kind::strip:
      if (t.n == 0 || std::llabs(t.n) > max_strip_)
        throw std::out_of_range("strip index out of range");
      return 1 + 4 * family_.size() + 2 * static_cast<std::size_t>(std::llabs(t.n) - 1) +
             (t.n < 0 ? 1 : 0);
  }
  return 0;
}

std::pair<double, double> WLevelTiling::pi(std::size_t j, const Vector& w) const {
  return {e_star(w), family_.functionals[j](w)};
}

namespace {

// Combines memberships by conjunction.
Membership meet(Membership a, Membership b) {
  if (a == Membership::outside || b == Membership::outside) return Membership::outside;
  if (a == Membership::inside || b == Membership::inside) return Membership::inside;
  return Membership::strict;
}

}  // namespace

Membership WLevelTiling::zero_membership(const Vector& w) const {
  const double e = e_star(w);
  if (std::abs(e) > hw_ + kBoundaryTol) return Membership::outside;
  Membership m = std::abs(e) < hw_ - kBoundaryTol ? Membership::strict : Membership::inside;
  for (std::size_t j = 0; j < family_.size() && m != Membership::outside; ++j) {
    const auto [x, y] = pi(j, w);
    m = meet(m, plane_membership(params_, PlaneTile::U0, x, y));
  }
  return m;
}

Membership WLevelTiling::membership(std::size_t idx, const Vector& w) const {
  check_dim(space_, w);
  for (std::size_t c = 0; c <= level_; ++c)
    if (w[static_cast<Eigen::Index>(c)] != 0.0)
      throw std::invalid_argument("point is not in W_k (a leading coordinate is nonzero)");
  return membership_unchecked(idx, w);
}

Membership WLevelTiling::membership_unchecked(std::size_t idx, const Vector& w) const {
  const auto t = decode(idx);
  const double e = e_star(w);
  switch (t.kind) {
    case HTile::Kind::zero:
      return zero_membership(w);
    case HTile::Kind::petal: {
      if (std::abs(e) > hw_ + kBoundaryTol) return Membership::outside;
      const auto [x, y] = pi(t.j, w);
      Membership m = plane_membership(params_, static_cast<PlaneTile>(t.p), x, y);
      for (std::size_t i = 0; i < t.j && m != Membership::outside; ++i) {
        const auto [xi, yi] = pi(i, w);
        m = meet(m, plane_membership(params_, PlaneTile::U0, xi, yi));
      }
      return m;
    }
    case HTile::Kind::strip: {
      const double d = std::abs(e - period_ * static_cast<double>(t.n));
      if (d > hw_ + kBoundaryTol) return Membership::outside;
      return d < hw_ - kBoundaryTol ? Membership::strict : Membership::inside;
    }
  }
  return Membership::outside;
}

std::optional<std::size_t> WLevelTiling::classify(const Vector& w) const {
  const double e = e_star(w);
  if (std::abs(e) <= hw_ + kBoundaryTol) {
    if (is_inside(zero_membership(w))) return 0;
    for (std::size_t j = 0; j < family_.size(); ++j) {
      const auto [x, y] = pi(j, w);
      for (int p = 1; p <= 4; ++p)
        if (is_inside(plane_membership(params_, static_cast<PlaneTile>(p), x, y)))
          return encode({HTile::Kind::petal, j, p, 0});
      if (!is_inside(plane_membership(params_, PlaneTile::U0, x, y))) break;
    }
  }
  std::optional<std::size_t> best;
  const auto n0 = static_cast<long long>(std::llround(e / period_));
  for (long long n = n0 - 1; n <= n0 + 1; ++n) {
    if (n == 0 || std::llabs(n) > max_strip_) continue;
    const auto idx = encode({HTile::Kind::strip, 0, 0, n});
    if (is_inside(membership_unchecked(idx, w)) && (!best || idx < *best)) best = idx;
  }
  return best;
}

std::optional<std::size_t> WLevelTiling::brute_force_classify(const Vector& w) const {
  for (std::size_t idx = 0; idx < tile_count(); ++idx)
    if (is_inside(membership_unchecked(idx, w))) return idx;
  return std::nullopt;
}

Vector WLevelTiling::center(std::size_t idx) const {
  const auto t = decode(idx);
  Vector c = Vector::Zero(static_cast<Eigen::Index>(space_.dim()));
  const auto e = static_cast<Eigen::Index>(direction_index());
  switch (t.kind) {
    case HTile::Kind::zero:
      break;
    case HTile::Kind::petal: {
      const double sx = (t.p == 1 || t.p == 2) ? 1.0 : -1.0;
      const double sy = (t.p == 1 || t.p == 3) ? 1.0 : -1.0;
      c = sy * b_ * family_.vectors[t.j];
      c[e] += sx * a_;
      break;
    }
    case HTile::Kind::strip:
      c[e] = period_ * static_cast<double>(t.n);
      break;
  }
  return c;
}

namespace {

// Random unit vector of W_k (coordinates 0..k zeroed).
Vector w_unit(const NormedSpace& space, std::size_t level, Rng& rng) {
  const auto sub = subspace(space, space.dim() - level - 1);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
  out.tail(static_cast<Eigen::Index>(sub.dim())) = random_unit(sub, rng);
  return out;
}

}  // namespace

WLevelBounds w_level_bounds(const WLevelTiling& wt, bool unconditional, std::size_t samples,
                            std::size_t directions, std::uint64_t seed) {
  WLevelBounds out;
  const auto& space = wt.space();
  const auto& params = wt.params();
  out.R0 = to_double(normality_constants(params, unconditional).R0);
  const double r = to_double(params.r), hw = to_double(params.halfwidth);
  const double tol = 1e-9;
  const std::size_t k = wt.level();
  Rng rng(seed);
  auto witness = [&](const Vector& v) {
    if (out.witnesses.size() < 16) out.witnesses.push_back(v);
  };
  auto q_next = [&](const Vector& w) { return space.norm(tail_projection(space, k + 2, w)); };

  // (1) B(0,1) in H0 in B(0,R0), along random rays.
  for (std::size_t d = 0; d < directions; ++d) {
    const Vector u = w_unit(space, k, rng);
    if (!is_inside(wt.membership_unchecked(0, (1.0 - tol) * u))) {
      out.unit_ball_in_h0 = false;
      witness((1.0 - tol) * u);
    }
    double lo = 0.0, hi = 4.0 * out.R0;
    if (is_inside(wt.membership_unchecked(0, hi * u))) {
      lo = hi;
    } else {
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (is_inside(wt.membership_unchecked(0, mid * u)) ? lo : hi) = mid;
      }
    }
    out.h0_max_norm = std::max(out.h0_max_norm, lo);
    if (lo > out.R0 + 1e-6) {
      out.h0_in_R0_ball = false;
      witness(lo * u);
    }
  }

  // (2) and (3) for every petal and strip tile.
  for (std::size_t idx = 1; idx < wt.tile_count(); ++idx) {
    const Vector h = wt.center(idx);
    if (q_next(h) > 1.0 - r + tol) {
      out.tail_of_centers = false;
      witness(h);
    }
    for (std::size_t d = 0; d < directions; ++d) {
      const Vector p = h + (r - tol) * w_unit(space, k, rng);
      if (!is_inside(wt.membership_unchecked(idx, p))) {
        out.inner_balls = false;
        witness(p);
      }
    }
  }

  // (4) on samples of W_k spread over the strips in range.
  const double reach = to_double(params.period) * static_cast<double>(wt.max_strip()) + hw;
  const double c1 = unconditional ? 1.0 : 2.0;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t s = 0; s < samples; ++s) {
    const Vector w = (unif(rng) * reach) * w_unit(space, k, rng);
    const auto idx = wt.classify(w);
    if (!idx || *idx == 0) continue;
    const double bound = hw + c1 + c1 * q_next(w);
    if (space.distance(w, wt.center(*idx)) > bound + 1e-9) {
      out.affine_bound = false;
      witness(w);
    }
  }
  return out;
}

BiorthogonalFamily level_family(const NormedSpace& space, std::size_t level, double delta,
                                std::size_t cap, std::size_t candidates, std::uint64_t seed) {
  const std::size_t start = level + 2;
  BiorthogonalFamily empty;
  empty.threshold = delta;
  if (start >= space.dim()) return empty;
  const std::size_t d = space.dim() - start;
  const auto n = static_cast<Eigen::Index>(space.dim());
  std::vector<Vector> pts;
  for (std::size_t i = start; i < space.dim(); ++i) pts.push_back(Vector::Unit(n, static_cast<Eigen::Index>(i)));
  Halton seq(d, seed);
  for (std::size_t c = 0; c < candidates; ++c) {
    Vector v = Vector::Zero(n);
    v.tail(static_cast<Eigen::Index>(d)) = (2.0 * seq.next().array() - 1.0).matrix();
    if (space.norm(v) > 1e-9) pts.push_back(v);
  }
  return greedy_biorthogonal(space, delta, list_candidates(std::move(pts)), cap);
}

SchauderTiling::SchauderTiling(NormedSpace space, SchauderConfig config)
    : space_(std::move(space)), config_(std::move(config)) {
  if (config_.depth + 2 > space_.dim())
    throw std::invalid_argument("depth must satisfy depth <= dim - 2");
  if (!(config_.region_radius > 0.0)) throw std::invalid_argument("region radius must be positive");
  constants_ = normality_constants(config_.params, config_.unconditional);
  const double r = to_double(config_.params.r);
  const double hw = to_double(config_.params.halfwidth);
  const double period = to_double(config_.params.period);
  const auto max_strip =
      static_cast<long long>(std::ceil((config_.region_radius + hw) / period)) + 1;
  offsets_.push_back(0);
  for (std::size_t k = 0; k <= config_.depth; ++k) {
    const auto vspace = subspace(space_, k + 1);
    const Region region = BallRegion{Vector::Zero(static_cast<Eigen::Index>(k + 1)),
                                     config_.region_radius + 2.0 * r};
    auto cells = std::make_unique<VoronoiTiling>(voronoi_net(vspace, region, r, config_.seed + k));
    auto family = level_family(space_, k, to_double(config_.params.delta), config_.family_cap,
                               config_.family_candidates, config_.seed + 1000 + k);
    WLevelTiling h(space_, k, config_.params, std::move(family), max_strip);
    const std::size_t j_count = h.tile_count() - first_j(k);
    offsets_.push_back(offsets_.back() + j_count * cells->size());
    levels_.push_back({std::move(cells), std::move(h)});
  }
}

std::size_t SchauderTiling::encode(const CompositeIndex& c) const {
  if (c.k > config_.depth) throw std::out_of_range("level out of range");
  const auto& lv = levels_[c.k];
  if (c.k >= 1 && c.j == 0) throw std::invalid_argument("levels k >= 1 need j >= 1");
  if (c.j >= lv.h.tile_count() || c.i >= lv.cells->size())
    throw std::out_of_range("composite index out of range");
  return offsets_[c.k] + (c.j - first_j(c.k)) * lv.cells->size() + c.i;
}

CompositeIndex SchauderTiling::decode(std::size_t id) const {
  if (id >= size()) throw std::out_of_range("tile id out of range");
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), id);
  const auto k = static_cast<std::size_t>(it - offsets_.begin()) - 1;
  const std::size_t local = id - offsets_[k], n = levels_[k].cells->size();
  return {local % n, local / n + first_j(k), k};
}

Vector SchauderTiling::head(std::size_t k, const Vector& x) const {
  return x.head(static_cast<Eigen::Index>(k + 1));
}

Vector SchauderTiling::tail(std::size_t k, const Vector& x) const {
  return tail_projection(space_, k + 1, x);
}

bool SchauderTiling::higher_levels_in_h0(std::size_t k, const Vector& x) const {
  for (std::size_t m = k + 1; m <= config_.depth; ++m)
    if (!is_inside(levels_[m].h.membership_unchecked(0, tail(m, x)))) return false;
  return true;
}

Membership SchauderTiling::composite_membership(const CompositeIndex& c, const Vector& x) const {
  encode(c);  // validates
  check_dim(space_, x);
  Membership m = levels_[c.k].cells->star_membership(c.i, head(c.k, x));
  if (m == Membership::outside) return m;
  m = meet(m, levels_[c.k].h.membership_unchecked(c.j, tail(c.k, x)));
  for (std::size_t lv = c.k + 1; lv <= config_.depth && m != Membership::outside; ++lv)
    m = meet(m, levels_[lv].h.membership_unchecked(0, tail(lv, x)));
  return m;
}

std::optional<CompositeIndex> SchauderTiling::composite_classify(const Vector& x) const {
  check_dim(space_, x);
  std::size_t k = config_.depth;
  while (k >= 1 && is_inside(levels_[k].h.membership_unchecked(0, tail(k, x)))) --k;
  const auto j = levels_[k].h.classify(tail(k, x));
  if (!j) return std::nullopt;
  const auto i = levels_[k].cells->classify(head(k, x));
  if (!i) return std::nullopt;
  return CompositeIndex{*i, *j, k};
}

std::optional<CompositeIndex> SchauderTiling::brute_force_classify(const Vector& x) const {
  for (std::size_t k = 0; k <= config_.depth; ++k) {
    if (!higher_levels_in_h0(k, x)) continue;
    const auto& lv = levels_[k];
    const Vector t = tail(k, x);
    for (std::size_t j = first_j(k); j < lv.h.tile_count(); ++j)
      if (is_inside(lv.h.membership_unchecked(j, t)))
        return CompositeIndex{lv.cells->brute_force_classify(head(k, x)), j, k};
  }
  return std::nullopt;
}

std::optional<std::size_t> SchauderTiling::classify(const Vector& x) const {
  const auto c = composite_classify(x);
  if (!c) return std::nullopt;
  return encode(*c);
}

std::vector<std::size_t> SchauderTiling::candidates(const Vector& x) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k <= config_.depth; ++k) {
    if (!higher_levels_in_h0(k, x)) continue;
    const auto& lv = levels_[k];
    const Vector t = tail(k, x);
    std::vector<std::size_t> cells;
    bool cells_ready = false;
    for (std::size_t j = first_j(k); j < lv.h.tile_count(); ++j) {
      if (!is_inside(lv.h.membership_unchecked(j, t))) continue;
      if (!cells_ready) {
        cells = lv.cells->candidates(head(k, x));
        cells_ready = true;
      }
      for (auto i : cells) out.push_back(encode({i, j, k}));
    }
  }
  return out;
}

TileInfo SchauderTiling::tile(std::size_t id) const {
  const auto c = decode(id);
  const auto& lv = levels_[c.k];
  Vector center = lv.h.center(c.j);
  center.head(static_cast<Eigen::Index>(c.k + 1)) += lv.cells->net().centers()[c.i];
  std::ostringstream label;
  label << "C k=" << c.k << " " << lv.h.decode(c.j).label() << " D" << c.i;
  return {center, to_double(constants_.r), to_double(constants_.R), label.str()};
}

std::string SchauderTiling::describe() const {
  std::ostringstream os;
  os << "schauder tiling of " << space_.describe() << ", depth " << config_.depth << ", "
     << config_.params.tag << (config_.unconditional ? " unconditional" : "") << ", cells";
  for (const auto& lv : levels_) os << " " << lv.cells->size();
  os << ", families";
  for (const auto& lv : levels_) os << " " << lv.h.family().size();
  return os.str();
}

}  // namespace ntile
