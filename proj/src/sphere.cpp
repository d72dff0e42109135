#include "ntile/sphere.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "ntile/nets.hpp"
#include "ntile/sampling.hpp"

namespace ntile {

namespace {

// Unit p with f_q(p) >= t satisfy ||p + q|| >= 1 + t, hence ||p - q|| <= e
// for the largest e with delta(e) <= (1 - t) / 2.
double cap_radius(const NormedSpace& space, double t) {
  const double target = (1.0 - t) / 2.0;
  if (modulus_of_convexity(space, 2.0).value <= target) return 2.0;
  double lo = 0.0, hi = 2.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (modulus_of_convexity(space, mid).value <= target ? lo : hi) = mid;
  }
  return hi;
}

double sphere_area(std::size_t n) {
  return 2.0 * std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0);
}

struct Candidate {
  Vector c;
  Functional f;
  std::size_t witness = 0;
  std::size_t score = 0;
};

// Greedy construction. Samples are projective: p and -p are the same point
// and the hash stores both (ids i and N + i).
class Builder {
 public:
  Builder(const NormedSpace& space, const SphereParams& prm, std::uint64_t seed,
          const SphereBuildOptions& opt)
      : space_(space), opt_(opt), rng_(seed ^ 0x5f3759dfULL), dir_seed_(seed ^ 0x1234567ULL) {
    mu_ = opt.margin * (1.0 - prm.r_prime);
    cover_ = prm.r_prime + mu_;
    deep_ = prm.r * prm.R - mu_;
    wit_ = prm.R + mu_;
    if (wit_ >= 1.0 || deep_ <= 0.0) throw std::invalid_argument("sphere margin too large");
    pts_ = random_sphere(space, opt.samples, seed ^ 0x9e3779b97f4a7c15ULL);
    n_ = pts_.size();
    rad_cover_ = cap_radius(space, cover_);
    rad_wit_ = cap_radius(space, wit_);
    rad_update_ = cap_radius(space, deep_ - mu_);
    const std::size_t d = space.dim();
    link_ = 2.5 * std::pow(sphere_area(d) / static_cast<double>(n_), 1.0 / (d - 1.0));
    rad_band_ = cap_radius(space, cover_ - link_);
    hash_ = std::make_unique<SpatialHash>(rad_cover_);
    for (std::size_t i = 0; i < n_; ++i) {
      hash_->insert(pts_[i], static_cast<std::uint32_t>(i));
      hash_->insert(-pts_[i], static_cast<std::uint32_t>(n_ + i));
    }
    m_.assign(n_, 0.0);
    orphan_.assign(n_, 0);
    const auto probe = gather(pts_[0], duality_map(space, pts_[0]), cover_, rad_cover_);
    limit_ = std::max<std::size_t>(64, 2 * probe.size());
  }

  void run(SphereBuildStats& stats) {
    layered(stats);
    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(pts_[a][0]) < std::abs(pts_[b][0]);
    });
    std::size_t pos = 0;
    while (true) {
      while (pos < n_ && (covered(order[pos]) || orphan_[order[pos]])) ++pos;
      if (pos == n_) break;
      const std::size_t z = order[pos];
      if (try_close(z)) {
        ++stats.closed;
        continue;
      }
      auto cands = candidates(z);
      if (place_safe(cands)) {
        ++stats.greedy;
        continue;
      }
      if (try_insert(cands)) {
        ++stats.inserted;
        continue;
      }
      if (!cands.empty()) {
        place(cands.front().c, cands.front().f, cands.front().witness);
        ++stats.greedy;
        continue;
      }
      orphan_[z] = 1;
    }
    // Whatever is still uncovered gets a center without a ball witness.
    for (std::size_t z = 0; z < n_; ++z) {
      if (covered(z)) continue;
      const Vector c = pts_[z];
      const Functional f = duality_map(space_, c);
      const auto near = gather(c, f, wit_, rad_wit_);
      std::size_t best = z;
      for (auto i : near)
        if (m_[i] < m_[best]) best = i;
      place(c, f, best);
      ++stats.unwitnessed;
    }
  }

  std::vector<Vector> family;
  std::vector<Functional> functionals;
  std::vector<Vector> witnesses;  // f_j(witness) > 0

 private:
  bool covered(std::size_t i) const { return m_[i] >= cover_; }

  // Samples i with |f(p_i)| >= t, found in B(q, radius).
  std::vector<std::size_t> gather(const Vector& q, const Functional& f, double t,
                                  double radius) const {
    hits_.clear();
    hash_->query_box(q, radius, hits_);
    std::vector<std::size_t> out;
    for (auto id : hits_) {
      const std::size_t i = id >= n_ ? id - n_ : id;
      if (std::abs(f(pts_[i])) >= t) out.push_back(i);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // Uncovered component of z (with an optional extra center), sign-aligned
  // to z. Past the size limit the search stops and `big` is set.
  std::vector<std::pair<std::size_t, Vector>> component(std::size_t z, const Functional* extra,
                                                        bool& big) const {
    big = false;
    auto is_covered = [&](std::size_t i) {
      return covered(i) || (extra && std::abs((*extra)(pts_[i])) >= cover_);
    };
    std::unordered_map<std::size_t, bool> seen;
    std::vector<std::pair<std::size_t, Vector>> out{{z, pts_[z]}};
    seen[z] = true;
    std::vector<std::uint32_t> near;
    for (std::size_t k = 0; k < out.size(); ++k) {
      const Vector x = out[k].second;
      near.clear();
      hash_->query_box(x, link_, near);
      for (auto id : near) {
        const std::size_t i = id >= n_ ? id - n_ : id;
        const Vector y = id >= n_ ? Vector(-pts_[i]) : pts_[i];
        if (seen.count(i) || is_covered(i) || space_.distance(x, y) > link_) continue;
        seen[i] = true;
        out.emplace_back(i, y);
        if (out.size() > limit_) {
          big = true;
          return out;
        }
      }
    }
    return out;
  }

  bool deep(std::size_t i, const Functional* extra) const {
    return m_[i] <= deep_ && (!extra || std::abs((*extra)(pts_[i])) <= deep_);
  }

  std::optional<std::size_t> best_witness(const Vector& c, const Functional& f,
                                          const Functional* extra) const {
    std::optional<std::size_t> best;
    for (auto i : gather(c, f, wit_, rad_wit_))
      if (deep(i, extra) && (!best || m_[i] < m_[*best])) best = i;
    return best;
  }

  // A single center covering the whole component, with a witness.
  std::optional<Candidate> cover_component(
      const std::vector<std::pair<std::size_t, Vector>>& comp, const Functional* extra) const {
    Vector mean = Vector::Zero(static_cast<Eigen::Index>(space_.dim()));
    for (const auto& [i, y] : comp) mean += y;
    const double nm = space_.norm(mean);
    if (nm == 0.0) return std::nullopt;
    Candidate out{mean / nm, {}, 0, comp.size()};
    out.f = duality_map(space_, out.c);
    for (const auto& [i, y] : comp)
      if (out.f(y) < cover_) return std::nullopt;
    const auto w = best_witness(out.c, out.f, extra);
    if (!w) return std::nullopt;
    out.witness = *w;
    return out;
  }

  bool try_close(std::size_t z) {
    bool big = false;
    const auto comp = component(z, nullptr, big);
    if (big) return false;
    const auto c = cover_component(comp, nullptr);
    if (!c) return false;
    place(c->c, c->f, c->witness);
    return true;
  }

  // Centers covering z that have a witness, best coverage first.
  std::vector<Candidate> candidates(std::size_t z) {
    hits_.clear();
    hash_->query_box(pts_[z], rad_cover_, hits_);
    std::vector<std::size_t> ids;
    for (auto id : hits_) ids.push_back(id >= n_ ? id - n_ : id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::shuffle(ids.begin(), ids.end(), rng_);
    std::vector<Candidate> out;
    std::size_t tried = 0;
    for (auto i : ids) {
      if (tried == opt_.candidates) break;
      Candidate c;
      c.c = pts_[i];
      c.f = duality_map(space_, c.c);
      const double fz = c.f(pts_[z]);
      if (std::abs(fz) < cover_) continue;
      ++tried;
      if (fz < 0) {
        c.c = -c.c;
        c.f.coefficients = -c.f.coefficients;
      }
      const auto w = best_witness(c.c, c.f, nullptr);
      if (!w) continue;
      c.witness = *w;
      for (auto k : gather(c.c, c.f, cover_, rad_cover_))
        if (!covered(k)) ++c.score;
      out.push_back(std::move(c));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
    return out;
  }

  // Placing c must not leave a small uncovered component that has no deep
  // point and no single covering center.
  bool safe(const Candidate& c) const {
    std::unordered_map<std::size_t, bool> done;
    for (auto b : gather(c.c, c.f, cover_ - link_, rad_band_)) {
      if (covered(b) || std::abs(c.f(pts_[b])) >= cover_ || done.count(b)) continue;
      bool big = false;
      const auto comp = component(b, &c.f, big);
      bool has_deep = big;
      for (const auto& [i, y] : comp) {
        done[i] = true;
        has_deep = has_deep || deep(i, &c.f);
      }
      if (has_deep) continue;
      if (!cover_component(comp, &c.f)) return false;
    }
    return true;
  }

  bool place_safe(const std::vector<Candidate>& cands) {
    for (const auto& c : cands) {
      if (!safe(c)) continue;
      place(c.c, c.f, c.witness);
      return true;
    }
    return false;
  }

  bool deep_before(const Vector& y, std::size_t end, const Functional* extra) const {
    for (std::size_t i = 0; i < end; ++i)
      if (std::abs(functionals[i](y)) > deep_) return false;
    return !extra || std::abs((*extra)(y)) <= deep_;
  }

  // Inserts a center earlier in the order, where its witness is still deep,
  // provided every later center keeps (or finds) a witness.
  bool try_insert(const std::vector<Candidate>& cands) {
    for (const auto& c : cands) {
      std::size_t best_k = 0;
      std::size_t best_y = 0;
      bool any = false;
      for (auto y : gather(c.c, c.f, wit_, rad_wit_)) {
        std::size_t k = 0;
        while (k < functionals.size() && std::abs(functionals[k](pts_[y])) <= deep_) ++k;
        if (!any || k > best_k) {
          best_k = k;
          best_y = y;
          any = true;
        }
      }
      if (!any) continue;
      std::vector<Vector> new_w(witnesses.begin() + best_k, witnesses.end());
      bool ok = true;
      for (std::size_t j = best_k; j < functionals.size() && ok; ++j) {
        Vector& w = new_w[j - best_k];
        if (std::abs(c.f(w)) <= deep_) continue;
        ok = false;
        for (auto y : gather(family[j], functionals[j], wit_, rad_wit_)) {
          const Vector cand = functionals[j](pts_[y]) > 0 ? pts_[y] : Vector(-pts_[y]);
          if (deep_before(cand, j, &c.f)) {
            w = cand;
            ok = true;
            break;
          }
        }
      }
      if (!ok) continue;
      const Vector wy = c.f(pts_[best_y]) > 0 ? pts_[best_y] : Vector(-pts_[best_y]);
      family.insert(family.begin() + best_k, c.c);
      functionals.insert(functionals.begin() + best_k, c.f);
      std::copy(new_w.begin(), new_w.end(), witnesses.begin() + best_k);
      witnesses.insert(witnesses.begin() + best_k, wy);
      update(c.c, c.f);
      return true;
    }
    return false;
  }

  void update(const Vector& c, const Functional& f) {
    for (auto i : gather(c, f, deep_ - mu_, rad_update_))
      m_[i] = std::max(m_[i], std::abs(f(pts_[i])));
  }

  void place(const Vector& c, const Functional& f, std::size_t w) {
    place(c, f, f(pts_[w]) > 0 ? pts_[w] : Vector(-pts_[w]));
  }

  void place(const Vector& c, const Functional& f, const Vector& w) {
    family.push_back(c);
    functionals.push_back(f);
    witnesses.push_back(w);
    update(c, f);
  }

  bool deep_now(const Vector& y) const {
    for (const auto& f : functionals)
      if (std::abs(f(y)) > deep_) return false;
    return true;
  }

  // The unit vector (h, s u) of the level set x_0 = h.
  Vector level_point(double h, const Vector& u) const {
    Vector x(static_cast<Eigen::Index>(space_.dim()));
    x[0] = h;
    x.tail(x.size() - 1) = u;
    double lo = 0.0, hi = 1.0;
    auto at = [&](double sc) {
      Vector y = x;
      y.tail(y.size() - 1) *= sc;
      return y;
    };
    while (space_.norm(at(hi)) < 1.0) hi *= 2.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (space_.norm(at(mid)) < 1.0 ? lo : hi) = mid;
    }
    const Vector y = at(hi);
    return y / space_.norm(y);
  }

  // Farthest point towards the pole along (c + t e_0) / |.| that keeps
  // f_c >= R + margin.
  Vector poleward_witness(const Vector& c, const Functional& f) const {
    auto at = [&](double t) {
      Vector y = c;
      y[0] += t;
      return Vector(y / space_.norm(y));
    };
    if (f(pole_) >= wit_) return pole_;
    double lo = 0.0, hi = 1.0;
    while (f(at(hi)) >= wit_) hi *= 2.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (f(at(mid)) >= wit_ ? lo : hi) = mid;
    }
    return at(lo);
  }

  // Centers on level sets of |x_0|, swept from the equator to the pole at a
  // fixed polar step. Each witness lies poleward of its center and the step
  // exceeds the gap between witness and depth radii, so earlier layers never
  // reach it and within a layer only the lateral spacing matters. The pole
  // is kept deep for a final center there.
  void layered(SphereBuildStats& stats) {
    const std::size_t d = space_.dim();
    pole_ = Vector::Unit(static_cast<Eigen::Index>(d), 0);
    const Functional fp = duality_map(space_, pole_);
    // Observed cap radius, from the samples around the pole.
    double cap = 0.0;
    for (auto i : gather(pole_, fp, cover_, rad_cover_))
      cap = std::max(cap, std::min(space_.distance(pts_[i], pole_),
                                   space_.distance(-pts_[i], pole_)));
    const double step = opt_.layer_step * cap;
    std::vector<Vector> dirs;
    Rng rng(dir_seed_);
    std::normal_distribution<double> g;
    // About 2000 per dimension of the level set beyond the circle.
    std::size_t count = opt_.layer_directions;
    if (count == 0)
      count = static_cast<std::size_t>(
          std::clamp(2000.0 * std::pow(10.0, static_cast<double>(d) - 3.0), 64.0, 200000.0));
    for (std::size_t k = 0; k < count; ++k) {
      Vector u(static_cast<Eigen::Index>(d - 1));
      for (auto& v : u) v = g(rng);
      dirs.push_back(u / u.norm());
    }
    for (double psi = std::acos(0.0);; psi -= step) {
      bool pole_covers = true;
      bool any = false;
      for (std::size_t i = 0; i < n_ && pole_covers; ++i) {
        if (covered(i)) continue;
        any = true;
        pole_covers = std::abs(fp(pts_[i])) >= cover_;
      }
      if (!any) return;
      if (pole_covers && deep_now(pole_)) {
        place(pole_, fp, pole_);
        ++stats.layered;
        return;
      }
      if (psi <= 0.0) return;
      stats.layered += layer(std::cos(psi), dirs);
    }
  }

  std::size_t layer(double h, const std::vector<Vector>& dirs) {
    std::size_t added = 0;
    for (const auto& u : dirs) {
      const Vector c = level_point(h, u);
      const Functional f = duality_map(space_, c);
      if (std::abs(f(pole_)) > deep_) continue;
      bool useful = false;
      for (auto i : gather(c, f, cover_, rad_cover_))
        if (!covered(i)) {
          useful = true;
          break;
        }
      if (!useful) continue;
      const Vector y = poleward_witness(c, f);
      if (deep_now(y)) {
        place(c, f, y);
        ++added;
        continue;
      }
      if (const auto w = best_witness(c, f, nullptr)) {
        place(c, f, *w);
        ++added;
      }
    }
    return added;
  }

  const NormedSpace& space_;
  Vector pole_;
  SphereBuildOptions opt_;
  Rng rng_;
  std::uint64_t dir_seed_;
  double mu_ = 0, cover_ = 0, deep_ = 0, wit_ = 0;
  double rad_cover_ = 0, rad_wit_ = 0, rad_update_ = 0, rad_band_ = 0, link_ = 0;
  std::size_t n_ = 0, limit_ = 0;
  std::vector<Vector> pts_;
  std::unique_ptr<SpatialHash> hash_;
  std::vector<double> m_;
  std::vector<char> orphan_;
  mutable std::vector<std::uint32_t> hits_;
};

}  // namespace

nlohmann::json SphereParams::to_json() const {
  return {{"eps", eps}, {"delta", delta}, {"r_prime", r_prime}, {"r", r},
          {"rho", rho}, {"R", R}};
}

SphereParams sphere_constants(double r_prime, double r) {
  if (!(0.0 < r_prime && r_prime < r && r < 1.0))
    throw std::invalid_argument("need 0 < r' < r < 1");
  SphereParams p;
  p.r_prime = r_prime;
  p.r = r;
  p.rho = r_prime * (1.0 - r) / (1.0 + r);
  p.R = 2.0 * r_prime / (1.0 + r);
  return p;
}

SphereParams sphere_params(const NormedSpace& space, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (!space.is_uniformly_convex())
    throw std::invalid_argument("sphere tilings need a uniformly convex space");
  const double delta = modulus_of_convexity(space, eps / 2.0).value;
  const double base = 1.0 - 2.0 * delta;
  SphereParams p = sphere_constants(base + 2.0 * delta / 3.0,
                                    std::min(base + 4.0 * delta / 3.0, std::nextafter(1.0, 0.0)));
  p.eps = eps;
  p.delta = delta;
  return p;
}

Vector level_center(const NormedSpace& space, const Vector& x, const Vector& v, double R) {
  const Vector base = R * x;
  if (space.norm(base) >= 1.0) throw std::logic_error("level_center: no bracket at t = 0");
  if (space.norm(v) == 0.0) throw std::invalid_argument("level_center: zero direction");
  double lo = 0.0, hi = 1.0;
  while (space.norm(base + hi * v) < 1.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (space.norm(base + mid * v) < 1.0 ? lo : hi) = mid;
  }
  return base + 0.5 * (lo + hi) * v;
}

std::string SphereTileIndex::label() const {
  return "H(" + std::to_string(j + 1) + "," + std::to_string(p) + ")";
}

nlohmann::json SphereBuildStats::to_json() const {
  return {{"samples", samples},         {"layered", layered},      {"greedy", greedy},
          {"closed", closed},           {"inserted", inserted},
          {"unwitnessed", unwitnessed}, {"level_centers", level_centers},
          {"attempts", attempts},       {"seconds", seconds}};
}

SphereTiling::SphereTiling(NormedSpace space, double eps, std::vector<Vector> family,
                           std::vector<Vector> positive_centers)
    : space_(std::move(space)),
      params_(sphere_params(space_, eps)),
      family_(std::move(family)),
      centers_(std::move(positive_centers)) {
  if (family_.size() != centers_.size())
    throw std::invalid_argument("one center per family vector");
  for (std::size_t j = 0; j < family_.size(); ++j) {
    check_unit(family_[j]);
    check_unit(centers_[j]);
    functionals_.push_back(duality_map(space_, family_[j]));
  }
}

void SphereTiling::check_unit(const Vector& x) const {
  check_dim(space_, x);
  if (std::abs(space_.norm(x) - 1.0) > 1e-9)
    throw std::invalid_argument("point is off the unit sphere");
}

Vector SphereTiling::center(SphereTileIndex t) const {
  if (t.j >= family_.size() || (t.p != 1 && t.p != 2))
    throw std::out_of_range("sphere tile index");
  return t.p == 2 ? centers_[t.j] : Vector(-centers_[t.j]);
}

Membership SphereTiling::tile_membership(SphereTileIndex t, const Vector& x) const {
  if (t.j >= family_.size() || (t.p != 1 && t.p != 2))
    throw std::out_of_range("sphere tile index");
  check_unit(x);
  const double rp = params_.r_prime;
  const double fj = functionals_[t.j](x);
  const double s = t.p == 2 ? fj : -fj;
  if (s < rp - kBoundaryTol) return Membership::outside;
  bool strict = s > rp + kBoundaryTol;
  for (std::size_t i = 0; i < t.j; ++i) {
    const double a = std::abs(functionals_[i](x));
    if (a > rp + kBoundaryTol) return Membership::outside;
    if (a >= rp - kBoundaryTol) strict = false;
  }
  return strict ? Membership::strict : Membership::inside;
}

std::optional<SphereTileIndex> SphereTiling::sphere_classify(const Vector& x) const {
  check_unit(x);
  for (std::size_t j = 0; j < family_.size(); ++j) {
    const double f = functionals_[j](x);
    if (std::abs(f) >= params_.r_prime - kBoundaryTol) return SphereTileIndex{j, f > 0 ? 2 : 1};
  }
  return std::nullopt;
}

std::optional<SphereTileIndex> SphereTiling::brute_force_classify(const Vector& x) const {
  for (std::size_t id = 0; id < size(); ++id) {
    const auto t = SphereTileIndex::from_id(id);
    if (is_inside(tile_membership(t, x))) return t;
  }
  return std::nullopt;
}

std::vector<std::size_t> SphereTiling::uncertified() const {
  std::vector<std::size_t> out;
  const double rR = params_.r * params_.R;
  for (std::size_t j = 0; j < family_.size(); ++j) {
    bool ok = functionals_[j](centers_[j]) >= params_.R - kBoundaryTol;
    for (std::size_t i = 0; i < j && ok; ++i)
      ok = std::abs(functionals_[i](centers_[j])) <= rR + kBoundaryTol;
    if (!ok) out.push_back(j);
  }
  return out;
}

TileInfo SphereTiling::tile(std::size_t id) const {
  const auto t = SphereTileIndex::from_id(id);
  return {center(t), params_.rho, params_.eps, t.label()};
}

Membership SphereTiling::membership(std::size_t id, const Vector& x) const {
  return tile_membership(SphereTileIndex::from_id(id), x);
}

std::optional<std::size_t> SphereTiling::classify(const Vector& x) const {
  const auto t = sphere_classify(x);
  if (!t) return std::nullopt;
  return t->id();
}

std::vector<std::size_t> SphereTiling::candidates(const Vector& x) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < family_.size(); ++j) {
    const double f = functionals_[j](x);
    if (std::abs(f) >= params_.r_prime - kBoundaryTol)
      out.push_back(SphereTileIndex{j, f > 0 ? 2 : 1}.id());
  }
  return out;
}

std::string SphereTiling::describe() const {
  std::ostringstream os;
  os << "sphere tiling of S(" << space_.describe() << "), eps = " << params_.eps << ", "
     << family_.size() << " functionals";
  return os.str();
}

nlohmann::json SphereTiling::to_json() const {
  nlohmann::json fam = nlohmann::json::array(), cen = nlohmann::json::array();
  for (std::size_t j = 0; j < family_.size(); ++j) {
    fam.push_back(vector_json(family_[j]));
    cen.push_back(vector_json(centers_[j]));
  }
  return {{"type", "sphere"}, {"space", space_.to_json()}, {"params", params_.to_json()},
          {"family", fam},    {"centers", cen}};
}

SphereTiling SphereTiling::from_json(const nlohmann::json& j) {
  std::vector<Vector> fam, cen;
  for (const auto& v : j.at("family")) fam.push_back(json_vector(v));
  for (const auto& v : j.at("centers")) cen.push_back(json_vector(v));
  return SphereTiling(NormedSpace::from_json(j.at("space")),
                      j.at("params").at("eps").get<double>(), std::move(fam), std::move(cen));
}

SphereTiling build_sphere_tiling(const NormedSpace& space, double eps, std::uint64_t seed,
                                 const SphereBuildOptions& options, SphereBuildStats* stats) {
  const auto start = std::chrono::steady_clock::now();
  const SphereParams prm = sphere_params(space, eps);
  if (space.dim() < 2) throw std::invalid_argument("sphere tilings need dim >= 2");
  // The sweep's endgame near the pole depends on the sampled directions;
  // reseed a few times until every tile has a witness.
  SphereBuildStats local;
  std::optional<Builder> best;
  for (std::size_t attempt = 0; attempt < std::max<std::size_t>(1, options.attempts); ++attempt) {
    SphereBuildStats st;
    st.samples = options.samples;
    Builder cand(space, prm, seed + 0x51ed27ULL * attempt, options);
    cand.run(st);
    st.attempts = attempt + 1;
    const bool better = !best || st.unwitnessed < local.unwitnessed;
    if (better) {
      best.emplace(std::move(cand));
      local = st;
    } else {
      local.attempts = st.attempts;
    }
    if (local.unwitnessed == 0) break;
  }
  Builder& b = *best;

  // Prefer the center on the level set f_j = R reached from the witness
  // along Ker f_j; keep the witness itself when that point loses depth.
  const double rR = prm.r * prm.R;
  std::vector<Vector> centers;
  for (std::size_t j = 0; j < b.family.size(); ++j) {
    const Functional& fj = b.functionals[j];
    const Vector& y = b.witnesses[j];
    Vector h = y / space.norm(y);
    const Vector v = y - fj(y) * b.family[j];
    if (space.norm(v) > 1e-12) {
      const Vector lc = level_center(space, b.family[j], v, prm.R);
      bool ok = true;
      for (std::size_t i = 0; i < j && ok; ++i) ok = std::abs(b.functionals[i](lc)) <= rR;
      if (ok) {
        h = lc;
        ++local.level_centers;
      }
    }
    centers.push_back(h);
  }
  for (auto& x : b.family) x /= space.norm(x);
  SphereTiling out(space, eps, std::move(b.family), std::move(centers));
  local.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (stats) *stats = local;
  return out;
}

}  // namespace ntile
