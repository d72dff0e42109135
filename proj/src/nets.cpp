#include "ntile/nets.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "ntile/sampling.hpp"

namespace ntile {

bool region_contains(const NormedSpace& space, const Region& region, const Vector& x) {
  if (const auto* ball = std::get_if<BallRegion>(&region))
    return space.distance(x, ball->center) <= ball->radius;
  const auto& box = std::get<BoxRegion>(region);
  return (x.array() >= box.lo.array()).all() && (x.array() <= box.hi.array()).all();
}

nlohmann::json region_to_json(const Region& region) {
  if (const auto* ball = std::get_if<BallRegion>(&region))
    return {{"kind", "ball"}, {"center", vector_json(ball->center)}, {"radius", ball->radius}};
  const auto& box = std::get<BoxRegion>(region);
  return {{"kind", "box"}, {"lo", vector_json(box.lo)}, {"hi", vector_json(box.hi)}};
}

namespace {

struct ShellState {
  Vector origin;
  double spacing;
  long long max_shell;
  long long shell = 0;
  std::vector<long long> idx;
  bool started = false;

  bool on_shell() const {
    return std::any_of(idx.begin(), idx.end(),
                       [&](long long v) { return std::llabs(v) == shell; });
  }

  // Advances idx to the next lattice point of the current shell in
  // lexicographic order (last coordinate fastest). Returns false when the
  // shell is exhausted.
  bool advance() {
    const std::size_t n = idx.size();
    for (;;) {
      const bool prefix_on_shell =
          std::any_of(idx.begin(), idx.end() - 1, [&](long long v) { return std::llabs(v) == shell; });
      if (!prefix_on_shell && idx[n - 1] == -shell) {
        idx[n - 1] = shell;
        return true;
      }
      std::size_t d = n - 1;
      for (;;) {
        if (idx[d] < shell) {
          ++idx[d];
          for (std::size_t e = d + 1; e < n; ++e) idx[e] = -shell;
          break;
        }
        if (d == 0) return false;
        --d;
      }
      if (on_shell()) return true;
    }
  }

  std::optional<Vector> next() {
    if (!started) {
      started = true;
      std::fill(idx.begin(), idx.end(), 0);
      return point();
    }
    if (shell == 0 || !advance()) {
      ++shell;
      if (shell > max_shell) return std::nullopt;
      std::fill(idx.begin(), idx.end(), -shell);
    }
    return point();
  }

  Vector point() const {
    Vector v = origin;
    for (std::size_t i = 0; i < idx.size(); ++i)
      v[static_cast<Eigen::Index>(i)] += spacing * static_cast<double>(idx[i]);
    return v;
  }
};

}  // namespace

CandidateStream grid_candidates(const NormedSpace& space, const Region& region,
                                double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  auto state = std::make_shared<ShellState>();
  double half_extent = 0.0;
  if (const auto* ball = std::get_if<BallRegion>(&region)) {
    state->origin = ball->center;
    // Sup-norm extent of a norm ball is at most its radius for l_p, p >= 1.
    half_extent = ball->radius;
  } else {
    const auto& box = std::get<BoxRegion>(region);
    state->origin = 0.5 * (box.lo + box.hi);
    half_extent = 0.5 * (box.hi - box.lo).maxCoeff();
  }
  state->spacing = spacing;
  state->max_shell = static_cast<long long>(std::floor(half_extent / spacing + 1e-9));
  state->idx.assign(space.dim(), 0);
  return [state, space, region]() -> std::optional<Vector> {
    for (;;) {
      auto v = state->next();
      if (!v) return std::nullopt;
      if (region_contains(space, region, *v)) return v;
    }
  };
}

CandidateStream list_candidates(std::vector<Vector> points) {
  auto data = std::make_shared<std::vector<Vector>>(std::move(points));
  auto pos = std::make_shared<std::size_t>(0);
  return [data, pos]() -> std::optional<Vector> {
    if (*pos >= data->size()) return std::nullopt;
    return (*data)[(*pos)++];
  };
}

std::uint64_t SpatialHash::key(const long long* c, std::size_t n) const {
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<std::uint64_t>(c[i]) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 1099511628211ull;
  }
  return h;
}

namespace {
constexpr std::size_t kInlineDims = 16;
}

void SpatialHash::insert(const Vector& x, std::uint32_t id) {
  const auto n = static_cast<std::size_t>(x.size());
  std::vector<long long> heap(n > kInlineDims ? n : 0);
  long long inline_buf[kInlineDims];
  long long* c = n > kInlineDims ? heap.data() : inline_buf;
  for (std::size_t i = 0; i < n; ++i)
    c[i] = static_cast<long long>(std::floor(x[static_cast<Eigen::Index>(i)] / cell_));
  buckets_[key(c, n)].push_back(id);
}

void SpatialHash::query_box(const Vector& x, double radius,
                            std::vector<std::uint32_t>& out) const {
  const auto n = static_cast<std::size_t>(x.size());
  std::vector<long long> heap(n > kInlineDims ? 3 * n : 0);
  long long inline_buf[3 * kInlineDims];
  long long* lo = n > kInlineDims ? heap.data() : inline_buf;
  long long* hi = lo + n;
  long long* c = hi + n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = x[static_cast<Eigen::Index>(i)];
    lo[i] = static_cast<long long>(std::floor((xi - radius) / cell_));
    hi[i] = static_cast<long long>(std::floor((xi + radius) / cell_));
    c[i] = lo[i];
  }
  for (;;) {
    if (auto it = buckets_.find(key(c, n)); it != buckets_.end())
      out.insert(out.end(), it->second.begin(), it->second.end());
    std::size_t d = 0;
    while (d < n && c[d] == hi[d]) {
      c[d] = lo[d];
      ++d;
    }
    if (d == n) break;
    ++c[d];
  }
}

bool SpatialHash::any_in_box(const Vector& x, double radius,
                             const std::function<bool(std::uint32_t)>& pred) const {
  const auto n = static_cast<std::size_t>(x.size());
  std::vector<long long> heap(n > kInlineDims ? 4 * n : 0);
  long long inline_buf[4 * kInlineDims];
  long long* lo = n > kInlineDims ? heap.data() : inline_buf;
  long long* hi = lo + n;
  long long* c = hi + n;
  long long* own = c + n;
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = x[static_cast<Eigen::Index>(i)];
    lo[i] = static_cast<long long>(std::floor((xi - radius) / cell_));
    hi[i] = static_cast<long long>(std::floor((xi + radius) / cell_));
    own[i] = static_cast<long long>(std::floor(xi / cell_));
    c[i] = lo[i];
  }
  auto scan = [&](const long long* cell) {
    if (auto it = buckets_.find(key(cell, n)); it != buckets_.end())
      for (auto id : it->second)
        if (pred(id)) return true;
    return false;
  };
  if (scan(own)) return true;
  for (;;) {
    if (!std::equal(c, c + n, own) && scan(c)) return true;
    std::size_t d = 0;
    while (d < n && c[d] == hi[d]) {
      c[d] = lo[d];
      ++d;
    }
    if (d == n) return false;
    ++c[d];
  }
}

SeparatedNet::SeparatedNet(NormedSpace space, Region region, double separation,
                           std::uint64_t seed)
    : space_(std::move(space)),
      region_(std::move(region)),
      separation_(separation),
      seed_(seed),
      hash_(separation) {
  if (!(separation > 0.0)) throw std::invalid_argument("separation must be positive");
}

std::vector<std::size_t> SeparatedNet::within(const Vector& x, double radius) const {
  std::vector<std::uint32_t> ids;
  hash_.query_box(x, radius, ids);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<std::size_t> out;
  for (auto id : ids)
    if (space_.distance(x, centers_[id]) <= radius) out.push_back(id);
  return out;
}

bool SeparatedNet::try_add(const Vector& x) {
  check_dim(space_, x);
  if (hash_.any_in_box(x, separation_, [&](std::uint32_t id) {
        return space_.distance(x, centers_[id]) < separation_;
      }))
    return false;
  hash_.insert(x, static_cast<std::uint32_t>(centers_.size()));
  centers_.push_back(x);
  return true;
}

nlohmann::json SeparatedNet::to_json() const {
  nlohmann::json centers = nlohmann::json::array();
  for (const auto& c : centers_) centers.push_back(vector_json(c));
  return {{"space", space_.to_json()},
          {"region", region_to_json(region_)},
          {"separation", separation_},
          {"seed", seed_},
          {"centers", centers}};
}

SeparatedNet greedy_separated_net(const NormedSpace& space, const Region& region,
                                  double separation, const CandidateStream& candidates,
                                  std::uint64_t seed) {
  SeparatedNet net(space, region, separation, seed);
  bool any = false;
  while (auto c = candidates()) {
    any = true;
    net.try_add(*c);
  }
  if (!any) throw std::invalid_argument("empty candidate stream");
  return net;
}

double sup_pairing(const BiorthogonalFamily& family, const Vector& x) {
  double best = 0.0;
  for (const auto& f : family.functionals) best = std::max(best, std::abs(f(x)));
  return best;
}

nlohmann::json BiorthogonalFamily::to_json() const {
  nlohmann::json vs = nlohmann::json::array(), fs = nlohmann::json::array();
  for (const auto& v : vectors) vs.push_back(vector_json(v));
  for (const auto& f : functionals) fs.push_back(vector_json(f.coefficients));
  return {{"threshold", threshold}, {"vectors", vs}, {"functionals", fs}};
}

BiorthogonalFamily BiorthogonalFamily::from_json(const nlohmann::json& j) {
  BiorthogonalFamily fam;
  fam.threshold = j.at("threshold").get<double>();
  for (const auto& v : j.at("vectors")) fam.vectors.push_back(json_vector(v));
  for (const auto& f : j.at("functionals")) fam.functionals.push_back({json_vector(f)});
  return fam;
}

BiorthogonalFamily greedy_biorthogonal(const NormedSpace& space, double delta,
                                       const CandidateStream& candidates,
                                       std::size_t max_size) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
  BiorthogonalFamily fam;
  fam.threshold = delta;
  while (auto c = candidates()) {
    if (max_size != 0 && fam.size() >= max_size) break;
    const double nc = space.norm(*c);
    if (nc == 0.0) continue;
    Vector v = *c / nc;
    bool ok = true;
    for (const auto& f : fam.functionals) {
      if (std::abs(f(v)) > delta + kBoundaryTol) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    fam.functionals.push_back(duality_map(space, v));
    fam.vectors.push_back(std::move(v));
  }
  return fam;
}

NormingFamily greedy_norming_family(const NormedSpace& space, double r,
                                    const CandidateStream& candidates, std::size_t probes,
                                    std::uint64_t seed) {
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("norming threshold must lie in (0,1)");
  NormingFamily out;
  out.family = greedy_biorthogonal(space, r, candidates);
  out.probes = probes;
  Rng rng(seed);
  for (std::size_t i = 0; i < probes; ++i) {
    Vector x = random_unit(space, rng);
    const double s = sup_pairing(out.family, x);
    if (s < r - kBoundaryTol) out.failures.push_back({std::move(x), s});
  }
  return out;
}

}  // namespace ntile
