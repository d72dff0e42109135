#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ntile/space.hpp"

namespace ntile {

struct BallRegion {
  Vector center;
  double radius;
};

struct BoxRegion {
  Vector lo;
  Vector hi;
};

using Region = std::variant<BallRegion, BoxRegion>;

bool region_contains(const NormedSpace& space, const Region& region, const Vector& x);
nlohmann::json region_to_json(const Region& region);

/// Pull-style point stream; std::nullopt marks the end.
using CandidateStream = std::function<std::optional<Vector>()>;

/// Points of center + spacing * Z^n inside `region`, emitted in growing
/// sup-norm shells around the lattice origin (lexicographic inside a shell).
CandidateStream grid_candidates(const NormedSpace& space, const Region& region,
                                double spacing);

/// Stream over a fixed list of points.
CandidateStream list_candidates(std::vector<Vector> points);

/// Bucket grid over R^n with cubic cells. Hash collisions only add false
/// candidates; callers filter by true distance.
class SpatialHash {
 public:
  explicit SpatialHash(double cell) : cell_(cell) {}

  void insert(const Vector& x, std::uint32_t id);

  /// Ids stored in every cell meeting the sup-norm box of radius `radius`
  /// around x.
  void query_box(const Vector& x, double radius, std::vector<std::uint32_t>& out) const;

  /// True iff pred(id) holds for some id in the box; x's own cell is
  /// searched first and the search stops at the first hit.
  bool any_in_box(const Vector& x, double radius,
                  const std::function<bool(std::uint32_t)>& pred) const;

 private:
  std::uint64_t key(const long long* c, std::size_t n) const;

  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets_;
};

class SeparatedNet {
 public:
  SeparatedNet(NormedSpace space, Region region, double separation, std::uint64_t seed);

  const NormedSpace& space() const { return space_; }
  const Region& region() const { return region_; }
  double separation() const { return separation_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Vector>& centers() const { return centers_; }
  std::size_t size() const { return centers_.size(); }

  /// Indices (ascending) of centers with distance to x at most `radius`.
  std::vector<std::size_t> within(const Vector& x, double radius) const;

  /// Accepts x iff it is at least `separation` from every stored center.
  bool try_add(const Vector& x);

  nlohmann::json to_json() const;

 private:
  NormedSpace space_;
  Region region_;
  double separation_;
  std::uint64_t seed_;
  std::vector<Vector> centers_;
  SpatialHash hash_;
};

/// Greedy maximal `separation`-separated family, in stream order.
SeparatedNet greedy_separated_net(const NormedSpace& space, const Region& region,
                                  double separation, const CandidateStream& candidates,
                                  std::uint64_t seed = 0);

/// Unit vectors with norming functionals and a one-sided pairing bound:
/// |functional[j](vectors[k])| <= threshold for j < k.
struct BiorthogonalFamily {
  std::vector<Vector> vectors;
  std::vector<Functional> functionals;
  double threshold = 0.0;

  std::size_t size() const { return vectors.size(); }
  nlohmann::json to_json() const;
  static BiorthogonalFamily from_json(const nlohmann::json& j);
};

/// Scans unit candidates and keeps v iff |v*_j(v)| <= delta (+ boundary tol)
/// for every kept j.
/// `max_size` caps the family (0 = unbounded).
BiorthogonalFamily greedy_biorthogonal(const NormedSpace& space, double delta,
                                       const CandidateStream& candidates,
                                       std::size_t max_size = 0);

struct NormingFailure {
  Vector probe;
  double sup_pairing;
};

struct NormingFamily {
  BiorthogonalFamily family;
  std::vector<NormingFailure> failures;  // probes with sup_j |f_j(x)| < (r - tol) ||x||
  std::size_t probes = 0;
};

/// Same greedy scan with threshold r in (0,1), followed by validation of
/// sup_j |f_j(x)| >= r ||x|| on random sphere probes.
NormingFamily greedy_norming_family(const NormedSpace& space, double r,
                                    const CandidateStream& candidates,
                                    std::size_t probes = 1000, std::uint64_t seed = 0);

/// Largest |f_j(x)| over the family (0 for an empty family).
double sup_pairing(const BiorthogonalFamily& family, const Vector& x);

}  // namespace ntile
