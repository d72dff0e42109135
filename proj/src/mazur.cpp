#include "ntile/mazur.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ntile/body.hpp"
#include "ntile/sampling.hpp"
#include "ntile/sphere.hpp"

namespace ntile {

namespace {

void check_q(double q) {
  if (!(q >= 1.0) || !std::isfinite(q)) throw std::invalid_argument("mazur map needs q >= 1");
}

Vector signed_power(const Vector& f, double e) {
  Vector out(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double a = std::abs(f[i]);
    out[i] = a == 0.0 ? 0.0 : std::copysign(std::pow(a, e), f[i]);
  }
  return out;
}

// Uniform in B(l_2^n): Gaussian direction, radius U^(1/n).
Vector ball_l2(std::size_t n, Rng& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u;
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& c : v) c = g(rng);
  const double nv = v.norm();
  if (nv == 0.0) return v;
  return v * (std::pow(u(rng), 1.0 / static_cast<double>(n)) / nv);
}

// Uniform in B(l_1^n): signed exponentials over a sum with one extra term.
Vector ball_l1(std::size_t n, Rng& rng) {
  std::exponential_distribution<double> e;
  std::bernoulli_distribution s;
  Vector v(static_cast<Eigen::Index>(n));
  double total = e(rng);
  for (auto& c : v) {
    c = e(rng);
    total += c;
  }
  for (auto& c : v) c = (s(rng) ? c : -c) / total;
  return v;
}

// A partner for f: independent, or a small perturbation pulled back into the ball.
Vector partner(const Vector& f, double p, bool close, Rng& rng) {
  const auto n = static_cast<std::size_t>(f.size());
  Vector g = p == 2.0 ? ball_l2(n, rng) : ball_l1(n, rng);
  if (!close) return g;
  std::uniform_real_distribution<double> u(-12.0, -1.0);
  g = f + std::pow(10.0, u(rng)) * g;
  const double ng = lp_norm(g, p);
  return ng > 1.0 ? Vector(g / ng) : g;
}

}  // namespace

Vector mazur(const Vector& f, double q) {
  check_q(q);
  return signed_power(f, 2.0 / q);
}

Vector mazur_inverse(const Vector& g, double q) {
  check_q(q);
  return signed_power(g, q / 2.0);
}

ModulusOfContinuity ModulusOfContinuity::identity() { return ModulusOfContinuity(2.0); }
ModulusOfContinuity ModulusOfContinuity::mazur_l1() { return ModulusOfContinuity(1.0); }

ModulusOfContinuity ModulusOfContinuity::for_exponent(double q) {
  if (q == 1.0) return mazur_l1();
  if (q == 2.0) return identity();
  throw std::invalid_argument("modulus of continuity only known for q = 1 and q = 2");
}

double ModulusOfContinuity::operator()(double d) const {
  if (d < 0.0) throw std::invalid_argument("modulus argument must be >= 0");
  if (q_ == 2.0) return d;
  return std::max(2.0 * d, 2.0 * std::sqrt(d));
}

double ModulusOfContinuity::inverse(double v) const {
  if (!(v > 0.0)) throw std::invalid_argument("modulus inverse needs a positive value");
  if (q_ == 2.0) return v;
  double t = v <= 2.0 ? 0.25 * v * v : 0.5 * v;
  while (t > 0.0 && (*this)(t) > v) t = std::nextafter(t, 0.0);
  if (!(t > 0.0)) throw std::runtime_error("no positive t with omega(t) <= value");
  return t;
}

std::string ModulusOfContinuity::describe() const {
  return q_ == 2.0 ? "omega(d) = d" : "omega(d) = max(2d, 2 sqrt(d))";
}

bool ModuliReport::passed() const {
  return forward_violations == 0 && inverse_violations == 0 && round_trip_error <= tol &&
         norm_error <= tol;
}

namespace {

nlohmann::json pair_json(const std::optional<MazurPair>& p) {
  if (!p) return nullptr;
  return {{"f", vector_json(p->f)}, {"g", vector_json(p->g)}, {"lhs", p->lhs}, {"rhs", p->rhs}};
}

}  // namespace

nlohmann::json ModuliReport::to_json() const {
  return {{"dim", dim},
          {"pairs", pairs},
          {"seed", seed},
          {"tol", tol},
          {"forward_violations", forward_violations},
          {"inverse_violations", inverse_violations},
          {"forward_max_ratio", forward_max_ratio},
          {"inverse_max_ratio", inverse_max_ratio},
          {"forward_witness", pair_json(forward_witness)},
          {"inverse_witness", pair_json(inverse_witness)},
          {"round_trip_error", round_trip_error},
          {"norm_error", norm_error},
          {"passed", passed()}};
}

ModuliReport verify_moduli(std::size_t dim, std::size_t pairs, std::uint64_t seed, double tol) {
  if (dim == 0) throw std::invalid_argument("dimension must be positive");
  ModuliReport rep;
  rep.dim = dim;
  rep.pairs = pairs;
  rep.seed = seed;
  rep.tol = tol;
  Rng rng(seed);
  for (std::size_t i = 0; i < pairs; ++i) {
    const bool close = i % 2 == 1;

    const Vector f = ball_l2(dim, rng);
    const Vector g = partner(f, 2.0, close, rng);
    const double lhs = lp_norm(mazur(f, 1.0) - mazur(g, 1.0), 1.0);
    const double d2 = (f - g).norm();
    const double rhs = 2.0 * d2;
    if (lhs > rhs + tol) {
      if (!rep.forward_witness) rep.forward_witness = MazurPair{f, g, lhs, rhs};
      ++rep.forward_violations;
    }
    if (d2 > 0.0) rep.forward_max_ratio = std::max(rep.forward_max_ratio, lhs / d2);
    const Vector back = mazur_inverse(mazur(f, 1.0), 1.0);
    rep.round_trip_error = std::max(rep.round_trip_error, (back - f).lpNorm<Eigen::Infinity>());
    rep.norm_error =
        std::max(rep.norm_error, std::abs(lp_norm(mazur(f, 1.0), 1.0) - f.squaredNorm()));

    const Vector a = ball_l1(dim, rng);
    const Vector b = partner(a, 1.0, close, rng);
    const double ilhs = (mazur_inverse(a, 1.0) - mazur_inverse(b, 1.0)).norm();
    const double s = std::sqrt(lp_norm(a - b, 1.0));
    const double irhs = 2.0 * s;
    if (ilhs > irhs + tol) {
      if (!rep.inverse_witness) rep.inverse_witness = MazurPair{a, b, ilhs, irhs};
      ++rep.inverse_violations;
    }
    if (s > 0.0) rep.inverse_max_ratio = std::max(rep.inverse_max_ratio, ilhs / s);
  }
  return rep;
}

TransportedTiling::TransportedTiling(std::shared_ptr<const Tiling> source, double q)
    : source_(std::move(source)),
      q_(q),
      omega_(ModulusOfContinuity::for_exponent(q)),
      space_(NormedSpace::lp(source_ ? source_->space().dim() : 1, q)) {
  if (!source_) throw std::invalid_argument("transport needs a source tiling");
  const auto& s = source_->space();
  if (s.kind() != NormKind::lp || s.p() != 2.0)
    throw std::invalid_argument("transport source must tile a subset of l_2^n");
}

TileInfo TransportedTiling::tile(std::size_t id) const {
  TileInfo t = source_->tile(id);
  t.center = mazur(t.center, q_);
  t.inner_radius = omega_.inverse(t.inner_radius);
  t.outer_radius = omega_(t.outer_radius);
  t.label = "M" + t.label;
  return t;
}

Membership TransportedTiling::membership(std::size_t id, const Vector& x) const {
  return source_->membership(id, mazur_inverse(x, q_));
}

std::optional<std::size_t> TransportedTiling::classify(const Vector& x) const {
  return source_->classify(mazur_inverse(x, q_));
}

std::vector<std::size_t> TransportedTiling::candidates(const Vector& x) const {
  return source_->candidates(mazur_inverse(x, q_));
}

std::string TransportedTiling::describe() const {
  std::ostringstream os;
  os << "Mazur image in " << space_.describe() << " (" << omega_.describe() << ") of "
     << source_->describe();
  return os.str();
}

nlohmann::json TransportedTiling::to_json() const {
  return {{"type", "transported"}, {"q", q_}, {"source", tiling_to_json(*source_)}};
}

std::shared_ptr<const Tiling> tiling_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "sphere") return std::make_shared<SphereTiling>(SphereTiling::from_json(j));
  if (type == "body") return std::make_shared<LayeredTiling>(LayeredTiling::from_json(j));
  if (type == "transported")
    return std::make_shared<TransportedTiling>(tiling_from_json(j.at("source")),
                                               j.at("q").get<double>());
  throw std::invalid_argument("no JSON loader for tiling type '" + type + "'");
}

nlohmann::json tiling_to_json(const Tiling& tiling) {
  if (const auto* s = dynamic_cast<const SphereTiling*>(&tiling)) return s->to_json();
  if (const auto* b = dynamic_cast<const LayeredTiling*>(&tiling)) return b->to_json();
  if (const auto* t = dynamic_cast<const TransportedTiling*>(&tiling)) return t->to_json();
  throw std::invalid_argument("tiling has no JSON form: " + tiling.describe());
}

}  // namespace ntile
