#include "ntile/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ntile {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

NormedSpace::NormedSpace(std::size_t dim, NormKind kind, double p)
    : dim_(dim), kind_(kind), p_(p) {
  if (dim == 0) throw std::invalid_argument("space dimension must be positive");
  if (kind != NormKind::sup && !(p >= 1.0))
    throw std::invalid_argument("l_p exponent must satisfy p >= 1");
}

NormedSpace NormedSpace::lp(std::size_t dim, double p) {
  return NormedSpace(dim, NormKind::lp, p);
}

NormedSpace NormedSpace::sup(std::size_t dim) {
  return NormedSpace(dim, NormKind::sup, kInf);
}

NormedSpace NormedSpace::renormed_lp(std::size_t dim, double p) {
  return NormedSpace(dim, NormKind::renormed_lp, p);
}

NormedSpace subspace(const NormedSpace& space, std::size_t n) {
  return NormedSpace(n, space.kind(), space.p());
}

double lp_norm(const Vector& x, double p) {
  if (std::isinf(p)) return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
  if (p == 1.0) return x.cwiseAbs().sum();
  if (p == 2.0) return x.norm();
  // Scale by the max entry so large p does not overflow.
  const double m = x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x[i]) / m, p);
  return m * std::pow(s, 1.0 / p);
}

void check_dim(const NormedSpace& space, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != space.dim()) {
    std::ostringstream os;
    os << "dimension mismatch: vector has " << x.size() << " coordinates, space has "
       << space.dim();
    throw std::invalid_argument(os.str());
  }
}

namespace {

// Norm of the vector whose i-th coordinate is coord(i), without temporaries.
template <class Coord>
double evaluate_norm(NormKind kind, double p, Eigen::Index n, Coord coord) {
  if (kind == NormKind::sup || std::isinf(p)) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) m = std::max(m, std::abs(coord(i)));
    return m;
  }
  // Tail-first accumulation: the partial sums are the ||Q_k x||_p^p, and the
  // largest of them is the full sum, which is what the renormed norm takes.
  double s = 0.0;
  if (p == 1.0) {
    for (Eigen::Index i = n; i-- > 0;) s += std::abs(coord(i));
    return s;
  }
  if (p == 2.0) {
    for (Eigen::Index i = n; i-- > 0;) s += coord(i) * coord(i);
    return std::sqrt(s);
  }
  if (p == std::floor(p) && p <= 8.0) {
    const int ip = static_cast<int>(p);
    for (Eigen::Index i = n; i-- > 0;) {
      const double a = std::abs(coord(i));
      double t = a;
      for (int e = 1; e < ip; ++e) t *= a;
      s += t;
    }
    return ip == 3 ? std::cbrt(s) : std::pow(s, 1.0 / p);
  }
  for (Eigen::Index i = n; i-- > 0;) s += std::pow(std::abs(coord(i)), p);
  return std::pow(s, 1.0 / p);
}

}  // namespace

double NormedSpace::norm(const Vector& x) const {
  check_dim(*this, x);
  return evaluate_norm(kind_, p_, x.size(), [&](Eigen::Index i) { return x[i]; });
}

double NormedSpace::distance(const Vector& x, const Vector& y) const {
  check_dim(*this, x);
  check_dim(*this, y);
  return evaluate_norm(kind_, p_, x.size(), [&](Eigen::Index i) { return x[i] - y[i]; });
}

double NormedSpace::dual_exponent() const {
  if (kind_ == NormKind::sup) return 1.0;
  if (p_ == 1.0) return kInf;
  if (std::isinf(p_)) return 1.0;
  return p_ / (p_ - 1.0);
}

double NormedSpace::dual_norm(const Functional& f) const {
  if (f.dim() != dim_) throw std::invalid_argument("functional dimension mismatch");
  // Coordinate projections are contractions in l_p, so the renormed norm is
  // the l_p norm itself and shares its dual.
  return lp_norm(f.coefficients, dual_exponent());
}

bool NormedSpace::is_uniformly_convex() const {
  return kind_ != NormKind::sup && p_ > 1.0 && std::isfinite(p_);
}

std::string NormedSpace::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case NormKind::lp:
      os << "l" << p_ << "^" << dim_;
      break;
    case NormKind::sup:
      os << "linf^" << dim_;
      break;
    case NormKind::renormed_lp:
      os << "renormed-l" << p_ << "^" << dim_;
      break;
  }
  return os.str();
}

nlohmann::json NormedSpace::to_json() const {
  nlohmann::json j;
  j["dim"] = dim_;
  switch (kind_) {
    case NormKind::lp:
      j["norm_kind"] = "lp";
      j["p"] = p_;
      break;
    case NormKind::sup:
      j["norm_kind"] = "sup";
      break;
    case NormKind::renormed_lp:
      j["norm_kind"] = "renormed-lp";
      j["p"] = p_;
      break;
  }
  return j;
}

NormedSpace NormedSpace::from_json(const nlohmann::json& j) {
  const auto dim = j.at("dim").get<std::size_t>();
  const auto kind = j.value("norm_kind", std::string("lp"));
  if (kind == "sup") return sup(dim);
  const double p = j.at("p").get<double>();
  if (kind == "lp") return lp(dim, p);
  if (kind == "renormed-lp") return renormed_lp(dim, p);
  throw std::invalid_argument("unknown norm_kind '" + kind + "'");
}

Vector tail_projection(const NormedSpace& space, std::size_t k, const Vector& x) {
  check_dim(space, x);
  if (k > space.dim()) throw std::out_of_range("tail projection index out of range");
  Vector out = x;
  out.head(static_cast<Eigen::Index>(k)).setZero();
  return out;
}

Vector head_projection(const NormedSpace& space, std::size_t k, const Vector& x) {
  return x - tail_projection(space, k, x);
}

Functional duality_map(const NormedSpace& space, const Vector& x) {
  const double nx = space.norm(x);
  if (nx == 0.0) throw std::domain_error("duality map undefined at the origin");
  const auto n = x.size();
  Functional f{Vector::Zero(n)};
  const bool sup_like = space.kind() == NormKind::sup || std::isinf(space.p());
  if (sup_like) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(x[i]) > best) {
        best = std::abs(x[i]);
        arg = i;
      }
    }
    f.coefficients[arg] = sign(x[arg]);
    return f;
  }
  const double p = space.p();
  if (p == 1.0) {
    for (Eigen::Index i = 0; i < n; ++i) f.coefficients[i] = sign(x[i]);
    return f;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    f.coefficients[i] = sign(x[i]) * std::pow(std::abs(x[i]) / nx, p - 1.0);
  return f;
}

ModulusOfConvexity modulus_of_convexity(const NormedSpace& space, double eps) {
  if (!(eps > 0.0) || eps > 2.0)
    throw std::domain_error("modulus of convexity needs eps in (0, 2]");
  if (!space.is_uniformly_convex())
    throw std::domain_error(space.describe() + " is not uniformly convex");
  const double p = space.p();
  if (p >= 2.0) {
    // Clarkson: ||(x+y)/2||^p + ||(x-y)/2||^p <= (||x||^p + ||y||^p)/2.
    const double v = 1.0 - std::pow(1.0 - std::pow(eps / 2.0, p), 1.0 / p);
    return {v, true};
  }
  // ||(x+y)/2||^2 + (p-1)||(x-y)/2||^2 <= (||x||^2 + ||y||^2)/2 for 1 < p <= 2.
  const double v = 1.0 - std::sqrt(1.0 - (p - 1.0) * eps * eps / 4.0);
  return {v, false};
}

double sampled_modulus(const NormedSpace& space, double eps, std::size_t pairs,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  const auto n = static_cast<Eigen::Index>(space.dim());
  auto unit = [&] {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
    return Vector(v / space.norm(v));
  };
  double best = 1.0;
  for (std::size_t s = 0; s < pairs; ++s) {
    const Vector x = unit();
    const Vector u = unit();
    auto y_at = [&](double t) {
      Vector y = x + t * u;
      return Vector(y / space.norm(y));
    };
    // Walk t until the normalized point is at least eps away, then bisect.
    double lo = 0.0, hi = 1.0;
    while (space.distance(x, y_at(hi)) < eps && hi < 1e6) hi *= 2.0;
    if (space.distance(x, y_at(hi)) < eps) continue;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (space.distance(x, y_at(mid)) < eps ? lo : hi) = mid;
    }
    const Vector y = y_at(hi);
    best = std::min(best, 1.0 - space.norm(0.5 * (x + y)));
  }
  return best;
}

nlohmann::json vector_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Vector json_vector(const nlohmann::json& j) {
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace ntile
