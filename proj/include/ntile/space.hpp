#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

namespace ntile {

using Vector = Eigen::VectorXd;

/// Boundary tolerance shared by every membership predicate.
inline constexpr double kBoundaryTol = 1e-9;

enum class NormKind { lp, sup, renormed_lp };

/// A linear functional on R^dim, paired with vectors by the coordinate dot
/// product.
struct Functional {
  Vector coefficients;

  double operator()(const Vector& x) const { return coefficients.dot(x); }
  std::size_t dim() const { return static_cast<std::size_t>(coefficients.size()); }
};

/// Finite-dimensional normed space over the standard basis e_0..e_{dim-1}.
///
/// The renormed variant evaluates |x| = max_k ||Q_k x||_p, which makes every
/// tail projection a contraction.
class NormedSpace {
 public:
  static NormedSpace lp(std::size_t dim, double p);
  static NormedSpace sup(std::size_t dim);
  static NormedSpace renormed_lp(std::size_t dim, double p);

  std::size_t dim() const { return dim_; }
  NormKind kind() const { return kind_; }
  double p() const { return p_; }

  double norm(const Vector& x) const;
  double distance(const Vector& x, const Vector& y) const;
  double dual_norm(const Functional& f) const;

  /// Hölder conjugate of p (infinity for p = 1, 1 for sup).
  double dual_exponent() const;

  bool is_uniformly_convex() const;
  bool is_strictly_convex() const { return is_uniformly_convex(); }

  std::string describe() const;
  nlohmann::json to_json() const;
  static NormedSpace from_json(const nlohmann::json& j);

  bool operator==(const NormedSpace&) const = default;

 private:
  friend NormedSpace subspace(const NormedSpace& space, std::size_t n);
  NormedSpace(std::size_t dim, NormKind kind, double p);

  std::size_t dim_;
  NormKind kind_;
  double p_;
};

/// The same norm kind on the first n coordinates (n may differ from dim).
NormedSpace subspace(const NormedSpace& space, std::size_t n);

/// Plain l_p norm of a coordinate vector (p = infinity allowed).
double lp_norm(const Vector& x, double p);

/// Q_k: zeroes coordinates 0..k-1 and keeps k..dim-1. Q_0 = I, Q_dim = 0.
Vector tail_projection(const NormedSpace& space, std::size_t k, const Vector& x);

/// P_k = I - Q_k.
Vector head_projection(const NormedSpace& space, std::size_t k, const Vector& x);

/// Norming functional: dual norm 1 and f(x) = norm(x).
///
/// Non-smooth points take the minimal-support subgradient: for l_1 the sign
/// vector (zero off the support), for sup the first coordinate attaining the
/// maximum.
Functional duality_map(const NormedSpace& space, const Vector& x);

struct ModulusOfConvexity {
  /// Certified lower bound on delta(eps); equal to delta(eps) when exact.
  double value;
  bool exact;
};

/// Modulus of convexity delta(eps) for eps in (0, 2].
///
/// l_2 and l_p with p >= 2 are exact (closed form, Clarkson). For 1 < p < 2
/// the value is the lower bound 1 - sqrt(1 - (p-1) eps^2 / 4) that follows
/// from 2-uniform convexity of l_p.
ModulusOfConvexity modulus_of_convexity(const NormedSpace& space, double eps);

/// Sampled estimate of delta(eps): the minimum of 1 - ||(x+y)/2|| over random
/// admissible pairs. Being a minimum over feasible points it is an upper
/// bound on the true infimum.
double sampled_modulus(const NormedSpace& space, double eps, std::size_t pairs,
                       std::uint64_t seed);

void check_dim(const NormedSpace& space, const Vector& x);

nlohmann::json vector_json(const Vector& v);
Vector json_vector(const nlohmann::json& j);

}  // namespace ntile
