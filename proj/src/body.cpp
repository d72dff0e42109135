#include "ntile/body.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ntile/sampling.hpp"

namespace ntile {

namespace {

nlohmann::json functional_json(const Functional& f) { return vector_json(f.coefficients); }

Functional json_functional(const nlohmann::json& j) { return {json_vector(j)}; }

}  // namespace

ConvexBody::ConvexBody(NormedSpace space, Vector ball_center, double ball_radius,
                       std::vector<Halfspace> halfspaces)
    : space_(std::move(space)), center_(std::move(ball_center)), radius_(ball_radius) {
  check_dim(space_, center_);
  if (!(radius_ > 0.0)) throw std::invalid_argument("ball radius must be positive");
  for (const auto& h : halfspaces) cut(h.f, h.level);
}

ConvexBody ConvexBody::unit_ball(NormedSpace space) {
  const auto n = static_cast<Eigen::Index>(space.dim());
  return ConvexBody(std::move(space), Vector::Zero(n), 1.0);
}

void ConvexBody::cut(const Functional& f, double level) {
  check_dim(space_, f.coefficients);
  const double s = space_.dual_norm(f);
  if (!(s > 0.0)) throw std::invalid_argument("zero functional");
  cuts_.push_back({Functional{f.coefficients / s}, level / s});
}

ConvexBody ConvexBody::normalized(const Vector& shift, double scale) const {
  check_dim(space_, shift);
  if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
  ConvexBody out(space_, (center_ - shift) / scale, radius_ / scale);
  for (const auto& h : cuts_) out.cut(h.f, (h.level - h.f(shift)) / scale);
  return out;
}

ConvexBody ConvexBody::scaled(double s) const {
  if (!(s > 0.0)) throw std::invalid_argument("scale must be positive");
  ConvexBody out(space_, s * center_, s * radius_);
  for (const auto& h : cuts_) out.cuts_.push_back({h.f, s * h.level});
  return out;
}

Membership ConvexBody::membership(const Vector& x, double tol) const {
  check_dim(space_, x);
  const double d = space_.distance(x, center_);
  if (d > radius_ + tol) return Membership::outside;
  bool strict = d < radius_ - tol;
  for (const auto& h : cuts_) {
    const double v = h.f(x) - h.level;
    if (v > tol) return Membership::outside;
    if (v >= -tol) strict = false;
  }
  return strict ? Membership::strict : Membership::inside;
}

double ConvexBody::eta() const {
  double e = radius_ - space_.norm(center_);
  for (const auto& h : cuts_) e = std::min(e, h.level);
  return std::max(0.0, e);
}

double ConvexBody::outer() const { return space_.norm(center_) + radius_; }

double ConvexBody::radial(const Vector& u) const {
  check_dim(space_, u);
  const double nu = space_.norm(u);
  if (nu == 0.0) throw std::invalid_argument("radial: zero direction");
  double t;
  if (center_.isZero()) {
    t = radius_ / nu;
  } else {
    // ||t u - c|| - r is convex in t, nonpositive at 0 when 0 is in the ball.
    if (space_.norm(center_) > radius_) throw std::invalid_argument("radial: 0 outside the body");
    double lo = 0.0, hi = outer() / nu;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (space_.distance(mid * u, center_) <= radius_ ? lo : hi) = mid;
    }
    t = lo;
  }
  for (const auto& h : cuts_) {
    if (h.level < 0.0) throw std::invalid_argument("radial: 0 outside the body");
    const double fu = h.f(u);
    if (fu > 0.0) t = std::min(t, h.level / fu);
  }
  return t;
}

nlohmann::json ConvexBody::to_json() const {
  nlohmann::json cuts = nlohmann::json::array();
  for (const auto& h : cuts_) cuts.push_back({{"f", functional_json(h.f)}, {"level", h.level}});
  return {{"space", space_.to_json()},
          {"ball_center", vector_json(center_)},
          {"ball_radius", radius_},
          {"halfspaces", cuts}};
}

ConvexBody ConvexBody::from_json(const nlohmann::json& j) {
  ConvexBody out(NormedSpace::from_json(j.at("space")), json_vector(j.at("ball_center")),
                 j.at("ball_radius").get<double>());
  // Stored cuts are already normalized.
  for (const auto& h : j.at("halfspaces"))
    out.cuts_.push_back({json_functional(h.at("f")), h.at("level").get<double>()});
  return out;
}

nlohmann::json SliceSpec::to_json() const {
  return {{"f", functional_json(f)}, {"level", level}, {"y0", vector_json(y0)},
          {"r", r_slice},            {"layer", layer}, {"scale", scale}};
}

SliceSpec SliceSpec::from_json(const nlohmann::json& j) {
  SliceSpec s;
  s.f = json_functional(j.at("f"));
  s.level = j.at("level").get<double>();
  s.y0 = json_vector(j.at("y0"));
  s.r_slice = j.at("r").get<double>();
  s.layer = j.at("layer").get<int>();
  s.scale = j.at("scale").get<double>();
  return s;
}

SliceSpec build_slice(const ConvexBody& body, const Vector& x, double delta, double eta) {
  const auto& sp = body.space();
  check_dim(sp, x);
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  const double eta_d = std::min(eta, 1.0 - delta);
  if (!(eta_d > 0.0)) throw std::invalid_argument("degenerate eta");
  const double g = std::sqrt(1.0 - delta);
  const double nx = sp.norm(x);
  if (nx < g - kBoundaryTol) throw std::invalid_argument("build_slice: ||x|| < sqrt(1 - delta)");
  if (!is_inside(body.membership(x))) throw std::invalid_argument("build_slice: x not in body");
  const Vector x0 = (g / nx) * x;
  SliceSpec s;
  s.y0 = ((eta_d + (1.0 - delta)) / (eta_d + g)) * x0;
  s.r_slice = eta_d * (g - (1.0 - delta)) / (eta_d + g);
  s.f = duality_map(sp, s.y0);
  s.level = 1.0 - delta;
  return s;
}

PeelResult peel_layer(const ConvexBody& body, double delta, double eta,
                      const std::vector<Vector>& pool, const PeelOptions& options) {
  const auto& sp = body.space();
  const double g = std::sqrt(1.0 - delta);
  PeelResult out{{}, body, false, std::nullopt, {}};
  ConvexBody& d = out.core;
  auto slice_at = [&](const Vector& x) {
    SliceSpec s = build_slice(d, x, delta, eta);
    d.cut(s.f, s.level);
    out.slices.push_back(std::move(s));
  };

  std::vector<std::size_t> order;
  std::vector<double> norms(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    norms[i] = sp.norm(pool[i]);
    if (norms[i] > g) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });
  for (auto i : order)
    if (d.membership(pool[i], 0.0) != Membership::outside) slice_at(pool[i]);

  // Exit points of rays through the current body; a cut lowers them to
  // level / f(u) where f(u) > 0.
  auto exits = [&](std::uint64_t seed) {
    auto dirs = random_sphere(sp, options.directions, seed);
    std::vector<double> t(dirs.size());
    for (std::size_t i = 0; i < dirs.size(); ++i) t[i] = d.radial(dirs[i]);
    return std::make_pair(std::move(dirs), std::move(t));
  };
  const std::uint64_t base = options.seed * 0x9e3779b97f4a7c15ULL;
  // Local ascent of the exit radius from a ray, so cuts land near the
  // vertices the rays straddle.
  Rng rng(base ^ 0x5bd1e995ULL);
  std::normal_distribution<double> gauss;
  auto climb = [&](Vector u, double t) {
    double step = 0.05;
    for (int it = 0; it < 80 && step > 1e-6; ++it) {
      Vector v = u;
      for (auto& c : v) c += step * gauss(rng);
      v /= sp.norm(v);
      const double tv = d.radial(v);
      if (tv > t) {
        u = v;
        t = tv;
      } else {
        step *= 0.8;
      }
    }
    return Vector(t * u);
  };
  // Every round draws fresh rays; the first round whose exit points all stay
  // in B(0, sqrt(1 - delta)) certifies the core. Without refinement a single
  // round only checks.
  const std::size_t rounds = options.refine ? std::max<std::size_t>(1, options.rounds) : 1;
  for (std::size_t round = 0; round < rounds && !out.certified; ++round) {
    auto [dirs, t] = exits(base + round + 1);
    out.certified = true;
    out.offending.reset();
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      if (t[i] <= g + kBoundaryTol) continue;
      if (!out.offending || t[i] > sp.norm(*out.offending)) out.offending = t[i] * dirs[i];
      out.certified = false;
    }
    if (out.certified || !options.refine) break;
    while (true) {
      const auto k = static_cast<std::size_t>(std::max_element(t.begin(), t.end()) - t.begin());
      if (t[k] <= g) break;
      slice_at(climb(dirs[k], t[k]));
      const auto& h = d.halfspaces().back();
      for (std::size_t i = 0; i < dirs.size(); ++i) {
        const double fu = h.f(dirs[i]);
        if (fu > 0.0) t[i] = std::min(t[i], h.level / fu);
      }
    }
  }
  if (!out.certified) {
    std::ostringstream os;
    os << "pool too sparse: the core reaches norm " << sp.norm(*out.offending)
       << " > sqrt(1 - delta) = " << g << " along direction " << out.offending->transpose();
    out.diagnostic = os.str();
  }
  if (d.eta() < std::min(eta, 1.0 - delta) - kBoundaryTol) {
    out.certified = false;
    out.diagnostic += (out.diagnostic.empty() ? "" : "; ") + std::string("core lost B(0, eta)");
  }
  return out;
}

int layer_count(double gamma, double eps) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  int n = std::max(0, static_cast<int>(std::ceil(std::log(eps) / std::log(gamma))));
  while (std::pow(gamma, n) > eps) ++n;
  while (n > 0 && std::pow(gamma, n - 1) <= eps) --n;
  return n;
}

LayeredTiling::LayeredTiling(ConvexBody body, double eps, double delta, double eta,
                             std::vector<SliceSpec> slices, std::vector<double> layer_radii)
    : body_(std::move(body)),
      eps_(eps),
      delta_(delta),
      gamma_(std::sqrt(1.0 - delta)),
      eta_(eta),
      layers_(layer_count(gamma_, eps)),
      slices_(std::move(slices)),
      layer_radii_(std::move(layer_radii)) {
  if (static_cast<int>(layer_radii_.size()) != layers_)
    throw std::invalid_argument("one slice radius per layer");
  rho_ = std::min(eta_, std::pow(gamma_, layers_ + 1));
  for (int k = 1; k <= layers_; ++k)
    rho_ = std::min(rho_, layer_radii_[static_cast<std::size_t>(k - 1)] * std::pow(gamma_, k - 1));
  for (const auto& s : slices_) check_dim(body_.space(), s.y0);
}

ConvexBody LayeredTiling::core() const {
  ConvexBody c = body_;
  for (const auto& s : slices_) c.cut(s.f, s.level);
  return c;
}

TileInfo LayeredTiling::tile(std::size_t id) const {
  if (id > slices_.size()) throw std::out_of_range("body tile id");
  if (id == slices_.size())
    return {Vector::Zero(static_cast<Eigen::Index>(space().dim())), rho_, eps_, "core"};
  // Index within the layer for the label.
  std::size_t first = id;
  while (first > 0 && slices_[first - 1].layer == slices_[id].layer) --first;
  return {slices_[id].y0, rho_, eps_,
          "T(" + std::to_string(slices_[id].layer) + "," + std::to_string(id - first + 1) + ")"};
}

Membership LayeredTiling::membership(std::size_t id, const Vector& x) const {
  if (id > slices_.size()) throw std::out_of_range("body tile id");
  const Membership m0 = body_.membership(x);
  if (m0 == Membership::outside) return Membership::outside;
  bool strict = m0 == Membership::strict;
  for (std::size_t b = 0; b < id; ++b) {
    const double v = slices_[b].f(x) - slices_[b].level;
    if (v > kBoundaryTol) return Membership::outside;
    if (v >= -kBoundaryTol) strict = false;
  }
  if (id < slices_.size()) {
    const double v = slices_[id].f(x) - slices_[id].level;
    if (v < -kBoundaryTol) return Membership::outside;
    if (v <= kBoundaryTol) strict = false;
  }
  return strict ? Membership::strict : Membership::inside;
}

std::optional<std::size_t> LayeredTiling::classify(const Vector& x) const {
  if (body_.membership(x) == Membership::outside) return std::nullopt;
  for (std::size_t a = 0; a < slices_.size(); ++a)
    if (slices_[a].f(x) >= slices_[a].level - kBoundaryTol) return a;
  return slices_.size();
}

std::optional<std::size_t> LayeredTiling::brute_force_classify(const Vector& x) const {
  for (std::size_t id = 0; id < size(); ++id)
    if (is_inside(membership(id, x))) return id;
  return std::nullopt;
}

std::vector<std::size_t> LayeredTiling::candidates(const Vector& x) const {
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < slices_.size(); ++a)
    if (slices_[a].f(x) >= slices_[a].level - kBoundaryTol) out.push_back(a);
  out.push_back(slices_.size());
  return out;
}

std::string LayeredTiling::describe() const {
  std::ostringstream os;
  os << "layered body tiling of a body in " << space().describe() << ", eps = " << eps_ << ", "
     << layers_ << " layers, " << slices_.size() << " slices + core";
  return os.str();
}

nlohmann::json LayeredTiling::to_json() const {
  nlohmann::json sl = nlohmann::json::array();
  for (const auto& s : slices_) sl.push_back(s.to_json());
  return {{"type", "body"},   {"body", body_.to_json()},      {"eps", eps_},
          {"delta", delta_},  {"eta", eta_},                  {"gamma", gamma_},
          {"layers", layers_}, {"rho", rho_},                 {"layer_radii", layer_radii_},
          {"slices", sl}};
}

LayeredTiling LayeredTiling::from_json(const nlohmann::json& j) {
  std::vector<SliceSpec> sl;
  for (const auto& s : j.at("slices")) sl.push_back(SliceSpec::from_json(s));
  return LayeredTiling(ConvexBody::from_json(j.at("body")), j.at("eps").get<double>(),
                       j.at("delta").get<double>(), j.at("eta").get<double>(), std::move(sl),
                       j.at("layer_radii").get<std::vector<double>>());
}

LayeredTiling build_body_tiling(const ConvexBody& body, double eps, std::uint64_t seed,
                                const BodyOptions& options) {
  const auto& sp = body.space();
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (!sp.is_uniformly_convex())
    throw std::invalid_argument("body tilings need a uniformly convex space");
  if (body.outer() > 1.0 + 1e-12)
    throw std::invalid_argument("body must lie in B(0, 1); normalize it first");
  const double eta = options.eta.value_or(body.eta());
  if (!(eta > 0.0) || eta > body.eta() + 1e-12)
    throw std::invalid_argument("eta must be positive and at most the body's certified eta");

  const double delta = modulus_of_convexity(sp, eps).value;
  const double g = std::sqrt(1.0 - delta);
  const int n = layer_count(g, eps);
  ConvexBody current = body;
  std::vector<SliceSpec> slices;
  std::vector<double> radii;
  for (int k = 1; k <= n; ++k) {
    const double s = std::pow(g, k - 1);
    const double eta_k = std::min(eta / s, g);
    const double eta_d = std::min(eta_k, 1.0 - delta);
    radii.push_back(eta_d * (g - (1.0 - delta)) / (eta_d + g));
    PeelOptions po = options.peel;
    po.seed = seed * 1000003ULL + static_cast<std::uint64_t>(k);
    const auto pool = quasirandom_ball(sp, 1.0, options.pool, po.seed);
    const PeelResult res = peel_layer(current.scaled(1.0 / s), delta, eta_k, pool, po);
    if (!res.certified)
      throw std::runtime_error("layer " + std::to_string(k) + ": " + res.diagnostic);
    for (SliceSpec sl : res.slices) {
      sl.level *= s;
      sl.y0 *= s;
      sl.r_slice *= s;
      sl.layer = k;
      sl.scale = s;
      current.cut(sl.f, sl.level);
      slices.push_back(std::move(sl));
    }
  }
  return LayeredTiling(body, eps, delta, eta, std::move(slices), std::move(radii));
}

}  // namespace ntile
