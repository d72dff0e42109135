#include "ntile/strip.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ntile {

Rational parse_rational(const std::string& text) {
  auto fail = [&] { throw std::invalid_argument("not a rational number: '" + text + "'"); };
  auto parse_int = [&](const std::string& s) -> long long {
    if (s.empty()) fail();
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      fail();
    }
    if (pos != s.size()) fail();
    return v;
  };
  if (const auto slash = text.find('/'); slash != std::string::npos) {
    const auto den = parse_int(text.substr(slash + 1));
    if (den == 0) fail();
    return Rational(parse_int(text.substr(0, slash)), den);
  }
  if (const auto dot = text.find('.'); dot != std::string::npos) {
    const std::string frac = text.substr(dot + 1);
    if (frac.empty() || frac.size() > 15 || frac.find_first_not_of("0123456789") != std::string::npos)
      fail();
    std::string whole = text.substr(0, dot);
    const bool negative = !whole.empty() && whole[0] == '-';
    if (whole.empty() || whole == "-" || whole == "+") whole += "0";
    long long den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const Rational f(parse_int(frac), den);
    const Rational w(parse_int(whole));
    return negative ? w - f : w + f;
  }
  return Rational(parse_int(text));
}

std::string to_string(const Rational& q) {
  if (q.denominator() == 1) return std::to_string(q.numerator());
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

double to_double(const Rational& q) {
  return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator());
}

nlohmann::json StripParams::to_json() const {
  return {{"tag", tag},
          {"a", to_string(a)},
          {"b", to_string(b)},
          {"r", to_string(r)},
          {"delta", to_string(delta)},
          {"slope", to_string(slope)},
          {"scale", to_string(scale)},
          {"halfwidth", to_string(halfwidth)},
          {"period", to_string(period)}};
}

StripParams StripParams::from_json(const nlohmann::json& j) {
  auto q = [&](const char* key) {
    const auto& v = j.at(key);
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long long>());
    throw std::invalid_argument(std::string("strip parameter '") + key +
                                "' must be an integer or a \"p/q\" string");
  };
  StripParams p;
  p.tag = j.value("tag", std::string("custom"));
  p.a = q("a");
  p.b = q("b");
  p.r = q("r");
  p.delta = q("delta");
  p.slope = q("slope");
  p.scale = q("scale");
  p.halfwidth = q("halfwidth");
  p.period = j.contains("period") ? q("period") : 2 * p.halfwidth;
  return p;
}

StripParams strip_preset(const std::string& name) {
  if (name == "fig1")
    return {"fig1", Rational(3, 2), Rational(5, 6), Rational(1, 6), Rational(1, 5),
            Rational(1), Rational(2), Rational(2), Rational(4)};
  if (name == "fig2")
    return {"fig2", Rational(21, 4), Rational(3, 4), Rational(1, 4), Rational(1, 4),
            Rational(8), Rational(9), Rational(11, 2), Rational(11)};
  throw std::invalid_argument("unknown strip preset '" + name + "' (expected fig1 or fig2)");
}

namespace {

// Signed slacks of the defining inequalities (tile contains the point iff
// all are >= 0). The tile's reflection is undone first.
template <class T>
std::array<T, 4> slacks(PlaneTile id, T x, T y, T slope, T scale, T hw) {
  if (id == PlaneTile::U0) {
    const T ax = x < T(0) ? -x : x;
    const T ay = y < T(0) ? -y : y;
    return {scale - ax - slope * ay, hw - ax, hw - ax, hw - ax};
  }
  if (id == PlaneTile::U2 || id == PlaneTile::U4) y = -y;
  if (id == PlaneTile::U3 || id == PlaneTile::U4) x = -x;
  return {x, hw - x, y, x + slope * y - scale};
}

}  // namespace

Membership plane_membership(const StripParams& params, PlaneTile id, double x, double y,
                            double tol) {
  const double hw = to_double(params.halfwidth);
  if (std::abs(x) > hw + tol) throw std::domain_error("point lies outside the strip");
  const auto s = slacks<double>(id, x, y, to_double(params.slope),
                                to_double(params.scale), hw);
  bool strict = true;
  for (double v : s) {
    if (v < -tol) return Membership::outside;
    if (v <= tol) strict = false;
  }
  return strict ? Membership::strict : Membership::inside;
}

bool plane_contains(const StripParams& params, PlaneTile id, const Rational& x,
                    const Rational& y) {
  const auto s = slacks<Rational>(id, x, y, params.slope, params.scale,
                                  params.halfwidth);
  for (const auto& v : s)
    if (v < Rational(0)) return false;
  return true;
}

FactConditions check_fact_conditions(const StripParams& p) {
  FactConditions out;
  const Rational one(1), zero(0);
  auto in_strip = [&](const Rational& x) { return x <= p.halfwidth && -x <= p.halfwidth; };

  // (a): D's corners in U0, and U0's vertices in the bounding box.
  out.a = true;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      out.a = out.a && in_strip(Rational(sx)) &&
              plane_contains(p, PlaneTile::U0, Rational(sx), Rational(sy));
  const Rational ye = p.y_extent();
  std::vector<std::pair<Rational, Rational>> vertices = {{zero, ye}, {zero, -ye}};
  if (p.halfwidth < p.scale) {
    const Rational yv = (p.scale - p.halfwidth) / p.slope;
    for (int sx : {-1, 1})
      for (int sy : {-1, 1}) vertices.emplace_back(sx * p.halfwidth, sy * yv);
  } else {
    vertices.emplace_back(p.scale, zero);
    vertices.emplace_back(-p.scale, zero);
  }
  for (const auto& [x, y] : vertices) {
    const Rational ay = y < zero ? -y : y;
    out.a = out.a && plane_contains(p, PlaneTile::U0, x, y) && in_strip(x) && ay <= ye;
  }

  // (b): corners of (a,b) + rD in U1 and inside |y| <= 1.
  out.b = true;
  for (int sx : {-1, 1})
    for (int sy : {-1, 1}) {
      const Rational x = p.a + sx * p.r, y = p.b + sy * p.r;
      const Rational ay = y < zero ? -y : y;
      out.b = out.b && in_strip(x) && plane_contains(p, PlaneTile::U1, x, y) && ay <= one;
    }

  // (c): corners of (a,t) + rD in U0 at t = +-delta b.
  out.c = true;
  for (int st : {-1, 1})
    for (int sx : {-1, 1})
      for (int sy : {-1, 1}) {
        const Rational x = p.a + sx * p.r, y = st * p.delta * p.b + sy * p.r;
        out.c = out.c && in_strip(x) && plane_contains(p, PlaneTile::U0, x, y);
      }
  return out;
}

NormalityConstants normality_constants(const StripParams& p, bool unconditional) {
  NormalityConstants c;
  c.tag = p.tag;
  c.r = p.r;
  c.unconditional = unconditional;
  const Rational spread = p.y_extent() / p.delta;
  if (unconditional) {
    c.R0 = p.halfwidth + spread;
    c.R = 2 * p.r + p.halfwidth + 1 + c.R0;
  } else {
    c.R0 = p.halfwidth + 2 * spread;
    c.R = 2 * p.r + p.halfwidth + 2 + 2 * c.R0;
  }
  c.ratio = c.R / c.r;
  return c;
}

long long strip_index(const StripParams& params, double x) {
  const double period = to_double(params.period), hw = to_double(params.halfwidth);
  const auto n0 = static_cast<long long>(std::llround(x / period));
  long long best = n0;
  bool found = false;
  for (long long n = n0 - 1; n <= n0 + 1; ++n) {
    if (std::abs(x - period * static_cast<double>(n)) > hw + kBoundaryTol) continue;
    auto key = [](long long m) { return std::make_pair(std::llabs(m), m < 0 ? 1 : 0); };
    if (!found || key(n) < key(best)) best = n;
    found = true;
  }
  return best;
}

}  // namespace ntile
