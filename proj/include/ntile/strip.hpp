#pragma once

#include <array>
#include <string>

#include <boost/rational.hpp>
#include <json.hpp>

#include "ntile/tiling.hpp"

namespace ntile {

using Rational = boost::rational<long long>;

/// Parses "p/q", an integer, or a finite decimal such as "5.25".
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& q);
double to_double(const Rational& q);

/// Planar tiles of the strip |x| <= halfwidth:
///   U0 = {|x| + slope |y| <= scale, |x| <= halfwidth}
///   U1 = {0 <= x <= halfwidth, y >= 0, x + slope y >= scale}
/// and U2, U3, U4 the reflections of U1 through (x,-y), (-x,y), (-x,-y).
/// Preset fig1 is slope 1, scale 2, halfwidth 2; fig2 is slope 8, scale 9,
/// halfwidth 11/2.
struct StripParams {
  std::string tag;
  Rational a, b, r, delta;
  Rational slope, scale, halfwidth, period;

  /// Height of U0: largest |y| it reaches.
  Rational y_extent() const { return scale / slope; }

  nlohmann::json to_json() const;
  static StripParams from_json(const nlohmann::json& j);
};

/// "fig1" or "fig2"; throws std::invalid_argument otherwise.
StripParams strip_preset(const std::string& name);

enum class PlaneTile { U0 = 0, U1, U2, U3, U4 };

/// Floating-point membership with boundary tolerance; throws when the point
/// lies outside the strip.
Membership plane_membership(const StripParams& params, PlaneTile id, double x, double y,
                            double tol = kBoundaryTol);

/// Exact closed membership.
bool plane_contains(const StripParams& params, PlaneTile id, const Rational& x,
                    const Rational& y);

struct FactConditions {
  bool a = false;  // D in U0 in [-halfwidth, halfwidth] x [-y_extent, y_extent]
  bool b = false;  // (a,b) + rD in U1, |y| <= 1
  bool c = false;  // (a,t) + rD in U0 for |t| <= delta b
  bool all() const { return a && b && c; }
};

/// Exact corner checks. Every set involved is an intersection of half-planes,
/// so containment of a square reduces to its four corners (and in (c), to the
/// extreme values t = +-delta b).
FactConditions check_fact_conditions(const StripParams& params);

struct NormalityConstants {
  Rational R0, R, ratio, r;
  std::string tag;
  bool unconditional = false;
};

/// R0 = halfwidth + 2 y_extent / delta and R = 2r + halfwidth + 2 + 2 R0; with
/// an unconditional basis R0 = halfwidth + y_extent / delta and
/// R = 2r + halfwidth + 1 + R0.
NormalityConstants normality_constants(const StripParams& params, bool unconditional);

/// Integer n with |x - period n| <= halfwidth; on shared boundaries the
/// smaller |n| wins, then the positive one. Falls back to the nearest n when
/// x sits in a gap between strips.
long long strip_index(const StripParams& params, double x);

}  // namespace ntile
