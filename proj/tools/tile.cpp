#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ntile/body.hpp"
#include "ntile/mazur.hpp"
#include "ntile/schauder.hpp"
#include "ntile/sphere.hpp"
#include "ntile/strip.hpp"
#include "ntile/svg.hpp"
#include "ntile/verify.hpp"
#include "ntile/voronoi.hpp"

using namespace ntile;
using nlohmann::json;

namespace {

constexpr int kOk = 0, kFail = 1, kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

NormedSpace make_space(const json& c) {
  const auto kind = c.at("space").get<std::string>();
  const auto dim = c.at("dim").get<std::size_t>();
  const double p = c.at("p").get<double>();
  if (dim == 0) throw UsageError("--dim must be positive");
  if (kind == "lp") return NormedSpace::lp(dim, p);
  if (kind == "sup") return NormedSpace::sup(dim);
  if (kind == "renormed") return NormedSpace::renormed_lp(dim, p);
  throw UsageError("unknown --space '" + kind + "'");
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// Everything a command needs to be checked: the tiling, its samples and
// the checks beyond the shared harness.
struct Run {
  std::shared_ptr<const Tiling> tiling;
  std::vector<Vector> samples;
  VerifyOptions verify;
  json checks = json::object();  // name -> {passed, ...}
  std::string reference = "preiss";
};

VerifyOptions verify_options(const json& c, double tol) {
  VerifyOptions o;
  o.seed = c.at("seed").get<std::uint64_t>();
  o.directions = c.value("directions", std::size_t{200});
  o.tol = c.value("tol", tol);
  o.outer_tol = o.tol;
  o.starshape = c.value("star", false);
  return o;
}

std::uint64_t sample_seed(const json& c) { return c.at("seed").get<std::uint64_t>() + 1; }

Run run_voronoi(const json& c, std::shared_ptr<const Tiling> loaded) {
  const auto space = make_space(c);
  const double ext = c.at("extent").get<double>();
  const Vector lo = Vector::Constant(static_cast<Eigen::Index>(space.dim()), -ext);
  const Vector hi = -lo;
  Run run;
  run.tiling = loaded ? loaded
                      : std::make_shared<VoronoiTiling>(voronoi_net(
                            space, BoxRegion{lo, hi}, c.at("r").get<double>(),
                            c.at("seed").get<std::uint64_t>(), c.at("refine").get<std::size_t>()));
  run.samples = sample_box(lo, hi, c.at("samples").get<std::size_t>(), sample_seed(c));
  run.verify = verify_options(c, 1e-3);
  return run;
}

Run run_schauder(const json& c, std::shared_ptr<const Tiling> loaded) {
  const auto space = make_space(c);
  SchauderConfig cfg;
  cfg.depth = c.at("depth").get<std::size_t>();
  cfg.params = strip_preset(c.at("params").get<std::string>());
  cfg.unconditional = c.at("unconditional").get<bool>();
  cfg.region_radius = c.at("radius").get<double>();
  cfg.seed = c.at("seed").get<std::uint64_t>();
  Run run;
  auto t = loaded ? std::dynamic_pointer_cast<const SchauderTiling>(loaded)
                  : std::make_shared<const SchauderTiling>(space, cfg);
  run.tiling = t;
  run.samples = sample_ball(space, Vector::Zero(static_cast<Eigen::Index>(space.dim())),
                            cfg.region_radius, c.at("samples").get<std::size_t>(), sample_seed(c));
  run.verify = verify_options(c, 1e-6);
  const auto& k = t->constants();
  run.reference = cfg.unconditional ? "unconditional" : cfg.params.tag;
  run.checks["constants"] = {{"passed", true},
                             {"R0", to_string(k.R0)},
                             {"R", to_string(k.R)},
                             {"r", to_string(k.r)},
                             {"ratio", to_string(k.ratio)}};
  return run;
}

Run run_sphere(const json& c, std::shared_ptr<const Tiling> loaded) {
  const auto space = make_space(c);
  const double eps = c.at("eps").get<double>();
  Run run;
  std::shared_ptr<const SphereTiling> t;
  if (loaded) {
    t = std::dynamic_pointer_cast<const SphereTiling>(loaded);
  } else {
    SphereBuildOptions o;
    o.samples = c.at("build_samples").get<std::size_t>();
    SphereBuildStats st;
    t = std::make_shared<const SphereTiling>(
        build_sphere_tiling(space, eps, c.at("seed").get<std::uint64_t>(), o, &st));
    run.checks["build"] = st.to_json();
    run.checks["build"]["passed"] = st.unwitnessed == 0;
  }
  run.tiling = t;
  const auto& p = t->params();
  const double e1 = std::abs(p.rho - (p.R - p.r_prime));
  const double e2 = std::abs(p.R - 2.0 * p.r_prime / (1.0 + p.r));
  run.checks["identities"] = {{"passed", e1 <= 1e-12 && e2 <= 1e-12},
                              {"rho_minus_R_plus_r_prime", e1},
                              {"R_minus_formula", e2}};
  run.checks["certified"] = {{"passed", t->uncertified().empty()},
                             {"uncertified", t->uncertified().size()}};
  run.samples = sample_sphere(space, c.at("samples").get<std::size_t>(), sample_seed(c));
  // eps / 2 to the family vector of the assigned cap.
  double worst = 0.0;
  for (const auto& x : run.samples)
    if (const auto idx = t->sphere_classify(x)) {
      const Vector xj = idx->p == 2 ? t->family_vector(idx->j) : Vector(-t->family_vector(idx->j));
      worst = std::max(worst, space.distance(x, xj));
    }
  run.checks["family_bound"] = {{"passed", worst <= eps / 2.0 + 1e-9}, {"max_distance", worst}};
  run.verify = verify_options(c, 1e-9);
  return run;
}

Run run_body(const json& c, std::shared_ptr<const Tiling> loaded) {
  const auto space = make_space(c);
  Run run;
  std::shared_ptr<const LayeredTiling> t;
  if (loaded) {
    t = std::dynamic_pointer_cast<const LayeredTiling>(loaded);
  } else {
    const auto body = c.contains("body") && !c.at("body").is_null()
                          ? ConvexBody::from_json(c.at("body"))
                          : ConvexBody::unit_ball(space);
    BodyOptions o;
    o.pool = c.at("pool").get<std::size_t>();
    if (c.contains("eta") && !c.at("eta").is_null()) o.eta = c.at("eta").get<double>();
    t = std::make_shared<const LayeredTiling>(build_body_tiling(
        body, c.at("eps").get<double>(), c.at("seed").get<std::uint64_t>(), o));
  }
  run.tiling = t;
  const auto& sp = t->space();
  double tangency = 0.0;
  for (const auto& s : t->slices())
    tangency = std::max(tangency,
                        std::abs(sp.norm(s.y0) - s.r_slice - (1.0 - t->delta()) * s.scale));
  run.checks["tangency"] = {{"passed", tangency <= 1e-9}, {"max_error", tangency}};
  const auto n = c.at("samples").get<std::size_t>();
  for (auto& x : sample_ball(sp, Vector::Zero(static_cast<Eigen::Index>(sp.dim())), 1.0, n,
                             sample_seed(c)))
    if (is_inside(t->body().membership(x))) run.samples.push_back(std::move(x));
  run.verify = verify_options(c, 1e-9);
  return run;
}

Run run_mazur(const json& c, std::shared_ptr<const Tiling> loaded) {
  const double q = c.at("q").get<double>();
  const auto dim = c.at("dim").get<std::size_t>();
  Run run;
  std::shared_ptr<const TransportedTiling> t;
  if (loaded) {
    t = std::dynamic_pointer_cast<const TransportedTiling>(loaded);
  } else {
    json src = read_json(c.at("source_report").get<std::string>());
    if (src.contains("tiling")) src = src.at("tiling");
    if (src.is_null()) throw UsageError("source report carries no tiling");
    t = std::make_shared<const TransportedTiling>(tiling_from_json(src), q);
  }
  if (t->space().dim() != dim)
    throw UsageError("--dim " + std::to_string(dim) + " does not match the source tiling");
  run.tiling = t;
  const auto pairs = c.at("pairs").get<std::size_t>();
  if (pairs > 0 && q == 1.0) {
    const auto m = verify_moduli(c.at("moduli_dim").get<std::size_t>(), pairs,
                                 c.at("seed").get<std::uint64_t>());
    run.checks["moduli"] = m.to_json();
  }
  const auto& sp = t->space();
  const auto n = c.at("samples").get<std::size_t>();
  if (t->geometry() == Geometry::sphere) {
    run.samples = sample_sphere(sp, n, sample_seed(c));
  } else {
    const auto* body = dynamic_cast<const LayeredTiling*>(&t->source());
    for (auto& y : sample_ball(sp, Vector::Zero(static_cast<Eigen::Index>(dim)), 1.0, n,
                               sample_seed(c)))
      if (!body || is_inside(body->body().membership(mazur_inverse(y, q))))
        run.samples.push_back(std::move(y));
  }
  run.verify = verify_options(c, 1e-9);
  return run;
}

Run dispatch(const std::string& cmd, const json& c, std::shared_ptr<const Tiling> loaded) {
  if (cmd == "voronoi") return run_voronoi(c, loaded);
  if (cmd == "schauder") return run_schauder(c, loaded);
  if (cmd == "sphere") return run_sphere(c, loaded);
  if (cmd == "body") return run_body(c, loaded);
  if (cmd == "mazur-transport") return run_mazur(c, loaded);
  throw UsageError("report command '" + cmd + "' cannot be verified");
}

double reference_ratio(const std::string& key) { return reference_constants().at(key).get<double>(); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Verifies, writes outputs and prints the summary. Returns the exit code.
int finish(const std::string& cmd, const json& config, Run run, const std::string& out_path,
           const std::string& svg_path, std::optional<json> expected = std::nullopt) {
  const auto rep = verify_tiling(*run.tiling, run.samples, run.verify);
  bool ok = rep.passed();
  for (const auto& [name, check] : run.checks.items())
    if (check.contains("passed") && !check.at("passed").get<bool>()) ok = false;

  json report = {{"version", kReportVersion}, {"command", cmd},     {"config", config},
                 {"checks", run.checks},      {"passed", ok},       {"verification", rep.to_json()}};
  try {
    report["tiling"] = tiling_to_json(*run.tiling);
  } catch (const std::invalid_argument&) {
    report["tiling"] = nullptr;  // rebuilt from the config
  }
  if (expected) {
    const bool same = expected->dump() == rep.to_json(false).dump();
    report["reproduced"] = same;
  }
  if (!out_path.empty()) write_text(out_path, report.dump(2) + "\n");
  if (!svg_path.empty()) {
    SvgOptions o;
    o.extent = 1.1;  // unit spheres and bodies inside the unit ball
    if (cmd == "voronoi") o.extent = config.at("extent").get<double>();
    if (cmd == "schauder") o.extent = config.at("radius").get<double>();
    std::ostringstream os;
    write_svg(*run.tiling, os, o);
    write_text(svg_path, os.str());
  }

  const double ref = reference_ratio(run.reference);
  std::cout << cmd << ": " << run.tiling->describe() << "; " << run.tiling->size()
            << " tiles; coverage " << fmt(rep.coverage.fraction) << ", "
            << rep.violations.size() << " overlaps, inner " << (rep.inner_ok() ? "ok" : "FAIL")
            << ", outer " << (rep.outer_ok() ? "ok" : "FAIL") << "; R/r=" << fmt(rep.achieved_ratio())
            << " (reference " << run.reference << ' ' << ref << ")";
  for (const auto& [name, check] : run.checks.items())
    if (check.contains("passed") && !check.at("passed").get<bool>()) std::cout << "; " << name << " FAIL";
  if (report.contains("reproduced"))
    std::cout << "; " << (report["reproduced"].get<bool>() ? "reproduced" : "differs from report");
  std::cout << (ok ? "" : "; FAILED") << "\n";
  return ok ? kOk : kFail;
}

Rational rational_flag(const std::string& name, const std::string& text) {
  try {
    return parse_rational(text);
  } catch (const std::exception& e) {
    throw UsageError("--" + name + ": " + e.what());
  }
}

int strip_check(const json& c, const std::string& out_path, const std::string& svg_path) {
  auto p = strip_preset(c.at("params").get<std::string>());
  for (const char* k : {"a", "b", "r", "delta"}) {
    if (!c.contains(k) || c.at(k).is_null()) continue;
    const Rational v = rational_flag(k, c.at(k).get<std::string>());
    if (std::string(k) == "a") p.a = v;
    if (std::string(k) == "b") p.b = v;
    if (std::string(k) == "r") p.r = v;
    if (std::string(k) == "delta") p.delta = v;
  }
  const auto f = check_fact_conditions(p);
  const auto k = normality_constants(p, c.at("unconditional").get<bool>());
  std::string head;
  if (f.all()) {
    head = "(a)(b)(c) hold";
  } else {
    for (auto [name, v] : {std::pair{"(a)", f.a}, std::pair{"(b)", f.b}, std::pair{"(c)", f.c}})
      if (!v) head += name;
    head += " fail" + std::string(head.size() == 3 ? "s" : "");
  }
  std::cout << head << "; R0=" << to_string(k.R0) << " R=" << to_string(k.R)
            << " R/r=" << to_string(k.ratio) << "\n";
  if (!out_path.empty()) {
    json rep = {{"version", kReportVersion},
                {"command", "strip-check"},
                {"config", c},
                {"params", p.to_json()},
                {"conditions", {{"a", f.a}, {"b", f.b}, {"c", f.c}}},
                {"constants",
                 {{"R0", to_string(k.R0)}, {"R", to_string(k.R)}, {"r", to_string(k.r)},
                  {"ratio", to_string(k.ratio)}}},
                {"reference", reference_constants()},
                {"passed", f.all()}};
    write_text(out_path, rep.dump(2) + "\n");
  }
  if (!svg_path.empty()) {
    std::ostringstream os;
    write_strip_svg(p, os);
    write_text(svg_path, os.str());
  }
  return f.all() ? kOk : kFail;
}

int verify_report(const std::string& path, const std::string& out_path) {
  const json rep = read_json(path);
  const auto cmd = rep.at("command").get<std::string>();
  const json& config = rep.at("config");
  std::shared_ptr<const Tiling> loaded;
  if (rep.contains("tiling") && !rep.at("tiling").is_null()) loaded = tiling_from_json(rep.at("tiling"));
  std::optional<json> expected;
  if (rep.contains("verification")) {
    json v = rep.at("verification");
    v.erase("wall_clock_seconds");
    expected = v;
  }
  return finish(cmd, config, dispatch(cmd, config, loaded), out_path, "", expected);
}

struct SpaceFlags {
  std::string space = "lp";
  double p = 2.0;
  std::size_t dim = 2;
};

void add_space(CLI::App* app, SpaceFlags& s, const std::string& default_space, std::size_t dim) {
  s.space = default_space;
  s.dim = dim;
  app->add_option("--space", s.space, "norm kind")
      ->check(CLI::IsMember({"lp", "sup", "renormed"}))
      ->capture_default_str();
  app->add_option("--p", s.p, "exponent p >= 1")->capture_default_str();
  app->add_option("--dim", s.dim, "dimension")->capture_default_str();
}

json space_json(const SpaceFlags& s) { return {{"space", s.space}, {"p", s.p}, {"dim", s.dim}}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normal tilings of finite-dimensional normed spaces: build, verify, export"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 1 a check failed, 2 usage error. TILE_THREADS caps worker threads.");

  std::string out_path, svg_path;
  std::uint64_t seed = 0;
  std::size_t samples = 10000, directions = 200;
  bool star = false;
  std::optional<double> tol;

  auto common = [&](CLI::App* sub, bool svg) {
    sub->add_option("--seed", seed, "seed for every stochastic step")->capture_default_str();
    sub->add_option("--samples", samples, "verification samples")->capture_default_str();
    sub->add_option("--directions", directions, "inner-radius probe directions per tile")
        ->capture_default_str();
    sub->add_option("--tol", tol, "probe shrink and outer-radius slack");
    sub->add_option("--out", out_path, "JSON report path");
    if (svg) sub->add_option("--svg", svg_path, "SVG output (planar tilings, sphere in dim 2 or 3)");
  };
  auto base_config = [&](const SpaceFlags& s) {
    json c = space_json(s);
    c["seed"] = seed;
    c["samples"] = samples;
    c["directions"] = directions;
    c["star"] = star;
    if (tol) c["tol"] = *tol;
    return c;
  };

  // strip-check
  auto* strip = app.add_subcommand("strip-check", "exact rational checks of the strip tiles");
  std::string preset = "fig1";
  std::optional<std::string> fa, fb, fr, fdelta;
  bool unconditional = false;
  strip->add_option("--params", preset, "preset")->check(CLI::IsMember({"fig1", "fig2"}))->capture_default_str();
  strip->add_option("--a", fa, "override a, as p/q");
  strip->add_option("--b", fb, "override b, as p/q");
  strip->add_option("--r", fr, "override r, as p/q");
  strip->add_option("--delta", fdelta, "override delta, as p/q");
  strip->add_flag("--unconditional", unconditional, "constants for an unconditional basis");
  strip->add_option("--out", out_path, "JSON report path");
  strip->add_option("--svg", svg_path, "SVG of the five planar tiles");

  // voronoi
  auto* vor = app.add_subcommand("voronoi", "Voronoi tiling of a greedy 2r-separated net");
  SpaceFlags vs;
  double vr = 1.0, extent = 6.0;
  std::size_t refine = 200000;
  add_space(vor, vs, "lp", 2);
  vor->add_option("--r", vr, "half the separation")->capture_default_str();
  vor->add_option("--extent", extent, "region [-extent, extent]^dim")->capture_default_str();
  vor->add_option("--refine", refine, "quasirandom candidates after the grid")->capture_default_str();
  vor->add_flag("--star", star, "probe starshapedness");
  common(vor, true);

  // schauder
  auto* sch = app.add_subcommand("schauder", "composite tiling from the Schauder basis");
  SpaceFlags ss;
  std::size_t depth = 2;
  double radius = 10.0;
  add_space(sch, ss, "renormed", 6);
  sch->add_option("--depth", depth, "levels")->capture_default_str();
  sch->add_option("--params", preset, "strip preset")->check(CLI::IsMember({"fig1", "fig2"}))->capture_default_str();
  sch->add_flag("--unconditional", unconditional, "unconditional basis constants");
  sch->add_option("--radius", radius, "sampled region B(0, radius)")->capture_default_str();
  sch->add_flag("--star", star, "probe starshapedness");
  common(sch, true);

  // sphere
  auto* sph = app.add_subcommand("sphere", "tiling of the unit sphere of a uniformly convex space");
  SpaceFlags ps;
  double eps = 0.8;
  std::size_t build_samples = SphereBuildOptions{}.samples;
  add_space(sph, ps, "lp", 3);
  sph->add_option("--eps", eps, "outer radius")->capture_default_str();
  sph->add_option("--build-samples", build_samples, "construction points")->capture_default_str();
  common(sph, true);

  // body
  auto* bod = app.add_subcommand("body", "layered slice tiling of a convex body");
  SpaceFlags bs;
  double beps = 0.75;
  std::optional<double> eta;
  std::string body_path;
  std::size_t pool = BodyOptions{}.pool;
  add_space(bod, bs, "lp", 3);
  bod->add_option("--eps", beps, "outer radius")->capture_default_str();
  bod->add_option("--eta", eta, "inner ball radius B(0, eta) in the body");
  bod->add_option("--body", body_path, "convex body JSON (default: the unit ball)");
  bod->add_option("--pool", pool, "pool points per layer")->capture_default_str();
  common(bod, true);

  // mazur-transport
  auto* maz = app.add_subcommand("mazur-transport", "push an l_2 tiling into l_q by the Mazur map");
  std::size_t mdim = 3, pairs = 100000, moduli_dim = 8;
  double q = 1.0;
  std::string source;
  maz->add_option("--dim", mdim, "dimension of the source tiling")->capture_default_str();
  maz->add_option("--q", q, "target exponent")->check(CLI::IsMember({1.0, 2.0}))->capture_default_str();
  maz->add_option("--source-report", source, "report or tiling JSON of an l_2 tiling")->required();
  maz->add_option("--pairs", pairs, "random pairs for the moduli check")->capture_default_str();
  maz->add_option("--moduli-dim", moduli_dim, "dimension of the moduli check")->capture_default_str();
  common(maz, false);

  // verify
  auto* ver = app.add_subcommand("verify", "re-run the checks of a saved report");
  std::string report_path;
  ver->add_option("--report", report_path, "report JSON")->required();
  ver->add_option("--out", out_path, "fresh report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*strip) {
      json c = {{"params", preset}, {"unconditional", unconditional}};
      c["a"] = fa ? json(*fa) : json(nullptr);
      c["b"] = fb ? json(*fb) : json(nullptr);
      c["r"] = fr ? json(*fr) : json(nullptr);
      c["delta"] = fdelta ? json(*fdelta) : json(nullptr);
      return strip_check(c, out_path, svg_path);
    }
    if (*ver) return verify_report(report_path, out_path);

    std::string cmd;
    json c;
    if (*vor) {
      cmd = "voronoi";
      c = base_config(vs);
      c.update({{"r", vr}, {"extent", extent}, {"refine", refine}});
    } else if (*sch) {
      cmd = "schauder";
      c = base_config(ss);
      c.update({{"depth", depth}, {"params", preset}, {"unconditional", unconditional},
                {"radius", radius}});
    } else if (*sph) {
      cmd = "sphere";
      c = base_config(ps);
      c.update({{"eps", eps}, {"build_samples", build_samples}});
    } else if (*bod) {
      cmd = "body";
      c = base_config(bs);
      c.update({{"eps", beps}, {"pool", pool}});
      c["eta"] = eta ? json(*eta) : json(nullptr);
      c["body"] = body_path.empty() ? json(nullptr) : read_json(body_path);
    } else {
      cmd = "mazur-transport";
      c = base_config({"lp", q, mdim});
      c.update({{"q", q}, {"source_report", source}, {"pairs", pairs}, {"moduli_dim", moduli_dim}});
    }
    return finish(cmd, c, dispatch(cmd, c, nullptr), out_path, svg_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return kFail;
  }
}
