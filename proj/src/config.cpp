#include "anisoac/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/LU>
#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "anisoac/errors.hpp"

namespace anisoac {

namespace {

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw ConfigError(fmt::format("{}: {}: {}", origin_, path, what));
  }

  void expect_map(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> keys) const {
    if (!n.IsMap()) fail(path, "expected a mapping");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(path.empty() ? key : path + "." + key, "unknown key");
    }
  }

  template <class T>
  T get(const YAML::Node& n, const std::string& path) const {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(path, "wrong type");
    }
  }

  double number(const YAML::Node& n, const std::string& path) const {
    double v = get<double>(n, path);
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
  }

  std::vector<double> numbers(const YAML::Node& n, const std::string& path) const {
    if (!n.IsSequence()) fail(path, "expected a list");
    std::vector<double> out;
    for (std::size_t i = 0; i < n.size(); ++i) out.push_back(number(n[i], fmt::format("{}[{}]", path, i)));
    return out;
  }

  Vec2 point(const YAML::Node& n, const std::string& path) const {
    auto v = numbers(n, path);
    if (v.size() != 2) fail(path, "expected two numbers");
    return Vec2(v[0], v[1]);
  }

 private:
  std::string origin_;
};

Preset preset_from(const std::string& s, const Reader& r, const std::string& path) {
  if (s == "euclidean") return Preset::euclidean;
  if (s == "ellipsoidal") return Preset::ellipsoidal;
  if (s == "fourfold") return Preset::fourfold;
  r.fail(path, fmt::format("unknown preset '{}' (euclidean, ellipsoidal, fourfold)", s));
}

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return name == o.name && domain.lo == o.domain.lo && domain.hi == o.domain.hi && h_over_eps == o.h_over_eps &&
         h == o.h && metric == o.metric && reaction == o.reaction && eps == o.eps && eta == o.eta && T == o.T &&
         front == o.front && initial == o.initial && d0 == o.d0 && output_dir == o.output_dir && seed == o.seed &&
         strides == o.strides && sharp == o.sharp;
}

Anisotropy ExperimentConfig::make_metric() const {
  Anisotropy base = Anisotropy::euclidean();
  switch (metric.preset) {
    case Preset::euclidean: break;
    case Preset::ellipsoidal: base = Anisotropy::ellipsoidal(metric.A); break;
    case Preset::fourfold: base = Anisotropy::fourfold(metric.delta); break;
    case Preset::user: throw ConfigError("metric.preset: user densities are not configurable");
  }
  return metric.weight == "1" ? base : base.with_weight(Expr::parse(metric.weight));
}

BistableReaction ExperimentConfig::make_reaction() const {
  if (reaction.kind == "cubic") return BistableReaction::make(reaction.a);
  return BistableReaction::custom(Expr::parse(reaction.f), Expr::parse(reaction.W));
}

Front ExperimentConfig::make_front() const {
  if (front.kind == "circle") return circle_front(front.center, front.radius, front.vertex_count);
  if (front.kind == "ellipse")
    return ellipse_front(front.center, front.semi_axes[0], front.semi_axes[1], front.vertex_count);
  return polygon_front(front.vertices);
}

double ExperimentConfig::grid_spacing(std::size_t i) const { return h.empty() ? eps.at(i) / h_over_eps : h.at(i); }

Grid ExperimentConfig::make_grid(std::size_t i) const { return Grid::covering(domain, grid_spacing(i)); }

double ExperimentConfig::cutoff_radius() const {
  return d0 > 0.0 ? d0 : clearance(make_front(), domain) / 3.0;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  Reader r(origin);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("{}: parse error: {}", origin, e.what()));
  }
  r.expect_map(root, "", {"name", "domain", "grid", "metric", "reaction", "eps", "eta", "T", "front", "initial", "d0",
                          "output", "seed", "strides", "sharp"});
  ExperimentConfig c;
  if (root["name"]) c.name = r.get<std::string>(root["name"], "name");
  if (auto n = root["domain"]) {
    r.expect_map(n, "domain", {"lo", "hi"});
    if (!n["lo"] || !n["hi"]) r.fail("domain", "needs lo and hi");
    c.domain.lo = r.point(n["lo"], "domain.lo");
    c.domain.hi = r.point(n["hi"], "domain.hi");
  }
  if (auto n = root["grid"]) {
    r.expect_map(n, "grid", {"h_over_eps", "h"});
    if (n["h_over_eps"]) c.h_over_eps = r.number(n["h_over_eps"], "grid.h_over_eps");
    if (n["h"]) c.h = r.numbers(n["h"], "grid.h");
  }
  if (auto n = root["metric"]) {
    r.expect_map(n, "metric", {"preset", "A", "delta", "weight"});
    if (n["preset"]) c.metric.preset = preset_from(r.get<std::string>(n["preset"], "metric.preset"), r, "metric.preset");
    if (n["A"]) {
      auto rows = n["A"];
      if (!rows.IsSequence() || rows.size() != 2) r.fail("metric.A", "expected a 2x2 list");
      for (int i = 0; i < 2; ++i) c.metric.A.row(i) = r.point(rows[i], fmt::format("metric.A[{}]", i)).transpose();
    }
    if (n["delta"]) c.metric.delta = r.number(n["delta"], "metric.delta");
    if (n["weight"]) c.metric.weight = r.get<std::string>(n["weight"], "metric.weight");
  }
  if (auto n = root["reaction"]) {
    r.expect_map(n, "reaction", {"kind", "a", "f", "W"});
    if (n["kind"]) c.reaction.kind = r.get<std::string>(n["kind"], "reaction.kind");
    if (n["a"]) c.reaction.a = r.number(n["a"], "reaction.a");
    if (n["f"]) c.reaction.f = r.get<std::string>(n["f"], "reaction.f");
    if (n["W"]) c.reaction.W = r.get<std::string>(n["W"], "reaction.W");
  }
  if (root["eps"]) c.eps = r.numbers(root["eps"], "eps");
  if (root["eta"]) c.eta = r.number(root["eta"], "eta");
  if (root["T"]) c.T = r.number(root["T"], "T");
  if (auto n = root["front"]) {
    r.expect_map(n, "front", {"kind", "center", "radius", "semi_axes", "vertices", "vertex_count"});
    if (n["kind"]) c.front.kind = r.get<std::string>(n["kind"], "front.kind");
    if (n["center"]) c.front.center = r.point(n["center"], "front.center");
    if (n["radius"]) c.front.radius = r.number(n["radius"], "front.radius");
    if (n["semi_axes"]) c.front.semi_axes = r.point(n["semi_axes"], "front.semi_axes");
    if (n["vertices"]) {
      auto v = n["vertices"];
      if (!v.IsSequence()) r.fail("front.vertices", "expected a list of points");
      for (std::size_t i = 0; i < v.size(); ++i)
        c.front.vertices.push_back(r.point(v[i], fmt::format("front.vertices[{}]", i)));
    }
    if (n["vertex_count"]) c.front.vertex_count = r.get<int>(n["vertex_count"], "front.vertex_count");
  }
  if (auto n = root["initial"]) {
    r.expect_map(n, "initial", {"kind", "slope"});
    if (n["kind"]) c.initial.kind = r.get<std::string>(n["kind"], "initial.kind");
    if (n["slope"]) c.initial.slope = r.number(n["slope"], "initial.slope");
  }
  if (root["d0"]) c.d0 = r.number(root["d0"], "d0");
  if (root["output"]) c.output_dir = r.get<std::string>(root["output"], "output");
  if (root["seed"]) c.seed = r.get<unsigned>(root["seed"], "seed");
  if (auto n = root["strides"]) {
    r.expect_map(n, "strides", {"checkpoints_per_tgen", "energy", "samples", "window"});
    if (n["checkpoints_per_tgen"])
      c.strides.checkpoints_per_tgen = r.get<int>(n["checkpoints_per_tgen"], "strides.checkpoints_per_tgen");
    if (n["energy"]) c.strides.energy = r.get<int>(n["energy"], "strides.energy");
    if (n["samples"]) c.strides.samples = r.get<int>(n["samples"], "strides.samples");
    if (n["window"]) c.strides.window = r.number(n["window"], "strides.window");
  }
  if (auto n = root["sharp"]) {
    r.expect_map(n, "sharp", {"h", "reinit_stride"});
    if (n["h"]) c.sharp.h = r.number(n["h"], "sharp.h");
    if (n["reinit_stride"]) c.sharp.reinit_stride = r.get<int>(n["reinit_stride"], "sharp.reinit_stride");
  }
  validate(c, origin);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("{}: cannot open config file", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void validate(const ExperimentConfig& c, const std::string& origin) {
  Reader r(origin);
  if (!(c.domain.lo[0] < c.domain.hi[0] && c.domain.lo[1] < c.domain.hi[1])) r.fail("domain", "lo must lie below hi");
  if (c.eps.empty()) r.fail("eps", "list is empty");
  for (std::size_t i = 0; i < c.eps.size(); ++i) {
    if (!(c.eps[i] > 0.0)) r.fail(fmt::format("eps[{}]", i), "must be positive");
    if (i > 0 && !(c.eps[i] < c.eps[i - 1])) r.fail("eps", "list must be strictly decreasing");
  }
  if (!c.h.empty() && c.h.size() != c.eps.size()) r.fail("grid.h", "needs one spacing per eps");
  if (c.h.empty() && !(c.h_over_eps > 0.0)) r.fail("grid.h_over_eps", "must be positive");
  for (std::size_t i = 0; i < c.eps.size(); ++i) {
    const double h = c.grid_spacing(i);
    if (!(h > 0.0)) r.fail("grid", fmt::format("spacing for eps = {} must be positive", c.eps[i]));
    if (h > c.eps[i] / 4.0 * (1.0 + 1e-12))
      r.fail("grid", fmt::format("h = {} does not resolve eps = {} (needs h <= eps / 4)", h, c.eps[i]));
  }
  if (!(c.eta > 0.0 && c.eta < 0.5)) r.fail("eta", "must lie in (0, 1/2)");
  if (!(c.T > 0.0)) r.fail("T", "must be positive");
  if (c.metric.preset == Preset::fourfold && !(std::abs(c.metric.delta) < 1.0 / 15.0))
    r.fail("metric.delta", "fourfold strength must satisfy |delta| < 1/15 for convexity");
  if (c.metric.preset == Preset::ellipsoidal) {
    const Mat2& A = c.metric.A;
    if (A(0, 1) != A(1, 0)) r.fail("metric.A", "must be symmetric");
    if (!(A(0, 0) > 0.0 && A.determinant() > 0.0)) r.fail("metric.A", "must be positive definite");
  }
  if (c.reaction.kind == "cubic") {
    if (c.reaction.a != 0.5) r.fail("reaction.a", "the cubic family is balanced only at a = 0.5");
  } else if (c.reaction.kind == "custom") {
    if (c.reaction.f.empty() || c.reaction.W.empty()) r.fail("reaction", "custom reactions need f and W");
  } else {
    r.fail("reaction.kind", fmt::format("unknown kind '{}' (cubic, custom)", c.reaction.kind));
  }
  try {
    c.make_metric();
  } catch (const Error& e) {
    r.fail("metric", e.what());
  }
  try {
    c.make_reaction();
  } catch (const Error& e) {
    r.fail("reaction", e.what());
  }
  if (c.front.kind == "circle") {
    if (!(c.front.radius > 0.0)) r.fail("front.radius", "must be positive");
  } else if (c.front.kind == "ellipse") {
    if (!(c.front.semi_axes[0] > 0.0 && c.front.semi_axes[1] > 0.0)) r.fail("front.semi_axes", "must be positive");
  } else if (c.front.kind == "polygon") {
    if (c.front.vertices.size() < 3) r.fail("front.vertices", "needs at least three points");
  } else {
    r.fail("front.kind", fmt::format("unknown kind '{}' (circle, ellipse, polygon)", c.front.kind));
  }
  if (c.front.kind != "polygon" && c.front.vertex_count < 8) r.fail("front.vertex_count", "must be at least 8");
  Front f;
  try {
    f = c.make_front();
    validate_front(f);
  } catch (const Error& e) {
    r.fail("front", e.what());
  }
  const double clear = clearance(f, c.domain);
  for (const auto& v : f.vertices)
    if (!(v[0] > c.domain.lo[0] && v[0] < c.domain.hi[0] && v[1] > c.domain.lo[1] && v[1] < c.domain.hi[1]))
      r.fail("front", "leaves the domain");
  if (c.d0 < 0.0) r.fail("d0", "must be non-negative");
  if (c.d0 > 0.0 && clear < 3.0 * c.d0)
    r.fail("d0", fmt::format("front clearance {} is below the 3 d0 margin {}", clear, 3.0 * c.d0));
  if (c.initial.kind != "ramp" && c.initial.kind != "indicator")
    r.fail("initial.kind", fmt::format("unknown kind '{}' (ramp, indicator)", c.initial.kind));
  if (!(c.initial.slope > 0.0)) r.fail("initial.slope", "must be positive");
  if (c.output_dir.empty()) r.fail("output", "must not be empty");
  if (c.strides.checkpoints_per_tgen < 1) r.fail("strides.checkpoints_per_tgen", "must be at least 1");
  if (c.strides.energy < 1) r.fail("strides.energy", "must be at least 1");
  if (c.strides.samples < 1) r.fail("strides.samples", "must be at least 1");
  if (!(c.strides.window > 2.0)) r.fail("strides.window", "must exceed 2");
  if (!(c.sharp.h > 0.0)) r.fail("sharp.h", "must be positive");
  if (c.sharp.reinit_stride < 1) r.fail("sharp.reinit_stride", "must be at least 1");
}

std::string serialize_config(const ExperimentConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  auto point = [&](const Vec2& p) { out << YAML::Flow << YAML::BeginSeq << p[0] << p[1] << YAML::EndSeq; };
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << c.name;
  out << YAML::Key << "domain" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "lo" << YAML::Value;
  point(c.domain.lo);
  out << YAML::Key << "hi" << YAML::Value;
  point(c.domain.hi);
  out << YAML::EndMap;
  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  if (c.h.empty()) out << YAML::Key << "h_over_eps" << YAML::Value << c.h_over_eps;
  else out << YAML::Key << "h" << YAML::Value << YAML::Flow << c.h;
  out << YAML::EndMap;
  out << YAML::Key << "metric" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "preset" << YAML::Value << to_string(c.metric.preset);
  if (c.metric.preset == Preset::ellipsoidal) {
    out << YAML::Key << "A" << YAML::Value << YAML::BeginSeq;
    point(c.metric.A.row(0).transpose());
    point(c.metric.A.row(1).transpose());
    out << YAML::EndSeq;
  }
  if (c.metric.preset == Preset::fourfold) out << YAML::Key << "delta" << YAML::Value << c.metric.delta;
  out << YAML::Key << "weight" << YAML::Value << YAML::DoubleQuoted << c.metric.weight;
  out << YAML::EndMap;
  out << YAML::Key << "reaction" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << c.reaction.kind;
  if (c.reaction.kind == "cubic") {
    out << YAML::Key << "a" << YAML::Value << c.reaction.a;
  } else {
    out << YAML::Key << "f" << YAML::Value << YAML::DoubleQuoted << c.reaction.f;
    out << YAML::Key << "W" << YAML::Value << YAML::DoubleQuoted << c.reaction.W;
  }
  out << YAML::EndMap;
  out << YAML::Key << "eps" << YAML::Value << YAML::Flow << c.eps;
  out << YAML::Key << "eta" << YAML::Value << c.eta;
  out << YAML::Key << "T" << YAML::Value << c.T;
  out << YAML::Key << "front" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << c.front.kind;
  if (c.front.kind == "polygon") {
    out << YAML::Key << "vertices" << YAML::Value << YAML::BeginSeq;
    for (const auto& v : c.front.vertices) point(v);
    out << YAML::EndSeq;
  } else {
    out << YAML::Key << "center" << YAML::Value;
    point(c.front.center);
    if (c.front.kind == "circle") out << YAML::Key << "radius" << YAML::Value << c.front.radius;
    else {
      out << YAML::Key << "semi_axes" << YAML::Value;
      point(c.front.semi_axes);
    }
    out << YAML::Key << "vertex_count" << YAML::Value << c.front.vertex_count;
  }
  out << YAML::EndMap;
  out << YAML::Key << "initial" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << c.initial.kind;
  out << YAML::Key << "slope" << YAML::Value << c.initial.slope;
  out << YAML::EndMap;
  out << YAML::Key << "d0" << YAML::Value << c.d0;
  out << YAML::Key << "output" << YAML::Value << c.output_dir;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "strides" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "checkpoints_per_tgen" << YAML::Value << c.strides.checkpoints_per_tgen;
  out << YAML::Key << "energy" << YAML::Value << c.strides.energy;
  out << YAML::Key << "samples" << YAML::Value << c.strides.samples;
  out << YAML::Key << "window" << YAML::Value << c.strides.window;
  out << YAML::EndMap;
  out << YAML::Key << "sharp" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "h" << YAML::Value << c.sharp.h;
  out << YAML::Key << "reinit_stride" << YAML::Value << c.sharp.reinit_stride;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace anisoac
