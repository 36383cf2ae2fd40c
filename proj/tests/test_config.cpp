#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "anisoac/config.hpp"
#include "anisoac/errors.hpp"

using namespace anisoac;

namespace {

const char* kBase = R"(name: unit
domain: {lo: [-0.5, -0.5], hi: [0.5, 0.5]}
grid: {h_over_eps: 8}
metric: {preset: ellipsoidal, A: [[1.5, 0.5], [0.5, 1.0]], weight: "1 + 0.1*x1"}
reaction: {kind: cubic, a: 0.5}
eps: [0.04, 0.02]
eta: 0.1
T: 0.05
front: {kind: circle, center: [0, 0], radius: 0.3, vertex_count: 256}
initial: {kind: ramp, slope: 1}
d0: 0.05
output: out/unit
seed: 7
strides: {checkpoints_per_tgen: 20, energy: 10, samples: 3, window: 3}
sharp: {h: 0.00390625, reinit_stride: 10}
)";

std::string with(const std::string& from, const std::string& to) {
  std::string s = kBase;
  const auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return s.replace(pos, from.size(), to);
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "case.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ParsesAllFields) {
  const auto c = parse_config(kBase, "base.yaml");
  EXPECT_EQ(c.name, "unit");
  EXPECT_EQ(c.eps, (std::vector<double>{0.04, 0.02}));
  EXPECT_EQ(c.metric.preset, Preset::ellipsoidal);
  EXPECT_EQ(c.metric.A(0, 1), 0.5);
  EXPECT_EQ(c.metric.weight, "1 + 0.1*x1");
  EXPECT_EQ(c.front.vertex_count, 256);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.strides.samples, 3);
  EXPECT_EQ(c.sharp.reinit_stride, 10);
  EXPECT_DOUBLE_EQ(c.grid_spacing(1), 0.02 / 8);
  EXPECT_EQ(c.make_grid(0).nx, 200);
  EXPECT_DOUBLE_EQ(c.cutoff_radius(), 0.05);
  EXPECT_EQ(c.make_metric().preset(), Preset::ellipsoidal);
  EXPECT_FALSE(c.make_metric().weight_constant());
  EXPECT_EQ(c.make_front().size(), 256u);
}

TEST(Config, RoundTripIsIdentity) {
  const auto c = parse_config(kBase, "base.yaml");
  const auto again = parse_config(serialize_config(c), "roundtrip.yaml");
  EXPECT_TRUE(c == again);
  EXPECT_EQ(serialize_config(again), serialize_config(c));
  auto poly = parse_config(with("front: {kind: circle, center: [0, 0], radius: 0.3, vertex_count: 256}",
                                "front: {kind: polygon, vertices: [[-0.2, -0.2], [0.2, -0.2], [0.1, 0.3]]}"),
                           "poly.yaml");
  EXPECT_TRUE(poly == parse_config(serialize_config(poly), "poly2.yaml"));
  const auto odd = parse_config(with("eta: 0.1", "eta: 0.1234567890123456"), "odd.yaml");
  EXPECT_TRUE(odd == parse_config(serialize_config(odd), "odd2.yaml"));
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_NE(error_of(with("eta: 0.1", "eta: 0.7")).find("case.yaml: eta:"), std::string::npos);
  EXPECT_NE(error_of(with("eps: [0.04, 0.02]", "eps: [0.02, 0.04]")).find("eps: list must be strictly decreasing"),
            std::string::npos);
  EXPECT_NE(error_of(with("h_over_eps: 8", "h_over_eps: 2")).find("grid:"), std::string::npos);
  EXPECT_NE(error_of(with("seed: 7", "seed: 7\nbogus: 1")).find("bogus: unknown key"), std::string::npos);
  EXPECT_NE(error_of(with("slope: 1", "slope: 1, tilt: 2")).find("initial.tilt: unknown key"), std::string::npos);
  EXPECT_NE(error_of(with("[[1.5, 0.5], [0.5, 1.0]]", "[[1.0, 2.0], [2.0, 1.0]]")).find("metric.A"),
            std::string::npos);
  EXPECT_NE(error_of(with("[[1.5, 0.5], [0.5, 1.0]]", "[[1.0, 0.2], [0.1, 1.0]]")).find("metric.A: must be symmetric"),
            std::string::npos);
  EXPECT_NE(error_of(with("a: 0.5", "a: 0.3")).find("reaction.a"), std::string::npos);
  EXPECT_NE(error_of(with("radius: 0.3", "radius: 0.6")).find("front"), std::string::npos);
  EXPECT_NE(error_of(with("d0: 0.05", "d0: 0.1")).find("d0: front clearance"), std::string::npos);
  EXPECT_NE(error_of(with("eta: 0.1", "eta: [0.1]")).find("eta"), std::string::npos);
  EXPECT_NE(error_of("domain: [1, 2").find("case.yaml: parse error"), std::string::npos);
  EXPECT_NE(error_of(with("preset: ellipsoidal, A: [[1.5, 0.5], [0.5, 1.0]]", "preset: fourfold, delta: 0.1"))
                .find("metric.delta"),
            std::string::npos);
  EXPECT_NE(error_of(with("weight: \"1 + 0.1*x1\"", "weight: \"1 + \"")).find("metric"), std::string::npos);
}

TEST(Config, DefaultCutoffIsThirdOfClearance) {
  const auto c = parse_config(with("d0: 0.05", "d0: 0"), "zero.yaml");
  EXPECT_NEAR(c.cutoff_radius(), 0.2 / 3, 1e-12);
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "anisoac_config_test.yaml";
  std::ofstream(path) << kBase;
  EXPECT_TRUE(load_config(path.string()) == parse_config(kBase, "x"));
  std::filesystem::remove(path);
  try {
    load_config("/nonexistent/dir/missing.yaml");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/missing.yaml"), std::string::npos);
  }
}

TEST(Config, ShippedPresetsValidate) {
  for (const auto& entry : std::filesystem::directory_iterator(ANISOAC_PRESET_DIR)) {
    if (entry.path().extension() != ".yaml") continue;
    EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
  }
}
