#pragma once

#include <string>
#include <vector>

#include "anisoac/anisotropy.hpp"
#include "anisoac/front.hpp"
#include "anisoac/grid.hpp"
#include "anisoac/reaction.hpp"

namespace anisoac {

struct MetricSpec {
  Preset preset = Preset::euclidean;
  Mat2 A = Mat2::Identity();  // ellipsoidal
  double delta = 0.0;         // fourfold
  std::string weight = "1";   // m(x1, x2)
  bool operator==(const MetricSpec&) const = default;
};

struct ReactionSpec {
  std::string kind = "cubic";  // cubic | custom
  double a = 0.5;              // cubic
  std::string f, W;            // custom, in the variable u
  bool operator==(const ReactionSpec&) const = default;
};

struct FrontSpec {
  std::string kind = "circle";  // circle | ellipse | polygon
  Vec2 center = Vec2::Zero();
  double radius = 0.3;               // circle
  Vec2 semi_axes = Vec2(0.3, 0.2);   // ellipse
  std::vector<Vec2> vertices;        // polygon
  int vertex_count = 512;            // circle and ellipse
  bool operator==(const FrontSpec&) const = default;
};

struct InitialSpec {
  std::string kind = "ramp";  // ramp: a + slope zeta(d, d0); indicator: U0(d / eps)
  double slope = 1.0;
  bool operator==(const InitialSpec&) const = default;
};

struct Strides {
  int checkpoints_per_tgen = 50;  // generation checkpoints per t^eps
  int energy = 100;               // energy.csv keeps every n-th step
  int samples = 4;                // time samples for thickness and convergence
  double window = 3.0;            // thickness window end, in units of t^eps (capped at T/2)
  bool operator==(const Strides&) const = default;
};

struct SharpSpec {
  double h = 1.0 / 256.0;
  int reinit_stride = 20;
  bool operator==(const SharpSpec&) const = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  Box domain{Vec2(-0.5, -0.5), Vec2(0.5, 0.5)};
  double h_over_eps = 8.0;   // grid spacing eps / h_over_eps unless h is given
  std::vector<double> h;     // explicit spacing per eps
  MetricSpec metric;
  ReactionSpec reaction;
  std::vector<double> eps{0.02};
  double eta = 0.1;
  double T = 0.04;
  FrontSpec front;
  InitialSpec initial;
  double d0 = 0.0;  // <= 0: a third of the front's boundary clearance
  std::string output_dir = "out";
  unsigned seed = 12345;
  Strides strides;
  SharpSpec sharp;

  bool operator==(const ExperimentConfig& o) const;

  Anisotropy make_metric() const;
  BistableReaction make_reaction() const;
  Front make_front() const;
  double grid_spacing(std::size_t eps_index) const;
  Grid make_grid(std::size_t eps_index) const;
  double cutoff_radius() const;
};

// Throw ConfigError with messages of the form "<origin>: <key path>: <problem>".
ExperimentConfig parse_config(const std::string& yaml_text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);
// eps strictly decreasing, h <= eps / 4 for every eps, front inside the domain
// with clearance >= 3 d0, and the remaining fields in range.
void validate(const ExperimentConfig& config, const std::string& origin = "<config>");

}  // namespace anisoac
