#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result run(const std::string& args) {
  const fs::path dir = fs::temp_directory_path() / "anisoac_cli_io";
  fs::create_directories(dir);
  const std::string cmd = std::string(ANISOAC_CLI) + " " + args + " > " + (dir / "out").string() + " 2> " +
                          (dir / "err").string();
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(dir / "out");
  r.err = slurp(dir / "err");
  return r;
}

const char* kSmall = R"(name: cli_small
domain: {lo: [-1, -1], hi: [1, 1]}
grid: {h_over_eps: 4}
metric: {preset: euclidean}
reaction: {kind: cubic, a: 0.5}
eps: [0.1, 0.05]
eta: 0.1
T: 0.2
front: {kind: circle, center: [0, 0], radius: 0.6, vertex_count: 256}
initial: {kind: ramp, slope: 1}
d0: 0.1
output: out/cli_small
seed: 1
strides: {checkpoints_per_tgen: 20, energy: 10, samples: 2, window: 3}
sharp: {h: 0.015625, reinit_stride: 20}
)";

fs::path small_config() {
  const fs::path p = fs::temp_directory_path() / "anisoac_cli_small.yaml";
  std::ofstream(p) << kSmall;
  return p;
}

}  // namespace

TEST(Cli, MissingConfigExitsThree) {
  const auto r = run("conv --config /nonexistent/missing.yaml");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("/nonexistent/missing.yaml"), std::string::npos) << r.err;
}

TEST(Cli, UnknownFlagIsUsageError) {
  EXPECT_EQ(run("conv --config x.yaml --bogus").code, 64);
  EXPECT_EQ(run("").code, 64);
  EXPECT_EQ(run("gen").code, 64);
}

TEST(Cli, InvalidConfigExitsThree) {
  const fs::path p = fs::temp_directory_path() / "anisoac_cli_bad.yaml";
  std::string text = kSmall;
  text.replace(text.find("eta: 0.1"), 8, "eta: 0.9");
  std::ofstream(p) << text;
  const auto r = run("gen --config " + p.string());
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("eta"), std::string::npos);
}

TEST(Cli, InfeasibleLedgerExitsTwo) {
  const auto r = run("certify --config " + std::string(ANISOAC_PRESET_DIR) +
                     "/certify_circle_euclid.yaml --eps-override 0.5 --out " +
                     (fs::temp_directory_path() / "anisoac_cli_cert").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("ledger infeasible: "), std::string::npos) << r.err;
}

TEST(Cli, ConvergenceSmokeRunWritesOutputs) {
  const fs::path out = fs::temp_directory_path() / "anisoac_cli_conv";
  fs::remove_all(out);
  const auto r = run("conv --config " + small_config().string() + " --out " + out.string());
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_TRUE(fs::exists(out / "rows.csv"));
  EXPECT_TRUE(fs::exists(out / "fronts.csv"));
  EXPECT_TRUE(fs::exists(out / "schema.txt"));
}

TEST(Cli, IdenticalConfigGivesIdenticalCsv) {
  const fs::path a = fs::temp_directory_path() / "anisoac_cli_det_a", b = fs::temp_directory_path() / "anisoac_cli_det_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const std::string cfg = small_config().string();
  ASSERT_EQ(run("gen --config " + cfg + " --eps-override 0.05 --out " + a.string()).code, 0);
  // The second run takes its output directory from the environment.
  ASSERT_EQ(std::system(("ANISOAC_OUT=" + b.string() + " " + ANISOAC_CLI + " gen --config " + cfg +
                         " --eps-override 0.05 > /dev/null")
                            .c_str()),
            0);
  for (const char* f : {"rows.csv", "fronts.csv", "energy.csv", "summary.csv"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}
