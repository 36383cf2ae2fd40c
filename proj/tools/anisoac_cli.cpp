#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "anisoac/bounds.hpp"
#include "anisoac/config.hpp"
#include "anisoac/errors.hpp"
#include "anisoac/lab.hpp"

namespace {

using namespace anisoac;

constexpr int kOk = 0, kMeasurementFailure = 2, kConfigError = 3, kUsage = 64;

struct Common {
  std::string config;
  std::string out;
  std::vector<double> eps_override;
};

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = load_config(c.config);
  if (!c.eps_override.empty()) {
    cfg.eps = c.eps_override;
    if (!cfg.h.empty())
      throw ConfigError(fmt::format("{}: grid.h: explicit spacings cannot follow --eps-override", c.config));
    validate(cfg, c.config + " (with --eps-override)");
  }
  if (!c.out.empty()) cfg.output_dir = c.out;
  else if (const char* env = std::getenv("ANISOAC_OUT")) cfg.output_dir = env;
  return cfg;
}

void print_rows(const LabReport& rep) {
  for (const auto& r : rep.rows) {
    std::cout << fmt::format("eps = {:<8g} h = {:<10.4g}", r.eps, r.h);
    switch (rep.kind) {
      case Measurement::generation:
        std::cout << fmt::format(" t_gen = {:.5g}  t_eps = {:.5g}  ratio = {:.4g} (1/mu = {:.4g})", r.t_gen, r.t_pred,
                                 r.ratio, rep.oracle);
        break;
      case Measurement::thickness:
        std::cout << fmt::format(" width = {:.5g}  width/eps = {:.4g} (kink {:.4g})", r.max_thickness(),
                                 r.max_thickness() / r.eps, rep.oracle);
        break;
      case Measurement::convergence:
        std::cout << fmt::format(" hausdorff = {:.4g}  control = {:.4g}", r.max_hausdorff(), r.max_control());
        break;
      case Measurement::energy:
        std::cout << fmt::format(" max energy increase = {:.3g}", r.max_energy_increase);
        break;
    }
    std::cout << (r.ok() ? "" : "  FAILED: " + r.failure) << "\n";
  }
  if (std::isfinite(rep.fit_exponent)) std::cout << fmt::format("fitted exponent {:.4g}\n", rep.fit_exponent);
  if (std::isfinite(rep.control_exponent))
    std::cout << fmt::format("control exponent {:.4g}\n", rep.control_exponent);
}

int run_lab(Measurement kind, const Common& common) {
  const ExperimentConfig cfg = load(common);
  LabReport rep;
  switch (kind) {
    case Measurement::generation: rep = run_generation(cfg); break;
    case Measurement::thickness: rep = run_thickness(cfg); break;
    case Measurement::convergence: rep = run_convergence(cfg); break;
    case Measurement::energy: rep = run_energy(cfg); break;
  }
  print_rows(rep);
  std::cout << "outputs in " << cfg.output_dir << "\n";
  for (const auto& f : rep.failures()) std::cerr << "measurement failure: " << f << "\n";
  return rep.ok() ? kOk : kMeasurementFailure;
}

int run_certify(const Common& common, bool allow_infeasible, int samples) {
  const ExperimentConfig cfg = load(common);
  const Anisotropy metric = cfg.make_metric();
  const BistableReaction reaction = cfg.make_reaction();
  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream csv(std::filesystem::path(cfg.output_dir) / "certify.csv");
  std::ofstream ledger_file(std::filesystem::path(cfg.output_dir) / "ledger.txt");
  csv << "eps,pair,t,min_margin,cell,member,E1,E2,E3\n";
  bool ok = true;
  for (std::size_t i = 0; i < cfg.eps.size(); ++i) {
    const double eps = cfg.eps[i];
    const InitialData init = make_initial_data(cfg, i);
    LedgerInputs in;
    in.eps = eps;
    in.eta = cfg.eta;
    in.T = cfg.T;
    in.d0 = cfg.cutoff_radius();
    in.u0 = &init.u0;
    in.dist0 = &init.dist.base;
    in.interface_slope = cfg.initial.kind == "ramp" ? cfg.initial.slope : 1.0;
    in.strict = !allow_infeasible;
    in.seed = cfg.seed;
    const ConstantsLedger ledger = build_ledger(reaction, metric, cfg.domain, in);
    ledger_file << ledger.report() << "\n";
    for (const auto& v : ledger.violations) std::cout << fmt::format("eps = {}: ledger violation: {}\n", eps, v);

    auto emit = [&](const char* name, const CertificationReport& rep) {
      std::cout << fmt::format("eps = {} {} pair: {} min margin {:.4g} tol {:.4g} worst t = {:.4g} x = ({:.4g}, {:.4g})\n",
                               eps, name, rep.passed ? "passed" : "FAILED", rep.min_margin, rep.tol_sign, rep.worst_t,
                               rep.worst_x[0], rep.worst_x[1]);
      for (const auto& r : rep.rows)
        csv << fmt::format("{},{},{:.10g},{:.10g},{},{},{:.10g},{:.10g},{:.10g}\n", eps, name, r.t, r.margin, r.cell,
                           r.upper ? "upper" : "lower", r.E1, r.E2, r.E3);
      ok = ok && rep.passed;
    };

    const SubSuperPair gen = generation_pair(ledger, init.u0, !allow_infeasible);
    std::vector<double> gen_times;
    for (int k = 1; k <= samples; ++k) gen_times.push_back(ledger.t_gen() * k / samples);
    emit("generation", certify_pair(gen, init.grid, gen_times));

    auto traj = std::make_shared<const DistanceTrajectory>(
        DistanceTrajectory::from_sharp(metric, init.front, init.grid, 0.5 * cfg.T, 2 * samples, ledger.d0));
    const SubSuperPair motion = motion_pair(ledger, traj);
    std::vector<double> motion_times;
    for (int k = 0; k <= samples; ++k) motion_times.push_back(0.5 * cfg.T * k / samples);
    emit("motion", certify_pair(motion, init.grid, motion_times));
  }
  return ok ? kOk : kMeasurementFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic Allen-Cahn experiments: interface generation, thickness and convergence"};
  app.require_subcommand(1);
  Common common;
  bool allow_infeasible = false;
  int samples = 5;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "experiment configuration (YAML)")->required();
    sub->add_option("--out", common.out, "output directory (overrides the config and ANISOAC_OUT)");
    sub->add_option("--eps-override", common.eps_override, "comma-separated eps list replacing the config's")
        ->delimiter(',');
  };
  auto* gen = app.add_subcommand("gen", "generation time t_gen per eps");
  auto* thick = app.add_subcommand("thick", "transition-layer thickness per eps");
  auto* conv = app.add_subcommand("conv", "diffuse-to-sharp front convergence per eps");
  auto* energy = app.add_subcommand("energy", "energy trace of the diffuse runs");
  auto* certify = app.add_subcommand("certify", "constants ledger and sub/super-solution certification");
  for (auto* s : {gen, thick, conv, energy, certify}) add_common(s);
  certify->add_flag("--allow-infeasible", allow_infeasible, "certify even when the ledger is infeasible");
  certify->add_option("--samples", samples, "certification times per pair")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (gen->parsed()) return run_lab(Measurement::generation, common);
    if (thick->parsed()) return run_lab(Measurement::thickness, common);
    if (conv->parsed()) return run_lab(Measurement::convergence, common);
    if (energy->parsed()) return run_lab(Measurement::energy, common);
    return run_certify(common, allow_infeasible, samples);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const LedgerInfeasible& e) {
    std::cerr << e.what() << "\n";
    return kMeasurementFailure;
  } catch (const Error& e) {
    std::cerr << "measurement failure: " << e.what() << "\n";
    return kMeasurementFailure;
  }
}
