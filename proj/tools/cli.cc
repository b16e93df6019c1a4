// Copyright 2026 The dpaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpaudit/audit_runner.h"
#include "dpaudit/config.h"
#include "dpaudit/csv.h"
#include "dpaudit/gdp_math.h"
#include "dpaudit/hidden_state_sim.h"

namespace dpaudit {
namespace {

namespace fs = std::filesystem;

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string Short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

fs::path OutputDir(const std::string& flag) {
  fs::path dir = ".";
  if (!flag.empty()) {
    dir = flag;
  } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
    dir = env;
  }
  fs::create_directories(dir);
  return dir;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Simulation flags shared by the three simulator subcommands. Flags that
// were given override the [sim] section of --config.
struct SimFlags {
  std::string config;
  int64_t steps = 0;
  int64_t batch_b = 0;
  double clip_c = 0;
  double sigma = 0;
  int64_t runs = 0;
  double delta = 0;
  double confidence = 0;
  std::vector<CLI::Option*> options;

  void Register(CLI::App* app) {
    app->add_option("--config", config, "Config file with a [sim] section")
        ->check(CLI::ExistingFile);
    options = {
        app->add_option("--steps", steps, "Steps T"),
        app->add_option("--batch", batch_b, "Batch size B"),
        app->add_option("--clip", clip_c, "Clipping norm C"),
        app->add_option("--sigma", sigma, "Noise multiplier"),
        app->add_option("--runs", runs, "Runs R"),
        app->add_option("--delta", delta, "Target delta"),
        app->add_option("--confidence", confidence,
                        "Clopper-Pearson confidence"),
    };
  }

  SimConfig Resolve(uint64_t seed, bool seed_given, int jobs) const {
    SimConfig cfg;
    if (!config.empty()) cfg = SimConfigFromConfig(ReadConfigFile(config));
    if (options[0]->count()) cfg.steps = steps;
    if (options[1]->count()) cfg.batch_b = batch_b;
    if (options[2]->count()) cfg.clip_c = clip_c;
    if (options[3]->count()) cfg.sigma = sigma;
    if (options[4]->count()) cfg.runs = runs;
    if (options[5]->count()) cfg.delta = delta;
    if (options[6]->count()) cfg.confidence = confidence;
    if (seed_given) cfg.seed = seed;
    if (jobs >= 0) cfg.jobs = jobs;
    ValidateSimConfig(cfg);
    return cfg;
  }
};

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Privacy auditing of DP-SGD with hidden intermediate models"};
  app.require_subcommand(1);
  app.fallthrough();
  uint64_t seed = 0;
  int jobs = -1;
  std::string output_dir;
  CLI::Option* seed_opt =
      app.add_option("--seed", seed, "Master seed for all randomness");
  app.add_option("--jobs", jobs, "Worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--output-dir", output_dir,
                 std::string("Output directory (default $") + kOutputDirEnv +
                     " or .)");

  // accountant
  CLI::App* accountant =
      app.add_subcommand("accountant", "Upper bound for n Gaussian insertions");
  int64_t acc_n = 0;
  double acc_sigma = 0;
  double acc_delta = 0;
  accountant->add_option("--n", acc_n, "Number of insertions")->required();
  accountant->add_option("--sigma", acc_sigma, "Noise multiplier")->required();
  accountant->add_option("--delta", acc_delta, "Target delta")->required();

  // audit
  CLI::App* audit = app.add_subcommand("audit", "Audit DP-SGD training runs");
  std::string audit_config;
  audit->add_option("config", audit_config, "Experiment config file")
      ->required()
      ->check(CLI::ExistingFile);

  // simulate-hidden
  CLI::App* simulate = app.add_subcommand(
      "simulate-hidden", "Per-step audit of the one-dimensional model");
  SimFlags sim_flags;
  sim_flags.Register(simulate);
  std::string drift = "worst-case";
  double drift_value = 0.0;
  CLI::Option* threshold_opt = nullptr;
  double threshold = 0.0;
  simulate->add_option("--drift", drift, "worst-case or constant")
      ->check(CLI::IsMember({"worst-case", "constant"}));
  simulate->add_option("--drift-value", drift_value,
                       "Value of a constant drift");
  threshold_opt = simulate->add_option(
      "--threshold", threshold, "Threshold of the worst-case drift (C/2)");

  // amp-grid
  CLI::App* amp = app.add_subcommand(
      "amp-grid", "Amplification ratio over batch sizes and noise levels");
  SimFlags amp_flags;
  amp_flags.Register(amp);
  std::vector<int64_t> batches = {1, 2, 4, 8, 16};
  std::vector<double> sigmas = {1, 2, 3, 4, 5, 6, 7, 8};
  amp->add_option("--batches", batches, "Batch sizes")->delimiter(',');
  amp->add_option("--sigmas", sigmas, "Noise multipliers")->delimiter(',');

  // threshold-search
  CLI::App* search = app.add_subcommand(
      "threshold-search", "Brute-force the worst-case threshold at T = 2");
  SimFlags search_flags;
  search_flags.Register(search);
  int grid = 20;
  search->add_option("--d", grid, "Grid size")->check(CLI::Range(2, 1 << 20));

  // profile
  CLI::App* profile =
      app.add_subcommand("profile", "delta(eps) curve of a mu-GDP mechanism");
  double profile_mu = 0;
  double eps_max = 10.0;
  int points = 101;
  profile->add_option("--mu", profile_mu, "GDP parameter")
      ->required()
      ->check(CLI::NonNegativeNumber);
  profile->add_option("--eps-max", eps_max, "Largest epsilon")
      ->check(CLI::PositiveNumber);
  profile->add_option("--points", points, "Grid points")
      ->check(CLI::Range(2, 1 << 20));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const bool seed_given = seed_opt->count() > 0;
  try {
    if (accountant->parsed()) {
      const GdpMu mu = ComposeGaussianGdp(acc_n, acc_sigma);
      const double eps = GdpToEps(mu, acc_delta);
      out << "mu=" << Fixed(mu.mu, 8) << "\n"
          << "eps=" << Fixed(eps, 8) << "\n"
          << "delta=" << Short(acc_delta) << "\n";
      return kExitOk;
    }

    if (audit->parsed()) {
      ExperimentSpec spec =
          ExperimentSpecFromConfig(ReadConfigFile(audit_config));
      if (seed_given) spec.train.seed = seed;
      if (jobs >= 0) spec.jobs = jobs;
      if (!output_dir.empty()) spec.output_dir = output_dir;
      ValidateExperimentSpec(spec);
      const fs::path dir = OutputDir(spec.output_dir);
      WriteText(dir / "config.ini", ExperimentSpecToConfigText(spec));
      const AuditResult result = RunAudit(spec);
      WriteAuditOutputs(dir, result);
      out << "adversary=" << AdversaryName(result.adversary) << "\n"
          << "eps_hat=" << Fixed(result.report.eps_hat, 6) << "\n"
          << "eps_theory=" << Fixed(result.report.eps_theory, 6) << "\n"
          << "mu_hat=" << Fixed(result.report.mu_hat.mu, 6) << "\n"
          << "failed_runs=" << result.failed_runs << "\n";
      return kExitOk;
    }

    if (simulate->parsed()) {
      const SimConfig cfg = sim_flags.Resolve(seed, seed_given, jobs);
      const double h = threshold_opt->count() ? threshold
                                              : OptimalThreshold(cfg.clip_c);
      const DriftFunction g = drift == "constant"
                                  ? DriftFunction::Constant(drift_value)
                                  : DriftFunction::WorstCase(h);
      g(0.0, cfg.batch_b, cfg.clip_c);  // rejects an out-of-range constant
      const fs::path dir = OutputDir(output_dir);
      WriteText(dir / "sim_config.ini", SimConfigToConfigText(cfg));
      const SimCurve curve = AuditSim(cfg, g);
      WriteSimCurveCsv(dir / "sim_curve.csv", curve);
      const std::vector<double> eps = curve.eps_hat();
      out << "eps_hat(1)=" << Fixed(eps.front(), 6) << "\n"
          << "eps_hat(T)=" << Fixed(eps.back(), 6) << "\n"
          << "eps_theory=" << Fixed(curve.eps_theory, 6) << "\n";
      if (eps.size() >= 2 && eps.front() > 0.0) {
        out << "ratio=" << Fixed(AmplificationRate(eps), 6) << "\n";
      }
      return kExitOk;
    }

    if (amp->parsed()) {
      const SimConfig cfg = amp_flags.Resolve(seed, seed_given, jobs);
      const fs::path dir = OutputDir(output_dir);
      WriteText(dir / "sim_config.ini", SimConfigToConfigText(cfg));
      const std::vector<AmpCell> cells = AmpGrid(cfg, batches, sigmas);
      WriteAmpGridCsv(dir / "amp_grid.csv", cells);
      for (const AmpCell& c : cells) {
        out << "B=" << c.batch_b << " sigma=" << Short(c.sigma)
            << " ratio=" << Fixed(c.ratio, 4) << "\n";
      }
      return kExitOk;
    }

    if (search->parsed()) {
      const SimConfig cfg = search_flags.Resolve(seed, seed_given, jobs);
      const fs::path dir = OutputDir(output_dir);
      WriteText(dir / "sim_config.ini", SimConfigToConfigText(cfg));
      const ThresholdSearchResult result = ThresholdSearch(cfg, grid);
      WriteThresholdSearchCsv(dir / "threshold_search.csv", result);
      out << "best_h=" << Fixed(result.best_h, 6) << "\n"
          << "best_eps=" << Fixed(result.best_eps, 6) << "\n"
          << "optimal_within_grid="
          << (result.optimal_within_grid ? "true" : "false") << "\n";
      return kExitOk;
    }

    if (profile->parsed()) {
      std::vector<double> grid_eps(points);
      for (int i = 0; i < points; ++i) {
        grid_eps[i] = eps_max * i / (points - 1);
      }
      const fs::path dir = OutputDir(output_dir);
      WriteProfileCsv(dir / "profile.csv",
                      PrivacyProfile(GdpMu{profile_mu}, grid_eps));
      out << "wrote " << (dir / "profile.csv").string() << "\n";
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace dpaudit
