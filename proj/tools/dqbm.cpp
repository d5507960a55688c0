// Copyright 2026 The dqbm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: run, sweep, heating, fit, validate.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dqbm/errors.hpp"
#include "dqbm/experiment.hpp"
#include "dqbm/io.hpp"

namespace fs = std::filesystem;
using namespace dqbm;

namespace {

enum Exit { kOk = 0, kConfig = 1, kNumerical = 2, kPartial = 3 };

struct Common {
  std::string config;
  std::string preset;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config) {
  auto* cfg = cmd->add_option("config", c.config, "Config file (JSON)");
  auto* pre = cmd->add_option("--preset", c.preset, "Use presets/<name>.json instead of a config file");
  cfg->excludes(pre);
  pre->excludes(cfg);
  if (!needs_config) return;
  cmd->add_option("--out-dir", c.out_dir, "Output directory (overrides output.dir)");
  cmd->add_option("--seed", c.seed, "Override the ensemble seed and the random-instance seed");
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("-q,--quiet", c.quiet, "No progress output");
}

RunConfig load(const Common& c) {
  if (c.config.empty() == c.preset.empty()) throw ConfigError("give exactly one of <config> or --preset");
  RunConfig cfg = load_config(c.preset.empty() ? c.config : preset_path(c.preset));
  if (c.seed) {
    cfg.ensemble.base_seed = *c.seed;
    if (cfg.instance.source == InstanceSource::Random) cfg.instance.seed = *c.seed;
  }
  if (c.threads) {
    cfg.threads = *c.threads;
    cfg.ensemble.threads = *c.threads;
  }
  if (!c.out_dir.empty()) cfg.output_dir = c.out_dir;
  cfg.validate();
  return cfg;
}

Logger logger(const Common& c) {
  if (c.quiet) return {};
  return [](const std::string& s) { std::cerr << s << std::endl; };
}

int do_run(const Common& c, std::optional<ExperimentKind> require) {
  RunConfig cfg = load(c);
  if (require && *require == ExperimentKind::Heating && cfg.kind == ExperimentKind::Lindblad)
    cfg.kind = ExperimentKind::Heating;
  if (require && cfg.kind != *require)
    throw ConfigError("this verb needs a '" + to_string(*require) + "' config, got '" + to_string(cfg.kind) + "'");
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path root(cfg.output_dir);
  fs::create_directories(root);
  write_file_atomic((root / "config.json").string(), config_to_json(cfg).dump(2) + "\n");
  int status = kOk;
  if (cfg.kind == ExperimentKind::Sweep) {
    const SweepReport rep = run_sweep(cfg, logger(c));
    write_sweep_outputs(rep, cfg, root.string());
    std::cout << sweep_summary(rep).dump(2) << std::endl;
    if (rep.failures > 0) status = kPartial;
  } else {
    const std::vector<RunReport> reports = run_experiment(cfg, logger(c));
    for (const auto& r : reports) {
      const fs::path dir = r.label.empty() ? root : root / r.label;
      write_run_outputs(r, cfg, dir.string());
      nlohmann::json line = {{"label", r.label}};
      if (r.final_fit) line["final_fit"] = fit_json(*r.final_fit);
      const auto& p = r.final_distribution().probabilities;
      line["final_distribution"] = std::vector<double>(p.data(), p.data() + p.size());
      if (r.heating) line["heating_ratio"] = r.heating->ratio;
      std::cout << line.dump() << std::endl;
    }
  }
  write_metadata(root.string(), cfg.threads,
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return status;
}

int do_validate(const Common& c) {
  const RunConfig cfg = load(c);
  if (cfg.kind != ExperimentKind::Sweep) resolve_instance(cfg);
  std::cout << config_to_json(cfg).dump(2) << std::endl;
  return kOk;
}

int do_fit(const std::string& dist_path, const std::string& instance_path, const std::string& out_dir,
           double beta_max) {
  const IsingInstance inst = read_instance(instance_path);
  const SpinDistribution dist = read_distribution_csv(dist_path, inst.n_spins);
  FitOptions opt;
  opt.beta_max = beta_max;
  const BoltzmannFit f = fit_boltzmann(dist, inst, opt);
  const std::string text = fit_json(f).dump(2) + "\n";
  if (!out_dir.empty()) write_file_atomic((fs::path(out_dir) / "fit.json").string(), text);
  std::cout << text;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dissipative quantum bifurcation machine simulator"};
  app.set_version_flag("--version", std::string("dqbm ") + kVersion);
  app.require_subcommand(1);

  Common run_opts, sweep_opts, heat_opts, val_opts;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config");
  add_common(run, run_opts, true);
  auto* sweep = app.add_subcommand("sweep", "Run a random-instance sweep");
  add_common(sweep, sweep_opts, true);
  auto* heat = app.add_subcommand("heating", "Lindblad run followed by the balance-equation analysis");
  add_common(heat, heat_opts, true);
  auto* val = app.add_subcommand("validate", "Load and check a config, print its canonical form");
  add_common(val, val_opts, false);

  std::string dist_path, inst_path, fit_out;
  double beta_max = 50.0;
  auto* fit = app.add_subcommand("fit", "Fit a Boltzmann distribution to a distribution CSV");
  fit->add_option("distribution", dist_path, "CSV with config_index,spins,E_ising,probability,stderr")->required();
  fit->add_option("instance", inst_path, "Instance JSON file")->required();
  fit->add_option("--out-dir", fit_out, "Also write fit.json here");
  fit->add_option("--beta-max", beta_max, "Upper end of the beta search interval")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return do_run(run_opts, std::nullopt);
    if (*sweep) return do_run(sweep_opts, ExperimentKind::Sweep);
    if (*heat) return do_run(heat_opts, ExperimentKind::Heating);
    if (*val) return do_validate(val_opts);
    if (*fit) return do_fit(dist_path, inst_path, fit_out, beta_max);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << std::endl;
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << std::endl;
    return kConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << std::endl;
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kNumerical;
  }
  return kOk;
}
