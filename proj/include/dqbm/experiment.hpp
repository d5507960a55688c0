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

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dqbm/config.hpp"
#include "dqbm/heating.hpp"

namespace dqbm {

inline constexpr const char* kVersion = "1.0.0";

using Logger = std::function<void(const std::string&)>;

struct SampleRecord {
  double t = 0.0;
  double pump = 0.0;
  double alpha = 0.0;
  SpinDistribution dist;
  double beta = 0.0;  // NaN for closed runs
  double d_kl = 0.0;
};

struct RunReport {
  std::string label;  // variant label, empty for the base run
  ExperimentKind kind = ExperimentKind::Lindblad;
  IsingInstance instance;
  QbmParams params;
  int cutoff = 0;
  std::vector<SampleRecord> samples;
  std::optional<BoltzmannFit> final_fit;  // dissipative runs
  IntegratorStats stats;
  std::vector<TrajectoryRecord> trajectories;  // jump runs, probabilities dropped
  std::optional<HeatingAnalysis> heating;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;

  const SpinDistribution& final_distribution() const { return samples.back().dist; }
  long total_jumps() const;
};

struct SweepRecord {
  int index = 0;
  std::uint64_t seed = 0;
  IsingInstance instance;
  bool ok = false;
  std::string error;
  double beta = 0.0;
  double d_kl = 0.0;
  double baseline_beta = 0.0;
  double baseline_d_kl = 0.0;
};

struct SweepReport {
  std::vector<SweepRecord> records;
  int failures = 0;
  double beta_mean = 0.0, beta_sd = 0.0;
  double d_kl_mean = 0.0, d_kl_sd = 0.0, d_kl_max = 0.0;
  double baseline_d_kl_mean = 0.0, baseline_d_kl_sd = 0.0;
  double wall_seconds = 0.0;
};

// The integrator settings of a config with its sample grid filled in.
IntegratorConfig integrator_for(const RunConfig& cfg);

// One run per variant (or the base parameters when there are none). Sweeps are rejected.
std::vector<RunReport> run_experiment(const RunConfig& cfg, const Logger& log = {});
RunReport run_single(const RunConfig& cfg, const Variant* variant, const Logger& log = {});

SweepReport run_sweep(const RunConfig& cfg, const Logger& log = {});

// Output files; `dir` is created if needed and every file is written atomically.
void write_run_outputs(const RunReport& r, const RunConfig& cfg, const std::string& dir);
void write_sweep_outputs(const SweepReport& r, const RunConfig& cfg, const std::string& dir);
void write_metadata(const std::string& dir, int threads, double wall_seconds);

std::string timeseries_csv(const RunReport& r);
nlohmann::json run_summary(const RunReport& r);
nlohmann::json fit_json(const BoltzmannFit& f);
std::string sweep_csv(const SweepReport& r);
nlohmann::json sweep_summary(const SweepReport& r);

}  // namespace dqbm
