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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqbm/dynamics.hpp"
#include "dqbm/rng.hpp"

namespace dqbm {

inline constexpr int kSchemaVersion = 1;

enum class ExperimentKind { Closed, Lindblad, Jump, Heating, Sweep };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

enum class InstanceSource { Inline, File, Random };

struct InstanceSpec {
  InstanceSource source = InstanceSource::Inline;
  IsingInstance inline_instance;
  std::string path;       // file source, relative to the config's directory
  int n_spins = 2;        // random source
  std::uint64_t seed = 1;
  int count = 1;
};

// Parameter overrides applied on top of the base parameters.
struct Variant {
  std::string label;
  nlohmann::json params;  // subset of the params object
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::string name;
  ExperimentKind kind = ExperimentKind::Lindblad;
  InstanceSpec instance;
  QbmParams params;
  int cutoff = 14;
  IntegratorConfig integrator;  // sample_times filled from t_end/count
  double t_end = 1000.0;
  int sample_count = 200;
  EnsembleConfig ensemble;
  std::string rng = kRngName;
  int threads = 1;
  std::string output_dir = "out";
  std::vector<Variant> variants;
  FitOptions fit;
  int heating_fit_states = 0;       // 0: smallest window holding 99% of the mass
  std::uint64_t baseline_seed = 7;  // sweep: random-distribution baseline
  std::string base_dir = ".";       // directory the config was loaded from; not serialized

  void validate() const;  // throws ConfigError
};

RunConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::string& path);

// Parameters of one variant (the base parameters when `v` is null).
QbmParams variant_params(const RunConfig& cfg, const Variant* v);

// Resolves a concrete instance for non-sweep runs.
IsingInstance resolve_instance(const RunConfig& cfg);

// Instance `index` of a random sweep.
IsingInstance sweep_instance(const RunConfig& cfg, int index, std::uint64_t* seed_out = nullptr);

// Locates presets/<name>.json: $DQBM_PRESET_DIR, then the source tree, then ./presets.
std::string preset_path(const std::string& name);

}  // namespace dqbm
