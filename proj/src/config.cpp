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

#include "dqbm/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "dqbm/errors.hpp"
#include "dqbm/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dqbm {

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Closed: return "closed";
    case ExperimentKind::Lindblad: return "lindblad";
    case ExperimentKind::Jump: return "jump";
    case ExperimentKind::Heating: return "heating";
    case ExperimentKind::Sweep: return "sweep";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::Closed, ExperimentKind::Lindblad, ExperimentKind::Jump, ExperimentKind::Heating,
                 ExperimentKind::Sweep})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

namespace {

std::string source_name(InstanceSource s) {
  switch (s) {
    case InstanceSource::Inline: return "inline";
    case InstanceSource::File: return "file";
    case InstanceSource::Random: return "random";
  }
  return "?";
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : j.items())
    if (!allowed.count(item.key())) throw ConfigError("unknown key '" + item.key() + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void apply_params(const json& j, QbmParams& p) {
  only_keys(j, "params", {"K", "delta", "xi0", "kappa", "nbar", "p_final", "tau", "schedule"});
  read(j, "K", p.K);
  read(j, "delta", p.delta);
  read(j, "xi0", p.xi0);
  read(j, "kappa", p.kappa);
  read(j, "nbar", p.nbar);
  read(j, "p_final", p.p_final);
  read(j, "tau", p.tau);
  if (j.contains("schedule")) p.schedule = schedule_kind_from_string(j.at("schedule").get<std::string>());
}

json params_json(const QbmParams& p) {
  return {{"K", p.K},         {"delta", p.delta},     {"xi0", p.xi0},
          {"kappa", p.kappa}, {"nbar", p.nbar},       {"p_final", p.p_final},
          {"tau", p.tau},     {"schedule", to_string(p.schedule)}};
}

}  // namespace

void RunConfig::validate() const {
  if (schema_version != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(schema_version));
  if (cutoff < 1) throw ConfigError("fock.cutoff must be >= 1");
  if (!(t_end > 0.0)) throw ConfigError("samples.t_end must be positive");
  if (sample_count < 2) throw ConfigError("samples.count must be >= 2");
  if (ensemble.n_trajectories < 1) throw ConfigError("ensemble.trajectories must be >= 1");
  if (rng != kRngName) throw ConfigError("unsupported rng '" + rng + "' (only " + kRngName + ")");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (!(fit.beta_max > 0.0) || !(fit.tolerance > 0.0) || !(fit.zero_floor > 0.0))
    throw ConfigError("fit options must be positive");
  if (heating_fit_states < 0 || heating_fit_states == 1) throw ConfigError("heating.fit_states must be 0 or >= 2");

  const bool random = instance.source == InstanceSource::Random;
  if (kind == ExperimentKind::Sweep) {
    if (!random) throw ConfigError("sweep runs need a random instance source");
    if (!variants.empty()) throw ConfigError("sweep runs do not take variants");
  } else if (random && instance.count != 1) {
    throw ConfigError("only sweep runs accept instance.count > 1");
  }
  if (random && (instance.n_spins < 1 || instance.count < 1))
    throw ConfigError("random instances need n_spins >= 1 and count >= 1");
  if (instance.source == InstanceSource::Inline) instance.inline_instance.validate();

  std::set<std::string> labels;
  std::vector<const Variant*> all{nullptr};
  for (const auto& v : variants) {
    if (v.label.empty()) throw ConfigError("variant labels must be non-empty");
    if (v.label.find_first_of("/\\") != std::string::npos) throw ConfigError("variant label contains a path separator");
    if (!labels.insert(v.label).second) throw ConfigError("duplicate variant label '" + v.label + "'");
    all.push_back(&v);
  }
  for (const Variant* v : all) {
    const QbmParams p = variant_params(*this, v);
    const std::string where = v ? " (variant " + v->label + ")" : "";
    if (kind == ExperimentKind::Closed && p.kappa != 0.0) throw ConfigError("closed runs need kappa = 0" + where);
    if (kind == ExperimentKind::Heating && !(p.kappa > 0.0)) throw ConfigError("heating runs need kappa > 0" + where);
    if ((kind == ExperimentKind::Jump || kind == ExperimentKind::Heating) && p.nbar != 0.0)
      throw ConfigError(to_string(kind) + " runs support nbar = 0 only" + where);
  }
  IntegratorConfig ic = integrator;
  ic.sample_times = uniform_samples(t_end, sample_count);
  ic.validate();
}

QbmParams variant_params(const RunConfig& cfg, const Variant* v) {
  QbmParams p = cfg.params;
  if (v) apply_params(v->params, p);
  return normalize_sign_convention(p);
}

RunConfig config_from_json(const json& j, const std::string& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  try {
    only_keys(j, "config",
              {"schema_version", "name", "kind", "instance", "params", "fock", "integrator", "samples", "ensemble",
               "threads", "output", "variants", "fit", "heating", "sweep"});
    if (!j.contains("schema_version")) throw ConfigError("missing schema_version");
    c.schema_version = j.at("schema_version").get<int>();
    if (c.schema_version != kSchemaVersion)
      throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));
    read(j, "name", c.name);
    if (!j.contains("kind")) throw ConfigError("missing kind");
    c.kind = experiment_kind_from_string(j.at("kind").get<std::string>());

    if (!j.contains("instance")) throw ConfigError("missing instance");
    const json& ji = j.at("instance");
    if (!ji.is_object() || !ji.contains("source")) throw ConfigError("instance.source is required");
    const std::string src = ji.at("source").get<std::string>();
    if (src == "inline") {
      only_keys(ji, "instance", {"source", "n_spins", "J", "h"});
      c.instance.source = InstanceSource::Inline;
      json inst = ji;
      inst.erase("source");
      c.instance.inline_instance = instance_from_json(inst);
    } else if (src == "file") {
      only_keys(ji, "instance", {"source", "path"});
      c.instance.source = InstanceSource::File;
      c.instance.path = ji.at("path").get<std::string>();
    } else if (src == "random") {
      only_keys(ji, "instance", {"source", "n_spins", "seed", "count"});
      c.instance.source = InstanceSource::Random;
      read(ji, "n_spins", c.instance.n_spins);
      read(ji, "seed", c.instance.seed);
      read(ji, "count", c.instance.count);
    } else {
      throw ConfigError("unknown instance source '" + src + "'");
    }

    if (j.contains("params")) apply_params(j.at("params"), c.params);
    if (j.contains("fock")) {
      only_keys(j.at("fock"), "fock", {"cutoff"});
      read(j.at("fock"), "cutoff", c.cutoff);
    }
    if (j.contains("integrator")) {
      const json& g = j.at("integrator");
      only_keys(g, "integrator", {"method", "rtol", "atol", "max_step", "step", "positivity_every"});
      if (g.contains("method")) c.integrator.method = method_from_string(g.at("method").get<std::string>());
      read(g, "rtol", c.integrator.rtol);
      read(g, "atol", c.integrator.atol);
      read(g, "max_step", c.integrator.max_step);
      read(g, "step", c.integrator.step);
      read(g, "positivity_every", c.integrator.positivity_every);
    }
    if (j.contains("samples")) {
      only_keys(j.at("samples"), "samples", {"t_end", "count"});
      read(j.at("samples"), "t_end", c.t_end);
      read(j.at("samples"), "count", c.sample_count);
    }
    if (j.contains("ensemble")) {
      const json& e = j.at("ensemble");
      only_keys(e, "ensemble", {"trajectories", "seed", "rng"});
      read(e, "trajectories", c.ensemble.n_trajectories);
      read(e, "seed", c.ensemble.base_seed);
      read(e, "rng", c.rng);
    }
    read(j, "threads", c.threads);
    if (j.contains("output")) {
      only_keys(j.at("output"), "output", {"dir"});
      read(j.at("output"), "dir", c.output_dir);
    }
    if (j.contains("variants")) {
      for (const json& v : j.at("variants")) {
        only_keys(v, "variant", {"label", "params"});
        Variant var;
        var.label = v.at("label").get<std::string>();
        var.params = v.value("params", json::object());
        QbmParams probe;
        apply_params(var.params, probe);  // rejects unknown keys early
        c.variants.push_back(std::move(var));
      }
    }
    if (j.contains("fit")) {
      only_keys(j.at("fit"), "fit", {"beta_max", "tolerance", "zero_floor"});
      read(j.at("fit"), "beta_max", c.fit.beta_max);
      read(j.at("fit"), "tolerance", c.fit.tolerance);
      read(j.at("fit"), "zero_floor", c.fit.zero_floor);
    }
    if (j.contains("heating")) {
      only_keys(j.at("heating"), "heating", {"fit_states"});
      read(j.at("heating"), "fit_states", c.heating_fit_states);
    }
    if (j.contains("sweep")) {
      only_keys(j.at("sweep"), "sweep", {"baseline_seed"});
      read(j.at("sweep"), "baseline_seed", c.baseline_seed);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.ensemble.threads = c.threads;
  c.integrator.sample_times = uniform_samples(c.t_end, std::max(c.sample_count, 1));
  c.validate();
  return c;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  j["kind"] = to_string(c.kind);
  json ji;
  switch (c.instance.source) {
    case InstanceSource::Inline:
      ji = instance_to_json(c.instance.inline_instance);
      break;
    case InstanceSource::File:
      ji["path"] = c.instance.path;
      break;
    case InstanceSource::Random:
      ji["n_spins"] = c.instance.n_spins;
      ji["seed"] = c.instance.seed;
      ji["count"] = c.instance.count;
      break;
  }
  ji["source"] = source_name(c.instance.source);
  j["instance"] = ji;
  j["params"] = params_json(c.params);
  j["fock"] = {{"cutoff", c.cutoff}};
  j["integrator"] = {{"method", to_string(c.integrator.method)},
                     {"rtol", c.integrator.rtol},
                     {"atol", c.integrator.atol},
                     {"max_step", c.integrator.max_step},
                     {"step", c.integrator.step},
                     {"positivity_every", c.integrator.positivity_every}};
  j["samples"] = {{"t_end", c.t_end}, {"count", c.sample_count}};
  j["ensemble"] = {{"trajectories", c.ensemble.n_trajectories}, {"seed", c.ensemble.base_seed}, {"rng", c.rng}};
  j["threads"] = c.threads;
  j["output"] = {{"dir", c.output_dir}};
  json vs = json::array();
  for (const auto& v : c.variants) vs.push_back({{"label", v.label}, {"params", v.params}});
  j["variants"] = vs;
  j["fit"] = {{"beta_max", c.fit.beta_max}, {"tolerance", c.fit.tolerance}, {"zero_floor", c.fit.zero_floor}};
  j["heating"] = {{"fit_states", c.heating_fit_states}};
  j["sweep"] = {{"baseline_seed", c.baseline_seed}};
  return j;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  RunConfig c = config_from_json(j, fs::path(path).parent_path().string());
  if (c.instance.source == InstanceSource::File) resolve_instance(c);  // the file must exist
  return c;
}

IsingInstance resolve_instance(const RunConfig& cfg) {
  switch (cfg.instance.source) {
    case InstanceSource::Inline:
      return cfg.instance.inline_instance;
    case InstanceSource::File: {
      fs::path p(cfg.instance.path);
      if (p.is_relative() && !cfg.base_dir.empty()) p = fs::path(cfg.base_dir) / p;
      return read_instance(p.string());
    }
    case InstanceSource::Random:
      return sweep_instance(cfg, 0);
  }
  throw ConfigError("unknown instance source");
}

IsingInstance sweep_instance(const RunConfig& cfg, int index, std::uint64_t* seed_out) {
  if (cfg.instance.source != InstanceSource::Random) throw ConfigError("not a random instance source");
  if (index < 0 || index >= cfg.instance.count) throw ConfigError("sweep index out of range");
  const std::uint64_t seed = derive_seed(cfg.instance.seed, static_cast<std::uint64_t>(index));
  if (seed_out) *seed_out = seed;
  return random_instance(cfg.instance.n_spins, seed);
}

std::string preset_path(const std::string& name) {
  if (name.empty() || name.find_first_of("/\\.") != std::string::npos) throw ConfigError("bad preset name '" + name + "'");
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("DQBM_PRESET_DIR")) dirs.emplace_back(env);
#ifdef DQBM_SOURCE_DIR
  dirs.emplace_back(fs::path(DQBM_SOURCE_DIR) / "presets");
#endif
  dirs.emplace_back("presets");
  for (const auto& d : dirs) {
    const fs::path p = d / (name + ".json");
    if (fs::exists(p)) return p.string();
  }
  throw ConfigError("preset '" + name + "' not found");
}

}  // namespace dqbm
