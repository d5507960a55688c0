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

#include "dqbm/ising.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dqbm/errors.hpp"
#include "dqbm/io.hpp"
#include "dqbm/rng.hpp"

namespace dqbm {

using Index = Eigen::Index;

IsingInstance IsingInstance::make(Eigen::MatrixXd J, Eigen::VectorXd h) {
  IsingInstance inst;
  inst.n_spins = static_cast<int>(h.size());
  inst.J = std::move(J);
  inst.h = std::move(h);
  inst.validate();
  return inst;
}

void IsingInstance::validate() const {
  if (n_spins < 1) throw ConfigError("Ising instance needs at least one spin");
  if (J.rows() != n_spins || J.cols() != n_spins || h.size() != n_spins)
    throw ConfigError("Ising instance dimensions disagree");
  for (int i = 0; i < n_spins; ++i) {
    if (J(i, i) != 0.0) throw ConfigError("J must have a zero diagonal");
    for (int j = 0; j < i; ++j)
      if (J(i, j) != J(j, i)) throw ConfigError("J must be symmetric");
  }
  if (!J.allFinite() || !h.allFinite()) throw ConfigError("Ising instance has non-finite entries");
}

SpinConfig SpinConfig::from_index(std::uint64_t index, int n_spins) {
  if (n_spins < 1 || n_spins > 63) throw std::invalid_argument("spin count out of range");
  if (index >> n_spins) throw std::out_of_range("configuration index out of range");
  SpinConfig s;
  s.spins.resize(n_spins);
  for (int i = 0; i < n_spins; ++i) s.spins[i] = ((index >> i) & 1U) ? 1 : -1;
  return s;
}

std::uint64_t SpinConfig::index() const {
  std::uint64_t idx = 0;
  for (int i = 0; i < size(); ++i) {
    if (spins[i] == 1) idx |= (std::uint64_t{1} << i);
    else if (spins[i] != -1) throw std::invalid_argument("spin entries must be +1 or -1");
  }
  return idx;
}

std::string SpinConfig::label() const {
  std::string s;
  for (int v : spins) s += v > 0 ? '+' : '-';
  return s;
}

double ising_energy(const IsingInstance& inst, const SpinConfig& s) {
  if (s.size() != inst.n_spins) throw std::invalid_argument("spin configuration length mismatch");
  double e = 0.0;
  for (int i = 0; i < inst.n_spins; ++i) {
    for (int j = i + 1; j < inst.n_spins; ++j) e -= inst.J(i, j) * s.spins[i] * s.spins[j];
    e += inst.h(i) * s.spins[i];
  }
  return e;
}

Eigen::VectorXd energy_table(const IsingInstance& inst) {
  if (inst.n_spins > kMaxEnumerationSpins) throw std::invalid_argument("too many spins to enumerate");
  const std::uint64_t n = std::uint64_t{1} << inst.n_spins;
  Eigen::VectorXd e(static_cast<Index>(n));
  for (std::uint64_t k = 0; k < n; ++k) e(static_cast<Index>(k)) = ising_energy(inst, SpinConfig::from_index(k, inst.n_spins));
  return e;
}

GroundStateResult brute_force_ground(const IsingInstance& inst) {
  GroundStateResult res;
  res.energies = energy_table(inst);
  Index best = 0;
  for (Index k = 1; k < res.energies.size(); ++k)
    if (res.energies(k) < res.energies(best)) best = k;
  res.energy = res.energies(best);
  res.ground = SpinConfig::from_index(best, inst.n_spins);
  for (Index k = 0; k < res.energies.size(); ++k)
    if (res.energies(k) == res.energy) res.ties.push_back(SpinConfig::from_index(k, inst.n_spins));
  return res;
}

int hamming_distance(const SpinConfig& a, const SpinConfig& b) {
  if (a.size() != b.size()) throw std::invalid_argument("hamming distance of unequal lengths");
  int d = 0;
  for (int i = 0; i < a.size(); ++i) d += a.spins[i] != b.spins[i];
  return d;
}

IsingInstance random_instance(int n_spins, std::uint64_t seed) {
  if (n_spins < 1) throw ConfigError("n_spins must be >= 1");
  Rng rng(seed);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n_spins, n_spins);
  for (int i = 0; i < n_spins; ++i)
    for (int j = i + 1; j < n_spins; ++j) J(i, j) = J(j, i) = rng.uniform(-1.0, 1.0);
  Eigen::VectorXd h(n_spins);
  for (int i = 0; i < n_spins; ++i) h(i) = rng.uniform(-1.0, 1.0);
  return IsingInstance::make(std::move(J), std::move(h));
}

nlohmann::json instance_to_json(const IsingInstance& inst) {
  nlohmann::json j;
  j["n_spins"] = inst.n_spins;
  std::vector<double> upper;
  for (int i = 0; i < inst.n_spins; ++i)
    for (int k = i + 1; k < inst.n_spins; ++k) upper.push_back(inst.J(i, k));
  j["J"] = upper;
  j["h"] = std::vector<double>(inst.h.data(), inst.h.data() + inst.h.size());
  return j;
}

IsingInstance instance_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n_spins").get<int>();
    if (n < 1) throw ConfigError("n_spins must be >= 1");
    const auto upper = j.at("J").get<std::vector<double>>();
    const auto h = j.at("h").get<std::vector<double>>();
    if (upper.size() != static_cast<size_t>(n) * (n - 1) / 2)
      throw ConfigError("J must list the " + std::to_string(n * (n - 1) / 2) + " upper-triangle entries");
    if (h.size() != static_cast<size_t>(n)) throw ConfigError("h must have n_spins entries");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    size_t k = 0;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b, ++k) J(a, b) = J(b, a) = upper[k];
    return IsingInstance::make(std::move(J), Eigen::Map<const Eigen::VectorXd>(h.data(), n));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed instance: ") + e.what());
  }
}

IsingInstance read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open instance file " + path);
  try {
    return instance_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("instance file " + path + ": " + e.what());
  }
}

void write_instance(const IsingInstance& inst, const std::string& path) {
  write_file_atomic(path, instance_to_json(inst).dump(2) + "\n");
}

}  // namespace dqbm
