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
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace dqbm {

struct IsingInstance {
  int n_spins = 0;
  Eigen::MatrixXd J;  // symmetric, zero diagonal
  Eigen::VectorXd h;

  static IsingInstance make(Eigen::MatrixXd J, Eigen::VectorXd h);
  void validate() const;
  bool operator==(const IsingInstance& o) const { return n_spins == o.n_spins && J == o.J && h == o.h; }
};

// Bit i of the canonical index is set when s_i = +1.
struct SpinConfig {
  std::vector<int> spins;

  static SpinConfig from_index(std::uint64_t index, int n_spins);
  std::uint64_t index() const;
  std::string label() const;  // e.g. "+-" for (+1, -1)
  int size() const { return static_cast<int>(spins.size()); }
};

double ising_energy(const IsingInstance& inst, const SpinConfig& s);

// Energies of all 2^N configurations in canonical order.
Eigen::VectorXd energy_table(const IsingInstance& inst);

struct GroundStateResult {
  SpinConfig ground;
  double energy = 0.0;
  std::vector<SpinConfig> ties;  // every configuration at the minimum, ascending index
  Eigen::VectorXd energies;
};

inline constexpr int kMaxEnumerationSpins = 24;

GroundStateResult brute_force_ground(const IsingInstance& inst);

int hamming_distance(const SpinConfig& a, const SpinConfig& b);

// J upper triangle (row-major) then h, each uniform on (-1, 1).
IsingInstance random_instance(int n_spins, std::uint64_t seed);

nlohmann::json instance_to_json(const IsingInstance& inst);
IsingInstance instance_from_json(const nlohmann::json& j);
IsingInstance read_instance(const std::string& path);
void write_instance(const IsingInstance& inst, const std::string& path);

}  // namespace dqbm
