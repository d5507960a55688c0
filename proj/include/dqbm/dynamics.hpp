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
#include <functional>
#include <string>
#include <vector>

#include "dqbm/measure.hpp"
#include "dqbm/qbm.hpp"

namespace dqbm {

// dopri5: adaptive Dormand-Prince 5(4) with PI step control (the default).
// rk4: classical fixed-step Runge-Kutta.
// split: fixed-step symmetric splitting with exact single-mode, pair-hopping
//   and damping sub-propagators; second order, no stiffness step limit.
enum class Method { Dopri5, Rk4, Split };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct IntegratorConfig {
  Method method = Method::Dopri5;
  double rtol = 1e-8;
  double atol = 1e-10;
  double max_step = 1.0;
  double step = 0.05;  // rk4 and split
  std::vector<double> sample_times;
  // Density runs compute min eig(rho) every this many samples (0: final sample only).
  int positivity_every = 1;

  void validate() const;  // throws ConfigError
};

// `count` equally spaced points on [0, t_end].
std::vector<double> uniform_samples(double t_end, int count);

struct IntegratorStats {
  long steps = 0;
  long rejected = 0;
  long rhs_evals = 0;
  double max_norm_drift = 0.0;   // kets: |<psi|psi> - 1| before renormalization
  double max_trace_drift = 0.0;  // densities: |Tr rho - 1|
  double min_eigenvalue = 1.0;   // densities: smallest checked eigenvalue

  void merge(const IntegratorStats& o);
};

using KetObserver = std::function<void(int sample, double t, const Eigen::VectorXcd& psi)>;
using DensityObserver = std::function<void(int sample, double t, const Eigen::MatrixXcd& rho)>;

IntegratorStats evolve_schrodinger(const QbmSystem& sys, const QuantumState& psi0, const IntegratorConfig& cfg,
                                   const KetObserver& observe);
IntegratorStats evolve_lindblad(const QbmSystem& sys, const QuantumState& rho0, const IntegratorConfig& cfg,
                                const DensityObserver& observe);

struct KetRun {
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> states;
  IntegratorStats stats;
};

struct DensityRun {
  std::vector<double> times;
  std::vector<Eigen::MatrixXcd> states;
  IntegratorStats stats;
};

KetRun evolve_schrodinger(const QbmSystem& sys, const QuantumState& psi0, const IntegratorConfig& cfg);
DensityRun evolve_lindblad(const QbmSystem& sys, const QuantumState& rho0, const IntegratorConfig& cfg);

struct EnsembleConfig {
  int n_trajectories = 100;
  std::uint64_t base_seed = 1;
  int threads = 1;
  bool keep_final_states = false;
};

struct JumpEvent {
  double time = 0.0;
  int mode = 0;
};

struct TrajectoryRecord {
  int id = 0;
  std::uint64_t seed = 0;
  std::vector<JumpEvent> jumps;
  Eigen::MatrixXd probabilities;  // samples × 2^N
  IntegratorStats stats;
  Eigen::VectorXcd final_state;   // normalized; empty unless requested
};

struct TrajectoryEnsemble {
  EnsembleConfig config;
  std::vector<double> times;
  std::vector<TrajectoryRecord> trajectories;
  std::vector<SpinDistribution> mean;  // per sample time, with standard errors

  const SpinDistribution& final_distribution() const { return mean.back(); }
  long total_jumps() const;
};

// One Monte-Carlo wave-function trajectory; a pure function of (system, cfg, base_seed, id).
TrajectoryRecord run_trajectory(const QbmSystem& sys, const QuantumState& psi0, const IntegratorConfig& cfg,
                                const SignPovm& povm, std::uint64_t base_seed, int id, bool keep_state = false);

TrajectoryEnsemble evolve_quantum_jump(const QbmSystem& sys, const QuantumState& psi0, const IntegratorConfig& cfg,
                                       const EnsembleConfig& ens, const SignPovm& povm);

// Re-aggregates any subset of trajectories (same sample grid).
std::vector<SpinDistribution> aggregate_trajectories(const std::vector<TrajectoryRecord>& trajs, int n_spins);

}  // namespace dqbm
