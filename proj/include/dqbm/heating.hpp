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

#include <vector>

#include "dqbm/measure.hpp"
#include "dqbm/qbm.hpp"

namespace dqbm {

// Eigenstates of H(t) and the photon-loss matrix elements between them.
struct QuasienergySpectrum {
  FockSpace space;
  double time = 0.0;
  Eigen::VectorXd energies;           // ascending
  Eigen::MatrixXcd vectors;           // columns |E_n>
  std::vector<Eigen::MatrixXcd> jump; // jump[i](m, n) = <E_m|a_i|E_n>

  Index size() const { return energies.size(); }
  double orthonormality_defect() const;
};

QuasienergySpectrum quasienergy_spectrum(const QbmSystem& sys, double t);

struct BalanceSteadyState {
  Eigen::VectorXd populations;  // rho_nn over quasienergy states
  double residual = 0.0;        // max |L rho| with L scaled to unit max entry
  int null_dimension = 1;
};

// Rate matrix W(n, m) = 2 kappa sum_i |a_i(n, m)|^2 and generator L = W - diag(column sums).
Eigen::MatrixXd balance_rates(const QuasienergySpectrum& spec, double kappa);
Eigen::MatrixXd balance_generator(const QuasienergySpectrum& spec, double kappa);

// Throws DegenerateSteadyState when the null space is not one-dimensional.
BalanceSteadyState balance_steady_state(const QuasienergySpectrum& spec, double kappa);

// Smallest n whose lowest-n states carry at least `mass` of the population (at least 2).
int default_fit_window(const BalanceSteadyState& ss, double mass = 0.99);

// Least-squares slope of ln rho_nn against -(E_n - E_0) over the n_states lowest states.
double fit_quasienergy_temperature(const BalanceSteadyState& ss, const QuasienergySpectrum& spec, int n_states);

SpinDistribution eigenstate_spin_distribution(const QuasienergySpectrum& spec, Index n, const SignPovm& povm);
SpinDistribution balance_spin_distribution(const BalanceSteadyState& ss, const QuasienergySpectrum& spec,
                                           const SignPovm& povm);

struct HeatingAnalysis {
  QuasienergySpectrum spectrum;
  BalanceSteadyState steady;
  int fit_states = 0;
  double beta_prime = 0.0;
  double alpha = 0.0;
  SpinDistribution balance;    // P^BE
  SpinDistribution reference;  // Lindblad P_Ising at the same time
  BoltzmannFit reference_fit;
  double total_variation = 0.0;
  double ratio = 0.0;          // 2 xi0 alpha^2 beta' / beta
};

// fit_states <= 0 selects default_fit_window.
HeatingAnalysis analyze_heating(const QbmSystem& sys, double t, const SpinDistribution& reference,
                                const SignPovm& povm, int fit_states = 0, const FitOptions& fit = {});

}  // namespace dqbm
