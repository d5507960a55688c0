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

#include <string>
#include <vector>

#include "dqbm/fock.hpp"
#include "dqbm/ising.hpp"

namespace dqbm {

// Sign-of-quadrature measurement. Per mode, the eigenbasis of x and the weight
// each eigenvector contributes to the +1 outcome (1, 0, or 1/2 for x = 0).
struct SignPovm {
  FockSpace space;
  Eigen::MatrixXd x_eigenvectors;     // d×d, columns
  Eigen::VectorXd x_eigenvalues;      // ascending
  Eigen::VectorXd plus_weight;        // per eigenvector
  int zero_eigenvalues = 0;

  Eigen::MatrixXd local_projector(int outcome) const;             // d×d
  OperatorMatrix projector(int mode, int outcome) const;          // full space
};

SignPovm build_sign_povm(const FockSpace& space);

enum class DistributionSource { Lindblad, Jump, Closed, Balance, BoltzmannFit, Other };
std::string to_string(DistributionSource s);

struct SpinDistribution {
  int n_spins = 0;
  Eigen::VectorXd probabilities;  // canonical config order
  Eigen::VectorXd std_errors;     // empty unless Monte-Carlo
  DistributionSource source = DistributionSource::Other;

  void validate(double tol = 1e-9) const;
};

SpinDistribution make_distribution(int n_spins, Eigen::VectorXd p,
                                   DistributionSource source = DistributionSource::Other);

// Sign-outcome probabilities; the ket form is an unnormalized quadratic form divided by the norm.
SpinDistribution spin_distribution(const QuantumState& state, const SignPovm& povm);
Eigen::VectorXd spin_probabilities(const Eigen::VectorXcd& psi, const SignPovm& povm);
Eigen::VectorXd spin_probabilities(const Eigen::MatrixXcd& rho, const SignPovm& povm);

double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q);
double kl_divergence(const SpinDistribution& p, const SpinDistribution& q);

SpinDistribution boltzmann_distribution(const IsingInstance& inst, double beta);
Eigen::VectorXd boltzmann_weights(const Eigen::VectorXd& energies, double beta);

struct BoltzmannFit {
  double beta = 0.0;
  double d_kl = 0.0;
  double partition_function = 0.0;
  double beta_max = 50.0;
  bool at_boundary = false;
  std::vector<std::string> warnings;
};

struct FitOptions {
  double beta_max = 50.0;
  double tolerance = 1e-6;
  double zero_floor = 1e-12;
  // When false a minimizer pinned to the bracket edge raises NumericalError.
  bool allow_boundary = false;
};

BoltzmannFit fit_boltzmann(const SpinDistribution& sim, const IsingInstance& inst, const FitOptions& opt = {});
BoltzmannFit fit_boltzmann(const Eigen::VectorXd& sim, const Eigen::VectorXd& energies, const FitOptions& opt = {});

double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q);
double total_variation(const SpinDistribution& p, const SpinDistribution& q);

// CSV with columns config_index,spins,E_ising,probability,stderr.
std::string distribution_csv(const SpinDistribution& dist, const IsingInstance& inst);
SpinDistribution read_distribution_csv(const std::string& path, int n_spins);

}  // namespace dqbm
