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

#include "dqbm/fock.hpp"
#include "dqbm/ising.hpp"

namespace dqbm {

enum class ScheduleKind { Linear, Tanh };

std::string to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(const std::string& s);

// All quantities in units of the Kerr coefficient K (hbar = 1).
struct QbmParams {
  double K = 1.0;
  double delta = 2.0;
  double xi0 = 0.5;
  double kappa = 0.0;
  double nbar = 0.0;
  double p_final = 4.0;
  double tau = 100.0;
  ScheduleKind schedule = ScheduleKind::Tanh;

  void validate() const;  // throws ConfigError
};

// Flips K, delta, xi0 and p_final together when K < 0, then validates.
QbmParams normalize_sign_convention(QbmParams raw);

struct PsdCheck {
  double min_eigenvalue = 0.0;
  bool positive_semidefinite = false;
};

// M_ii = delta, M_ij = -xi0 J_ij.
PsdCheck check_positive_semidefinite(const IsingInstance& inst, double delta, double xi0);

double pump(double t, const QbmParams& params);
double alpha_of_pump(double p, const QbmParams& params);
double alpha(double t, const QbmParams& params);

// H(t) = h_static - p(t) h_pump + alpha(t) h_drive.
struct HamiltonianParts {
  OperatorMatrix h_static;
  OperatorMatrix h_pump;
  OperatorMatrix h_drive;

  SparseOp at(double p, double a) const;
};

HamiltonianParts hamiltonian_parts(const IsingInstance& inst, const QbmParams& params,
                                   const FockSpace& space, Diagnostics* diag = nullptr);

OperatorMatrix build_hamiltonian(const IsingInstance& inst, const QbmParams& params,
                                 const FockSpace& space, double t, Diagnostics* diag = nullptr);

// Closed form of <alpha s|H|alpha s> for the coherent product with amplitudes alpha*s_i.
double coherent_expectation(const IsingInstance& inst, const QbmParams& params, double t,
                            const SpinConfig& s);

// Single-mode part of H for one oscillator with local field `field`:
// (K/2) n(n-1) + delta n - (p/2)(a^2 + a^dag^2) + xi0 a field (a + a^dag).
Eigen::MatrixXd local_hamiltonian(const QbmParams& params, int cutoff, double field, double p, double a);

// Everything the integrators need about one problem.
struct QbmSystem {
  IsingInstance inst;
  QbmParams params;
  FockSpace space;
  HamiltonianParts parts;

  static QbmSystem build(const IsingInstance& inst, const QbmParams& params, const FockSpace& space,
                         Diagnostics* diag = nullptr);
  double pump_at(double t) const { return pump(t, params); }
  double alpha_at(double t) const { return alpha(t, params); }
  SparseOp hamiltonian(double t) const;
};

}  // namespace dqbm
