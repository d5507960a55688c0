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

#include "dqbm/qbm.hpp"

#include <cmath>

namespace dqbm {

std::string to_string(ScheduleKind kind) { return kind == ScheduleKind::Linear ? "linear" : "tanh"; }

ScheduleKind schedule_kind_from_string(const std::string& s) {
  if (s == "linear") return ScheduleKind::Linear;
  if (s == "tanh") return ScheduleKind::Tanh;
  throw ConfigError("unknown schedule kind '" + s + "'");
}

void QbmParams::validate() const {
  auto need = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(std::isfinite(K) && K > 0, "K must be > 0");
  need(std::isfinite(delta) && delta > 0, "delta must be > 0");
  need(std::isfinite(xi0) && xi0 > 0, "xi0 must be > 0");
  need(std::isfinite(kappa) && kappa >= 0, "kappa must be >= 0");
  need(std::isfinite(nbar) && nbar >= 0, "nbar must be >= 0");
  need(std::isfinite(tau) && tau > 0, "tau must be > 0");
  need(std::isfinite(p_final) && p_final > 0, "p_final must be > 0");
}

QbmParams normalize_sign_convention(QbmParams raw) {
  if (raw.K == 0.0) throw ConfigError("K = 0 is not a Kerr oscillator");
  if (raw.K < 0) {
    raw.K = -raw.K;
    raw.delta = -raw.delta;
    raw.xi0 = -raw.xi0;
    raw.p_final = -raw.p_final;
  }
  raw.validate();
  return raw;
}

PsdCheck check_positive_semidefinite(const IsingInstance& inst, double delta, double xi0) {
  const int n = inst.n_spins;
  Eigen::MatrixXd m = -xi0 * inst.J;
  m.diagonal().setConstant(delta);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  PsdCheck res;
  res.min_eigenvalue = n > 0 ? es.eigenvalues()(0) : delta;
  res.positive_semidefinite = res.min_eigenvalue >= -1e-10;
  return res;
}

double pump(double t, const QbmParams& params) {
  if (t < 0) throw std::invalid_argument("pump evaluated at negative time");
  if (params.schedule == ScheduleKind::Linear) return params.p_final * std::min(t / params.tau, 1.0);
  return params.p_final * std::tanh(3.0 * t / params.tau);
}

double alpha_of_pump(double p, const QbmParams& params) {
  const double radicand = p - params.delta * std::tanh(p / params.delta);
  return radicand > 0 ? std::sqrt(radicand / params.K) : 0.0;
}

double alpha(double t, const QbmParams& params) { return alpha_of_pump(pump(t, params), params); }

SparseOp HamiltonianParts::at(double p, double a) const {
  SparseOp h = h_static.entries - p * h_pump.entries;
  if (a != 0.0) h += a * h_drive.entries;
  return h;
}

Eigen::MatrixXd local_hamiltonian(const QbmParams& params, int cutoff, double field, double p, double a) {
  const int d = cutoff + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  for (int n = 0; n < d; ++n) {
    h(n, n) = 0.5 * params.K * n * (n - 1) + params.delta * n;
    if (n + 2 < d) h(n, n + 2) = h(n + 2, n) = -0.5 * p * std::sqrt((n + 1.0) * (n + 2.0));
    if (n + 1 < d) h(n, n + 1) = h(n + 1, n) = params.xi0 * a * field * std::sqrt(n + 1.0);
  }
  return h;
}

HamiltonianParts hamiltonian_parts(const IsingInstance& inst, const QbmParams& params, const FockSpace& space,
                                   Diagnostics* diag) {
  if (space.n_modes() != inst.n_spins) throw std::invalid_argument("Fock space and instance disagree on N");
  params.validate();
  const PsdCheck psd = check_positive_semidefinite(inst, params.delta, params.xi0);
  if (!psd.positive_semidefinite)
    warn(diag, "coupling matrix M is not positive semidefinite (min eigenvalue " +
                   std::to_string(psd.min_eigenvalue) + ")");
  const int c = space.cutoff();
  const Eigen::MatrixXd a = single_mode_annihilation(c);
  const Eigen::MatrixXd ad = a.transpose();
  const Eigen::MatrixXd kerr = 0.5 * params.K * (ad * ad * a * a) + params.delta * (ad * a);
  const Eigen::MatrixXd squeeze = 0.5 * (ad * ad + a * a);
  const Eigen::MatrixXd x2 = a + ad;

  const Index n = space.total_dim();
  SparseOp hs(n, n), hp(n, n), hd(n, n);
  for (int i = 0; i < space.n_modes(); ++i) {
    hs += embed(space, i, kerr).entries;
    hp += embed(space, i, squeeze).entries;
    if (inst.h(i) != 0.0) hd += params.xi0 * inst.h(i) * embed(space, i, x2).entries;
  }
  std::vector<SparseOp> ann(space.n_modes());
  for (int i = 0; i < space.n_modes(); ++i) ann[i] = annihilation(space, i).entries;
  for (int i = 0; i < space.n_modes(); ++i)
    for (int j = i + 1; j < space.n_modes(); ++j) {
      if (inst.J(i, j) == 0.0) continue;
      SparseOp hop = SparseOp(ann[i].adjoint()) * ann[j];
      SparseOp both = hop + SparseOp(hop.adjoint());
      hs -= params.xi0 * inst.J(i, j) * both;
    }
  hs.prune(cd(0.0));
  hp.prune(cd(0.0));
  hd.prune(cd(0.0));
  return HamiltonianParts{{space, hs}, {space, hp}, {space, hd}};
}

OperatorMatrix build_hamiltonian(const IsingInstance& inst, const QbmParams& params, const FockSpace& space,
                                 double t, Diagnostics* diag) {
  HamiltonianParts parts = hamiltonian_parts(inst, params, space, diag);
  return {space, parts.at(pump(t, params), alpha(t, params))};
}

double coherent_expectation(const IsingInstance& inst, const QbmParams& params, double t, const SpinConfig& s) {
  const double p = pump(t, params);
  const double a2 = std::pow(alpha_of_pump(p, params), 2);
  const double single = 0.5 * params.K * a2 * a2 + params.delta * a2 - p * a2;
  return inst.n_spins * single + 2.0 * params.xi0 * a2 * ising_energy(inst, s);
}

QbmSystem QbmSystem::build(const IsingInstance& inst, const QbmParams& params, const FockSpace& space,
                           Diagnostics* diag) {
  inst.validate();
  return QbmSystem{inst, params, space, hamiltonian_parts(inst, params, space, diag)};
}

SparseOp QbmSystem::hamiltonian(double t) const { return parts.at(pump_at(t), alpha_at(t)); }

}  // namespace dqbm
