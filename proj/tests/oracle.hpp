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

// Dense reference constructions used as independent oracles in the tests.
// Everything here is built from Kronecker products and textbook formulas and
// shares no code with the library kernels.

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "dqbm/ising.hpp"
#include "dqbm/qbm.hpp"

namespace oracle {

using cd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

inline MatrixXcd lowering(int cutoff) {
  MatrixXcd a = MatrixXcd::Zero(cutoff + 1, cutoff + 1);
  for (int n = 1; n <= cutoff; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

// Mode 0 is the leftmost Kronecker factor.
inline MatrixXcd on_mode(int n_modes, int cutoff, int mode, const MatrixXcd& local) {
  MatrixXcd out = MatrixXcd::Identity(1, 1);
  const MatrixXcd id = MatrixXcd::Identity(cutoff + 1, cutoff + 1);
  for (int k = 0; k < n_modes; ++k) {
    MatrixXcd next = Eigen::kroneckerProduct(out, k == mode ? local : id).eval();
    out = next;
  }
  return out;
}

inline double pump_at(double t, const dqbm::QbmParams& p) {
  return p.schedule == dqbm::ScheduleKind::Linear ? p.p_final * std::min(1.0, t / p.tau)
                                                  : p.p_final * std::tanh(3.0 * t / p.tau);
}

inline double alpha_at(double t, const dqbm::QbmParams& p) {
  const double q = pump_at(t, p);
  const double v = q - p.delta * std::tanh(q / p.delta);
  return v > 0 ? std::sqrt(v / p.K) : 0.0;
}

inline MatrixXcd hamiltonian(const dqbm::IsingInstance& inst, const dqbm::QbmParams& p, int cutoff, double t) {
  const int n = inst.n_spins;
  const MatrixXcd a = lowering(cutoff);
  const double pt = pump_at(t, p), at = alpha_at(t, p);
  const long dim = static_cast<long>(std::pow(cutoff + 1, n));
  MatrixXcd h = MatrixXcd::Zero(dim, dim);
  std::vector<MatrixXcd> am;
  for (int i = 0; i < n; ++i) am.push_back(on_mode(n, cutoff, i, a));
  for (int i = 0; i < n; ++i) {
    const MatrixXcd& ai = am[i];
    const MatrixXcd adi = ai.adjoint();
    h += 0.5 * p.K * adi * adi * ai * ai + p.delta * adi * ai - 0.5 * pt * (adi * adi + ai * ai);
    h += p.xi0 * at * inst.h(i) * (adi + ai);
    for (int j = 0; j < n; ++j)
      if (j != i) h -= p.xi0 * inst.J(i, j) * adi * am[j];
  }
  return h;
}

inline std::vector<MatrixXcd> lowering_ops(int n_modes, int cutoff) {
  std::vector<MatrixXcd> out;
  for (int i = 0; i < n_modes; ++i) out.push_back(on_mode(n_modes, cutoff, i, lowering(cutoff)));
  return out;
}

// drho/dt with photon loss 2 kappa (nbar + 1) D[a] and gain 2 kappa nbar D[a^dag],
// D[L] rho = L rho L^dag - (L^dag L rho + rho L^dag L) / 2.
inline MatrixXcd lindblad_rhs(const MatrixXcd& h, const std::vector<MatrixXcd>& as, double kappa, double nbar,
                              const MatrixXcd& rho) {
  const cd i(0.0, 1.0);
  MatrixXcd out = -i * (h * rho - rho * h);
  auto diss = [&](const MatrixXcd& l, double rate) {
    const MatrixXcd ll = l.adjoint() * l;
    out += rate * (l * rho * l.adjoint() - 0.5 * (ll * rho + rho * ll));
  };
  for (const auto& a : as) {
    diss(a, 2.0 * kappa * (nbar + 1.0));
    if (nbar > 0) diss(a.adjoint(), 2.0 * kappa * nbar);
  }
  return out;
}

// Column-stacking superoperator of lindblad_rhs for a constant Hamiltonian.
inline MatrixXcd liouvillian(const MatrixXcd& h, const std::vector<MatrixXcd>& as, double kappa, double nbar) {
  const long d = h.rows();
  MatrixXcd sup(d * d, d * d);
  for (long k = 0; k < d * d; ++k) {
    MatrixXcd e = MatrixXcd::Zero(d, d);
    e(k % d, k / d) = 1.0;
    const MatrixXcd img = lindblad_rhs(h, as, kappa, nbar, e);
    sup.col(k) = Eigen::Map<const VectorXcd>(img.data(), d * d);
  }
  return sup;
}

inline MatrixXcd evolve_constant(const MatrixXcd& sup, const MatrixXcd& rho0, double t) {
  const long d = rho0.rows();
  const VectorXcd v = (sup * t).exp() * Eigen::Map<const VectorXcd>(rho0.data(), d * d);
  return Eigen::Map<const MatrixXcd>(v.data(), d, d);
}

inline double max_abs(const MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace oracle
