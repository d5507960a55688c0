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

#include "dqbm/heating.hpp"

#include <cmath>

#include "dqbm/errors.hpp"

namespace dqbm {

double QuasienergySpectrum::orthonormality_defect() const {
  const Eigen::MatrixXcd g = vectors.adjoint() * vectors;
  return (g - Eigen::MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

QuasienergySpectrum quasienergy_spectrum(const QbmSystem& sys, double t) {
  QuasienergySpectrum spec{sys.space, t, {}, {}, {}};
  const EigenDecomposition ed = eigendecompose_hermitian(OperatorMatrix{sys.space, sys.hamiltonian(t)});
  spec.energies = ed.values;
  spec.vectors = ed.vectors;
  for (int i = 0; i < sys.space.n_modes(); ++i) {
    const SparseOp& a = annihilation(sys.space, i).entries;
    const Eigen::MatrixXcd av = a * spec.vectors;
    spec.jump.push_back(spec.vectors.adjoint() * av);
  }
  return spec;
}

Eigen::MatrixXd balance_rates(const QuasienergySpectrum& spec, double kappa) {
  if (!(kappa > 0.0)) throw ConfigError("balance equation needs kappa > 0");
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(spec.size(), spec.size());
  for (const auto& a : spec.jump) w += a.cwiseAbs2();
  return 2.0 * kappa * w;
}

Eigen::MatrixXd balance_generator(const QuasienergySpectrum& spec, double kappa) {
  Eigen::MatrixXd l = balance_rates(spec, kappa);
  for (Index n = 0; n < l.cols(); ++n) {
    double out = 0.0;
    for (Index k = 0; k < l.rows(); ++k)
      if (k != n) out += l(k, n);
    l(n, n) = -out;
  }
  return l;
}

BalanceSteadyState balance_steady_state(const QuasienergySpectrum& spec, double kappa) {
  Eigen::MatrixXd l = balance_generator(spec, kappa);
  l /= l.cwiseAbs().maxCoeff();
  const Index n = l.rows();

  Eigen::EigenSolver<Eigen::MatrixXd> es(l, false);
  if (es.info() != Eigen::Success) throw NumericalError("balance generator eigensolver failed");
  int null_dim = 0;
  for (Index k = 0; k < n; ++k)
    if (std::abs(es.eigenvalues()(k)) < 1e-10) ++null_dim;
  if (null_dim != 1) throw DegenerateSteadyState(null_dim);

  Eigen::MatrixXd a(n + 1, n);
  a.topRows(n) = l;
  a.row(n).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b(n) = 1.0;
  Eigen::VectorXd rho = a.colPivHouseholderQr().solve(b);

  for (Index k = 0; k < n; ++k) {
    if (rho(k) < -1e-10) throw NumericalError("balance steady state has a negative population");
    if (rho(k) < 0.0) rho(k) = 0.0;
  }
  rho /= rho.sum();
  BalanceSteadyState ss;
  ss.populations = rho;
  ss.residual = (l * rho).cwiseAbs().maxCoeff();
  ss.null_dimension = null_dim;
  return ss;
}

int default_fit_window(const BalanceSteadyState& ss, double mass) {
  double acc = 0.0;
  const Index n = ss.populations.size();
  for (Index k = 0; k < n; ++k) {
    acc += ss.populations(k);
    if (acc >= mass) return static_cast<int>(std::max<Index>(2, k + 1));
  }
  return static_cast<int>(n);
}

double fit_quasienergy_temperature(const BalanceSteadyState& ss, const QuasienergySpectrum& spec, int n_states) {
  if (n_states < 2) throw ConfigError("fit window needs at least two states");
  if (n_states > spec.size()) throw ConfigError("fit window exceeds the spectrum");
  Eigen::MatrixXd x(n_states, 2);
  Eigen::VectorXd y(n_states);
  for (int k = 0; k < n_states; ++k) {
    const double p = ss.populations(k);
    if (!(p > 0.0)) throw NumericalError("nonpositive population inside the fit window");
    x(k, 0) = -(spec.energies(k) - spec.energies(0));
    x(k, 1) = 1.0;
    y(k) = std::log(p);
  }
  const Eigen::Vector2d coef = x.colPivHouseholderQr().solve(y);
  return coef(0);
}

SpinDistribution eigenstate_spin_distribution(const QuasienergySpectrum& spec, Index n, const SignPovm& povm) {
  if (n < 0 || n >= spec.size()) throw std::out_of_range("quasienergy index out of range");
  return make_distribution(spec.space.n_modes(), spin_probabilities(Eigen::VectorXcd(spec.vectors.col(n)), povm),
                           DistributionSource::Other);
}

SpinDistribution balance_spin_distribution(const BalanceSteadyState& ss, const QuasienergySpectrum& spec,
                                           const SignPovm& povm) {
  if (ss.populations.size() != spec.size()) throw ConfigError("steady state and spectrum sizes differ");
  Eigen::VectorXd p = Eigen::VectorXd::Zero(Index(1) << spec.space.n_modes());
  for (Index n = 0; n < spec.size(); ++n) {
    if (ss.populations(n) == 0.0) continue;
    p += ss.populations(n) * spin_probabilities(Eigen::VectorXcd(spec.vectors.col(n)), povm);
  }
  return make_distribution(spec.space.n_modes(), p, DistributionSource::Balance);
}

HeatingAnalysis analyze_heating(const QbmSystem& sys, double t, const SpinDistribution& reference,
                                const SignPovm& povm, int fit_states, const FitOptions& fit) {
  HeatingAnalysis out{quasienergy_spectrum(sys, t), {}, 0, 0.0, 0.0, {}, {}, {}, 0.0, 0.0};
  out.steady = balance_steady_state(out.spectrum, sys.params.kappa);
  out.fit_states = fit_states > 0 ? fit_states : default_fit_window(out.steady);
  out.beta_prime = fit_quasienergy_temperature(out.steady, out.spectrum, out.fit_states);
  out.alpha = sys.alpha_at(t);
  out.balance = balance_spin_distribution(out.steady, out.spectrum, povm);
  out.reference = reference;
  out.reference_fit = fit_boltzmann(reference, sys.inst, fit);
  out.total_variation = total_variation(out.balance, reference);
  out.ratio = 2.0 * sys.params.xi0 * out.alpha * out.alpha * out.beta_prime / out.reference_fit.beta;
  return out;
}

}  // namespace dqbm
