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

#include <doctest.h>

#include <algorithm>
#include <set>

#include "dqbm/errors.hpp"
#include "dqbm/heating.hpp"
#include "oracle.hpp"

using namespace dqbm;

namespace {

QbmSystem steady_pump(const IsingInstance& inst, int cutoff, double kappa, double p_final = 3.0) {
  QbmParams p;
  p.kappa = kappa;
  p.p_final = p_final;
  p.schedule = ScheduleKind::Linear;
  p.tau = 1.0;
  return QbmSystem::build(inst, p, FockSpace(inst.n_spins, cutoff));
}

IsingInstance single(double field) {
  Eigen::VectorXd h(1);
  h << field;
  return IsingInstance::make(Eigen::MatrixXd::Zero(1, 1), h);
}

IsingInstance pair(double j, double h0, double h1) {
  Eigen::MatrixXd J(2, 2);
  J << 0, j, j, 0;
  Eigen::VectorXd h(2);
  h << h0, h1;
  return IsingInstance::make(J, h);
}

}  // namespace

TEST_SUITE("heating") {

TEST_CASE("uncoupled modes have an additive quasienergy spectrum") {
  const int c = 6;
  const auto sys = steady_pump(pair(0.0, 0.2, -0.1), c, 0.01);
  const auto spec = quasienergy_spectrum(sys, 5.0);
  CHECK(spec.orthonormality_defect() < 1e-12);
  const double p = sys.pump_at(5.0), a = sys.alpha_at(5.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e0(local_hamiltonian(sys.params, c, 0.2, p, a));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e1(local_hamiltonian(sys.params, c, -0.1, p, a));
  std::vector<double> sums;
  for (int m = 0; m <= c; ++m)
    for (int n = 0; n <= c; ++n) sums.push_back(e0.eigenvalues()(m) + e1.eigenvalues()(n));
  std::sort(sums.begin(), sums.end());
  for (size_t k = 0; k < sums.size(); ++k) CHECK(spec.energies(Index(k)) == doctest::Approx(sums[k]).epsilon(1e-12));
}

TEST_CASE("jump matrix elements are the annihilation operator in the eigenbasis") {
  const auto sys = steady_pump(pair(0.6, -0.2, 0.1), 3, 0.05);
  const auto spec = quasienergy_spectrum(sys, 2.0);
  const auto as = oracle::lowering_ops(2, 3);
  for (int i = 0; i < 2; ++i)
    CHECK(oracle::max_abs(spec.jump[i] - spec.vectors.adjoint() * as[i] * spec.vectors) < 1e-12);
}

TEST_CASE("rate generator conserves probability and scales with kappa") {
  const auto sys = steady_pump(pair(0.6, -0.2, 0.1), 4, 0.05);
  const auto spec = quasienergy_spectrum(sys, 2.0);
  const Eigen::MatrixXd l = balance_generator(spec, 0.05);
  CHECK(l.colwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::MatrixXd off = l - Eigen::MatrixXd(l.diagonal().asDiagonal());
  CHECK(off.minCoeff() >= 0.0);
  CHECK((balance_rates(spec, 0.5) - 10.0 * balance_rates(spec, 0.05)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(balance_rates(spec, 0.0), ConfigError);
}

TEST_CASE("steady state is independent of the damping rate") {
  const auto sys = steady_pump(pair(0.6, -0.2, 0.1), 5, 0.05);
  const auto spec = quasienergy_spectrum(sys, 2.0);
  const auto a = balance_steady_state(spec, 0.01);
  const auto b = balance_steady_state(spec, 0.1);
  CHECK((a.populations - b.populations).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(a.populations.minCoeff() >= 0.0);
  CHECK(std::abs(a.populations.sum() - 1.0) < 1e-14);
  CHECK(a.residual < 1e-12);
  CHECK(a.null_dimension == 1);
}

TEST_CASE("an undriven oscillator relaxes to its ground state") {
  const auto sys = steady_pump(single(0.0), 8, 0.1);
  const auto spec = quasienergy_spectrum(sys, 0.0);
  const auto ss = balance_steady_state(spec, 0.1);
  CHECK(ss.populations(0) == doctest::Approx(1.0).epsilon(1e-12));
  const Eigen::MatrixXd w = balance_rates(spec, 0.1);
  // Fock ladder: n -> n - 1 at rate 2 kappa n
  for (int n = 1; n <= 8; ++n) CHECK(w(n - 1, n) == doctest::Approx(0.2 * n).epsilon(1e-12));
}

TEST_CASE("weak damping master equation steady state matches the balance populations") {
  const int c = 8;
  const double kappa = 1e-5;
  const auto sys = steady_pump(single(0.3), c, kappa);
  const double t = 5.0;
  const auto spec = quasienergy_spectrum(sys, t);
  const auto ss = balance_steady_state(spec, kappa);
  const Eigen::MatrixXcd sup =
      oracle::liouvillian(oracle::hamiltonian(sys.inst, sys.params, c, t), oracle::lowering_ops(1, c), kappa, 0.0);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(sup);
  Index k0 = 0;
  es.eigenvalues().cwiseAbs().minCoeff(&k0);
  const Eigen::VectorXcd v = es.eigenvectors().col(k0);
  Eigen::MatrixXcd rho = Eigen::Map<const Eigen::MatrixXcd>(v.data(), c + 1, c + 1);
  rho /= rho.trace();
  const Eigen::VectorXd pops = (spec.vectors.adjoint() * rho * spec.vectors).diagonal().real();
  CHECK((pops - ss.populations).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("temperature fit recovers an exact Boltzmann ladder") {
  const auto sys = steady_pump(pair(0.6, -0.2, 0.1), 4, 0.05);
  const auto spec = quasienergy_spectrum(sys, 2.0);
  BalanceSteadyState ss;
  ss.populations = (-2.0 * (spec.energies.array() - spec.energies(0))).exp();
  ss.populations /= ss.populations.sum();
  CHECK(fit_quasienergy_temperature(ss, spec, 6) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK_THROWS_AS(fit_quasienergy_temperature(ss, spec, 1), ConfigError);
  CHECK_THROWS_AS(fit_quasienergy_temperature(ss, spec, 1000), ConfigError);
}

TEST_CASE("fit window covers the requested population mass") {
  BalanceSteadyState ss;
  ss.populations = Eigen::VectorXd(5);
  ss.populations << 0.9, 0.05, 0.03, 0.015, 0.005;
  CHECK(default_fit_window(ss, 0.99) == 4);
  CHECK(default_fit_window(ss, 0.5) == 2);
  CHECK(default_fit_window(ss, 1.0) == 5);
}

TEST_CASE("disconnected rate graphs are reported as degenerate") {
  const FockSpace sp(1, 3);
  QuasienergySpectrum spec{sp, 0.0, Eigen::VectorXd::LinSpaced(4, 0.0, 3.0), Eigen::MatrixXcd::Identity(4, 4), {}};
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(4, 4);
  a(0, 1) = 1.0;
  a(2, 3) = 1.0;
  spec.jump.push_back(a);
  try {
    balance_steady_state(spec, 0.1);
    FAIL("expected a degenerate steady state");
  } catch (const DegenerateSteadyState& e) {
    CHECK(e.dimension() == 2);
  }
}

TEST_CASE("full analysis is self-consistent") {
  const auto sys = steady_pump(pair(0.8, -0.3, 0.1), 6, 0.05);
  const auto povm = build_sign_povm(sys.space);
  const double t = 3.0;
  const auto spec = quasienergy_spectrum(sys, t);
  const auto ss = balance_steady_state(spec, 0.05);
  const auto ref = balance_spin_distribution(ss, spec, povm);
  const auto h = analyze_heating(sys, t, ref, povm);
  CHECK(h.total_variation < 1e-14);
  CHECK(h.fit_states == default_fit_window(h.steady));
  CHECK(h.alpha == sys.alpha_at(t));
  CHECK(std::abs(h.balance.probabilities.sum() - 1.0) < 1e-12);
  CHECK(h.ratio == doctest::Approx(2.0 * sys.params.xi0 * h.alpha * h.alpha * h.beta_prime / h.reference_fit.beta));
  Eigen::VectorXd mix = Eigen::VectorXd::Zero(4);
  for (Index n = 0; n < spec.size(); ++n)
    mix += ss.populations(n) * eigenstate_spin_distribution(spec, n, povm).probabilities;
  CHECK((mix - h.balance.probabilities).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("bifurcated ground doublet encodes the two aligned configurations") {
  const auto sys = steady_pump(pair(1.0, -0.2, 0.0), 10, 0.05, 4.0);
  const auto povm = build_sign_povm(sys.space);
  const auto spec = quasienergy_spectrum(sys, 10.0);
  Index a0 = 0, a1 = 0;
  const double p0 = eigenstate_spin_distribution(spec, 0, povm).probabilities.maxCoeff(&a0);
  const double p1 = eigenstate_spin_distribution(spec, 1, povm).probabilities.maxCoeff(&a1);
  CHECK(p0 > 0.9);
  CHECK(p1 > 0.9);
  CHECK(std::set<Index>{a0, a1} == std::set<Index>{0, 3});
  for (Index n = 0; n < spec.size(); n += 37)
    CHECK(std::abs(eigenstate_spin_distribution(spec, n, povm).probabilities.sum() - 1.0) < 1e-12);
}

TEST_CASE("zero-field instances form near-degenerate parity doublets at large pump") {
  const auto sys = steady_pump(pair(1.0, 0.0, 0.0), 10, 0.05, 5.0);
  const auto spec = quasienergy_spectrum(sys, 10.0);
  const double split = spec.energies(1) - spec.energies(0);
  const double gap = spec.energies(2) - spec.energies(1);
  CHECK(split < 1e-3 * gap);
}

TEST_CASE("undriven ground state reads out as uniform") {
  const auto sys = steady_pump(pair(0.0, 0.0, 0.0), 6, 0.05);
  const auto spec = quasienergy_spectrum(sys, 0.0);
  const auto d = eigenstate_spin_distribution(spec, 0, build_sign_povm(sys.space));
  CHECK((d.probabilities.array() - 0.25).abs().maxCoeff() < 1e-12);
}

}  // TEST_SUITE
