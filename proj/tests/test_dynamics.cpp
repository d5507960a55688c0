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

#include "dqbm/dynamics.hpp"
#include "dqbm/errors.hpp"
#include "dqbm/propagators.hpp"
#include "dqbm/tensor.hpp"
#include "oracle.hpp"

using namespace dqbm;

namespace {

IsingInstance pair_instance() {
  Eigen::MatrixXd J(2, 2);
  J << 0, 1, 1, 0;
  Eigen::VectorXd h(2);
  h << -0.2, 0.0;
  return IsingInstance::make(J, h);
}

QbmParams quick_params(double kappa) {
  QbmParams p;
  p.kappa = kappa;
  p.tau = 10.0;
  p.p_final = 3.0;
  return p;
}

IntegratorConfig config(Method m, double t_end, int samples) {
  IntegratorConfig c;
  c.method = m;
  c.step = 0.01;
  c.sample_times = uniform_samples(t_end, samples);
  return c;
}

Eigen::MatrixXcd random_density(Index n, unsigned seed) {
  std::srand(seed);
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Random(n, n);
  Eigen::MatrixXcd rho = g * g.adjoint();
  return rho / rho.trace();
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("Hamiltonian kernel reproduces the dense Hamiltonian") {
  const auto inst = pair_instance();
  const auto params = quick_params(0.0);
  const FockSpace sp(2, 4);
  const auto sys = QbmSystem::build(inst, params, sp);
  HamiltonianKernel k(sys);
  const Eigen::VectorXcd x = Eigen::VectorXcd::Random(sp.total_dim());
  for (double t : {0.0, 0.7, 4.0, 25.0}) {
    k.set_time(t);
    Eigen::VectorXcd y(x.size());
    k.apply_minus_i(x.data(), y.data());
    const Eigen::VectorXcd ref = cd(0, -1) * (oracle::hamiltonian(inst, params, 4, t) * x);
    CHECK((y - ref).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("density generator matches the dense Lindblad form, including thermal terms") {
  const auto inst = pair_instance();
  for (double nbar : {0.0, 0.3}) {
    QbmParams params = quick_params(0.07);
    params.nbar = nbar;
    const FockSpace sp(2, 3);
    const auto sys = QbmSystem::build(inst, params, sp);
    DensityGenerator gen(sys);
    const Eigen::MatrixXcd rho = random_density(sp.total_dim(), 3);
    Eigen::MatrixXcd out;
    gen(2.5, rho, out);
    const Eigen::MatrixXcd ref = oracle::lindblad_rhs(oracle::hamiltonian(inst, params, 3, 2.5),
                                                      oracle::lowering_ops(2, 3), 0.07, nbar, rho);
    CHECK(oracle::max_abs(out - ref) < 1e-12);
  }
}

TEST_CASE("pair hopping equals the dense exponential of the hopping term") {
  const int c = 4;
  const FockSpace sp(3, c);
  PairHop hop(sp, 0, 2, -0.35);
  const auto as = oracle::lowering_ops(3, c);
  const Eigen::MatrixXcd hh = -0.35 * (as[0].adjoint() * as[2] + as[2].adjoint() * as[0]);
  const Eigen::MatrixXcd u = (cd(0, -0.3) * hh).exp();
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Random(sp.total_dim(), 3);
  const Eigen::MatrixXcd ref = u * x;
  hop.apply(x.data(), 3, 0.3);
  CHECK(oracle::max_abs(x - ref) < 1e-12);
}

TEST_CASE("damping channel equals the dense exponential of the dissipator") {
  for (double nbar : {0.0, 0.4}) {
    const int c = 5;
    const FockSpace sp(2, c);
    DampingChannel ch(sp, 0.2, nbar);
    const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(sp.total_dim(), sp.total_dim());
    const Eigen::MatrixXcd sup = oracle::liouvillian(zero, oracle::lowering_ops(2, c), 0.2, nbar);
    Eigen::MatrixXcd rho = random_density(sp.total_dim(), 11);
    const Eigen::MatrixXcd ref = oracle::evolve_constant(sup, rho, 0.8);
    ch.apply(rho, 0.8);
    CHECK(oracle::max_abs(rho - ref) < 1e-11);
    CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
  }
}

TEST_CASE("closed-form damping chain agrees with the generator exponential") {
  const FockSpace sp(1, 8);
  DampingChannel ch(sp, 0.3, 0.0);
  for (int q : {-3, 0, 2, 8}) {
    const Eigen::MatrixXd ref = (0.45 * DampingChannel::chain_generator(8, q, 0.3, 0.0)).exp();
    CHECK((ch.chain(q, 0.45) - ref).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("every stepper reproduces the exact evolution under a constant Hamiltonian") {
  const auto inst = pair_instance();
  QbmParams params = quick_params(0.1);
  params.schedule = ScheduleKind::Linear;
  params.tau = 0.5;  // constant pump beyond t = 0.5
  const int c = 3;
  const FockSpace sp(2, c);
  const auto sys = QbmSystem::build(inst, params, sp);
  const Eigen::MatrixXcd h = oracle::hamiltonian(inst, params, c, 1.0);
  const Eigen::MatrixXcd sup = oracle::liouvillian(h, oracle::lowering_ops(2, c), 0.1, 0.0);
  const Eigen::MatrixXcd rho0 = random_density(sp.total_dim(), 5);
  const Eigen::MatrixXcd exact = oracle::evolve_constant(sup, rho0, 3.0);
  for (Method m : {Method::Dopri5, Method::Rk4, Method::Split}) {
    CAPTURE(to_string(m));
    auto stepper = make_density_stepper(sys, config(m, 3.0, 2));
    std::vector<double> err;
    for (int n : {150, 300}) {
      const double hstep = 3.0 / n;
      Eigen::MatrixXcd rho = rho0, next;
      for (int k = 0; k < n; ++k) {
        stepper->single(1.0 + hstep * k, hstep, rho, next);
        rho.swap(next);
      }
      err.push_back(oracle::max_abs(rho - exact));
    }
    const int order = m == Method::Dopri5 ? 5 : m == Method::Rk4 ? 4 : 2;
    const double observed = std::log2(err[0] / err[1]);
    CAPTURE(err[1]);
    CHECK(observed > order - 0.3);
    CHECK(err[1] < 1e-4);
  }
}

TEST_CASE("split integrator converges at second order") {
  const auto inst = pair_instance();
  const auto params = quick_params(0.05);
  const FockSpace sp(2, 4);
  const auto sys = QbmSystem::build(inst, params, sp);
  const auto rho0 = QuantumState::vacuum(sp, StateKind::Density);
  IntegratorConfig ref_cfg = config(Method::Dopri5, 8.0, 2);
  ref_cfg.rtol = 1e-11;
  ref_cfg.atol = 1e-13;
  const Eigen::MatrixXcd ref = evolve_lindblad(sys, rho0, ref_cfg).states.back();
  std::vector<double> err;
  for (double hstep : {0.2, 0.1, 0.05}) {
    IntegratorConfig cfg = config(Method::Split, 8.0, 2);
    cfg.step = hstep;
    err.push_back(oracle::max_abs(evolve_lindblad(sys, rho0, cfg).states.back() - ref));
  }
  for (size_t k = 1; k < err.size(); ++k) {
    const double order = std::log2(err[k - 1] / err[k]);
    CAPTURE(order);
    CHECK(order > 1.8);
    CHECK(order < 2.3);
  }
}

TEST_CASE("Lindblad evolution keeps the trace, Hermiticity and positivity") {
  const auto inst = pair_instance();
  const FockSpace sp(2, 5);
  for (Method m : {Method::Dopri5, Method::Split}) {
    const auto sys = QbmSystem::build(inst, quick_params(0.05), sp);
    IntegratorConfig cfg = config(m, 30.0, 7);
    cfg.step = 0.05;
    const DensityRun run = evolve_lindblad(sys, QuantumState::vacuum(sp, StateKind::Density), cfg);
    CHECK(run.stats.max_trace_drift < 1e-7);
    CHECK(run.stats.min_eigenvalue > -1e-8);
    for (const auto& r : run.states) CHECK(hermiticity_defect(r) < 1e-14);
  }
}

TEST_CASE("closed evolution is unitary and the density route agrees with it") {
  const auto inst = pair_instance();
  const FockSpace sp(2, 5);
  const auto sys = QbmSystem::build(inst, quick_params(0.0), sp);
  for (Method m : {Method::Dopri5, Method::Split}) {
    IntegratorConfig cfg = config(m, 12.0, 5);
    const KetRun kr = evolve_schrodinger(sys, QuantumState::vacuum(sp), cfg);
    const DensityRun dr = evolve_lindblad(sys, QuantumState::vacuum(sp, StateKind::Density), cfg);
    CHECK(kr.stats.max_norm_drift < 1e-7);
    const Eigen::VectorXcd& psi = kr.states.back();
    CHECK(trace_distance(psi * psi.adjoint(), dr.states.back()) < 1e-6);
  }
}

TEST_CASE("halving tolerances moves the spin probabilities by less than 1e-4") {
  const auto inst = pair_instance();
  const FockSpace sp(2, 6);
  const auto sys = QbmSystem::build(inst, quick_params(0.05), sp);
  const auto povm = build_sign_povm(sp);
  IntegratorConfig a = config(Method::Dopri5, 20.0, 3);
  a.rtol = 1e-6;
  a.atol = 1e-8;
  IntegratorConfig b = a;
  b.rtol /= 2;
  b.atol /= 2;
  const auto rho0 = QuantumState::vacuum(sp, StateKind::Density);
  const auto pa = spin_probabilities(evolve_lindblad(sys, rho0, a).states.back(), povm);
  const auto pb = spin_probabilities(evolve_lindblad(sys, rho0, b).states.back(), povm);
  CHECK((pa - pb).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("sample grid and integrator settings are validated") {
  IntegratorConfig c;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.sample_times = {0.0, 1.0, 1.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.sample_times = {0.5, 1.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.sample_times = {0.0, 1.0};
  c.rtol = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(method_from_string("euler"), ConfigError);
  CHECK(uniform_samples(1000.0, 200).size() == 200);
  CHECK(uniform_samples(1000.0, 200).back() == 1000.0);
}

TEST_CASE("an unreachable tolerance raises an integration error") {
  const auto inst = pair_instance();
  const FockSpace sp(2, 3);
  const auto sys = QbmSystem::build(inst, quick_params(0.0), sp);
  IntegratorConfig cfg = config(Method::Dopri5, 1.0, 2);
  cfg.rtol = 1e-300;
  cfg.atol = 1e-300;
  CHECK_THROWS_AS(evolve_schrodinger(sys, QuantumState::vacuum(sp), cfg), IntegrationError);
}

TEST_CASE("stationary Fock states only acquire phases") {
  Eigen::VectorXd h(1);
  h << 0.0;
  const auto inst = IsingInstance::make(Eigen::MatrixXd::Zero(1, 1), h);
  QbmParams params = quick_params(0.0);
  params.schedule = ScheduleKind::Linear;
  params.tau = 1e15;  // pump stays below 1e-12
  const FockSpace sp(1, 6);
  const auto sys = QbmSystem::build(inst, params, sp);
  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(7);
  psi0(3) = 1.0;
  const KetRun run = evolve_schrodinger(sys, QuantumState::ket(sp, psi0), config(Method::Dopri5, 10.0, 3));
  const double e3 = 0.5 * 3 * 2 + params.delta * 3;
  CHECK(std::abs(run.states.back()(3) - std::exp(cd(0, -e3 * 10.0))) < 1e-7);
  CHECK(std::abs(std::norm(run.states.back()(3)) - 1.0) < 1e-8);
}

TEST_CASE("a single excitation decays at twice the damping rate") {
  Eigen::VectorXd h(1);
  h << 0.0;
  const auto inst = IsingInstance::make(Eigen::MatrixXd::Zero(1, 1), h);
  QbmParams params = quick_params(0.05);
  params.schedule = ScheduleKind::Linear;
  params.tau = 1e15;
  const FockSpace sp(1, 4);
  const auto sys = QbmSystem::build(inst, params, sp);
  Eigen::MatrixXcd rho0 = Eigen::MatrixXcd::Zero(5, 5);
  rho0(1, 1) = 1.0;
  for (Method m : {Method::Dopri5, Method::Split}) {
    const DensityRun run = evolve_lindblad(sys, QuantumState::density(sp, rho0), config(m, 20.0, 5));
    for (size_t k = 0; k < run.times.size(); ++k)
      CHECK(std::abs(run.states[k](1, 1).real() - std::exp(-0.1 * run.times[k])) < 1e-6);
  }
}

}  // TEST_SUITE
