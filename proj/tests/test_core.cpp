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

#include <filesystem>
#include <set>

#include "dqbm/errors.hpp"
#include "dqbm/ising.hpp"
#include "dqbm/qbm.hpp"
#include "dqbm/tensor.hpp"
#include "oracle.hpp"

using namespace dqbm;

TEST_SUITE("fock") {

TEST_CASE("mode zero is the slowest index") {
  const FockSpace sp(3, 2);
  CHECK(sp.total_dim() == 27);
  CHECK(sp.stride(0) == 9);
  CHECK(sp.stride(2) == 1);
  // r = 1*9 + 0*3 + 2
  CHECK(sp.occupation(11, 0) == 1);
  CHECK(sp.occupation(11, 1) == 0);
  CHECK(sp.occupation(11, 2) == 2);
  CHECK_THROWS_AS(sp.stride(3), std::out_of_range);
  CHECK_THROWS_AS(FockSpace(0, 3), ConfigError);
  CHECK_THROWS_AS(FockSpace(2, 0), ConfigError);
}

TEST_CASE("embedded ladder operators match Kronecker products") {
  const FockSpace sp(3, 3);
  for (int i = 0; i < 3; ++i) {
    const auto ref = oracle::on_mode(3, 3, i, oracle::lowering(3));
    CHECK(oracle::max_abs(annihilation(sp, i).dense() - ref) == 0.0);
    CHECK(oracle::max_abs(creation(sp, i).dense() - ref.adjoint()) == 0.0);
    CHECK(oracle::max_abs(number_operator(sp, i).dense() - ref.adjoint() * ref) < 1e-14);
    CHECK(oracle::max_abs(quadrature_x(sp, i).dense() - 0.5 * (ref + ref.adjoint())) < 1e-14);
  }
}

TEST_CASE("truncated commutator is the identity except at the cutoff") {
  const int c = 6;
  const Eigen::MatrixXd a = single_mode_annihilation(c);
  const Eigen::MatrixXd comm = a * a.transpose() - a.transpose() * a;
  for (int n = 0; n < c; ++n) CHECK(comm(n, n) == doctest::Approx(1.0));
  CHECK(comm(c, c) == doctest::Approx(-double(c)));
}

TEST_CASE("coherent kets are normalized products with the right mean field") {
  const FockSpace sp(2, 30);
  Diagnostics diag;
  const auto psi = coherent_ket(sp, {cd(1.2, 0.0), cd(-0.4, 0.3)}, &diag);
  CHECK(diag.warnings.empty());
  CHECK(std::abs(psi.amplitudes.norm() - 1.0) < 1e-14);
  const cd a0 = psi.amplitudes.dot(annihilation(sp, 0).entries * psi.amplitudes);
  const cd a1 = psi.amplitudes.dot(annihilation(sp, 1).entries * psi.amplitudes);
  CHECK(std::abs(a0 - cd(1.2, 0.0)) < 1e-10);
  CHECK(std::abs(a1 - cd(-0.4, 0.3)) < 1e-10);
  const FockSpace small(1, 3);
  Diagnostics lossy;
  coherent_ket(small, {cd(2.5, 0.0)}, &lossy);
  CHECK(lossy.warnings.size() == 1);
}

TEST_CASE("state validation catches broken invariants") {
  const FockSpace sp(1, 3);
  auto ket = QuantumState::vacuum(sp);
  CHECK_NOTHROW(ket.validate());
  ket.amplitudes *= 2.0;
  CHECK_THROWS_AS(ket.validate(), NumericalError);
  auto rho = QuantumState::vacuum(sp, StateKind::Density);
  rho.rho(0, 1) = 0.3;
  CHECK_THROWS_AS(rho.validate(), NumericalError);
  CHECK(trace_distance(QuantumState::vacuum(sp).density_matrix(), QuantumState::vacuum(sp, StateKind::Density).rho) ==
        0.0);
}

}  // TEST_SUITE

TEST_SUITE("tensor") {

TEST_CASE("mode-local products agree with dense Kronecker application") {
  const int c = 3;
  const FockSpace sp(3, c);
  std::vector<Eigen::MatrixXcd> locals;
  for (int i = 0; i < 3; ++i) locals.push_back(Eigen::MatrixXcd::Random(c + 1, c + 1));
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Random(sp.total_dim(), 4);
  std::vector<cd> scratch;
  for (int i = 0; i < 3; ++i) {
    Eigen::MatrixXcd y = x;
    apply_on_mode(y.data(), 4, sp, i, locals[i], scratch);
    CHECK(oracle::max_abs(y - oracle::on_mode(3, c, i, locals[i]) * x) < 1e-12);
  }
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Identity(sp.total_dim(), sp.total_dim());
  for (int i = 0; i < 3; ++i) full = oracle::on_mode(3, c, i, locals[i]) * full;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Random(sp.total_dim(), sp.total_dim());
  const Eigen::MatrixXcd ref = full * rho * full.adjoint();
  conjugate_product(rho, sp, locals, scratch);
  // conjugate_product works on the conjugate-transposed locals for the second factor
  CHECK(oracle::max_abs(rho.adjoint() - ref) < 1e-11);
}

TEST_CASE("occupation table matches the basis decomposition") {
  const FockSpace sp(2, 4);
  const auto occ = occupation_table(sp);
  for (Index r = 0; r < sp.total_dim(); ++r) {
    CHECK(occ[0][r] == r / 5);
    CHECK(occ[1][r] == r % 5);
  }
}

}  // TEST_SUITE

TEST_SUITE("ising") {

TEST_CASE("configuration indices round trip and label spins") {
  for (std::uint64_t k = 0; k < 16; ++k) CHECK(SpinConfig::from_index(k, 4).index() == k);
  const auto s = SpinConfig::from_index(0b0101, 4);
  CHECK(s.label() == "+-+-");
  CHECK_THROWS_AS(SpinConfig::from_index(16, 4), std::out_of_range);
}

TEST_CASE("energy table and brute-force ground state") {
  Eigen::MatrixXd J(3, 3);
  J << 0, 1, -0.5, 1, 0, 0.25, -0.5, 0.25, 0;
  Eigen::VectorXd h(3);
  h << 0.1, -0.2, 0.3;
  const auto inst = IsingInstance::make(J, h);
  const auto e = energy_table(inst);
  for (Index k = 0; k < 8; ++k) {
    const auto s = SpinConfig::from_index(k, 3);
    double ref = 0;
    for (int i = 0; i < 3; ++i) {
      ref += h(i) * s.spins[i];
      for (int j = 0; j < 3; ++j)
        if (j != i) ref -= 0.5 * J(i, j) * s.spins[i] * s.spins[j];
    }
    CHECK(e(k) == doctest::Approx(ref).epsilon(1e-14));
  }
  const auto g = brute_force_ground(inst);
  CHECK(g.energy == e.minCoeff());
  CHECK(g.ties.size() == 1);
  // global spin flip symmetry without fields
  const auto sym = brute_force_ground(IsingInstance::make(J, Eigen::VectorXd::Zero(3)));
  REQUIRE(sym.ties.size() == 2);
  CHECK(hamming_distance(sym.ties[0], sym.ties[1]) == 3);
}

TEST_CASE("instances are validated") {
  Eigen::MatrixXd J(2, 2);
  J << 0, 1, 0.5, 0;
  CHECK_THROWS_AS(IsingInstance::make(J, Eigen::VectorXd::Zero(2)), ConfigError);
  J << 1, 0, 0, 0;
  CHECK_THROWS_AS(IsingInstance::make(J, Eigen::VectorXd::Zero(2)), ConfigError);
  CHECK_THROWS_AS(IsingInstance::make(Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(3)), ConfigError);
}

TEST_CASE("random instances are seeded, bounded and serialize losslessly") {
  const auto a = random_instance(5, 42);
  CHECK(a == random_instance(5, 42));
  CHECK_FALSE(a == random_instance(5, 43));
  CHECK(a.J.cwiseAbs().maxCoeff() < 1.0);
  CHECK(a.h.cwiseAbs().maxCoeff() < 1.0);
  CHECK(instance_from_json(instance_to_json(a)) == a);
  const auto path = (std::filesystem::temp_directory_path() / "dqbm_instance_test.json").string();
  write_instance(a, path);
  CHECK(read_instance(path) == a);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(instance_from_json(nlohmann::json{{"n_spins", 2}, {"J", {1.0, 2.0}}, {"h", {0, 0}}}),
                  ConfigError);
}

}  // TEST_SUITE

TEST_SUITE("qbm") {

namespace {

IsingInstance three_spin() {
  Eigen::MatrixXd J(3, 3);
  J << 0, 0.7, -0.4, 0.7, 0, 0.2, -0.4, 0.2, 0;
  Eigen::VectorXd h(3);
  h << 0.3, -0.1, 0.0;
  return IsingInstance::make(J, h);
}

}  // namespace

TEST_CASE("assembled Hamiltonian equals the dense construction") {
  const auto inst = three_spin();
  QbmParams p;
  p.tau = 20.0;
  const FockSpace sp(3, 3);
  for (double t : {0.0, 3.0, 10.0, 40.0}) {
    const auto h = build_hamiltonian(inst, p, sp, t);
    CHECK(h.hermiticity_defect() < 1e-15);
    CHECK(oracle::max_abs(h.dense() - oracle::hamiltonian(inst, p, 3, t)) < 1e-12);
  }
}

TEST_CASE("pump schedules and the mean-field amplitude") {
  QbmParams p;
  p.p_final = 4.0;
  p.tau = 100.0;
  CHECK(pump(0.0, p) == 0.0);
  CHECK(pump(100.0, p) == doctest::Approx(4.0 * std::tanh(3.0)));
  p.schedule = ScheduleKind::Linear;
  CHECK(pump(50.0, p) == doctest::Approx(2.0));
  CHECK(pump(500.0, p) == 4.0);
  CHECK_THROWS_AS(pump(-1.0, p), std::invalid_argument);
  // below the bifurcation point the amplitude vanishes
  CHECK(alpha_of_pump(0.0, p) == 0.0);
  const double a = alpha_of_pump(4.0, p);
  CHECK(a * a == doctest::Approx(4.0 - 2.0 * std::tanh(2.0)));
  CHECK(schedule_kind_from_string(to_string(ScheduleKind::Tanh)) == ScheduleKind::Tanh);
  CHECK_THROWS_AS(schedule_kind_from_string("cosine"), ConfigError);
}

TEST_CASE("coherent expectation reproduces the Ising energy landscape") {
  Eigen::MatrixXd J(2, 2);
  J << 0, 1, 1, 0;
  Eigen::VectorXd h(2);
  h << -0.3, 0.2;
  const auto inst = IsingInstance::make(J, h);
  QbmParams p;
  p.p_final = 3.0;
  const double t = 200.0;
  const FockSpace sp(2, 30);
  const SparseOp H = build_hamiltonian(inst, p, sp, t).entries;
  const double a = alpha(t, p);
  for (std::uint64_t k = 0; k < 4; ++k) {
    const auto s = SpinConfig::from_index(k, 2);
    const auto psi = coherent_ket(sp, {cd(a * s.spins[0], 0.0), cd(a * s.spins[1], 0.0)}).amplitudes;
    const double numeric = psi.dot(H * psi).real();
    CHECK(std::abs(numeric - coherent_expectation(inst, p, t, s)) < 1e-5);
  }
}

TEST_CASE("positive semidefiniteness check and sign normalization") {
  const auto inst = three_spin();
  Eigen::MatrixXd m = -0.5 * inst.J;
  m.diagonal().setConstant(2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const auto chk = check_positive_semidefinite(inst, 2.0, 0.5);
  CHECK(chk.min_eigenvalue == doctest::Approx(es.eigenvalues()(0)));
  CHECK(chk.positive_semidefinite);
  Eigen::MatrixXd J(2, 2);
  J << 0, 1, 1, 0;
  CHECK(check_positive_semidefinite(IsingInstance::make(J, Eigen::VectorXd::Zero(2)), 2.0, 0.5).min_eigenvalue ==
        doctest::Approx(1.5));
  Diagnostics diag;
  QbmParams strong;
  strong.xi0 = 5.0;
  QbmSystem::build(IsingInstance::make(J, Eigen::VectorXd::Zero(2)), strong, FockSpace(2, 2), &diag);
  CHECK(diag.warnings.size() == 1);

  QbmParams neg;
  neg.K = -1.0;
  neg.delta = -2.0;
  neg.xi0 = -0.5;
  neg.p_final = -4.0;
  const auto norm = normalize_sign_convention(neg);
  CHECK(norm.K == 1.0);
  CHECK(norm.delta == 2.0);
  CHECK(norm.xi0 == 0.5);
  CHECK(norm.p_final == 4.0);
  neg.K = 0.0;
  CHECK_THROWS_AS(normalize_sign_convention(neg), ConfigError);
  QbmParams bad;
  bad.kappa = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("local Hamiltonian is the single-mode block of the full one") {
  QbmParams p;
  const int c = 4;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(1, 1);
  Eigen::VectorXd h(1);
  h << 0.35;
  const auto inst = IsingInstance::make(J, h);
  p.schedule = ScheduleKind::Linear;
  const double t = 60.0;
  const Eigen::MatrixXd loc = local_hamiltonian(p, c, 0.35, pump(t, p), alpha(t, p));
  CHECK((loc.cast<cd>() - oracle::hamiltonian(inst, p, c, t)).cwiseAbs().maxCoeff() < 1e-13);
}

}  // TEST_SUITE
