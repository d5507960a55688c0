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

#include "dqbm/fock.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace dqbm {

FockSpace::FockSpace(int n_modes, int cutoff) : n_modes_(n_modes), cutoff_(cutoff) {
  if (n_modes < 1) throw ConfigError("n_modes must be >= 1");
  if (cutoff < 1) throw ConfigError("cutoff must be >= 1");
  const Index d = cutoff + 1;
  Index total = 1;
  strides_.assign(n_modes, 1);
  for (int i = n_modes - 1; i >= 0; --i) {
    strides_[i] = total;
    if (total > std::numeric_limits<Index>::max() / d) throw ConfigError("Fock space dimension overflows");
    total *= d;
  }
  total_dim_ = total;
}

void FockSpace::check_mode(int mode) const {
  if (mode < 0 || mode >= n_modes_)
    throw std::out_of_range("mode " + std::to_string(mode) + " out of range for " +
                            std::to_string(n_modes_) + " modes");
}

Index FockSpace::stride(int mode) const {
  check_mode(mode);
  return strides_[mode];
}

int FockSpace::occupation(Index basis, int mode) const {
  return static_cast<int>((basis / stride(mode)) % local_dim());
}

double OperatorMatrix::hermiticity_defect() const {
  SparseOp diff = entries - SparseOp(entries.adjoint());
  double m = 0;
  for (Index k = 0; k < diff.outerSize(); ++k)
    for (SparseOp::InnerIterator it(diff, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

QuantumState QuantumState::ket(const FockSpace& space, Eigen::VectorXcd amplitudes) {
  if (amplitudes.size() != space.total_dim()) throw std::invalid_argument("ket dimension mismatch");
  return QuantumState{StateKind::Ket, space, std::move(amplitudes), {}};
}

QuantumState QuantumState::density(const FockSpace& space, Eigen::MatrixXcd rho) {
  if (rho.rows() != space.total_dim() || rho.cols() != space.total_dim())
    throw std::invalid_argument("density matrix dimension mismatch");
  return QuantumState{StateKind::Density, space, {}, std::move(rho)};
}

QuantumState QuantumState::vacuum(const FockSpace& space, StateKind kind) {
  const Index n = space.total_dim();
  if (kind == StateKind::Ket) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
    v(0) = 1.0;
    return ket(space, std::move(v));
  }
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(n, n);
  r(0, 0) = 1.0;
  return density(space, std::move(r));
}

Eigen::MatrixXcd QuantumState::density_matrix() const {
  if (kind == StateKind::Density) return rho;
  return amplitudes * amplitudes.adjoint();
}

void QuantumState::validate(double tol) const {
  if (kind == StateKind::Ket) {
    const double n2 = amplitudes.squaredNorm();
    if (std::abs(n2 - 1.0) > tol) throw NumericalError("ket norm deviates from 1: " + std::to_string(n2));
    return;
  }
  if (hermiticity_defect(rho) > tol) throw NumericalError("density matrix is not Hermitian");
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > tol) throw NumericalError("density matrix trace deviates from 1: " + std::to_string(tr));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8)
    throw NumericalError("density matrix has negative eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
}

Eigen::MatrixXd single_mode_annihilation(int cutoff) {
  if (cutoff < 1) throw ConfigError("cutoff must be >= 1");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(cutoff + 1, cutoff + 1);
  for (int n = 1; n <= cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Eigen::MatrixXd single_mode_quadrature(int cutoff) {
  Eigen::MatrixXd a = single_mode_annihilation(cutoff);
  Eigen::MatrixXd x = a + a.transpose();
  return 0.5 * x;
}

OperatorMatrix embed(const FockSpace& space, int mode, const Eigen::MatrixXd& local) {
  space.check_mode(mode);
  const int d = space.local_dim();
  if (local.rows() != d || local.cols() != d) throw std::invalid_argument("local operator has wrong size");
  const Index n = space.total_dim();
  const Index s = space.stride(mode);
  std::vector<Eigen::Triplet<cd>> trip;
  for (Index r = 0; r < n; ++r) {
    const int nr = space.occupation(r, mode);
    const Index base = r - nr * s;
    for (int m = 0; m < d; ++m) {
      const double v = local(nr, m);
      if (v != 0.0) trip.emplace_back(r, base + m * s, v);
    }
  }
  SparseOp op(n, n);
  op.setFromTriplets(trip.begin(), trip.end());
  return OperatorMatrix{space, std::move(op)};
}

OperatorMatrix annihilation(const FockSpace& space, int mode) {
  return embed(space, mode, single_mode_annihilation(space.cutoff()));
}

OperatorMatrix creation(const FockSpace& space, int mode) {
  return embed(space, mode, single_mode_annihilation(space.cutoff()).transpose());
}

OperatorMatrix number_operator(const FockSpace& space, int mode) {
  Eigen::MatrixXd a = single_mode_annihilation(space.cutoff());
  return embed(space, mode, a.transpose() * a);
}

OperatorMatrix quadrature_x(const FockSpace& space, int mode) {
  return embed(space, mode, single_mode_quadrature(space.cutoff()));
}

QuantumState coherent_ket(const FockSpace& space, const std::vector<cd>& amplitudes, Diagnostics* diag) {
  if (static_cast<int>(amplitudes.size()) != space.n_modes())
    throw std::invalid_argument("one coherent amplitude per mode required");
  const int d = space.local_dim();
  std::vector<Eigen::VectorXcd> local(space.n_modes());
  for (int i = 0; i < space.n_modes(); ++i) {
    const cd alpha = amplitudes[i];
    Eigen::VectorXcd v(d);
    v(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < d; ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    const double deficit = 1.0 - v.squaredNorm();
    if (deficit > 1e-6)
      warn(diag, "coherent amplitude " + std::to_string(std::abs(alpha)) + " loses " +
                     std::to_string(deficit) + " of its norm to truncation");
    local[i] = v / v.norm();
  }
  Eigen::VectorXcd psi(space.total_dim());
  for (Index r = 0; r < space.total_dim(); ++r) {
    cd amp = 1.0;
    for (int i = 0; i < space.n_modes(); ++i) amp *= local[i](space.occupation(r, i));
    psi(r) = amp;
  }
  return QuantumState::ket(space, std::move(psi));
}

double hermiticity_defect(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("hermiticity defect of a non-square matrix");
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

EigenDecomposition eigendecompose_hermitian(const Eigen::MatrixXcd& a) {
  const double defect = hermiticity_defect(a);
  if (defect >= 1e-9) throw std::invalid_argument("eigendecompose_hermitian: defect " + std::to_string(defect));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

EigenDecomposition eigendecompose_hermitian(const OperatorMatrix& a) {
  return eigendecompose_hermitian(a.dense());
}

double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd diff = a - b;
  diff = 0.5 * (diff + diff.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace dqbm
