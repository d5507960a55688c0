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

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dqbm/errors.hpp"

namespace dqbm {

using cd = std::complex<double>;
using Index = Eigen::Index;
using SparseOp = Eigen::SparseMatrix<cd, Eigen::RowMajor>;

// Truncated multi-mode Fock space. Basis index r = sum_i n_i * d^(N-1-i),
// so mode 0 is the slowest-varying digit.
class FockSpace {
 public:
  FockSpace(int n_modes, int cutoff);

  int n_modes() const { return n_modes_; }
  int cutoff() const { return cutoff_; }
  int local_dim() const { return cutoff_ + 1; }
  Index total_dim() const { return total_dim_; }
  Index stride(int mode) const;
  int occupation(Index basis, int mode) const;
  void check_mode(int mode) const;

  bool operator==(const FockSpace& other) const {
    return n_modes_ == other.n_modes_ && cutoff_ == other.cutoff_;
  }

 private:
  int n_modes_;
  int cutoff_;
  Index total_dim_;
  std::vector<Index> strides_;
};

struct OperatorMatrix {
  FockSpace space;
  SparseOp entries;

  double hermiticity_defect() const;
  Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(entries); }
};

enum class StateKind { Ket, Density };

struct QuantumState {
  StateKind kind;
  FockSpace space;
  Eigen::VectorXcd amplitudes;  // ket only
  Eigen::MatrixXcd rho;         // density only

  static QuantumState ket(const FockSpace& space, Eigen::VectorXcd amplitudes);
  static QuantumState density(const FockSpace& space, Eigen::MatrixXcd rho);
  static QuantumState vacuum(const FockSpace& space, StateKind kind = StateKind::Ket);

  Eigen::MatrixXcd density_matrix() const;
  // Throws NumericalError when the state violates its invariants.
  void validate(double tol = 1e-9) const;
};

Eigen::MatrixXd single_mode_annihilation(int cutoff);
// x = (a + a^dag) / 2
Eigen::MatrixXd single_mode_quadrature(int cutoff);

// I ⊗ ... ⊗ local ⊗ ... ⊗ I with `local` acting on `mode`.
OperatorMatrix embed(const FockSpace& space, int mode, const Eigen::MatrixXd& local);

OperatorMatrix annihilation(const FockSpace& space, int mode);
OperatorMatrix creation(const FockSpace& space, int mode);
OperatorMatrix number_operator(const FockSpace& space, int mode);
OperatorMatrix quadrature_x(const FockSpace& space, int mode);

QuantumState coherent_ket(const FockSpace& space, const std::vector<cd>& amplitudes,
                          Diagnostics* diag = nullptr);

struct EigenDecomposition {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // columns
};

double hermiticity_defect(const Eigen::MatrixXcd& a);
EigenDecomposition eigendecompose_hermitian(const Eigen::MatrixXcd& a);
EigenDecomposition eigendecompose_hermitian(const OperatorMatrix& a);

// Trace distance 1/2 ||a - b||_1 of two Hermitian matrices.
double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

}  // namespace dqbm
