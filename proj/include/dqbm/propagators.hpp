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

#include <map>
#include <memory>
#include <vector>

#include "dqbm/dynamics.hpp"

namespace dqbm {

// Real CSR image of H(t) = h_static - p h_pump + alpha h_drive on one shared pattern.
class HamiltonianKernel {
 public:
  explicit HamiltonianKernel(const QbmSystem& sys);

  void set_time(double t);
  // y = -i H x for one column of length dim().
  void apply_minus_i(const cd* x, cd* y) const;
  Index dim() const { return dim_; }
  double diagonal(Index r) const { return diag_[r]; }

 private:
  const QbmSystem* sys_;
  Index dim_;
  std::vector<int> row_ptr_, col_;
  std::vector<double> vs_, vp_, vd_, cur_, diag_;
  std::vector<int> diag_pos_;
  double t_ = -1.0;
};

// dpsi/dt = -i (H - i kappa_eff sum_i n_i) psi
class KetGenerator {
 public:
  KetGenerator(const QbmSystem& sys, double kappa_eff);
  void operator()(double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy);

 private:
  HamiltonianKernel h_;
  Eigen::VectorXd decay_;
};

// Lindblad right-hand side; the output is Hermitian by construction.
class DensityGenerator {
 public:
  explicit DensityGenerator(const QbmSystem& sys);
  void operator()(double t, const Eigen::MatrixXcd& y, Eigen::MatrixXcd& dy);

 private:
  const QbmSystem* sys_;
  HamiltonianKernel h_;
  Eigen::VectorXd gamma_;                 // diagonal decay
  std::vector<std::vector<int>> occ_;
  std::vector<Index> stride_;
  double down_, up_;                      // 2 kappa (nbar+1), 2 kappa nbar
};

template <class State>
class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual bool adaptive() const = 0;
  // Adaptive steppers accept or reject and propose the next step; fixed ones always accept.
  virtual bool attempt(double t, double h, const State& y, State& y_new, double& h_next) = 0;
  // One step of size h without error control.
  virtual void single(double t, double h, const State& y, State& y_new) = 0;
  // Call after modifying the state outside the stepper.
  virtual void invalidate() {}

  IntegratorStats stats;
};

// Exact flow of exp(-i tau h_ij) for h_ij = -xi0 J_ij (a_i^dag a_j + h.c.),
// block-diagonal in n_i + n_j. Each block is a zero-diagonal tridiagonal
// chain, so cos(tau h) only couples sites of equal parity and sin(tau h) only
// sites of opposite parity; the propagator is applied as four real blocks.
class PairHop {
 public:
  PairHop(const FockSpace& space, int i, int j, double coupling);
  void apply(cd* data, Index n_cols, double tau);

 private:
  struct Block {
    std::vector<Index> offsets;  // even chain sites first, then odd
    Index n_even = 0;
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;     // rows in the same order as offsets
  };
  struct Factors {
    Eigen::MatrixXd cee, coo, seo, soe;
  };
  const Factors& factors(size_t block, double tau);

  Index dim_;
  std::vector<Block> blocks_;
  std::vector<Index> bases_;
  double cached_tau_ = 0.0;
  bool cache_valid_ = false;
  std::vector<Factors> cache_;
  Eigen::MatrixXcd xe_, xo_, ye_, yo_;
};

// Exact single-mode amplitude-damping (and thermal) channel exp(tau D).
class DampingChannel {
 public:
  DampingChannel(const FockSpace& space, double kappa, double nbar);
  // rho <- exp(tau sum_i D_i) rho
  void apply(Eigen::MatrixXcd& rho, double tau);
  // Chain propagator for diagonal offset q = m - n (exposed for tests).
  Eigen::MatrixXd chain(int q, double tau);
  static Eigen::MatrixXd chain_generator(int cutoff, int q, double kappa, double nbar);

 private:
  struct Chains {
    std::vector<Eigen::MatrixXd> e;              // index q + cutoff
    std::vector<std::vector<int>> lo, hi;        // nonzero column range per row
  };
  const Chains& chains(double tau);

  FockSpace space_;
  double kappa_, nbar_;
  std::vector<std::vector<int>> occ_;
  std::map<double, Chains> cache_;
  Eigen::MatrixXcd buffer_;
};

std::unique_ptr<Stepper<Eigen::VectorXcd>> make_ket_stepper(const QbmSystem& sys, const IntegratorConfig& cfg,
                                                           double kappa_eff);
std::unique_ptr<Stepper<Eigen::MatrixXcd>> make_density_stepper(const QbmSystem& sys, const IntegratorConfig& cfg);

}  // namespace dqbm
