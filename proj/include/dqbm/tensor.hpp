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

#include <vector>

#include "dqbm/fock.hpp"

namespace dqbm {

// Multiplies a local d×d matrix into one mode axis of every column of a
// column-major array with space.total_dim() rows. Used for kets (one column)
// and density matrices (total_dim columns).
void apply_on_mode(cd* data, Index n_cols, const FockSpace& space, int mode,
                   const Eigen::MatrixXcd& local, std::vector<cd>& scratch);

// Applies ⊗_i local[i] to every column.
void apply_product(cd* data, Index n_cols, const FockSpace& space,
                   const std::vector<Eigen::MatrixXcd>& locals, std::vector<cd>& scratch);

// rho <- (⊗ U_i) rho (⊗ U_i)^† for Hermitian rho.
void conjugate_product(Eigen::MatrixXcd& rho, const FockSpace& space,
                       const std::vector<Eigen::MatrixXcd>& locals, std::vector<cd>& scratch);

// Per-basis-state occupation table: occ[mode][r].
std::vector<std::vector<int>> occupation_table(const FockSpace& space);

}  // namespace dqbm
