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

#include "dqbm/tensor.hpp"

#include <algorithm>

namespace dqbm {

void apply_on_mode(cd* data, Index n_cols, const FockSpace& space, int mode,
                   const Eigen::MatrixXcd& local, std::vector<cd>& scratch) {
  const Index d = space.local_dim();
  const Index s = space.stride(mode);
  const Index len = space.total_dim() * n_cols;
  if (static_cast<Index>(scratch.size()) < len) scratch.resize(len);
  if (s == 1) {
    Eigen::Map<Eigen::MatrixXcd> x(data, d, len / d);
    Eigen::Map<Eigen::MatrixXcd> y(scratch.data(), d, len / d);
    y.noalias() = local * x;
  } else {
    const Eigen::MatrixXcd lt = local.transpose();
    const Index block = d * s;
    for (Index b = 0; b < len; b += block) {
      Eigen::Map<Eigen::MatrixXcd> x(data + b, s, d);
      Eigen::Map<Eigen::MatrixXcd> y(scratch.data() + b, s, d);
      y.noalias() = x * lt;
    }
  }
  std::copy(scratch.begin(), scratch.begin() + len, data);
}

void apply_product(cd* data, Index n_cols, const FockSpace& space,
                   const std::vector<Eigen::MatrixXcd>& locals, std::vector<cd>& scratch) {
  if (static_cast<int>(locals.size()) != space.n_modes()) throw std::invalid_argument("one local matrix per mode required");
  for (int i = 0; i < space.n_modes(); ++i) apply_on_mode(data, n_cols, space, i, locals[i], scratch);
}

void conjugate_product(Eigen::MatrixXcd& rho, const FockSpace& space,
                       const std::vector<Eigen::MatrixXcd>& locals, std::vector<cd>& scratch) {
  const Index n = space.total_dim();
  apply_product(rho.data(), n, space, locals, scratch);
  rho.adjointInPlace();
  apply_product(rho.data(), n, space, locals, scratch);
}

std::vector<std::vector<int>> occupation_table(const FockSpace& space) {
  std::vector<std::vector<int>> occ(space.n_modes(), std::vector<int>(space.total_dim()));
  for (int i = 0; i < space.n_modes(); ++i)
    for (Index r = 0; r < space.total_dim(); ++r) occ[i][r] = space.occupation(r, i);
  return occ;
}

}  // namespace dqbm
