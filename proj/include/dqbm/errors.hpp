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

#include <stdexcept>
#include <string>
#include <vector>

namespace dqbm {

// Bad user input (config files, instance files, parameter invariants).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Anything that goes wrong inside a numerical routine.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, double t)
      : NumericalError(what + " at t=" + std::to_string(t)), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

class DegenerateSteadyState : public NumericalError {
 public:
  explicit DegenerateSteadyState(int dim)
      : NumericalError("balance generator null space has dimension " + std::to_string(dim)),
        dimension_(dim) {}
  int dimension() const { return dimension_; }

 private:
  int dimension_;
};

// Collects non-fatal warnings produced along a computation.
struct Diagnostics {
  std::vector<std::string> warnings;
  void warn(std::string msg) { warnings.push_back(std::move(msg)); }
};

inline void warn(Diagnostics* diag, std::string msg) {
  if (diag) diag->warn(std::move(msg));
}

}  // namespace dqbm
