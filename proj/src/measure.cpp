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

#include "dqbm/measure.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dqbm/io.hpp"
#include "dqbm/tensor.hpp"

namespace dqbm {

namespace {

constexpr double kZeroEigenvalue = 1e-10;

// probs over product x-eigenbasis -> probabilities over spin configurations
Eigen::VectorXd fold_to_configs(const Eigen::VectorXd& basis_weight, const SignPovm& povm) {
  const FockSpace& sp = povm.space;
  const int n = sp.n_modes();
  const Index nconf = Index{1} << n;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(nconf);
  std::vector<int> occ(n);
  for (Index r = 0; r < sp.total_dim(); ++r) {
    const double w = basis_weight(r);
    if (w == 0.0) continue;
    for (int i = 0; i < n; ++i) occ[i] = sp.occupation(r, i);
    for (Index c = 0; c < nconf; ++c) {
      double f = w;
      for (int i = 0; i < n && f != 0.0; ++i) {
        const double plus = povm.plus_weight(occ[i]);
        f *= ((c >> i) & 1) ? plus : 1.0 - plus;
      }
      out(c) += f;
    }
  }
  return out;
}

std::vector<Eigen::MatrixXcd> rotation(const SignPovm& povm) {
  return std::vector<Eigen::MatrixXcd>(povm.space.n_modes(), povm.x_eigenvectors.transpose().cast<cd>());
}

}  // namespace

Eigen::MatrixXd SignPovm::local_projector(int outcome) const {
  if (outcome != 1 && outcome != -1) throw std::invalid_argument("POVM outcome must be +1 or -1");
  Eigen::VectorXd w = outcome == 1 ? plus_weight : (Eigen::VectorXd::Ones(plus_weight.size()) - plus_weight);
  return x_eigenvectors * w.asDiagonal() * x_eigenvectors.transpose();
}

OperatorMatrix SignPovm::projector(int mode, int outcome) const {
  return embed(space, mode, local_projector(outcome));
}

SignPovm build_sign_povm(const FockSpace& space) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(single_mode_quadrature(space.cutoff()));
  SignPovm povm{space, es.eigenvectors(), es.eigenvalues(), Eigen::VectorXd(space.local_dim()), 0};
  for (int k = 0; k < space.local_dim(); ++k) {
    const double lam = es.eigenvalues()(k);
    if (std::abs(lam) < kZeroEigenvalue) {
      povm.plus_weight(k) = 0.5;
      ++povm.zero_eigenvalues;
    } else {
      povm.plus_weight(k) = lam > 0 ? 1.0 : 0.0;
    }
  }
  return povm;
}

std::string to_string(DistributionSource s) {
  switch (s) {
    case DistributionSource::Lindblad: return "lindblad";
    case DistributionSource::Jump: return "jump";
    case DistributionSource::Closed: return "closed";
    case DistributionSource::Balance: return "balance";
    case DistributionSource::BoltzmannFit: return "boltzmann-fit";
    default: return "other";
  }
}

void SpinDistribution::validate(double tol) const {
  if (probabilities.size() != (Index{1} << n_spins)) throw std::invalid_argument("distribution length is not 2^N");
  if (probabilities.minCoeff() < -tol) throw NumericalError("negative probability in spin distribution");
  if (std::abs(probabilities.sum() - 1.0) > tol) throw NumericalError("spin distribution does not sum to 1");
}

SpinDistribution make_distribution(int n_spins, Eigen::VectorXd p, DistributionSource source) {
  SpinDistribution d{n_spins, std::move(p), {}, source};
  if (d.probabilities.size() != (Index{1} << n_spins)) throw std::invalid_argument("distribution length is not 2^N");
  return d;
}

Eigen::VectorXd spin_probabilities(const Eigen::VectorXcd& psi, const SignPovm& povm) {
  if (psi.size() != povm.space.total_dim()) throw std::invalid_argument("state and POVM dimensions differ");
  Eigen::VectorXcd t = psi;
  std::vector<cd> scratch;
  apply_product(t.data(), 1, povm.space, rotation(povm), scratch);
  Eigen::VectorXd w = t.cwiseAbs2();
  return fold_to_configs(w, povm) / psi.squaredNorm();
}

Eigen::VectorXd spin_probabilities(const Eigen::MatrixXcd& rho, const SignPovm& povm) {
  const Index n = povm.space.total_dim();
  if (rho.rows() != n || rho.cols() != n) throw std::invalid_argument("state and POVM dimensions differ");
  Eigen::MatrixXcd x = rho;
  std::vector<cd> scratch;
  const auto rot = rotation(povm);
  apply_product(x.data(), n, povm.space, rot, scratch);
  x.transposeInPlace();
  apply_product(x.data(), n, povm.space, rot, scratch);
  return fold_to_configs(x.diagonal().real(), povm);
}

SpinDistribution spin_distribution(const QuantumState& state, const SignPovm& povm) {
  if (!(state.space == povm.space)) throw std::invalid_argument("state and POVM live on different spaces");
  Eigen::VectorXd p = state.kind == StateKind::Ket ? spin_probabilities(state.amplitudes, povm)
                                                    : spin_probabilities(state.rho, povm);
  return make_distribution(state.space.n_modes(), std::move(p),
                           state.kind == StateKind::Ket ? DistributionSource::Closed : DistributionSource::Lindblad);
}

double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw std::invalid_argument("KL divergence of unequal lengths");
  double d = 0.0;
  for (Index k = 0; k < p.size(); ++k) {
    if (p(k) <= 0.0) continue;
    if (q(k) <= 0.0) throw NumericalError("KL divergence undefined: P > 0 where Q = 0");
    d += p(k) * std::log(p(k) / q(k));
  }
  return d;
}

double kl_divergence(const SpinDistribution& p, const SpinDistribution& q) {
  return kl_divergence(p.probabilities, q.probabilities);
}

Eigen::VectorXd boltzmann_weights(const Eigen::VectorXd& energies, double beta) {
  if (!std::isfinite(beta)) throw std::invalid_argument("beta must be finite");
  const double shift = beta >= 0 ? energies.minCoeff() : energies.maxCoeff();
  Eigen::VectorXd w = (-beta * (energies.array() - shift)).exp();
  return w / w.sum();
}

SpinDistribution boltzmann_distribution(const IsingInstance& inst, double beta) {
  return make_distribution(inst.n_spins, boltzmann_weights(energy_table(inst), beta),
                           DistributionSource::BoltzmannFit);
}

BoltzmannFit fit_boltzmann(const Eigen::VectorXd& sim_in, const Eigen::VectorXd& energies, const FitOptions& opt) {
  if (sim_in.size() != energies.size()) throw std::invalid_argument("distribution and energy table differ in length");
  if (!(opt.beta_max > 0) || !(opt.tolerance > 0)) throw std::invalid_argument("bad fit options");
  BoltzmannFit fit;
  fit.beta_max = opt.beta_max;
  Eigen::VectorXd sim = sim_in;
  int clamped = 0;
  for (Index k = 0; k < sim.size(); ++k)
    if (sim(k) < opt.zero_floor) {
      sim(k) = opt.zero_floor;
      ++clamped;
    }
  if (clamped) fit.warnings.push_back(std::to_string(clamped) + " simulated probabilities clamped to " +
                                      format_double(opt.zero_floor));
  auto objective = [&](double beta) { return kl_divergence(boltzmann_weights(energies, beta), sim); };

  // coarse scan first so a non-unimodal objective cannot mislead the golden section
  const int grid = 500;
  const double step = opt.beta_max / grid;
  int best = 0;
  double best_val = objective(0.0);
  for (int k = 1; k <= grid; ++k) {
    const double v = objective(k * step);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  double lo = std::max(0, best - 1) * step;
  double hi = std::min(grid, best + 1) * step;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  while (hi - lo > opt.tolerance) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = objective(x2);
    }
  }
  double beta = 0.5 * (lo + hi);
  double val = objective(beta);
  for (double edge : {0.0, opt.beta_max}) {
    const double v = objective(edge);
    if (v < val) {
      val = v;
      beta = edge;
    }
  }
  fit.at_boundary = beta < 10 * opt.tolerance || beta > opt.beta_max - 10 * opt.tolerance;
  if (fit.at_boundary) {
    if (!opt.allow_boundary)
      throw NumericalError("Boltzmann fit minimum lies on the bracket edge (beta=" + format_double(beta) + ")");
    fit.warnings.push_back("minimum on bracket edge");
  }
  fit.beta = beta;
  fit.d_kl = val;
  const double emin = energies.minCoeff();
  fit.partition_function = (-beta * (energies.array() - emin)).exp().sum() * std::exp(-beta * emin);
  return fit;
}

BoltzmannFit fit_boltzmann(const SpinDistribution& sim, const IsingInstance& inst, const FitOptions& opt) {
  if (sim.n_spins != inst.n_spins) throw std::invalid_argument("distribution and instance disagree on N");
  return fit_boltzmann(sim.probabilities, energy_table(inst), opt);
}

double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw std::invalid_argument("total variation of unequal lengths");
  return 0.5 * (p - q).cwiseAbs().sum();
}

double total_variation(const SpinDistribution& p, const SpinDistribution& q) {
  return total_variation(p.probabilities, q.probabilities);
}

std::string distribution_csv(const SpinDistribution& dist, const IsingInstance& inst) {
  if (dist.n_spins != inst.n_spins) throw std::invalid_argument("distribution and instance disagree on N");
  const Eigen::VectorXd e = energy_table(inst);
  std::ostringstream os;
  os << "config_index,spins,E_ising,probability,stderr\n";
  for (Index k = 0; k < dist.probabilities.size(); ++k) {
    os << k << ',' << SpinConfig::from_index(k, dist.n_spins).label() << ',' << format_double(e(k)) << ','
       << format_double(dist.probabilities(k)) << ','
       << (dist.std_errors.size() ? format_double(dist.std_errors(k)) : std::string("0")) << '\n';
  }
  return os.str();
}

SpinDistribution read_distribution_csv(const std::string& path, int n_spins) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open distribution file " + path);
  std::string line;
  std::getline(in, line);
  Eigen::VectorXd p = Eigen::VectorXd::Constant(Index{1} << n_spins, -1.0);
  Eigen::VectorXd se = Eigen::VectorXd::Zero(p.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() < 4) throw ConfigError("distribution row has fewer than 4 columns: " + line);
    try {
      const long k = std::stol(f[0]);
      if (k < 0 || k >= p.size()) throw ConfigError("configuration index out of range: " + f[0]);
      p(k) = std::stod(f[3]);
      if (f.size() > 4) se(k) = std::stod(f[4]);
    } catch (const std::logic_error&) {
      throw ConfigError("unparsable distribution row: " + line);
    }
  }
  if (p.minCoeff() < 0) throw ConfigError("distribution file does not list every configuration");
  SpinDistribution d{n_spins, p, se, DistributionSource::Other};
  return d;
}

}  // namespace dqbm
