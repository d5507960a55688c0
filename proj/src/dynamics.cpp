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

#include "dqbm/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "dqbm/errors.hpp"
#include "dqbm/propagators.hpp"
#include "dqbm/rng.hpp"

namespace dqbm {

std::string to_string(Method m) {
  switch (m) {
    case Method::Dopri5: return "dopri5";
    case Method::Rk4: return "rk4";
    case Method::Split: return "split";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "dopri5") return Method::Dopri5;
  if (s == "rk4") return Method::Rk4;
  if (s == "split") return Method::Split;
  throw ConfigError("unknown integrator method '" + s + "'");
}

void IntegratorConfig::validate() const {
  if (!(rtol > 0) || !(atol > 0)) throw ConfigError("integrator tolerances must be positive");
  if (!(max_step > 0)) throw ConfigError("max_step must be positive");
  if (!(step > 0)) throw ConfigError("step must be positive");
  if (sample_times.empty()) throw ConfigError("no sample times");
  if (sample_times.front() != 0.0) throw ConfigError("sample times must start at 0");
  double prev = -1.0;
  for (double t : sample_times) {
    if (!std::isfinite(t) || t < 0.0) throw ConfigError("sample times must be finite and non-negative");
    if (t <= prev) throw ConfigError("sample times must be strictly increasing");
    prev = t;
  }
  if (positivity_every < 0) throw ConfigError("positivity_every must be >= 0");
}

std::vector<double> uniform_samples(double t_end, int count) {
  if (count < 1) throw ConfigError("sample count must be >= 1");
  if (!(t_end >= 0.0)) throw ConfigError("t_end must be non-negative");
  if (count == 1) return {t_end};
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) out[k] = t_end * k / (count - 1);
  out.back() = t_end;
  return out;
}

void IntegratorStats::merge(const IntegratorStats& o) {
  steps += o.steps;
  rejected += o.rejected;
  rhs_evals += o.rhs_evals;
  max_norm_drift = std::max(max_norm_drift, o.max_norm_drift);
  max_trace_drift = std::max(max_trace_drift, o.max_trace_drift);
  min_eigenvalue = std::min(min_eigenvalue, o.min_eigenvalue);
}

long TrajectoryEnsemble::total_jumps() const {
  long n = 0;
  for (const auto& tr : trajectories) n += static_cast<long>(tr.jumps.size());
  return n;
}

namespace {

double min_step(double t) { return 1e-13 * std::max(1.0, std::abs(t)); }

// Integrates y from t0 to t1 without interruption.
template <class State>
void advance(Stepper<State>& stepper, const IntegratorConfig& cfg, double t0, double t1, State& y, double& h,
             State& work) {
  if (t1 <= t0) return;
  if (!stepper.adaptive()) {
    const long n = std::max(1L, static_cast<long>(std::ceil((t1 - t0) / cfg.step - 1e-9)));
    const double hs = (t1 - t0) / n;
    double dummy = hs;
    for (long k = 0; k < n; ++k) {
      stepper.attempt(t0 + k * hs, hs, y, work, dummy);
      y.swap(work);
    }
    return;
  }
  double t = t0;
  while (t < t1) {
    const bool last = h >= t1 - t;
    const double step = last ? t1 - t : std::min(h, cfg.max_step);
    double h_next = step;
    if (stepper.attempt(t, step, y, work, h_next)) {
      y.swap(work);
      t = last ? t1 : t + step;
      if (!last || h_next > h) h = std::min(h_next, cfg.max_step);
    } else {
      h = h_next;
      if (h < min_step(t)) throw IntegrationError("step size underflow", t);
    }
  }
}

void check_start(const QuantumState& s, const QbmSystem& sys, StateKind kind) {
  if (s.kind != kind) throw ConfigError("initial state has the wrong kind");
  if (!(s.space == sys.space)) throw ConfigError("initial state lives in a different Fock space");
}

// Shared by closed evolution and trajectories so that kappa = 0 reproduces closed runs exactly.
template <class OnSample, class OnJump>
IntegratorStats drive_ket(const QbmSystem& sys, Eigen::VectorXcd psi, const IntegratorConfig& cfg, double kappa,
                          Rng* rng, const OnSample& on_sample, const OnJump& on_jump) {
  cfg.validate();
  auto stepper = make_ket_stepper(sys, cfg, kappa);
  const bool jumps = kappa > 0.0;
  const FockSpace& space = sys.space;
  std::vector<SparseOp> lowering;
  std::vector<std::vector<int>> occ;
  if (jumps) {
    for (int i = 0; i < space.n_modes(); ++i) lowering.push_back(annihilation(space, i).entries);
    occ.resize(space.n_modes());
    for (int i = 0; i < space.n_modes(); ++i) {
      occ[i].resize(space.total_dim());
      for (Index r = 0; r < space.total_dim(); ++r) occ[i][r] = space.occupation(r, i);
    }
  }
  IntegratorStats extra;
  Eigen::VectorXcd work(psi.size()), saved, trial;
  double h = std::min(cfg.max_step, 0.01);
  double t = 0.0;
  double r = jumps ? rng->uniform_open() : 0.0;

  auto sample = [&](int k) {
    if (!jumps) {
      const double n2 = psi.squaredNorm();
      extra.max_norm_drift = std::max(extra.max_norm_drift, std::abs(n2 - 1.0));
      psi /= std::sqrt(n2);
      stepper->invalidate();
    }
    on_sample(k, cfg.sample_times[k], psi);
  };

  auto jump = [&]() {
    Eigen::VectorXd w(space.n_modes());
    for (int i = 0; i < space.n_modes(); ++i) {
      double s = 0.0;
      for (Index q = 0; q < psi.size(); ++q) s += std::norm(psi(q)) * occ[i][q];
      w(i) = s;
    }
    const double total = w.sum();
    if (!(total > 0.0)) throw NumericalError("jump requested from the vacuum");
    double u = rng->uniform_open() * total;
    int mode = space.n_modes() - 1;
    for (int i = 0; i < space.n_modes(); ++i) {
      if (u < w(i)) {
        mode = i;
        break;
      }
      u -= w(i);
    }
    psi = lowering[mode] * psi;
    psi.normalize();
    on_jump(t, mode);
    r = rng->uniform_open();
    stepper->invalidate();
  };

  const double tol_scale = 1e-6;
  for (size_t k = 0; k < cfg.sample_times.size(); ++k) {
    const double t1 = cfg.sample_times[k];
    if (!jumps) {
      advance(*stepper, cfg, t, t1, psi, h, work);
      t = t1;
      sample(static_cast<int>(k));
      continue;
    }
    const double fixed =
        stepper->adaptive() ? 0.0 : (t1 - t) / std::max(1.0, std::ceil((t1 - t) / cfg.step - 1e-9));
    while (t < t1) {
      double step, h_next;
      bool last;
      if (stepper->adaptive()) {
        last = h >= t1 - t;
        step = last ? t1 - t : std::min(h, cfg.max_step);
        if (!stepper->attempt(t, step, psi, work, h_next)) {
          h = h_next;
          if (h < min_step(t)) throw IntegrationError("step size underflow", t);
          continue;
        }
      } else {
        last = fixed >= (t1 - t) * (1.0 - 1e-12);
        step = last ? t1 - t : fixed;
        stepper->attempt(t, step, psi, work, h_next);
      }
      if (work.squaredNorm() > r) {
        psi.swap(work);
        t = last ? t1 : t + step;
        if (stepper->adaptive() && (!last || h_next > h)) h = std::min(h_next, cfg.max_step);
        continue;
      }
      // The jump lies inside (t, t + step]. Bracketed root of ln|psi(s)|^2 - ln r
      // (Illinois false position, bisection when it stalls).
      saved = psi;
      const double log_r = std::log(r);
      double lo = 0.0, hi = step;
      double f_lo = std::log(saved.squaredNorm()) - log_r;
      double f_hi = std::log(work.squaredNorm()) - log_r;
      const double tol = tol_scale * std::max(1.0, t);
      trial = work;
      int side = 0;
      for (int it = 0; hi - lo > tol; ++it) {
        double s = (f_lo - f_hi) > 0.0 ? lo + (hi - lo) * f_lo / (f_lo - f_hi) : 0.5 * (lo + hi);
        if (it >= 60 || !(s > lo && s < hi)) s = 0.5 * (lo + hi);
        stepper->single(t, s, saved, work);
        const double f = std::log(work.squaredNorm()) - log_r;
        if (std::abs(f) <= 1e-13) {
          hi = s;
          trial = work;
          break;
        }
        if (f > 0.0) {
          lo = s;
          f_lo = f;
          if (side == -1) f_hi *= 0.5;
          side = -1;
        } else {
          hi = s;
          f_hi = f;
          trial = work;
          if (side == 1) f_lo *= 0.5;
          side = 1;
        }
      }
      psi = trial;
      t = (hi == step && last) ? t1 : t + hi;
      stepper->invalidate();
      jump();
    }
    sample(static_cast<int>(k));
  }
  IntegratorStats st = stepper->stats;
  st.merge(extra);
  return st;
}

struct NoJump {
  void operator()(double, int) const {}
};

}  // namespace

IntegratorStats evolve_schrodinger(const QbmSystem& sys, const QuantumState& psi0, const IntegratorConfig& cfg,
                                   const KetObserver& observe) {
  check_start(psi0, sys, StateKind::Ket);
  return drive_ket(
      sys, psi0.amplitudes, cfg, 0.0, nullptr,
      [&](int k, double t, const Eigen::VectorXcd& psi) { observe(k, t, psi); }, NoJump{});
}

KetRun evolve_schrodinger(const QbmSystem& sys, const QuantumState& psi0, const IntegratorConfig& cfg) {
  KetRun run;
  run.stats = evolve_schrodinger(sys, psi0, cfg, [&](int, double t, const Eigen::VectorXcd& psi) {
    run.times.push_back(t);
    run.states.push_back(psi);
  });
  return run;
}

IntegratorStats evolve_lindblad(const QbmSystem& sys, const QuantumState& rho0, const IntegratorConfig& cfg,
                                const DensityObserver& observe) {
  cfg.validate();
  check_start(rho0, sys, StateKind::Density);
  auto stepper = make_density_stepper(sys, cfg);
  Eigen::MatrixXcd rho = rho0.rho, work(rho.rows(), rho.cols());
  IntegratorStats extra;
  double h = std::min(cfg.max_step, 0.01);
  double t = 0.0;
  const int n_samples = static_cast<int>(cfg.sample_times.size());
  for (int k = 0; k < n_samples; ++k) {
    const double t1 = cfg.sample_times[k];
    advance(*stepper, cfg, t, t1, rho, h, work);
    t = t1;
    // remove round-off anti-Hermitian drift
    work = 0.5 * (rho + rho.adjoint());
    rho.swap(work);
    stepper->invalidate();
    const double tr = rho.trace().real();
    extra.max_trace_drift = std::max(extra.max_trace_drift, std::abs(tr - 1.0));
    const bool check = cfg.positivity_every > 0 ? k % cfg.positivity_every == 0 || k == n_samples - 1
                                                : k == n_samples - 1;
    if (check) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
      extra.min_eigenvalue = std::min(extra.min_eigenvalue, es.eigenvalues()(0));
    }
    observe(k, t, rho);
  }
  IntegratorStats st = stepper->stats;
  st.merge(extra);
  return st;
}

DensityRun evolve_lindblad(const QbmSystem& sys, const QuantumState& rho0, const IntegratorConfig& cfg) {
  DensityRun run;
  run.stats = evolve_lindblad(sys, rho0, cfg, [&](int, double t, const Eigen::MatrixXcd& rho) {
    run.times.push_back(t);
    run.states.push_back(rho);
  });
  return run;
}

TrajectoryRecord run_trajectory(const QbmSystem& sys, const QuantumState& psi0, const IntegratorConfig& cfg,
                                const SignPovm& povm, std::uint64_t base_seed, int id, bool keep_state) {
  check_start(psi0, sys, StateKind::Ket);
  if (sys.params.nbar > 0.0) throw ConfigError("quantum-jump runs support nbar = 0 only");
  TrajectoryRecord rec;
  rec.id = id;
  rec.seed = derive_seed(base_seed, static_cast<std::uint64_t>(id));
  Rng rng(rec.seed);
  const Index n_conf = Index(1) << sys.inst.n_spins;
  rec.probabilities.resize(static_cast<Index>(cfg.sample_times.size()), n_conf);
  rec.stats = drive_ket(
      sys, psi0.amplitudes, cfg, sys.params.kappa, &rng,
      [&](int k, double, const Eigen::VectorXcd& psi) {
        rec.probabilities.row(k) = spin_probabilities(psi, povm).transpose();
        if (keep_state && k + 1 == static_cast<int>(cfg.sample_times.size())) rec.final_state = psi.normalized();
      },
      [&](double t, int mode) { rec.jumps.push_back({t, mode}); });
  return rec;
}

std::vector<SpinDistribution> aggregate_trajectories(const std::vector<TrajectoryRecord>& trajs, int n_spins) {
  if (trajs.empty()) throw ConfigError("no trajectories to aggregate");
  const Index samples = trajs.front().probabilities.rows();
  const Index n_conf = trajs.front().probabilities.cols();
  const double n = static_cast<double>(trajs.size());
  std::vector<SpinDistribution> out;
  out.reserve(samples);
  for (Index k = 0; k < samples; ++k) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n_conf), sq = Eigen::VectorXd::Zero(n_conf);
    for (const auto& tr : trajs) {
      if (tr.probabilities.rows() != samples || tr.probabilities.cols() != n_conf)
        throw ConfigError("trajectories use different sample grids");
      const Eigen::VectorXd p = tr.probabilities.row(k).transpose();
      mean += p;
      sq += p.cwiseAbs2();
    }
    mean /= n;
    Eigen::VectorXd se = Eigen::VectorXd::Zero(n_conf);
    if (trajs.size() > 1) {
      const Eigen::VectorXd var = ((sq - n * mean.cwiseAbs2()) / (n - 1.0)).cwiseMax(0.0);
      se = (var / n).cwiseSqrt();
    }
    SpinDistribution d = make_distribution(n_spins, mean, DistributionSource::Jump);
    d.std_errors = se;
    out.push_back(std::move(d));
  }
  return out;
}

TrajectoryEnsemble evolve_quantum_jump(const QbmSystem& sys, const QuantumState& psi0, const IntegratorConfig& cfg,
                                       const EnsembleConfig& ens, const SignPovm& povm) {
  if (ens.n_trajectories < 1) throw ConfigError("n_trajectories must be >= 1");
  if (ens.threads < 1) throw ConfigError("threads must be >= 1");
  cfg.validate();
  TrajectoryEnsemble out;
  out.config = ens;
  out.times = cfg.sample_times;
  out.trajectories.resize(ens.n_trajectories);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const int id = next.fetch_add(1);
      if (id >= ens.n_trajectories) return;
      try {
        out.trajectories[id] = run_trajectory(sys, psi0, cfg, povm, ens.base_seed, id, ens.keep_final_states);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = ens.n_trajectories;
        return;
      }
    }
  };
  const int n_threads = std::min(ens.threads, ens.n_trajectories);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  out.mean = aggregate_trajectories(out.trajectories, sys.inst.n_spins);
  return out;
}

}  // namespace dqbm
