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

#include "dqbm/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "dqbm/errors.hpp"
#include "dqbm/io.hpp"
#include "dqbm/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dqbm {

long RunReport::total_jumps() const {
  long n = 0;
  for (const auto& t : trajectories) n += static_cast<long>(t.jumps.size());
  return n;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void say(const Logger& log, const std::string& msg) {
  if (log) log(msg);
}

// Runs fn(0..n-1) on up to `threads` workers; the first exception is rethrown.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex m;
  auto worker = [&] {
    for (int k; (k = next.fetch_add(1)) < n;) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(m);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  const int t = std::max(1, std::min(threads, n));
  if (t == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < t; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

FitOptions series_fit(const RunConfig& cfg) {
  FitOptions f = cfg.fit;
  f.allow_boundary = true;
  return f;
}

SampleRecord make_sample(const QbmSystem& sys, double t, SpinDistribution dist, bool fit, const FitOptions& opt,
                         std::vector<std::string>& warnings) {
  SampleRecord s{t, sys.pump_at(t), sys.alpha_at(t), std::move(dist), kNaN, kNaN};
  if (fit) {
    try {
      const BoltzmannFit f = fit_boltzmann(s.dist, sys.inst, opt);
      s.beta = f.beta;
      s.d_kl = f.d_kl;
    } catch (const NumericalError& e) {
      warnings.push_back("fit at t=" + format_double(t) + ": " + e.what());
    }
  }
  return s;
}

std::string column_names(const std::string& prefix, int n_spins) {
  std::string out;
  for (std::uint64_t k = 0; k < (std::uint64_t(1) << n_spins); ++k)
    out += "," + prefix + SpinConfig::from_index(k, n_spins).label();
  return out;
}

std::string num(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

json distribution_json(const SpinDistribution& d) {
  json j;
  j["source"] = to_string(d.source);
  j["probabilities"] = std::vector<double>(d.probabilities.data(), d.probabilities.data() + d.probabilities.size());
  if (d.std_errors.size())
    j["std_errors"] = std::vector<double>(d.std_errors.data(), d.std_errors.data() + d.std_errors.size());
  return j;
}

json stats_json(const IntegratorStats& s) {
  return {{"steps", s.steps},
          {"rejected", s.rejected},
          {"rhs_evals", s.rhs_evals},
          {"max_norm_drift", s.max_norm_drift},
          {"max_trace_drift", s.max_trace_drift},
          {"min_eigenvalue", s.min_eigenvalue}};
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

}  // namespace

IntegratorConfig integrator_for(const RunConfig& cfg) {
  IntegratorConfig ic = cfg.integrator;
  ic.sample_times = uniform_samples(cfg.t_end, cfg.sample_count);
  return ic;
}

RunReport run_single(const RunConfig& cfg, const Variant* variant, const Logger& log) {
  if (cfg.kind == ExperimentKind::Sweep) throw ConfigError("use run_sweep for sweep configs");
  const auto t0 = std::chrono::steady_clock::now();
  RunReport r;
  r.label = variant ? variant->label : "";
  r.kind = cfg.kind;
  r.instance = resolve_instance(cfg);
  r.params = variant_params(cfg, variant);
  r.cutoff = cfg.cutoff;
  const std::string tag = cfg.name + (r.label.empty() ? "" : "/" + r.label);

  Diagnostics diag;
  const FockSpace space(r.instance.n_spins, cfg.cutoff);
  const QbmSystem sys = QbmSystem::build(r.instance, r.params, space, &diag);
  const SignPovm povm = build_sign_povm(space);
  const IntegratorConfig ic = integrator_for(cfg);
  const FitOptions series = series_fit(cfg);
  const int n = r.instance.n_spins;
  say(log, tag + ": " + to_string(cfg.kind) + " run, dim " + std::to_string(space.total_dim()));

  switch (cfg.kind) {
    case ExperimentKind::Closed:
      r.stats = evolve_schrodinger(sys, QuantumState::vacuum(space), ic,
                                   [&](int, double t, const Eigen::VectorXcd& psi) {
                                     r.samples.push_back(make_sample(
                                         sys, t,
                                         make_distribution(n, spin_probabilities(psi, povm), DistributionSource::Closed),
                                         false, series, r.warnings));
                                   });
      break;
    case ExperimentKind::Lindblad:
    case ExperimentKind::Heating:
      r.stats = evolve_lindblad(sys, QuantumState::vacuum(space, StateKind::Density), ic,
                                [&](int, double t, const Eigen::MatrixXcd& rho) {
                                  r.samples.push_back(make_sample(
                                      sys, t,
                                      make_distribution(n, spin_probabilities(rho, povm), DistributionSource::Lindblad),
                                      true, series, r.warnings));
                                });
      break;
    case ExperimentKind::Jump: {
      EnsembleConfig ens = cfg.ensemble;
      ens.threads = cfg.threads;
      TrajectoryEnsemble te = evolve_quantum_jump(sys, QuantumState::vacuum(space), ic, ens, povm);
      for (size_t k = 0; k < te.times.size(); ++k)
        r.samples.push_back(make_sample(sys, te.times[k], te.mean[k], true, series, r.warnings));
      for (auto& tr : te.trajectories) {
        r.stats.merge(tr.stats);
        tr.probabilities.resize(0, 0);
      }
      r.trajectories = std::move(te.trajectories);
      break;
    }
    case ExperimentKind::Sweep:
      break;
  }

  if (cfg.kind != ExperimentKind::Closed) r.final_fit = fit_boltzmann(r.final_distribution(), r.instance, cfg.fit);
  if (cfg.kind == ExperimentKind::Heating) {
    r.heating = analyze_heating(sys, ic.sample_times.back(), r.final_distribution(), povm, cfg.heating_fit_states,
                                cfg.fit);
  }
  for (auto& w : diag.warnings) r.warnings.push_back(std::move(w));
  if (r.final_fit)
    for (const auto& w : r.final_fit->warnings) r.warnings.push_back(w);
  r.wall_seconds = seconds_since(t0);
  std::ostringstream msg;
  msg << tag << ": done in " << r.wall_seconds << " s";
  if (r.final_fit) msg << ", beta=" << r.final_fit->beta << ", D_KL=" << r.final_fit->d_kl;
  say(log, msg.str());
  return r;
}

std::vector<RunReport> run_experiment(const RunConfig& cfg, const Logger& log) {
  cfg.validate();
  if (cfg.kind == ExperimentKind::Sweep) throw ConfigError("use run_sweep for sweep configs");
  std::vector<const Variant*> runs;
  if (cfg.variants.empty()) runs.push_back(nullptr);
  for (const auto& v : cfg.variants) runs.push_back(&v);
  std::vector<RunReport> out(runs.size());
  // jump ensembles parallelize internally
  const int outer = cfg.kind == ExperimentKind::Jump ? 1 : cfg.threads;
  std::mutex log_mutex;
  Logger safe = [&](const std::string& s) {
    std::lock_guard<std::mutex> lock(log_mutex);
    say(log, s);
  };
  parallel_for(static_cast<int>(runs.size()), outer, [&](int k) { out[k] = run_single(cfg, runs[k], safe); });
  return out;
}

SweepReport run_sweep(const RunConfig& cfg, const Logger& log) {
  cfg.validate();
  if (cfg.kind != ExperimentKind::Sweep) throw ConfigError("run_sweep needs a sweep config");
  const auto t0 = std::chrono::steady_clock::now();
  SweepReport rep;
  const int count = cfg.instance.count;
  rep.records.resize(count);
  const QbmParams params = variant_params(cfg, nullptr);
  const IntegratorConfig ic = integrator_for(cfg);
  std::mutex log_mutex;
  std::atomic<int> done{0};

  parallel_for(count, cfg.threads, [&](int i) {
    SweepRecord& rec = rep.records[i];
    rec.index = i;
    rec.instance = sweep_instance(cfg, i, &rec.seed);
    const int n = rec.instance.n_spins;
    const Eigen::VectorXd energies = energy_table(rec.instance);

    Rng rng(derive_seed(cfg.baseline_seed, static_cast<std::uint64_t>(i)));
    Eigen::VectorXd q(energies.size());
    for (Index k = 0; k < q.size(); ++k) q(k) = rng.uniform_open();
    q /= q.sum();
    FitOptions loose = cfg.fit;
    loose.allow_boundary = true;
    const BoltzmannFit base = fit_boltzmann(q, energies, loose);
    rec.baseline_beta = base.beta;
    rec.baseline_d_kl = base.d_kl;

    try {
      const FockSpace space(n, cfg.cutoff);
      const QbmSystem sys = QbmSystem::build(rec.instance, params, space);
      const SignPovm povm = build_sign_povm(space);
      Eigen::VectorXd p;
      evolve_lindblad(sys, QuantumState::vacuum(space, StateKind::Density), ic,
                      [&](int k, double, const Eigen::MatrixXcd& rho) {
                        if (k + 1 == static_cast<int>(ic.sample_times.size())) p = spin_probabilities(rho, povm);
                      });
      const BoltzmannFit f = fit_boltzmann(p, energies, cfg.fit);
      rec.beta = f.beta;
      rec.d_kl = f.d_kl;
      rec.ok = true;
    } catch (const std::exception& e) {
      rec.ok = false;
      rec.error = e.what();
      rec.beta = rec.d_kl = kNaN;
    }
    std::lock_guard<std::mutex> lock(log_mutex);
    std::ostringstream msg;
    msg << cfg.name << ": instance " << i << " (" << ++done << "/" << count << ") ";
    if (rec.ok)
      msg << "beta=" << rec.beta << " D_KL=" << rec.d_kl;
    else
      msg << "failed: " << rec.error;
    say(log, msg.str());
  });

  std::vector<double> betas, dkls, base;
  for (const auto& r : rep.records) {
    base.push_back(r.baseline_d_kl);
    if (!r.ok) {
      ++rep.failures;
      continue;
    }
    betas.push_back(r.beta);
    dkls.push_back(r.d_kl);
  }
  rep.beta_mean = mean_of(betas);
  rep.beta_sd = sd_of(betas);
  rep.d_kl_mean = mean_of(dkls);
  rep.d_kl_sd = sd_of(dkls);
  rep.d_kl_max = dkls.empty() ? kNaN : *std::max_element(dkls.begin(), dkls.end());
  rep.baseline_d_kl_mean = mean_of(base);
  rep.baseline_d_kl_sd = sd_of(base);
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

// ---------------------------------------------------------------- outputs

std::string timeseries_csv(const RunReport& r) {
  const int n = r.instance.n_spins;
  const bool mc = r.kind == ExperimentKind::Jump;
  std::ostringstream out;
  out << "t,p,alpha" << column_names("P_", n);
  if (mc) out << column_names("stderr_", n);
  out << ",beta,d_kl\n";
  for (const auto& s : r.samples) {
    out << num(s.t) << ',' << num(s.pump) << ',' << num(s.alpha);
    for (Index k = 0; k < s.dist.probabilities.size(); ++k) out << ',' << num(s.dist.probabilities(k));
    if (mc)
      for (Index k = 0; k < s.dist.std_errors.size(); ++k) out << ',' << num(s.dist.std_errors(k));
    out << ',' << num(s.beta) << ',' << num(s.d_kl) << '\n';
  }
  return out.str();
}

json fit_json(const BoltzmannFit& f) {
  return {{"beta", f.beta},
          {"d_kl", f.d_kl},
          {"partition_function", f.partition_function},
          {"beta_max", f.beta_max},
          {"at_boundary", f.at_boundary},
          {"warnings", f.warnings}};
}

json run_summary(const RunReport& r) {
  json j;
  j["label"] = r.label;
  j["kind"] = to_string(r.kind);
  j["instance"] = instance_to_json(r.instance);
  j["cutoff"] = r.cutoff;
  j["final_time"] = r.samples.empty() ? 0.0 : r.samples.back().t;
  if (!r.samples.empty()) j["final_distribution"] = distribution_json(r.final_distribution());
  if (r.final_fit) j["final_fit"] = fit_json(*r.final_fit);
  j["integrator"] = stats_json(r.stats);
  if (r.kind == ExperimentKind::Jump) {
    j["trajectories"] = r.trajectories.size();
    j["total_jumps"] = r.total_jumps();
  }
  if (r.heating) {
    const HeatingAnalysis& h = *r.heating;
    j["heating"] = {{"beta_prime", h.beta_prime},
                    {"fit_states", h.fit_states},
                    {"fit_window_rule", "lowest states holding 99% of the steady-state mass, uniform weights"},
                    {"alpha", h.alpha},
                    {"beta", h.reference_fit.beta},
                    {"ratio", h.ratio},
                    {"total_variation", h.total_variation},
                    {"steady_state_residual", h.steady.residual},
                    {"orthonormality_defect", h.spectrum.orthonormality_defect()},
                    {"balance_distribution", distribution_json(h.balance)}};
  }
  j["warnings"] = r.warnings;
  return j;
}

void write_metadata(const std::string& dir, int threads, double wall_seconds) {
  json j = {{"software", "dqbm"}, {"version", kVersion}, {"threads", threads}, {"wall_clock_seconds", wall_seconds}};
  write_file_atomic((fs::path(dir) / "metadata.json").string(), j.dump(2) + "\n");
}

void write_run_outputs(const RunReport& r, const RunConfig& cfg, const std::string& dir) {
  const fs::path d(dir);
  auto put = [&](const char* name, const std::string& text) { write_file_atomic((d / name).string(), text); };
  put("timeseries.csv", timeseries_csv(r));
  put("instance.json", instance_to_json(r.instance).dump(2) + "\n");
  put("final_distribution.csv", distribution_csv(r.final_distribution(), r.instance));
  if (r.final_fit) put("fit.json", fit_json(*r.final_fit).dump(2) + "\n");
  json summary = run_summary(r);
  summary["config"] = config_to_json(cfg);
  summary["params"] = {{"K", r.params.K},         {"delta", r.params.delta}, {"xi0", r.params.xi0},
                       {"kappa", r.params.kappa}, {"nbar", r.params.nbar},   {"p_final", r.params.p_final},
                       {"tau", r.params.tau},     {"schedule", to_string(r.params.schedule)}};
  put("summary.json", summary.dump(2) + "\n");
  if (r.kind == ExperimentKind::Jump) {
    std::ostringstream jumps, trajs;
    jumps << "trajectory,time,mode\n";
    trajs << "trajectory,seed,jumps\n";
    for (const auto& t : r.trajectories) {
      trajs << t.id << ',' << t.seed << ',' << t.jumps.size() << '\n';
      for (const auto& e : t.jumps) jumps << t.id << ',' << format_double(e.time) << ',' << e.mode << '\n';
    }
    put("jumps.csv", jumps.str());
    put("trajectories.csv", trajs.str());
  }
  if (r.heating) {
    const HeatingAnalysis& h = *r.heating;
    std::ostringstream spec, ss, cmp;
    spec << "n,E_n\n";
    ss << "n,E_n,rho_ss\n";
    for (Index k = 0; k < h.spectrum.size(); ++k) {
      spec << k << ',' << format_double(h.spectrum.energies(k)) << '\n';
      ss << k << ',' << format_double(h.spectrum.energies(k)) << ',' << format_double(h.steady.populations(k))
         << '\n';
    }
    cmp << "config,E_ising,P_BE,P_ising\n";
    const Eigen::VectorXd e = energy_table(r.instance);
    for (Index k = 0; k < e.size(); ++k)
      cmp << SpinConfig::from_index(k, r.instance.n_spins).label() << ',' << format_double(e(k)) << ','
          << format_double(h.balance.probabilities(k)) << ',' << format_double(h.reference.probabilities(k)) << '\n';
    put("spectrum.csv", spec.str());
    put("steady_state.csv", ss.str());
    put("comparison.csv", cmp.str());
  }
}

std::string sweep_csv(const SweepReport& r) {
  std::ostringstream out;
  out << "index,seed,status,beta,d_kl,baseline_beta,baseline_d_kl,J,h,error\n";
  for (const auto& s : r.records) {
    std::string jt, ht;
    for (int a = 0; a < s.instance.n_spins; ++a) {
      for (int b = a + 1; b < s.instance.n_spins; ++b) jt += (jt.empty() ? "" : " ") + format_double(s.instance.J(a, b));
      ht += (a ? " " : "") + format_double(s.instance.h(a));
    }
    std::string err = s.error;
    for (char& c : err)
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    out << s.index << ',' << s.seed << ',' << (s.ok ? "ok" : "failed") << ',' << num(s.beta) << ',' << num(s.d_kl)
        << ',' << num(s.baseline_beta) << ',' << num(s.baseline_d_kl) << ',' << jt << ',' << ht << ',' << err << '\n';
  }
  return out.str();
}

json sweep_summary(const SweepReport& r) {
  auto j_num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"instances", r.records.size()},
          {"failures", r.failures},
          {"beta_mean", j_num(r.beta_mean)},
          {"beta_sd", j_num(r.beta_sd)},
          {"d_kl_mean", j_num(r.d_kl_mean)},
          {"d_kl_sd", j_num(r.d_kl_sd)},
          {"d_kl_max", j_num(r.d_kl_max)},
          {"baseline_d_kl_mean", j_num(r.baseline_d_kl_mean)},
          {"baseline_d_kl_sd", j_num(r.baseline_d_kl_sd)}};
}

void write_sweep_outputs(const SweepReport& r, const RunConfig& cfg, const std::string& dir) {
  const fs::path d(dir);
  write_file_atomic((d / "sweep.csv").string(), sweep_csv(r));
  json s = sweep_summary(r);
  s["config"] = config_to_json(cfg);
  write_file_atomic((d / "summary.json").string(), s.dump(2) + "\n");
}

}  // namespace dqbm
