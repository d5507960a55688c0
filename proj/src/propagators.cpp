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

#include "dqbm/propagators.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "dqbm/tensor.hpp"

namespace dqbm {

// ---------------------------------------------------------------- Hamiltonian

HamiltonianKernel::HamiltonianKernel(const QbmSystem& sys) : sys_(&sys), dim_(sys.space.total_dim()) {
  const SparseOp& s = sys.parts.h_static.entries;
  const SparseOp& p = sys.parts.h_pump.entries;
  const SparseOp& d = sys.parts.h_drive.entries;
  row_ptr_.push_back(0);
  for (Index r = 0; r < dim_; ++r) {
    std::map<Index, std::array<double, 3>> row;
    for (SparseOp::InnerIterator it(s, r); it; ++it) row[it.col()][0] += it.value().real();
    for (SparseOp::InnerIterator it(p, r); it; ++it) row[it.col()][1] += it.value().real();
    for (SparseOp::InnerIterator it(d, r); it; ++it) row[it.col()][2] += it.value().real();
    row[r];  // keep the diagonal slot even when empty
    for (const auto& [c, v] : row) {
      if (c == r) diag_pos_.push_back(static_cast<int>(col_.size()));
      col_.push_back(static_cast<int>(c));
      vs_.push_back(v[0]);
      vp_.push_back(-v[1]);
      vd_.push_back(v[2]);
    }
    row_ptr_.push_back(static_cast<int>(col_.size()));
  }
  cur_.resize(vs_.size());
  diag_.resize(dim_);
  set_time(0.0);
}

void HamiltonianKernel::set_time(double t) {
  if (t == t_) return;
  t_ = t;
  const double p = sys_->pump_at(t);
  const double a = sys_->alpha_at(t);
  for (size_t k = 0; k < cur_.size(); ++k) cur_[k] = vs_[k] + p * vp_[k] + a * vd_[k];
  for (Index r = 0; r < dim_; ++r) diag_[r] = cur_[diag_pos_[r]];
}

void HamiltonianKernel::apply_minus_i(const cd* x, cd* y) const {
  for (Index r = 0; r < dim_; ++r) {
    double re = 0.0, im = 0.0;
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const double v = cur_[k];
      const cd& xv = x[col_[k]];
      re += v * xv.real();
      im += v * xv.imag();
    }
    y[r] = cd(im, -re);
  }
}

KetGenerator::KetGenerator(const QbmSystem& sys, double kappa_eff) : h_(sys) {
  decay_.resize(sys.space.total_dim());
  for (Index r = 0; r < decay_.size(); ++r) {
    int n = 0;
    for (int i = 0; i < sys.space.n_modes(); ++i) n += sys.space.occupation(r, i);
    decay_(r) = kappa_eff * n;
  }
}

void KetGenerator::operator()(double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
  h_.set_time(t);
  dy.resize(y.size());
  h_.apply_minus_i(y.data(), dy.data());
  dy.array() -= decay_.array() * y.array();
}

DensityGenerator::DensityGenerator(const QbmSystem& sys) : sys_(&sys), h_(sys), occ_(occupation_table(sys.space)) {
  const FockSpace& sp = sys.space;
  const double k = sys.params.kappa, nb = sys.params.nbar;
  down_ = 2.0 * k * (nb + 1.0);
  up_ = 2.0 * k * nb;
  gamma_.resize(sp.total_dim());
  for (Index r = 0; r < sp.total_dim(); ++r) {
    double g = 0.0;
    for (int i = 0; i < sp.n_modes(); ++i) {
      const int n = occ_[i][r];
      const double aad = n < sp.cutoff() ? n + 1.0 : 0.0;  // (a a^dag)_nn in the truncated space
      g += k * (nb + 1.0) * n + k * nb * aad;
    }
    gamma_(r) = g;
  }
  for (int i = 0; i < sp.n_modes(); ++i) stride_.push_back(sp.stride(i));
}

void DensityGenerator::operator()(double t, const Eigen::MatrixXcd& y, Eigen::MatrixXcd& dy) {
  h_.set_time(t);
  const Index n = y.rows();
  const int cut = sys_->space.cutoff();
  const int modes = sys_->space.n_modes();
  dy.resize(n, n);
  // X = (-iH - Gamma) rho; dy = X + X^dag + jump terms, assembled on the lower triangle
  for (Index c = 0; c < n; ++c) {
    h_.apply_minus_i(y.col(c).data(), dy.col(c).data());
    for (Index r = 0; r < n; ++r) dy(r, c) -= gamma_(r) * y(r, c);
  }
  for (Index c = 0; c < n; ++c) {
    for (Index r = c; r < n; ++r) {
      cd v = dy(r, c) + std::conj(dy(c, r));
      for (int m = 0; m < modes; ++m) {
        const int nr = occ_[m][r], nc = occ_[m][c];
        const Index s = stride_[m];
        if (down_ != 0.0 && nr < cut && nc < cut)
          v += down_ * std::sqrt((nr + 1.0) * (nc + 1.0)) * y(r + s, c + s);
        if (up_ != 0.0 && nr > 0 && nc > 0) v += up_ * std::sqrt(double(nr) * nc) * y(r - s, c - s);
      }
      if (r == c) v = v.real();
      dy(r, c) = v;
      dy(c, r) = std::conj(v);
    }
  }
}

// ---------------------------------------------------------------- RK steppers

namespace {

template <class State>
double error_norm(const State& e, const State& y0, const State& y1, double rtol, double atol) {
  const cd* pe = e.data();
  const cd* p0 = y0.data();
  const cd* p1 = y1.data();
  double err = 0.0;
  for (Index k = 0; k < e.size(); ++k) {
    const double sc = atol + rtol * std::max(std::abs(p0[k]), std::abs(p1[k]));
    err = std::max(err, std::abs(pe[k]) / sc);
  }
  return err;
}

template <class State, class Gen>
class Dopri5 final : public Stepper<State> {
 public:
  Dopri5(Gen gen, const IntegratorConfig& cfg) : gen_(std::move(gen)), rtol_(cfg.rtol), atol_(cfg.atol) {}

  bool adaptive() const override { return true; }
  void invalidate() override { fsal_ = false; }

  bool attempt(double t, double h, const State& y, State& y_new, double& h_next) override {
    stage(t, h, y, y_new);
    State e = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
    const double err = error_norm(e, y, y_new, rtol_, atol_);
    if (!std::isfinite(err)) {
      fsal_ = false;
      h_next = 0.2 * h;
      ++this->stats.rejected;
      return false;
    }
    if (err <= 1.0) {
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) * std::pow(err_old_, 0.4 / 5.0);
      fac = std::clamp(fac, 0.2, 5.0);
      err_old_ = std::max(err, 1e-4);
      h_next = h * fac;
      std::swap(k1_, k7_);
      fsal_ = true;
      fsal_t_ = t + h;
      ++this->stats.steps;
      return true;
    }
    h_next = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
    ++this->stats.rejected;
    return false;
  }

  void single(double t, double h, const State& y, State& y_new) override {
    const bool keep = fsal_;
    State k1_saved;
    if (keep) k1_saved = k1_;
    stage(t, h, y, y_new);
    if (keep) k1_ = std::move(k1_saved);
    fsal_ = keep;
  }

 private:
  void eval(double t, const State& y, State& dy) {
    gen_(t, y, dy);
    ++this->stats.rhs_evals;
  }

  void stage(double t, double h, const State& y, State& y_new) {
    if (!fsal_ || fsal_t_ != t) eval(t, y, k1_);
    fsal_ = false;
    tmp_ = y + h * a21 * k1_;
    eval(t + c2 * h, tmp_, k2_);
    tmp_ = y + h * (a31 * k1_ + a32 * k2_);
    eval(t + c3 * h, tmp_, k3_);
    tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    eval(t + c4 * h, tmp_, k4_);
    tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    eval(t + c5 * h, tmp_, k5_);
    tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    eval(t + h, tmp_, k6_);
    y_new = y + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
    eval(t + h, y_new, k7_);
  }

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  Gen gen_;
  double rtol_, atol_;
  double err_old_ = 1e-4;
  bool fsal_ = false;
  double fsal_t_ = 0.0;
  State k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_;
};

template <class State, class Gen>
class Rk4 final : public Stepper<State> {
 public:
  explicit Rk4(Gen gen) : gen_(std::move(gen)) {}
  bool adaptive() const override { return false; }
  bool attempt(double t, double h, const State& y, State& y_new, double& h_next) override {
    single(t, h, y, y_new);
    ++this->stats.steps;
    h_next = h;
    return true;
  }
  void single(double t, double h, const State& y, State& y_new) override {
    gen_(t, y, k1_);
    tmp_ = y + 0.5 * h * k1_;
    gen_(t + 0.5 * h, tmp_, k2_);
    tmp_ = y + 0.5 * h * k2_;
    gen_(t + 0.5 * h, tmp_, k3_);
    tmp_ = y + h * k3_;
    gen_(t + h, tmp_, k4_);
    y_new = y + (h / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
    this->stats.rhs_evals += 4;
  }

 private:
  Gen gen_;
  State k1_, k2_, k3_, k4_, tmp_;
};

std::vector<Eigen::MatrixXcd> local_propagators(const QbmSystem& sys, double t_mid, double h) {
  const double p = sys.pump_at(t_mid);
  const double a = sys.alpha_at(t_mid);
  std::vector<Eigen::MatrixXcd> us;
  us.reserve(sys.space.n_modes());
  for (int i = 0; i < sys.space.n_modes(); ++i) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        local_hamiltonian(sys.params, sys.space.cutoff(), sys.inst.h(i), p, a));
    const Eigen::VectorXcd phase = (cd(0.0, -h) * es.eigenvalues().cast<cd>()).array().exp();
    const Eigen::MatrixXcd v = es.eigenvectors().cast<cd>();
    us.push_back(v * phase.asDiagonal() * v.transpose());
  }
  return us;
}

std::vector<PairHop> make_pairs(const QbmSystem& sys) {
  std::vector<PairHop> pairs;
  for (int i = 0; i < sys.inst.n_spins; ++i)
    for (int j = i + 1; j < sys.inst.n_spins; ++j)
      if (sys.inst.J(i, j) != 0.0) pairs.emplace_back(sys.space, i, j, -sys.params.xi0 * sys.inst.J(i, j));
  return pairs;
}

class SplitKet final : public Stepper<Eigen::VectorXcd> {
 public:
  SplitKet(const QbmSystem& sys, double kappa_eff) : sys_(&sys), kappa_(kappa_eff), pairs_(make_pairs(sys)) {
    total_n_.resize(sys.space.total_dim());
    for (Index r = 0; r < total_n_.size(); ++r) {
      int n = 0;
      for (int i = 0; i < sys.space.n_modes(); ++i) n += sys.space.occupation(r, i);
      total_n_(r) = n;
    }
  }
  bool adaptive() const override { return false; }
  bool attempt(double t, double h, const Eigen::VectorXcd& y, Eigen::VectorXcd& y_new, double& h_next) override {
    single(t, h, y, y_new);
    ++stats.steps;
    h_next = h;
    return true;
  }
  void single(double t, double h, const Eigen::VectorXcd& y, Eigen::VectorXcd& y_new) override {
    y_new = y;
    for (auto& p : pairs_) p.apply(y_new.data(), 1, 0.5 * h);
    damp(y_new, 0.5 * h);
    apply_product(y_new.data(), 1, sys_->space, local_propagators(*sys_, t + 0.5 * h, h), scratch_);
    damp(y_new, 0.5 * h);
    for (auto it = pairs_.rbegin(); it != pairs_.rend(); ++it) it->apply(y_new.data(), 1, 0.5 * h);
  }

 private:
  void damp(Eigen::VectorXcd& y, double tau) {
    if (kappa_ == 0.0) return;
    if (tau != damp_tau_) {
      damp_tau_ = tau;
      damp_factor_ = (-kappa_ * tau * total_n_.array()).exp();
    }
    y.array() *= damp_factor_.array();
  }

  const QbmSystem* sys_;
  double kappa_;
  std::vector<PairHop> pairs_;
  Eigen::VectorXd total_n_, damp_factor_;
  double damp_tau_ = -1.0;
  std::vector<cd> scratch_;
};

class SplitDensity final : public Stepper<Eigen::MatrixXcd> {
 public:
  explicit SplitDensity(const QbmSystem& sys)
      : sys_(&sys), pairs_(make_pairs(sys)), damping_(sys.space, sys.params.kappa, sys.params.nbar) {}
  bool adaptive() const override { return false; }
  bool attempt(double t, double h, const Eigen::MatrixXcd& y, Eigen::MatrixXcd& y_new, double& h_next) override {
    single(t, h, y, y_new);
    ++stats.steps;
    h_next = h;
    return true;
  }
  void single(double t, double h, const Eigen::MatrixXcd& y, Eigen::MatrixXcd& y_new) override {
    const Index n = y.rows();
    y_new = y;
    hop(y_new, 0.5 * h, false);
    if (sys_->params.kappa > 0) damping_.apply(y_new, 0.5 * h);
    conjugate_product(y_new, sys_->space, local_propagators(*sys_, t + 0.5 * h, h), scratch_);
    if (sys_->params.kappa > 0) damping_.apply(y_new, 0.5 * h);
    hop(y_new, 0.5 * h, true);
    (void)n;
  }

 private:
  void hop(Eigen::MatrixXcd& rho, double tau, bool reverse) {
    if (pairs_.empty()) return;
    const Index n = rho.rows();
    for (int pass = 0; pass < 2; ++pass) {
      if (reverse)
        for (auto it = pairs_.rbegin(); it != pairs_.rend(); ++it) it->apply(rho.data(), n, tau);
      else
        for (auto& p : pairs_) p.apply(rho.data(), n, tau);
      rho.adjointInPlace();
    }
  }

  const QbmSystem* sys_;
  std::vector<PairHop> pairs_;
  DampingChannel damping_;
  std::vector<cd> scratch_;
};

}  // namespace

// ---------------------------------------------------------------- pair hopping

PairHop::PairHop(const FockSpace& space, int i, int j, double coupling) : dim_(space.total_dim()) {
  const int c = space.cutoff();
  const Index si = space.stride(i), sj = space.stride(j);
  for (int S = 1; S < 2 * c; ++S) {
    std::vector<int> ni;
    for (int a = std::max(0, S - c); a <= std::min(c, S); ++a) ni.push_back(a);
    const int b = static_cast<int>(ni.size());
    if (b < 2) continue;
    std::vector<int> order;
    for (int k = 0; k < b; k += 2) order.push_back(k);
    for (int k = 1; k < b; k += 2) order.push_back(k);
    Eigen::MatrixXd hb = Eigen::MatrixXd::Zero(b, b);
    // a_i^dag a_j |a, S-a> = sqrt((a+1)(S-a)) |a+1, S-a-1>
    for (int k = 0; k + 1 < b; ++k) {
      const int a = ni[k];
      hb(k + 1, k) = hb(k, k + 1) = coupling * std::sqrt((a + 1.0) * (S - a));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hb);
    Block blk;
    blk.n_even = (b + 1) / 2;
    blk.vectors.resize(b, b);
    for (int q = 0; q < b; ++q) {
      const int a = ni[order[q]];
      blk.offsets.push_back(a * si + (S - a) * sj);
      blk.vectors.row(q) = es.eigenvectors().row(order[q]);
    }
    blk.energies = es.eigenvalues();
    blocks_.push_back(std::move(blk));
  }
  for (Index r = 0; r < dim_; ++r)
    if (space.occupation(r, i) == 0 && space.occupation(r, j) == 0) bases_.push_back(r);
}

const PairHop::Factors& PairHop::factors(size_t block, double tau) {
  if (!cache_valid_ || tau != cached_tau_) {
    cache_.resize(blocks_.size());
    for (size_t k = 0; k < blocks_.size(); ++k) {
      const Block& b = blocks_[k];
      const Index ne = b.n_even, no = b.offsets.size() - ne;
      const Eigen::MatrixXd& v = b.vectors;
      const Eigen::MatrixXd cosm = v * (tau * b.energies).array().cos().matrix().asDiagonal() * v.transpose();
      const Eigen::MatrixXd sinm = v * (tau * b.energies).array().sin().matrix().asDiagonal() * v.transpose();
      cache_[k] = {cosm.topLeftCorner(ne, ne), cosm.bottomRightCorner(no, no), sinm.topRightCorner(ne, no),
                   sinm.bottomLeftCorner(no, ne)};
    }
    cached_tau_ = tau;
    cache_valid_ = true;
  }
  return cache_[block];
}

void PairHop::apply(cd* data, Index n_cols, double tau) {
  const Index nb = static_cast<Index>(bases_.size()) * n_cols;
  const cd minus_i(0.0, -1.0);
  for (size_t k = 0; k < blocks_.size(); ++k) {
    const Block& b = blocks_[k];
    const Index ne = b.n_even, no = static_cast<Index>(b.offsets.size()) - ne;
    const Factors& f = factors(k, tau);
    xe_.resize(ne, nb);
    xo_.resize(no, nb);
    Index col = 0;
    for (Index c = 0; c < n_cols; ++c)
      for (Index base : bases_) {
        const cd* src = data + c * dim_ + base;
        for (Index q = 0; q < ne; ++q) xe_(q, col) = src[b.offsets[q]];
        for (Index q = 0; q < no; ++q) xo_(q, col) = src[b.offsets[ne + q]];
        ++col;
      }
    // U = cos(tau h) - i sin(tau h)
    ye_.noalias() = f.seo * xo_;
    yo_.noalias() = f.soe * xe_;
    ye_ *= minus_i;
    yo_ *= minus_i;
    ye_.noalias() += f.cee * xe_;
    yo_.noalias() += f.coo * xo_;
    col = 0;
    for (Index c = 0; c < n_cols; ++c)
      for (Index base : bases_) {
        cd* dst = data + c * dim_ + base;
        for (Index q = 0; q < ne; ++q) dst[b.offsets[q]] = ye_(q, col);
        for (Index q = 0; q < no; ++q) dst[b.offsets[ne + q]] = yo_(q, col);
        ++col;
      }
  }
}

// ---------------------------------------------------------------- damping

DampingChannel::DampingChannel(const FockSpace& space, double kappa, double nbar)
    : space_(space), kappa_(kappa), nbar_(nbar), occ_(occupation_table(space)) {}

Eigen::MatrixXd DampingChannel::chain_generator(int cutoff, int q, double kappa, double nbar) {
  const int n0 = std::max(0, -q);
  const int len = cutoff + 1 - std::abs(q);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(len, len);
  auto aad = [cutoff](int n) { return n < cutoff ? n + 1.0 : 0.0; };
  for (int j = 0; j < len; ++j) {
    const int n = n0 + j, m = n + q;
    g(j, j) = -kappa * (nbar + 1.0) * (n + m) - kappa * nbar * (aad(n) + aad(m));
    if (j + 1 < len) g(j, j + 1) = 2.0 * kappa * (nbar + 1.0) * std::sqrt((n + 1.0) * (m + 1.0));
    if (j > 0) g(j, j - 1) = 2.0 * kappa * nbar * std::sqrt(double(n) * m);
  }
  return g;
}

Eigen::MatrixXd DampingChannel::chain(int q, double tau) { return chains(tau).e[q + space_.cutoff()]; }

const DampingChannel::Chains& DampingChannel::chains(double tau) {
  auto it = cache_.find(tau);
  if (it != cache_.end()) return it->second;
  if (cache_.size() > 8) cache_.clear();
  const int c = space_.cutoff();
  Chains ch;
  for (int q = -c; q <= c; ++q) {
    const int n0 = std::max(0, -q);
    const int len = c + 1 - std::abs(q);
    Eigen::MatrixXd e;
    if (nbar_ == 0.0) {
      // closed form of pure amplitude damping
      e = Eigen::MatrixXd::Zero(len, len);
      const double gam = -std::expm1(-2.0 * kappa_ * tau);
      auto lbinom = [](int n, int k) { return std::lgamma(n + k + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n + 1.0); };
      for (int j = 0; j < len; ++j) {
        const int n = n0 + j, m = n + q;
        for (int k = 0; j + k < len; ++k) {
          const double lg = k == 0 ? 0.0 : k * std::log(gam);
          e(j, j + k) = std::exp(0.5 * (lbinom(n, k) + lbinom(m, k)) + lg - kappa_ * tau * (n + m));
        }
      }
    } else {
      e = (tau * chain_generator(c, q, kappa_, nbar_)).exp();
    }
    std::vector<int> lo(len, len), hi(len, 0);
    for (int j = 0; j < len; ++j)
      for (int k = 0; k < len; ++k)
        if (e(j, k) != 0.0) {
          lo[j] = std::min(lo[j], k);
          hi[j] = k + 1;
        }
    ch.e.push_back(std::move(e));
    ch.lo.push_back(std::move(lo));
    ch.hi.push_back(std::move(hi));
  }
  return cache_.emplace(tau, std::move(ch)).first->second;
}

void DampingChannel::apply(Eigen::MatrixXcd& rho, double tau) {
  if (kappa_ == 0.0) return;
  const Chains& ch = chains(tau);
  const Index n = rho.rows();
  const int c = space_.cutoff();
  buffer_.resize(n, n);
  for (int m = 0; m < space_.n_modes(); ++m) {
    const Index jump = space_.stride(m) * (n + 1);
    const std::vector<int>& occ = occ_[m];
    for (Index col = 0; col < n; ++col) {
      const int nc = occ[col];
      const cd* src = rho.data() + col * n;
      cd* dst = buffer_.data() + col * n;
      for (Index r = 0; r < n; ++r) {
        const int nr = occ[r];
        const int q = nc - nr;
        const int idx = q + c;
        const int i = nr - std::max(0, -q);
        const double* row = ch.e[idx].data();
        const Index ld = ch.e[idx].rows();
        const int lo = ch.lo[idx][i], hi = ch.hi[idx][i];
        const cd* base = src + r;
        cd acc = 0.0;
        for (int j = lo; j < hi; ++j) acc += row[i + j * ld] * base[(j - i) * jump];
        dst[r] = acc;
      }
    }
    rho.swap(buffer_);
  }
}

// ---------------------------------------------------------------- factories

std::unique_ptr<Stepper<Eigen::VectorXcd>> make_ket_stepper(const QbmSystem& sys, const IntegratorConfig& cfg,
                                                           double kappa_eff) {
  switch (cfg.method) {
    case Method::Dopri5:
      return std::make_unique<Dopri5<Eigen::VectorXcd, KetGenerator>>(KetGenerator(sys, kappa_eff), cfg);
    case Method::Rk4:
      return std::make_unique<Rk4<Eigen::VectorXcd, KetGenerator>>(KetGenerator(sys, kappa_eff));
    case Method::Split:
      return std::make_unique<SplitKet>(sys, kappa_eff);
  }
  throw std::logic_error("unknown method");
}

std::unique_ptr<Stepper<Eigen::MatrixXcd>> make_density_stepper(const QbmSystem& sys, const IntegratorConfig& cfg) {
  switch (cfg.method) {
    case Method::Dopri5:
      return std::make_unique<Dopri5<Eigen::MatrixXcd, DensityGenerator>>(DensityGenerator(sys), cfg);
    case Method::Rk4:
      return std::make_unique<Rk4<Eigen::MatrixXcd, DensityGenerator>>(DensityGenerator(sys));
    case Method::Split:
      return std::make_unique<SplitDensity>(sys);
  }
  throw std::logic_error("unknown method");
}

}  // namespace dqbm
