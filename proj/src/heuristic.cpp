// SPDX-License-Identifier: Apache-2.0
//
// fogsim - energy efficiency simulator for fog radio access networks
// Copyright (C) 2026 fogsim developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "fogsim/heuristic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <utility>

namespace fogsim {
namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using Cplx = std::complex<double>;

VectorXd rates_bits_per_hz(const MatrixXcd& h, const MatrixXcd& w,
                           double sigma2) {
  const MatrixXcd ip = h.adjoint() * w;
  VectorXd out(h.cols());
  for (int k = 0; k < h.cols(); ++k) {
    const double sig = std::norm(ip(k, k));
    const double interference = ip.row(k).squaredNorm() - sig;
    out(k) = std::log2(1.0 + sig / (interference + sigma2));
  }
  return out;
}

// Dual solver of the quadratically constrained beamformer step
//
//   min  sum_j w_j^H A w_j - 2 Re(b_j^H w_j)
//   s.t. sum_j ||w_{rj}||^2        <= P_r   (per F-AP budget)
//        sum_r beta_{rj}||w_{rj}||^2 <= 1   (per user, association shaping)
//
// The stationary point for fixed multipliers is w_j = B_j^{-1} b_j with
// B_j = A + sum_r lambda_r E_r + nu_j D_j. Multipliers are refined one
// constraint at a time: each F-AP multiplier by bisection on the block
// power, evaluated cheaply through a low-rank update of the factorized
// system; each user multiplier by a safeguarded Newton iteration on its
// scalar secular equation. Multipliers persist across calls, so later
// invocations start close to the solution.
class QcqpDual {
 public:
  explicit QcqpDual(const NetworkTopology& topo)
      : m_(topo.total_antennas),
        k_(topo.user_count()),
        r_(topo.fap_count()),
        offset_(topo.antenna_offset),
        lambda_(VectorXd::Zero(topo.fap_count())),
        nu_(VectorXd::Zero(topo.user_count())) {
    p_max_.resize(r_);
    for (int r = 0; r < r_; ++r) p_max_[r] = topo.faps[r].tx_power_max_w;
    bmat_.resize(k_);
    llt_.resize(k_);
    stale_.assign(k_, 1);
  }

  void set_association_weights(const MatrixXd& beta) { beta_ = beta; }

  void set_model(const MatrixXcd& a, const MatrixXcd& b) {
    ridge_ = std::max(1e-9 * a.trace().real() / m_, 1e-18);
    a_base_ = a;
    a_base_.diagonal().array() += Cplx(ridge_, 0.0);
    b_ = b;
    for (int j = 0; j < k_; ++j) rebuild(j);
  }

  void sweep(int secular_cap) {
    for (int r = 0; r < r_; ++r) update_lambda(r);
    for (int j = 0; j < k_; ++j) update_nu(j, secular_cap);
  }

  MatrixXcd solve_beams() {
    MatrixXcd w(m_, k_);
    for (int j = 0; j < k_; ++j) w.col(j) = factor(j).solve(b_.col(j));
    return w;
  }

 private:
  void rebuild(int j) {
    bmat_[j] = a_base_;
    for (int r = 0; r < r_; ++r) {
      const double add = lambda_(r) + nu_(j) * beta_(r, j);
      for (int i = offset_[r]; i < offset_[r + 1]; ++i)
        bmat_[j](i, i) += add;
    }
    stale_[j] = 1;
  }

  const Eigen::LDLT<MatrixXcd>& factor(int j) {
    if (stale_[j]) {
      llt_[j].compute(bmat_[j]);
      stale_[j] = 0;
    }
    return llt_[j];
  }

  void update_lambda(int r) {
    const int off = offset_[r];
    const int wd = offset_[r + 1] - offset_[r];
    const double target = p_max_[r];

    // Woodbury data: with B(dl) = B + dl E_r, the block of the solution is
    // (I + dl S)^{-1} q where S is the (r,r) block of B^{-1} and
    // q the block of B^{-1} b.
    std::vector<MatrixXcd> s(k_);
    std::vector<VectorXcd> q(k_);
    MatrixXcd u = MatrixXcd::Zero(m_, wd);
    for (int c = 0; c < wd; ++c) u(off + c, c) = 1.0;
    for (int j = 0; j < k_; ++j) {
      const auto& f = factor(j);
      s[j] = f.solve(u).middleRows(off, wd);
      q[j] = f.solve(b_.col(j)).segment(off, wd);
    }
    const MatrixXcd eye = MatrixXcd::Identity(wd, wd);
    auto power_at = [&](double lam) {
      const double dl = lam - lambda_(r);
      double total = 0.0;
      for (int j = 0; j < k_; ++j) {
        const VectorXcd y = (eye + dl * s[j]).lu().solve(q[j]);
        total += y.squaredNorm();
      }
      return total;
    };

    double next = 0.0;
    if (power_at(0.0) > target) {
      double lo = 0.0;
      double hi = std::max(1.0, 2.0 * lambda_(r));
      int guard = 0;
      while (power_at(hi) > target && guard++ < 200) {
        lo = hi;
        hi *= 4.0;
      }
      for (int it = 0; it < 64; ++it) {
        const double mid = 0.5 * (lo + hi);
        (power_at(mid) > target ? lo : hi) = mid;
      }
      next = hi;
    }
    if (next != lambda_(r)) {
      const double d = next - lambda_(r);
      for (int j = 0; j < k_; ++j) {
        for (int i = off; i < off + wd; ++i) bmat_[j](i, i) += d;
        stale_[j] = 1;
      }
      lambda_(r) = next;
    }
  }

  void update_nu(int j, int step_cap) {
    // System matrix without this user's own constraint term.
    MatrixXcd base = a_base_;
    VectorXd d(m_);
    for (int r = 0; r < r_; ++r) {
      for (int i = offset_[r]; i < offset_[r + 1]; ++i) {
        base(i, i) += lambda_(r);
        d(i) = beta_(r, j);
      }
    }
    Eigen::LDLT<MatrixXcd> f(base);
    VectorXcd wv = f.solve(b_.col(j));
    auto usage = [&](const VectorXcd& v) {
      return (d.array() * v.array().abs2()).sum();
    };
    double c = usage(wv);

    double nu = 0.0;
    if (c > 1.0 + 1e-12) {
      // c(nu) is convex decreasing, so Newton from nu = 0 approaches the
      // root c = 1 monotonically from the left.
      for (int it = 0; it < step_cap; ++it) {
        const VectorXcd dw = wv.cwiseProduct(d.cast<Cplx>());
        const VectorXcd z = f.solve(dw);
        const double slope = std::real(dw.dot(z));
        if (!(slope > 0.0)) break;
        const double step = (c - 1.0) / (2.0 * slope);
        nu += step;
        MatrixXcd bn = base;
        for (int i = 0; i < m_; ++i) bn(i, i) += nu * d(i);
        f.compute(bn);
        wv = f.solve(b_.col(j));
        c = usage(wv);
        if (c <= 1.0 + 1e-9 || step <= 1e-14 * (1.0 + nu)) break;
      }
    }
    if (nu != nu_(j)) {
      const double dn = nu - nu_(j);
      for (int i = 0; i < m_; ++i) bmat_[j](i, i) += dn * d(i);
      nu_(j) = nu;
      stale_[j] = 1;
    }
  }

  int m_, k_, r_;
  std::vector<int> offset_;
  VectorXd p_max_;
  VectorXd lambda_;
  VectorXd nu_;
  MatrixXd beta_;
  MatrixXcd a_base_;
  MatrixXcd b_;
  double ridge_ = 0.0;
  std::vector<MatrixXcd> bmat_;
  std::vector<Eigen::LDLT<MatrixXcd>> llt_;
  std::vector<char> stale_;
};

// One round of closed-form receiver and weight updates followed by the
// constrained beamformer refresh. Minimizing the weighted MSE with these
// receivers/weights pushes the sum rate up, so the round is an ascent step.
void wmmse_update(const MatrixXcd& h, double sigma2, QcqpDual& dual,
                  MatrixXcd& w, int sweeps, int secular_cap) {
  const int k = static_cast<int>(h.cols());
  const int m = static_cast<int>(h.rows());
  const MatrixXcd ip = h.adjoint() * w;
  VectorXcd u(k);
  VectorXd v(k);
  for (int kk = 0; kk < k; ++kk) {
    const double denom = sigma2 + ip.row(kk).squaredNorm();
    u(kk) = ip(kk, kk) / denom;
    const double mse = std::max(1.0 - std::norm(ip(kk, kk)) / denom, 1e-300);
    v(kk) = 1.0 / mse;
  }
  MatrixXcd hs = h;
  for (int kk = 0; kk < k; ++kk) hs.col(kk) *= v(kk) * std::norm(u(kk));
  MatrixXcd a = hs * h.adjoint();
  a = 0.5 * (a + MatrixXcd(a.adjoint()));
  MatrixXcd b(m, k);
  for (int j = 0; j < k; ++j) b.col(j) = (v(j) * u(j)) * h.col(j);

  dual.set_model(a, b);
  for (int sw = 0; sw < sweeps; ++sw) dual.sweep(secular_cap);
  w = dual.solve_beams();
}

// Drops the slowest served user of whichever F-AP is deepest over its
// fronthaul capacity, re-measuring rates after each release, until all
// loads fit. Returns the number of released (F-AP, user) blocks.
int release_fronthaul_overloads(const NetworkTopology& topo,
                                const MatrixXcd& h, double sigma2,
                                double bandwidth, double eps_assoc,
                                MatrixXcd& w) {
  const int r = topo.fap_count();
  const int k = static_cast<int>(w.cols());
  int released = 0;
  for (int guard = 0; guard <= r * k; ++guard) {
    const VectorXd rates = rates_bits_per_hz(h, w, sigma2);
    int worst = -1;
    double worst_excess = 0.0;
    for (int rr = 0; rr < r; ++rr) {
      const int off = topo.antenna_offset[rr];
      const int wd = topo.antenna_offset[rr + 1] - off;
      double load = 0.0;
      for (int kk = 0; kk < k; ++kk) {
        if (w.col(kk).segment(off, wd).squaredNorm() > eps_assoc)
          load += bandwidth * rates(kk);
      }
      const double cap = topo.faps[rr].fronthaul_bps;
      const double excess = load - cap;
      if (excess > 1e-9 * cap && excess > worst_excess) {
        worst = rr;
        worst_excess = excess;
      }
    }
    if (worst < 0) break;
    const int off = topo.antenna_offset[worst];
    const int wd = topo.antenna_offset[worst + 1] - off;
    int victim = -1;
    double victim_rate = std::numeric_limits<double>::infinity();
    for (int kk = 0; kk < k; ++kk) {
      if (w.col(kk).segment(off, wd).squaredNorm() > eps_assoc &&
          rates(kk) < victim_rate) {
        victim_rate = rates(kk);
        victim = kk;
      }
    }
    if (victim < 0) break;
    w.col(victim).segment(off, wd).setZero();
    ++released;
  }
  return released;
}

double block_sq(const NetworkTopology& topo, const MatrixXcd& w, int fap,
                int user) {
  const int off = topo.antenna_offset[fap];
  const int wd = topo.antenna_offset[fap + 1] - off;
  return w.col(user).segment(off, wd).squaredNorm();
}

}  // namespace

AssociationResult associate_users(const NetworkTopology& topo,
                                  const ChannelSet& ch,
                                  const PowerParams& params,
                                  const ReweightOptions& opts) {
  params.validate();
  const int m = topo.total_antennas;
  const int k = topo.user_count();
  const int r = topo.fap_count();
  if (ch.outdated.rows() != m || ch.outdated.cols() != k)
    throw std::invalid_argument("associate_users: channel dimension mismatch");
  if (opts.max_iterations < 1 || opts.wmmse_passes < 1)
    throw std::invalid_argument("associate_users: iteration counts must be positive");

  const MatrixXcd& h = ch.outdated;
  const double sigma2 = ch.noise_power_w;
  const double eps = association_epsilon(topo);

  AssociationResult res;
  res.active.fap_active.assign(r, 1);
  res.active.serving_fap.assign(k, -1);

  auto fallback = [&]() {
    res.fallback = true;
    res.w = Beamformer(topo);
    std::vector<int> pick(k, 0);
    std::vector<int> load(r, 0);
    for (int kk = 0; kk < k; ++kk) {
      double best = -1.0;
      for (int rr = 0; rr < r; ++rr) {
        const double g = block_sq(topo, h, rr, kk);
        if (g > best) {
          best = g;
          pick[kk] = rr;
        }
      }
      ++load[pick[kk]];
    }
    for (int kk = 0; kk < k; ++kk) {
      const int rr = pick[kk];
      const int off = topo.antenna_offset[rr];
      const int wd = topo.antenna_offset[rr + 1] - off;
      const VectorXcd hh = h.col(kk).segment(off, wd);
      const double n = hh.norm();
      if (n > 0.0) {
        res.w.block(rr, kk) =
            std::sqrt(topo.faps[rr].tx_power_max_w / load[rr]) * (hh / n);
      }
      res.active.serving_fap[kk] = rr;
    }
    return res;
  };

  // Generous start: every (F-AP, user) pair at a full equal share, so the
  // early relaxed rounds can trade associations freely.
  MatrixXcd w = MatrixXcd::Zero(m, k);
  for (int rr = 0; rr < r; ++rr) {
    const int off = topo.antenna_offset[rr];
    const int wd = topo.antenna_offset[rr + 1] - off;
    for (int kk = 0; kk < k; ++kk) {
      const VectorXcd hh = h.col(kk).segment(off, wd);
      const double n = hh.norm();
      if (n > 0.0) {
        w.col(kk).segment(off, wd) =
            std::sqrt(topo.faps[rr].tx_power_max_w / k) * (hh / n);
      }
    }
  }
  MatrixXcd w_prev = w;

  QcqpDual dual(topo);
  MatrixXd beta(r, k);
  const double stop_eps = opts.stop_tol_scale * k * m;
  double step_sq = std::numeric_limits<double>::infinity();
  int iterations = 0;

  for (int i = 0; i < opts.max_iterations; ++i) {
    const double delta = opts.delta0 * std::pow(opts.shrink, i);
    for (int rr = 0; rr < r; ++rr)
      for (int kk = 0; kk < k; ++kk)
        beta(rr, kk) = 1.0 / (block_sq(topo, w_prev, rr, kk) + delta);
    dual.set_association_weights(beta);
    for (int pass = 0; pass < opts.wmmse_passes; ++pass) {
      const int sweeps = (i == 0 && pass == 0) ? opts.first_dual_sweeps
                                               : opts.dual_sweeps;
      wmmse_update(h, sigma2, dual, w, sweeps, opts.secular_step_cap);
    }
    release_fronthaul_overloads(topo, h, sigma2, params.bandwidth_hz, eps, w);
    if (!w.allFinite()) return fallback();
    step_sq = (w - w_prev).squaredNorm();
    w_prev = w;
    iterations = i + 1;
    if (step_sq < stop_eps) break;
  }
  res.iterations = iterations;
  res.final_step_sq = step_sq;

  // Commit each user to its strongest F-AP, then re-check fronthaul on the
  // committed association and trim any budget overshoot left by the
  // truncated dual iteration.
  for (int kk = 0; kk < k; ++kk) {
    int best = -1;
    double best_pow = eps;
    for (int rr = 0; rr < r; ++rr) {
      const double p = block_sq(topo, w, rr, kk);
      if (p > best_pow) {
        best_pow = p;
        best = rr;
      }
    }
    for (int rr = 0; rr < r; ++rr) {
      if (rr != best) {
        const int off = topo.antenna_offset[rr];
        const int wd = topo.antenna_offset[rr + 1] - off;
        w.col(kk).segment(off, wd).setZero();
      }
    }
  }
  release_fronthaul_overloads(topo, h, sigma2, params.bandwidth_hz, eps, w);
  for (int rr = 0; rr < r; ++rr) {
    const int off = topo.antenna_offset[rr];
    const int wd = topo.antenna_offset[rr + 1] - off;
    const double pw = w.middleRows(off, wd).squaredNorm();
    const double cap = topo.faps[rr].tx_power_max_w;
    if (pw > cap) w.middleRows(off, wd) *= std::sqrt(cap / pw);
  }

  bool any_served = false;
  for (int kk = 0; kk < k; ++kk) {
    int best = -1;
    double best_pow = eps;
    for (int rr = 0; rr < r; ++rr) {
      const double p = block_sq(topo, w, rr, kk);
      if (p > best_pow) {
        best_pow = p;
        best = rr;
      }
    }
    res.active.serving_fap[kk] = best;
    any_served = any_served || best >= 0;
  }
  if (!any_served) return fallback();

  res.w = Beamformer(topo);
  res.w.w = w;
  return res;
}

GreedyResult greedy_deactivate(const Beamformer& w_init,
                               const ActiveSet& assoc,
                               const NetworkTopology& topo,
                               const ChannelSet& ch,
                               const PowerParams& params) {
  params.validate();
  const int r = topo.fap_count();
  const int k = topo.user_count();
  if (w_init.w.rows() != topo.total_antennas || w_init.w.cols() != k)
    throw std::invalid_argument("greedy_deactivate: beamformer dimension mismatch");

  GreedyResult res;
  std::vector<char> in_set = assoc.fap_active;
  const std::vector<int>& serving = assoc.serving_fap;

  auto eval_ee = [&](const std::vector<char>& s) {
    ActiveSet a;
    a.fap_active = s;
    a.serving_fap.resize(k);
    Beamformer wt = w_init;
    for (int kk = 0; kk < k; ++kk) {
      const int sr = serving[kk];
      if (sr >= 0 && s[sr]) {
        a.serving_fap[kk] = sr;
      } else {
        a.serving_fap[kk] = -1;
        wt.w.col(kk).setZero();
      }
    }
    for (int rr = 0; rr < r; ++rr) {
      if (!s[rr]) {
        const int off = topo.antenna_offset[rr];
        const int wd = topo.antenna_offset[rr + 1] - off;
        wt.w.middleRows(off, wd).setZero();
      }
    }
    return global_ee(wt, a, ch, topo, params, CsiView::outdated);
  };

  ActiveSet full;
  full.fap_active = in_set;
  full.serving_fap = serving;
  std::vector<double> loc(r, 0.0);
  std::vector<int> order;
  for (int rr = 0; rr < r; ++rr) {
    if (in_set[rr]) {
      loc[rr] = local_ee(rr, w_init, full, ch, topo, params,
                         CsiView::outdated);
      order.push_back(rr);
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return loc[a] < loc[b]; });

  double ee = eval_ee(in_set);
  res.initial_global_ee = ee;
  int active_left = static_cast<int>(order.size());
  for (int rr : order) {
    if (active_left <= 1) break;
    std::vector<char> trial = in_set;
    trial[rr] = 0;
    const double trial_ee = eval_ee(trial);
    const bool accept = trial_ee >= ee;
    res.steps.push_back(GreedyStep{rr, loc[rr], trial_ee, accept});
    if (!accept) break;
    in_set = std::move(trial);
    ee = trial_ee;
    --active_left;
  }
  res.final_global_ee = ee;

  // Users stranded by a switched-off F-AP move to the strongest surviving
  // one that still has antenna headroom; without headroom they sit out.
  ActiveSet fin;
  fin.fap_active = in_set;
  fin.serving_fap = serving;
  std::vector<int> count(r, 0);
  for (int kk = 0; kk < k; ++kk) {
    if (serving[kk] >= 0 && in_set[serving[kk]]) ++count[serving[kk]];
  }
  for (int kk = 0; kk < k; ++kk) {
    const int sr = serving[kk];
    if (sr < 0 || in_set[sr]) continue;
    int best = -1;
    double best_gain = -1.0;
    for (int rr = 0; rr < r; ++rr) {
      if (!in_set[rr] || count[rr] >= topo.faps[rr].antennas) continue;
      const double g = block_sq(topo, ch.outdated, rr, kk);
      if (g > best_gain) {
        best_gain = g;
        best = rr;
      }
    }
    fin.serving_fap[kk] = best;
    if (best >= 0) ++count[best];
  }
  res.active = fin;
  return res;
}

std::vector<VectorXcd> slnr_beamform(int fap, const std::vector<int>& users,
                                     const ChannelSet& ch,
                                     const NetworkTopology& topo,
                                     bool* used_fallback) {
  if (used_fallback) *used_fallback = false;
  std::vector<VectorXcd> out;
  const int kr = static_cast<int>(users.size());
  if (kr == 0) return out;
  const int off = topo.antenna_offset[fap];
  const int mr = topo.faps[fap].antennas;
  const double pr = topo.faps[fap].tx_power_max_w;
  const double share = pr / kr;

  const MatrixXcd hl = ch.perfect.middleRows(off, mr);
  MatrixXcd base = (kr * ch.noise_power_w / pr) *
                   MatrixXcd::Identity(mr, mr);
  base += hl * hl.adjoint();

  out.reserve(kr);
  for (int k : users) {
    const VectorXcd hk = hl.col(k);
    VectorXcd v;
    if (hk.norm() == 0.0) {
      v = VectorXcd::Zero(mr);
      v(0) = 1.0;
    } else {
      MatrixXcd bk = base - hk * hk.adjoint();
      bk = 0.5 * (bk + MatrixXcd(bk.adjoint()));
      const Eigen::LDLT<MatrixXcd> f(bk);
      // The whitened objective is rank one, so the power iteration locks
      // onto the leading direction after a single application.
      v = hk / hk.norm();
      bool converged = false;
      for (int it = 0; it < 64; ++it) {
        VectorXcd nv = f.solve(hk * hk.dot(v));
        const double n = nv.norm();
        if (!(n > 0.0)) break;
        nv /= n;
        const double align = std::abs(nv.dot(v));
        v = nv;
        if (1.0 - align < 1e-13) {
          converged = true;
          break;
        }
      }
      if (!converged || !v.allFinite()) {
        if (used_fallback) *used_fallback = true;
        Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXcd> es(
            MatrixXcd(hk * hk.adjoint()), bk);
        v = es.eigenvectors().col(mr - 1);
        const double n = v.norm();
        if (n > 0.0) v /= n;
      }
    }
    const Cplx sig = hk.dot(v);
    const double mag = std::abs(sig);
    if (mag > 0.0) v *= std::conj(sig) / mag;
    out.push_back(std::sqrt(share) * v);
  }
  return out;
}

HeuristicResult run_heuristic(const NetworkTopology& topo,
                              const std::vector<ChannelSet>& frames,
                              const PowerParams& params,
                              const ReweightOptions& opts,
                              const AssociationResult* shared_assoc) {
  if (frames.empty())
    throw std::invalid_argument("run_heuristic: need at least one frame");
  params.validate();
  const int k = topo.user_count();
  const int frame_count = static_cast<int>(frames.size());

  HeuristicResult out;
  if (shared_assoc) {
    if (shared_assoc->w.w.rows() != topo.total_antennas ||
        shared_assoc->w.w.cols() != k)
      throw std::invalid_argument("run_heuristic: shared association mismatch");
    out.assoc = *shared_assoc;
  } else {
    out.assoc = associate_users(topo, frames[0], params, opts);
  }
  out.greedy = greedy_deactivate(out.assoc.w, out.assoc.active, topo,
                                 frames[0], params);
  out.active = out.greedy.active;

  double p_scale = 0.0;
  double c_scale = 0.0;
  for (const auto& f : topo.faps) {
    p_scale = std::max(p_scale, f.tx_power_max_w);
    c_scale = std::max(c_scale, f.fronthaul_bps);
  }
  const double p_tol = 1e-6 * p_scale;
  const double c_tol = 1e-6 * c_scale;

  VectorXd rate_sum = VectorXd::Zero(k);
  double tau_sum = 0.0;
  PowerBreakdown frame1_bd;
  PowerBreakdown steady_bd;
  double min_pslack = std::numeric_limits<double>::infinity();
  double min_fslack = std::numeric_limits<double>::infinity();
  int assoc_viol = 0;
  bool all_feasible = true;

  out.frame_w.reserve(frame_count);
  for (int t = 0; t < frame_count; ++t) {
    Beamformer wt(topo);
    for (int rr = 0; rr < topo.fap_count(); ++rr) {
      if (!out.active.is_active(rr)) continue;
      const std::vector<int> users = out.active.users_of(rr);
      if (users.empty()) continue;
      const auto beams = slnr_beamform(rr, users, frames[t], topo);
      for (size_t i = 0; i < users.size(); ++i)
        wt.block(rr, users[i]) = beams[i];
    }
    const double tau =
        spectral_efficiency(wt, out.active, frames[t], CsiView::perfect);
    tau_sum += tau;
    for (int kk = 0; kk < k; ++kk)
      rate_sum(kk) += user_rate(kk, wt, frames[t], CsiView::perfect);

    const ConstraintReport cr = check_constraints(wt, out.active, frames[t],
                                                  topo, params,
                                                  CsiView::perfect);
    min_pslack = std::min(min_pslack, cr.min_power_slack());
    min_fslack = std::min(min_fslack, cr.min_fronthaul_slack());
    assoc_viol = std::max(assoc_viol, cr.total_association_violations());
    all_feasible = all_feasible && cr.feasible(p_tol, c_tol);

    if (t == 0) frame1_bd = total_power(wt, out.active, topo, params, tau);
    if (t == 1) steady_bd = total_power(wt, out.active, topo, params, tau);
    out.frame_w.push_back(std::move(wt));
  }
  if (frame_count == 1) steady_bd = frame1_bd;

  const double avg_power =
      averaged_heuristic_power(frame1_bd, steady_bd, frame_count);
  const double mean_tau = tau_sum / frame_count;

  SolutionMetrics& sm = out.metrics;
  sm.avg_power_w = avg_power;
  sm.sumrate_bps = params.bandwidth_hz * mean_tau;
  sm.ee_bits_per_joule = sm.sumrate_bps / avg_power;
  sm.user_rates_bps.resize(k);
  for (int kk = 0; kk < k; ++kk)
    sm.user_rates_bps[kk] = params.bandwidth_hz * rate_sum(kk) / frame_count;
  sm.active_faps = out.active.active_count();
  sm.min_power_slack_w = min_pslack;
  sm.min_fronthaul_slack_bps = min_fslack;
  sm.association_violations = assoc_viol;
  sm.feasible = all_feasible && assoc_viol == 0;
  sm.fallback = out.assoc.fallback;
  sm.converged =
      !out.assoc.fallback &&
      out.assoc.final_step_sq < opts.stop_tol_scale * k * topo.total_antennas;
  sm.iterations = out.assoc.iterations;
  return out;
}

}  // namespace fogsim
