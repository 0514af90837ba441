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

#include "fogsim/al_solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fogsim/lbfgs.hpp"

namespace fogsim {

double phi(double norm_sq, double delta) {
  if (delta <= 0.0) throw std::invalid_argument("phi: delta must be > 0");
  return norm_sq / (norm_sq + delta);
}

double phi(const Eigen::VectorXcd& y, double delta) {
  return phi(y.squaredNorm(), delta);
}

AlMultipliers AlMultipliers::zeros(int faps, int users) {
  AlMultipliers mu;
  mu.power = Eigen::VectorXd::Zero(faps);
  mu.fronthaul = Eigen::VectorXd::Zero(faps);
  mu.assoc = Eigen::VectorXd::Zero(users);
  return mu;
}

AlProblem::AlProblem(const NetworkTopology& topo, const ChannelSet& ch,
                     const PowerParams& params, CsiView view, double delta)
    : topo_(topo), params_(params), delta_(delta) {
  if (delta <= 0.0) throw std::invalid_argument("AlProblem: delta <= 0");
  r_ = topo.fap_count();
  k_ = topo.user_count();
  m_ = topo.total_antennas;
  h_ = ch.view(view);
  if (h_.rows() != m_ || h_.cols() != k_)
    throw std::invalid_argument("AlProblem: channel/topology mismatch");
  sigma2_ = ch.noise_power_w;
  // Association-independent power floor. During optimization the association
  // is fluid, so the CSI uplink cost is evaluated at full reporting load (all
  // K users); reported metrics recompute it from the extracted association.
  const_power_w_ = 0.0;
  for (int r = 0; r < r_; ++r)
    const_power_w_ +=
        fronthaul_uplink_power(params_, topo.faps[r].antennas, k_) +
        circuit_power(params_, topo.faps[r].antennas);
}

Eigen::VectorXd AlProblem::pack(const Beamformer& w) const {
  Eigen::VectorXd x(dim());
  Eigen::Map<Eigen::MatrixXd>(x.data(), m_, k_) = w.w.real();
  Eigen::Map<Eigen::MatrixXd>(x.data() + m_ * k_, m_, k_) = w.w.imag();
  return x;
}

Beamformer AlProblem::unpack(const Eigen::VectorXd& x) const {
  Beamformer w(topo_);
  w.w.real() = Eigen::Map<const Eigen::MatrixXd>(x.data(), m_, k_);
  w.w.imag() = Eigen::Map<const Eigen::MatrixXd>(x.data() + m_ * k_, m_, k_);
  return w;
}

double AlProblem::ConstraintValues::max_violation() const {
  double v = 0.0;
  v = std::max(v, power.size() ? power.maxCoeff() : 0.0);
  v = std::max(v, fronthaul.size() ? fronthaul.maxCoeff() : 0.0);
  v = std::max(v, assoc.size() ? assoc.maxCoeff() : 0.0);
  return std::max(v, 0.0);
}

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Everything the objective and its gradient share for one evaluation point.
struct EvalCore {
  Eigen::MatrixXcd w;        // m x k
  Eigen::MatrixXcd ip;       // ip(k, j) = h_k^H w_j
  Eigen::VectorXd sig;       // |ip(k,k)|^2
  Eigen::VectorXd den;       // sigma^2 + interference at user k
  Eigen::VectorXd gamma;     // SINR
  Eigen::VectorXd rate;      // log2(1 + gamma)
  double tau = 0.0;
  Eigen::MatrixXd block_sq;  // (r, j) -> ||w_rj||^2
  Eigen::MatrixXd phi_rk;    // per-beam smoothing
  Eigen::MatrixXd dphi_rk;   // its derivative wrt the squared norm
  Eigen::VectorXd fap_sq;    // per-F-AP wireless power
  Eigen::VectorXd phi_r;     // per-F-AP group smoothing
  Eigen::VectorXd dphi_r;
  double pfd_w = 0.0;        // downlink fronthaul power at tau
  double total_power_w = 0.0;
  double f = 0.0;            // negated smoothed EE, Mbit/J
};

}  // namespace

AlProblem::ConstraintValues AlProblem::constraint_values(
    const Eigen::VectorXd& x) const {
  ConstraintValues cv;
  Eigen::MatrixXcd w(m_, k_);
  w.real() = Eigen::Map<const Eigen::MatrixXd>(x.data(), m_, k_);
  w.imag() = Eigen::Map<const Eigen::MatrixXd>(x.data() + m_ * k_, m_, k_);

  const Eigen::MatrixXcd ip = h_.adjoint() * w;
  cv.power.resize(r_);
  cv.fronthaul.resize(r_);
  cv.assoc = Eigen::VectorXd::Constant(k_, -1.0);

  Eigen::VectorXd rate(k_);
  double tau = 0.0;
  for (int k = 0; k < k_; ++k) {
    const double sig = std::norm(ip(k, k));
    double den = sigma2_;
    for (int j = 0; j < k_; ++j)
      if (j != k) den += std::norm(ip(k, j));
    rate(k) = std::log2(1.0 + sig / den);
    tau += rate(k);
  }

  double total_power = const_power_w_;
  const double pfd =
      params_.p_fix_w + params_.bandwidth_hz * tau * params_.p_td_w_per_bps;
  for (int r = 0; r < r_; ++r) {
    const int off = topo_.antenna_offset[r];
    const int mr = topo_.faps[r].antennas;
    double fap_sq = 0.0;
    double fronthaul_bps = 0.0;
    for (int j = 0; j < k_; ++j) {
      const double s = w.block(off, j, mr, 1).squaredNorm();
      fap_sq += s;
      const double p = phi(s, delta_);
      fronthaul_bps += params_.bandwidth_hz * rate(j) * p;
      cv.assoc(j) += p;
    }
    total_power += phi(fap_sq, delta_) * (pfd + fap_sq);
    cv.power(r) =
        (fap_sq - topo_.faps[r].tx_power_max_w) / topo_.faps[r].tx_power_max_w;
    cv.fronthaul(r) =
        (fronthaul_bps - topo_.faps[r].fronthaul_bps) /
        topo_.faps[r].fronthaul_bps;
  }
  cv.f = -ee_scale_ * params_.bandwidth_hz * tau / total_power;
  return cv;
}

double AlProblem::objective(const Eigen::VectorXd& x, const AlMultipliers& mu,
                            double rho, Eigen::VectorXd* grad) const {
  if (x.size() != dim())
    throw std::invalid_argument("AlProblem: wrong iterate length");
  if (rho <= 0.0) throw std::invalid_argument("AlProblem: rho <= 0");

  EvalCore c;
  c.w.resize(m_, k_);
  c.w.real() = Eigen::Map<const Eigen::MatrixXd>(x.data(), m_, k_);
  c.w.imag() = Eigen::Map<const Eigen::MatrixXd>(x.data() + m_ * k_, m_, k_);

  c.ip = h_.adjoint() * c.w;

  c.sig.resize(k_);
  c.den.resize(k_);
  c.gamma.resize(k_);
  c.rate.resize(k_);
  for (int k = 0; k < k_; ++k) {
    c.sig(k) = std::norm(c.ip(k, k));
    double den = sigma2_;
    for (int j = 0; j < k_; ++j)
      if (j != k) den += std::norm(c.ip(k, j));
    c.den(k) = den;
    c.gamma(k) = c.sig(k) / den;
    c.rate(k) = std::log2(1.0 + c.gamma(k));
  }
  c.tau = c.rate.sum();

  c.block_sq.resize(r_, k_);
  c.phi_rk.resize(r_, k_);
  c.dphi_rk.resize(r_, k_);
  c.fap_sq.resize(r_);
  c.phi_r.resize(r_);
  c.dphi_r.resize(r_);
  for (int r = 0; r < r_; ++r) {
    const int off = topo_.antenna_offset[r];
    const int mr = topo_.faps[r].antennas;
    double acc = 0.0;
    for (int j = 0; j < k_; ++j) {
      const double s = c.w.block(off, j, mr, 1).squaredNorm();
      c.block_sq(r, j) = s;
      const double d = s + delta_;
      c.phi_rk(r, j) = s / d;
      c.dphi_rk(r, j) = delta_ / (d * d);
      acc += s;
    }
    c.fap_sq(r) = acc;
    const double d = acc + delta_;
    c.phi_r(r) = acc / d;
    c.dphi_r(r) = delta_ / (d * d);
  }

  c.pfd_w =
      params_.p_fix_w + params_.bandwidth_hz * c.tau * params_.p_td_w_per_bps;
  c.total_power_w = const_power_w_;
  for (int r = 0; r < r_; ++r)
    c.total_power_w += c.phi_r(r) * (c.pfd_w + c.fap_sq(r));
  c.f = -ee_scale_ * params_.bandwidth_hz * c.tau / c.total_power_w;

  // Normalized residuals and their active penalty weights rho*max(g+mu/rho,0).
  Eigen::VectorXd g1(r_), g2(r_), lam1(r_), lam2(r_);
  for (int r = 0; r < r_; ++r) {
    const double pmax = topo_.faps[r].tx_power_max_w;
    const double cap = topo_.faps[r].fronthaul_bps;
    g1(r) = (c.fap_sq(r) - pmax) / pmax;
    double fh = 0.0;
    for (int j = 0; j < k_; ++j)
      fh += params_.bandwidth_hz * c.rate(j) * c.phi_rk(r, j);
    g2(r) = (fh - cap) / cap;
    lam1(r) = rho * std::max(g1(r) + mu.power(r) / rho, 0.0);
    lam2(r) = rho * std::max(g2(r) + mu.fronthaul(r) / rho, 0.0);
  }
  Eigen::VectorXd g3(k_), lam3(k_);
  for (int j = 0; j < k_; ++j) {
    g3(j) = c.phi_rk.col(j).sum() - 1.0;
    lam3(j) = rho * std::max(g3(j) + mu.assoc(j) / rho, 0.0);
  }

  double value = c.f;
  value += (lam1.squaredNorm() + lam2.squaredNorm() + lam3.squaredNorm()) /
           (2.0 * rho);

  if (!grad) return value;

  // d(rate_k)/d(w_j^*) = alpha(k,j) * h_k * ip(k,j), with the conjugate
  // convention so the real gradient is twice the real/imaginary parts.
  Eigen::MatrixXd alpha(k_, k_);
  for (int k = 0; k < k_; ++k) {
    const double ck = 1.0 / (kLn2 * (1.0 + c.gamma(k)));
    const double offdiag = -ck * c.sig(k) / (c.den(k) * c.den(k));
    for (int j = 0; j < k_; ++j) alpha(k, j) = offdiag;
    alpha(k, k) = ck / c.den(k);
  }

  // Coefficient of d(tau) coming from the objective: the rate sum appears in
  // the numerator and, through the downlink fronthaul term, in the
  // denominator of the smoothed EE.
  const double p2 = c.total_power_w * c.total_power_w;
  const double scaled_b = ee_scale_ * params_.bandwidth_hz;
  const double cf_tau =
      -scaled_b / c.total_power_w +
      scaled_b * c.tau / p2 *
          (params_.bandwidth_hz * params_.p_td_w_per_bps * c.phi_r.sum());

  // Per-user weight of the shared channel term: objective tau-chain plus the
  // fronthaul penalties where user k's rate is Phi-weighted.
  Eigen::VectorXd omega(k_);
  for (int k = 0; k < k_; ++k) {
    double acc = cf_tau;
    for (int r = 0; r < r_; ++r)
      acc += lam2(r) * params_.bandwidth_hz * c.phi_rk(r, k) /
             topo_.faps[r].fronthaul_bps;
    omega(k) = acc;
  }

  Eigen::MatrixXcd weighted = c.ip;
  for (int k = 0; k < k_; ++k)
    weighted.row(k) *= omega(k);
  for (int k = 0; k < k_; ++k)
    for (int j = 0; j < k_; ++j) weighted(k, j) *= alpha(k, j);
  Eigen::MatrixXcd gc = h_ * weighted;  // shared rate-driven part

  // Block-diagonal part: every term whose derivative is a scalar multiple of
  // w_rj itself (wireless power, the Phi factors, the power penalties).
  const double f_over_p = scaled_b * c.tau / p2;
  for (int r = 0; r < r_; ++r) {
    const int off = topo_.antenna_offset[r];
    const int mr = topo_.faps[r].antennas;
    const double group_coeff =
        f_over_p * (c.dphi_r(r) * (c.pfd_w + c.fap_sq(r)) + c.phi_r(r)) +
        lam1(r) / topo_.faps[r].tx_power_max_w;
    for (int j = 0; j < k_; ++j) {
      const double bc =
          group_coeff +
          lam2(r) * params_.bandwidth_hz * c.rate(j) * c.dphi_rk(r, j) /
              topo_.faps[r].fronthaul_bps +
          lam3(j) * c.dphi_rk(r, j);
      gc.block(off, j, mr, 1) += bc * c.w.block(off, j, mr, 1);
    }
  }

  grad->resize(dim());
  Eigen::Map<Eigen::MatrixXd>(grad->data(), m_, k_) = 2.0 * gc.real();
  Eigen::Map<Eigen::MatrixXd>(grad->data() + m_ * k_, m_, k_) =
      2.0 * gc.imag();
  return value;
}

Beamformer al_initial_point(const NetworkTopology& topo, const ChannelSet& ch,
                            CsiView view, double power_fraction) {
  if (power_fraction <= 0.0 || power_fraction > 1.0)
    throw std::invalid_argument("al_initial_point: bad power fraction");
  const Eigen::MatrixXcd& h = ch.view(view);
  const int K = topo.user_count();
  const int R = topo.fap_count();

  std::vector<int> strongest(K, 0);
  std::vector<int> load(R, 0);
  for (int k = 0; k < K; ++k) {
    double best = -1.0;
    for (int r = 0; r < R; ++r) {
      const double gain =
          h.block(topo.antenna_offset[r], k, topo.faps[r].antennas, 1)
              .squaredNorm();
      if (gain > best) {
        best = gain;
        strongest[k] = r;
      }
    }
    ++load[strongest[k]];
  }

  Beamformer w(topo);
  for (int k = 0; k < K; ++k) {
    const int r = strongest[k];
    const int off = topo.antenna_offset[r];
    const int mr = topo.faps[r].antennas;
    const Eigen::VectorXcd dir = h.block(off, k, mr, 1);
    const double n = dir.norm();
    if (n <= 0.0) continue;
    const double p =
        power_fraction * topo.faps[r].tx_power_max_w / load[r];
    w.block(r, k) = std::sqrt(p) * dir / n;
  }
  return w;
}

Eigen::VectorXd solve_subproblem(const AlProblem& prob,
                                 const Eigen::VectorXd& x0,
                                 const AlMultipliers& mu, double rho,
                                 double inner_tol, int max_inner,
                                 SubproblemReport* report) {
  LbfgsOptions lo;
  lo.max_iterations = max_inner;
  lo.grad_tolerance = inner_tol;
  LbfgsResult res = lbfgs_minimize(
      [&](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
        return prob.objective(x, mu, rho, g);
      },
      x0, lo);
  if (report) {
    report->iterations = res.iterations;
    report->objective = res.fx;
    report->grad_inf_norm = res.grad_inf_norm;
    report->line_search_failed = res.line_search_failed;
  }
  return res.x;
}

namespace {

// KKT-style residual of the penalty update rule: max over constraints of
// max{g, -mu/rho}, with the multipliers of the just-solved subproblem.
double kkt_measure(const AlProblem::ConstraintValues& cv,
                   const AlMultipliers& mu, double rho) {
  double v = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < cv.power.size(); ++r)
    v = std::max(v, std::max(cv.power(r), -mu.power(r) / rho));
  for (int r = 0; r < cv.fronthaul.size(); ++r)
    v = std::max(v, std::max(cv.fronthaul(r), -mu.fronthaul(r) / rho));
  for (int k = 0; k < cv.assoc.size(); ++k)
    v = std::max(v, std::max(cv.assoc(k), -mu.assoc(k) / rho));
  return v;
}

double clamp(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

}  // namespace

AlResult run_al(const NetworkTopology& topo, const ChannelSet& ch,
                const PowerParams& params, const AlOptions& opts) {
  AlProblem prob(topo, ch, params, opts.view, opts.smoothing_delta);
  const int R = topo.fap_count();
  const int K = topo.user_count();

  Beamformer w0 =
      al_initial_point(topo, ch, opts.view, opts.init_power_fraction);
  Eigen::VectorXd x = prob.pack(w0);
  AlMultipliers mu = AlMultipliers::zeros(R, K);
  double rho = opts.initial_penalty;

  AlResult out;
  out.diag.trace.reserve(opts.max_outer_iterations);
  double prev_v = 0.0;

  for (int outer = 0; outer < opts.max_outer_iterations; ++outer) {
    const AlProblem::ConstraintValues warm = prob.constraint_values(x);
    const double inner_tol =
        opts.inner_tol_scale * (1.0 + std::abs(warm.f));

    SubproblemReport rep;
    x = solve_subproblem(prob, x, mu, rho, inner_tol,
                         opts.max_inner_iterations, &rep);
    if (rep.line_search_failed) out.diag.line_search_degraded = true;

    const AlProblem::ConstraintValues cv = prob.constraint_values(x);
    const double viol = cv.max_violation();
    const double vmeas = kkt_measure(cv, mu, rho);

    AlIterationRecord rec;
    rec.outer = outer;
    rec.objective = cv.f;
    rec.max_violation = viol;
    rec.kkt_measure = vmeas;
    rec.penalty = rho;
    rec.grad_inf_norm = rep.grad_inf_norm;
    rec.inner_iterations = rep.iterations;
    out.diag.trace.push_back(rec);
    out.diag.outer_iterations = outer + 1;
    out.diag.final_objective = cv.f;

    if (rep.grad_inf_norm <= opts.kkt_grad_tol * (1.0 + std::abs(cv.f)) &&
        viol <= opts.kkt_violation_tol) {
      out.diag.kkt_converged = true;
      break;
    }

    for (int r = 0; r < R; ++r) {
      mu.power(r) =
          clamp(mu.power(r) + rho * cv.power(r), 0.0, opts.mu_max);
      mu.fronthaul(r) =
          clamp(mu.fronthaul(r) + rho * cv.fronthaul(r), 0.0, opts.mu_max);
    }
    for (int k = 0; k < K; ++k)
      mu.assoc(k) = clamp(mu.assoc(k) + rho * cv.assoc(k), 0.0, opts.mu_max);

    if (outer > 0 && vmeas > opts.violation_shrink * prev_v)
      rho *= opts.penalty_growth;
    prev_v = vmeas;
  }

  // Hard association readout: keep each user's strongest block above the
  // threshold, zero the rest, then an F-AP is active iff it kept a user.
  Beamformer w = prob.unpack(x);
  const double eps = association_epsilon(topo);
  ActiveSet active = ActiveSet::all_active(topo);
  for (int k = 0; k < K; ++k) {
    int best = -1;
    double best_p = eps;
    for (int r = 0; r < R; ++r) {
      const double p = w.block_power(r, k);
      if (p > best_p) {
        best_p = p;
        best = r;
      }
    }
    active.serving_fap[k] = best;
    for (int r = 0; r < R; ++r)
      if (r != best) w.block(r, k).setZero();
  }
  for (int r = 0; r < R; ++r)
    active.fap_active[r] = active.served_count(r) > 0 ? 1 : 0;

  const ConstraintReport rep =
      check_constraints(w, active, ch, topo, params, opts.view);
  double pscale = 0.0, cscale = 0.0;
  for (const auto& f : topo.faps) {
    pscale = std::max(pscale, f.tx_power_max_w);
    cscale = std::max(cscale, f.fronthaul_bps);
  }
  out.diag.feasible = rep.feasible(1e-6 * pscale, 1e-6 * cscale);

  out.w = std::move(w);
  out.active = std::move(active);
  return out;
}

}  // namespace fogsim
