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

#include "fogsim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "fogsim/metrics.hpp"

namespace fogsim {
namespace {

using Eigen::VectorXd;

double max_power_budget(const NetworkTopology& topo) {
  double p = 0.0;
  for (const auto& f : topo.faps) p = std::max(p, f.tx_power_max_w);
  return p;
}

double max_fronthaul(const NetworkTopology& topo) {
  double c = 0.0;
  for (const auto& f : topo.faps) c = std::max(c, f.fronthaul_bps);
  return c;
}

Beamformer slnr_frame(const NetworkTopology& topo, const ActiveSet& active,
                      const ChannelSet& ch) {
  Beamformer w(topo);
  for (int r = 0; r < topo.fap_count(); ++r) {
    if (!active.is_active(r)) continue;
    const std::vector<int> users = active.users_of(r);
    if (users.empty()) continue;
    const auto beams = slnr_beamform(r, users, ch, topo);
    for (size_t i = 0; i < users.size(); ++i)
      w.block(r, users[i]) = beams[i];
  }
  return w;
}

}  // namespace

void RefEeParams::validate() const {
  if (min_users < 1)
    throw std::invalid_argument("RefEeParams: min_users must be at least 1");
  if (user_capacity < 0)
    throw std::invalid_argument("RefEeParams: user_capacity must be >= 0");
}

ActiveSet ref_ee_associate(const NetworkTopology& topo, const ChannelSet& ch,
                           const RefEeParams& ref) {
  ref.validate();
  const int r = topo.fap_count();
  const int k = topo.user_count();
  ActiveSet out;
  out.fap_active.assign(r, 0);
  out.serving_fap.assign(k, -1);

  for (int kk = 0; kk < k; ++kk) {
    double best = -1.0;
    for (int rr = 0; rr < r; ++rr) {
      const int off = topo.antenna_offset[rr];
      const int wd = topo.antenna_offset[rr + 1] - off;
      const double g = ch.perfect.col(kk).segment(off, wd).squaredNorm();
      if (g > best) {
        best = g;
        out.serving_fap[kk] = rr;
      }
    }
  }

  for (int rr = 0; rr < r; ++rr) {
    const int cap =
        ref.user_capacity > 0 ? ref.user_capacity : topo.faps[rr].antennas;
    std::vector<int> mine;
    for (int kk = 0; kk < k; ++kk)
      if (out.serving_fap[kk] == rr) mine.push_back(kk);
    while (static_cast<int>(mine.size()) > cap) {
      size_t far = 0;
      for (size_t i = 1; i < mine.size(); ++i) {
        if (topo.distance_m(rr, mine[i]) > topo.distance_m(rr, mine[far]))
          far = i;
      }
      out.serving_fap[mine[far]] = -1;
      mine.erase(mine.begin() + static_cast<long>(far));
    }
    if (static_cast<int>(mine.size()) >= ref.min_users) {
      out.fap_active[rr] = 1;
    } else {
      for (int kk : mine) out.serving_fap[kk] = -1;
    }
  }
  return out;
}

BaselineResult ref_ee(const NetworkTopology& topo,
                      const std::vector<ChannelSet>& frames,
                      const PowerParams& params, const RefEeParams& ref) {
  if (frames.empty())
    throw std::invalid_argument("ref_ee: need at least one frame");
  params.validate();
  ref.validate();
  const int k = topo.user_count();
  const int frame_count = static_cast<int>(frames.size());
  const double p_tol = 1e-6 * max_power_budget(topo);
  const double c_tol = 1e-6 * max_fronthaul(topo);

  BaselineResult out;
  VectorXd rate_sum = VectorXd::Zero(k);
  double tau_sum = 0.0;
  double power_sum = 0.0;
  double min_pslack = std::numeric_limits<double>::infinity();
  double min_fslack = std::numeric_limits<double>::infinity();
  int assoc_viol = 0;
  bool all_feasible = true;

  out.frame_w.reserve(frame_count);
  for (int t = 0; t < frame_count; ++t) {
    const ActiveSet act = ref_ee_associate(topo, frames[t], ref);
    Beamformer wt = slnr_frame(topo, act, frames[t]);
    const double tau =
        spectral_efficiency(wt, act, frames[t], CsiView::perfect);
    tau_sum += tau;
    power_sum += total_power(wt, act, topo, params, tau).total_w();
    for (int kk = 0; kk < k; ++kk)
      rate_sum(kk) += user_rate(kk, wt, frames[t], CsiView::perfect);
    const ConstraintReport cr =
        check_constraints(wt, act, frames[t], topo, params, CsiView::perfect);
    min_pslack = std::min(min_pslack, cr.min_power_slack());
    min_fslack = std::min(min_fslack, cr.min_fronthaul_slack());
    assoc_viol = std::max(assoc_viol, cr.total_association_violations());
    all_feasible = all_feasible && cr.feasible(p_tol, c_tol);
    if (t == 0) out.active = act;
    out.frame_w.push_back(std::move(wt));
  }

  SolutionMetrics& sm = out.metrics;
  sm.avg_power_w = power_sum / frame_count;
  sm.sumrate_bps = params.bandwidth_hz * tau_sum / frame_count;
  sm.ee_bits_per_joule = power_sum > 0.0
                             ? params.bandwidth_hz * tau_sum / power_sum
                             : 0.0;
  sm.user_rates_bps.resize(k);
  for (int kk = 0; kk < k; ++kk)
    sm.user_rates_bps[kk] = params.bandwidth_hz * rate_sum(kk) / frame_count;
  sm.active_faps = out.active.active_count();
  sm.min_power_slack_w = min_pslack;
  sm.min_fronthaul_slack_bps = min_fslack;
  sm.association_violations = assoc_viol;
  sm.feasible = all_feasible && assoc_viol == 0;
  return out;
}

BaselineResult ref_sr(const NetworkTopology& topo,
                      const std::vector<ChannelSet>& frames,
                      const PowerParams& params, const ReweightOptions& opts,
                      const AssociationResult* shared_assoc) {
  if (frames.empty())
    throw std::invalid_argument("ref_sr: need at least one frame");
  params.validate();
  const int k = topo.user_count();
  const int r = topo.fap_count();
  const int frame_count = static_cast<int>(frames.size());
  const double p_tol = 1e-6 * max_power_budget(topo);
  const double c_tol = 1e-6 * max_fronthaul(topo);

  AssociationResult assoc;
  if (shared_assoc) {
    if (shared_assoc->w.w.rows() != topo.total_antennas ||
        shared_assoc->w.w.cols() != k)
      throw std::invalid_argument("ref_sr: shared association mismatch");
    assoc = *shared_assoc;
  } else {
    assoc = associate_users(topo, frames[0], params, opts);
  }

  ActiveSet act;
  act.serving_fap = assoc.active.serving_fap;
  act.fap_active.assign(r, 0);
  for (int kk = 0; kk < k; ++kk) {
    const int rr = act.serving_fap[kk];
    if (rr >= 0) act.fap_active[rr] = 1;
  }

  BaselineResult out;
  out.active = act;
  VectorXd rate_sum = VectorXd::Zero(k);
  double tau_sum = 0.0;
  double power_sum = 0.0;
  double min_pslack = std::numeric_limits<double>::infinity();
  double min_fslack = std::numeric_limits<double>::infinity();
  int assoc_viol = 0;
  bool all_feasible = true;

  out.frame_w.reserve(frame_count);
  for (int t = 0; t < frame_count; ++t) {
    Beamformer wt = slnr_frame(topo, act, frames[t]);
    const double tau =
        spectral_efficiency(wt, act, frames[t], CsiView::perfect);
    tau_sum += tau;
    power_sum += total_power(wt, act, topo, params, tau).total_w();
    for (int kk = 0; kk < k; ++kk)
      rate_sum(kk) += user_rate(kk, wt, frames[t], CsiView::perfect);
    const ConstraintReport cr =
        check_constraints(wt, act, frames[t], topo, params, CsiView::perfect);
    min_pslack = std::min(min_pslack, cr.min_power_slack());
    min_fslack = std::min(min_fslack, cr.min_fronthaul_slack());
    assoc_viol = std::max(assoc_viol, cr.total_association_violations());
    all_feasible = all_feasible && cr.feasible(p_tol, c_tol);
    out.frame_w.push_back(std::move(wt));
  }

  SolutionMetrics& sm = out.metrics;
  sm.avg_power_w = power_sum / frame_count;
  sm.sumrate_bps = params.bandwidth_hz * tau_sum / frame_count;
  sm.ee_bits_per_joule = power_sum > 0.0
                             ? params.bandwidth_hz * tau_sum / power_sum
                             : 0.0;
  sm.user_rates_bps.resize(k);
  for (int kk = 0; kk < k; ++kk)
    sm.user_rates_bps[kk] = params.bandwidth_hz * rate_sum(kk) / frame_count;
  sm.active_faps = act.active_count();
  sm.min_power_slack_w = min_pslack;
  sm.min_fronthaul_slack_bps = min_fslack;
  sm.association_violations = assoc_viol;
  sm.feasible = all_feasible && assoc_viol == 0;
  sm.fallback = assoc.fallback;
  sm.converged =
      !assoc.fallback &&
      assoc.final_step_sq < opts.stop_tol_scale * k * topo.total_antennas;
  sm.iterations = assoc.iterations;
  return out;
}

}  // namespace fogsim
