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

#include "fogsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fogsim {

double association_epsilon(const NetworkTopology& topo) {
  double pmax = 0.0;
  for (const auto& f : topo.faps) pmax = std::max(pmax, f.tx_power_max_w);
  return 1e-4 * pmax / topo.user_count();
}

double sinr(int user, const Beamformer& w, const ChannelSet& ch,
            CsiView view) {
  const Eigen::MatrixXcd& h = ch.view(view);
  if (h.rows() != w.w.rows() || h.cols() != w.w.cols())
    throw std::invalid_argument("sinr: channel/beamformer shape mismatch");
  const Eigen::RowVectorXcd ip = h.col(user).adjoint() * w.w;
  const double sig = std::norm(ip(user));
  double interference = 0.0;
  for (int j = 0; j < w.user_count(); ++j)
    if (j != user) interference += std::norm(ip(j));
  return sig / (interference + ch.noise_power_w);
}

double user_rate(int user, const Beamformer& w, const ChannelSet& ch,
                 CsiView view) {
  return std::log2(1.0 + sinr(user, w, ch, view));
}

double spectral_efficiency(const Beamformer& w, const ActiveSet& active,
                           const ChannelSet& ch, CsiView view) {
  double tau = 0.0;
  for (size_t k = 0; k < active.serving_fap.size(); ++k) {
    const int r = active.serving_fap[k];
    if (r >= 0 && active.is_active(r))
      tau += user_rate(static_cast<int>(k), w, ch, view);
  }
  return tau;
}

double global_ee(const Beamformer& w, const ActiveSet& active,
                 const ChannelSet& ch, const NetworkTopology& topo,
                 const PowerParams& params, CsiView view) {
  const double tau = spectral_efficiency(w, active, ch, view);
  const PowerBreakdown bd = total_power(w, active, topo, params, tau);
  return params.bandwidth_hz * tau / bd.total_w();
}

double local_ee(int fap, const Beamformer& w, const ActiveSet& active,
                const ChannelSet& ch, const NetworkTopology& topo,
                const PowerParams& params, CsiView view) {
  if (!active.is_active(fap)) return 0.0;
  double own_tau = 0.0;
  for (size_t k = 0; k < active.serving_fap.size(); ++k)
    if (active.serving_fap[k] == fap)
      own_tau += user_rate(static_cast<int>(k), w, ch, view);
  const double net_tau = spectral_efficiency(w, active, ch, view);
  const double p_on =
      fronthaul_uplink_power(params, topo.faps[fap].antennas,
                             active.served_count(fap)) +
      circuit_power(params, topo.faps[fap].antennas) +
      wireless_power(w, fap) + fronthaul_downlink_power(params, net_tau);
  return params.bandwidth_hz * own_tau / p_on;
}

double slnr(int fap, int user, const Eigen::VectorXcd& w_rk,
            const ChannelSet& ch, const NetworkTopology& topo) {
  const int off = topo.antenna_offset[fap];
  const int m = topo.faps[fap].antennas;
  if (w_rk.size() != m)
    throw std::invalid_argument("slnr: beam length != antenna count");
  const Eigen::MatrixXcd local = ch.perfect.block(off, 0, m, ch.user_count());
  const double sig = std::norm(local.col(user).dot(w_rk));
  double leakage = 0.0;
  for (int j = 0; j < ch.user_count(); ++j)
    if (j != user) leakage += std::norm(local.col(j).dot(w_rk));
  return sig / (leakage + ch.noise_power_w);
}

double ConstraintReport::min_power_slack() const {
  return *std::min_element(power_slack_w.begin(), power_slack_w.end());
}

double ConstraintReport::min_fronthaul_slack() const {
  return *std::min_element(fronthaul_slack_bps.begin(),
                           fronthaul_slack_bps.end());
}

int ConstraintReport::total_association_violations() const {
  int n = 0;
  for (int v : association_violations) n += v;
  return n;
}

bool ConstraintReport::feasible(double power_tol_w,
                                double fronthaul_tol_bps) const {
  return min_power_slack() >= -power_tol_w &&
         min_fronthaul_slack() >= -fronthaul_tol_bps &&
         total_association_violations() == 0;
}

ConstraintReport check_constraints(const Beamformer& w,
                                   const ActiveSet& active,
                                   const ChannelSet& ch,
                                   const NetworkTopology& topo,
                                   const PowerParams& params, CsiView view) {
  const int R = topo.fap_count();
  const int K = topo.user_count();
  const double eps = association_epsilon(topo);

  ConstraintReport rep;
  rep.power_slack_w.resize(R);
  rep.fronthaul_slack_bps.resize(R);
  rep.association_violations.assign(K, 0);

  std::vector<double> rate(K, 0.0);
  for (int k = 0; k < K; ++k) rate[k] = user_rate(k, w, ch, view);

  for (int r = 0; r < R; ++r) {
    rep.power_slack_w[r] = topo.faps[r].tx_power_max_w - wireless_power(w, r);
    double served_bps = 0.0;
    for (int k = 0; k < K; ++k)
      if (active.serving_fap[k] == r && active.is_active(r))
        served_bps += params.bandwidth_hz * rate[k];
    rep.fronthaul_slack_bps[r] = topo.faps[r].fronthaul_bps - served_bps;
  }

  for (int k = 0; k < K; ++k) {
    int carriers = 0;
    for (int r = 0; r < R; ++r)
      if (w.block_power(r, k) > eps) ++carriers;
    rep.association_violations[k] = std::max(0, carriers - 1);
  }
  return rep;
}

}  // namespace fogsim
