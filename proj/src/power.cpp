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

#include "fogsim/power.hpp"

#include <stdexcept>

namespace fogsim {

void PowerParams::validate() const {
  const bool pos = p_fix_w > 0 && beta_redundancy > 0 && b_iq_bits > 0 &&
                   f_pre_hz > 0 && p_td_w_per_bps > 0 && beta_amp > 0 &&
                   rho_d_n0_w > 0 && p_ic_w > 0 && bandwidth_hz > 0;
  if (!pos) throw std::invalid_argument("PowerParams: all fields must be > 0");
  if (beta_amp > 1.0)
    throw std::invalid_argument("PowerParams: amplifier efficiency > 1");
}

double fronthaul_uplink_power(const PowerParams& p, int antennas,
                              int served_users) {
  if (antennas < 1) throw std::invalid_argument("uplink power: antennas < 1");
  if (served_users < 0)
    throw std::invalid_argument("uplink power: served_users < 0");
  const double iq_rate_bps =
      static_cast<double>(antennas) * served_users * p.b_iq_bits * p.f_pre_hz;
  return p.p_fix_w + p.beta_redundancy * iq_rate_bps * p.p_td_w_per_bps;
}

double circuit_power(const PowerParams& p, int antennas) {
  if (antennas < 1) throw std::invalid_argument("circuit power: antennas < 1");
  return p.rho_d_n0_w / p.beta_amp + antennas * p.p_ic_w;
}

double fronthaul_downlink_power(const PowerParams& p,
                                double spectral_efficiency) {
  if (spectral_efficiency < 0)
    throw std::invalid_argument("downlink power: negative rate");
  return p.p_fix_w + p.bandwidth_hz * spectral_efficiency * p.p_td_w_per_bps;
}

double wireless_power(const Beamformer& w, int fap) {
  return w.fap_power(fap);
}

double PowerBreakdown::total_w() const {
  double t = 0.0;
  for (const auto& f : faps) t += f.total();
  return t;
}

PowerBreakdown total_power(const Beamformer& w, const ActiveSet& active,
                           const NetworkTopology& topo, const PowerParams& p,
                           double spectral_efficiency) {
  const int R = topo.fap_count();
  PowerBreakdown bd;
  bd.faps.resize(R);
  for (int r = 0; r < R; ++r) {
    FapPower& f = bd.faps[r];
    f.active = active.is_active(r);
    f.circuit_w = circuit_power(p, topo.faps[r].antennas);
    if (f.active) {
      f.uplink_w =
          fronthaul_uplink_power(p, topo.faps[r].antennas,
                                 active.served_count(r));
      f.downlink_w = fronthaul_downlink_power(p, spectral_efficiency);
      f.wireless_w = wireless_power(w, r);
    } else {
      if (wireless_power(w, r) > 1e-12)
        throw std::invalid_argument(
            "total_power: idle F-AP carries beam power");
      f.uplink_w = fronthaul_uplink_power(p, topo.faps[r].antennas, 0);
    }
  }
  return bd;
}

double averaged_heuristic_power(const PowerBreakdown& frame1,
                                const PowerBreakdown& steady, int frames) {
  if (frames < 1)
    throw std::invalid_argument("averaged power: frames < 1");
  if (frame1.faps.size() != steady.faps.size())
    throw std::invalid_argument("averaged power: breakdown size mismatch");
  double acc = 0.0;
  for (size_t r = 0; r < frame1.faps.size(); ++r) {
    const FapPower& a = frame1.faps[r];
    const FapPower& s = steady.faps[r];
    if (a.active != s.active)
      throw std::invalid_argument("averaged power: active sets differ");
    if (a.active) {
      acc += a.total() + (frames - 1) * (s.circuit_w + s.wireless_w);
    } else {
      acc += frames * (a.uplink_w + a.circuit_w);
    }
  }
  return acc / frames;
}

}  // namespace fogsim
