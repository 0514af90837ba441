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

#pragma once

#include <vector>

#include "fogsim/net_model.hpp"

namespace fogsim {

// Knobs of the consumed-power model. Defaults are the reference hardware
// numbers used throughout the experiments.
struct PowerParams {
  double p_fix_w = 0.825;          // fixed fronthaul link power
  double beta_redundancy = 4.0 / 3.0;  // channel-coding overhead on CSI uplink
  double b_iq_bits = 20.0;         // quantizer bits per IQ sample
  double f_pre_hz = 1.5e6;         // CSI sample rate per antenna-user pair
  double p_td_w_per_bps = 0.25e-9; // fronthaul transfer power per bit/s
  double beta_amp = 0.4;           // power amplifier efficiency
  double rho_d_n0_w = 1.0;         // amplifier drain reference
  double p_ic_w = 0.2;             // circuit power per antenna
  double bandwidth_hz = 10e6;

  void validate() const;
};

// CSI uplink fronthaul power of one F-AP with M_r antennas reporting K_r
// user channels to the cloud.
double fronthaul_uplink_power(const PowerParams& p, int antennas,
                              int served_users);

// Static circuit power of one F-AP.
double circuit_power(const PowerParams& p, int antennas);

// Downlink fronthaul transfer power driven by the served spectral
// efficiency (bits/s/Hz over the shared band).
double fronthaul_downlink_power(const PowerParams& p,
                                double spectral_efficiency);

// Wireless transmit power of F-AP r: sum of squared beam norms over its
// antenna block (beams of users it does not serve are zero by convention).
double wireless_power(const Beamformer& w, int fap);

struct FapPower {
  bool active = false;
  double uplink_w = 0.0;    // CSI reporting, paid also when idle
  double circuit_w = 0.0;   // paid also when idle
  double downlink_w = 0.0;  // zero when idle
  double wireless_w = 0.0;  // zero when idle
  double total() const {
    return uplink_w + circuit_w + downlink_w + wireless_w;
  }
};

struct PowerBreakdown {
  std::vector<FapPower> faps;
  double total_w() const;
};

// Instantaneous network power: active F-APs pay all four terms (CSI uplink
// sized by their association count), idle F-APs pay the no-traffic uplink
// term plus circuit power. Throws if an idle F-AP still carries beam power.
PowerBreakdown total_power(const Beamformer& w, const ActiveSet& active,
                           const NetworkTopology& topo, const PowerParams& p,
                           double spectral_efficiency);

// Power of a scheduling period of `frames` frames, averaged per frame: the
// cloud re-associates in frame 1 (full cost), the remaining frames only pay
// circuit plus wireless power at the active F-APs, idle F-APs pay their
// static terms throughout.
double averaged_heuristic_power(const PowerBreakdown& frame1,
                                const PowerBreakdown& steady, int frames);

}  // namespace fogsim
