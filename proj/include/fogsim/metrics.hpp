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
#include "fogsim/power.hpp"

namespace fogsim {

// Threshold below which a beam block counts as "not serving": one ten
// thousandth of the strongest F-AP's budget, split per user.
double association_epsilon(const NetworkTopology& topo);

double sinr(int user, const Beamformer& w, const ChannelSet& ch, CsiView view);

// Shannon rate in bits/s/Hz (log base 2 so that bandwidth * rate is
// directly comparable with fronthaul capacities in bits/s).
double user_rate(int user, const Beamformer& w, const ChannelSet& ch,
                 CsiView view);

// Sum rate over the served users of the active F-APs, bits/s/Hz.
double spectral_efficiency(const Beamformer& w, const ActiveSet& active,
                           const ChannelSet& ch, CsiView view);

// System throughput per watt, bits per joule.
double global_ee(const Beamformer& w, const ActiveSet& active,
                 const ChannelSet& ch, const NetworkTopology& topo,
                 const PowerParams& params, CsiView view);

// Throughput of F-AP r's own users over its on-state power, bits per joule.
// The on-state power charges the downlink fronthaul term at the *network*
// spectral efficiency, matching the system power model.
double local_ee(int fap, const Beamformer& w, const ActiveSet& active,
                const ChannelSet& ch, const NetworkTopology& topo,
                const PowerParams& params, CsiView view);

// Signal-to-leakage-plus-noise ratio of the beam w_rk at F-AP r: signal to
// its user over leakage toward every other user, measured on the local
// channel rows of F-AP r (perfect CSI).
double slnr(int fap, int user, const Eigen::VectorXcd& w_rk,
            const ChannelSet& ch, const NetworkTopology& topo);

struct ConstraintReport {
  // Slack of each F-AP's transmit power budget, watts; negative = violated.
  std::vector<double> power_slack_w;
  // Slack of each F-AP's fronthaul capacity, bits/s; negative = violated.
  std::vector<double> fronthaul_slack_bps;
  // Per user: number of F-APs carrying it beyond the first (0 = compliant).
  std::vector<int> association_violations;

  double min_power_slack() const;
  double min_fronthaul_slack() const;
  int total_association_violations() const;
  bool feasible(double power_tol_w, double fronthaul_tol_bps) const;
};

ConstraintReport check_constraints(const Beamformer& w,
                                   const ActiveSet& active,
                                   const ChannelSet& ch,
                                   const NetworkTopology& topo,
                                   const PowerParams& params, CsiView view);

}  // namespace fogsim
