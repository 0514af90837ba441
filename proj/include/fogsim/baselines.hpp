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

#include "fogsim/heuristic.hpp"
#include "fogsim/net_model.hpp"
#include "fogsim/power.hpp"

namespace fogsim {

struct RefEeParams {
  int min_users = 1;      // F-APs serving fewer users switch off
  int user_capacity = 0;  // per-F-AP cap; 0 means "antenna count"

  void validate() const;
};

struct BaselineResult {
  ActiveSet active;  // frame-1 association
  std::vector<Beamformer> frame_w;
  SolutionMetrics metrics;
};

// Distributed association for one frame: each user picks the F-AP with the
// strongest local channel, overloaded F-APs shed their farthest users, and
// F-APs left with fewer than min_users switch off. Uses only the perfect
// local channels, so the result cannot depend on the CSI error level.
ActiveSet ref_ee_associate(const NetworkTopology& topo, const ChannelSet& ch,
                           const RefEeParams& ref);

// Fully distributed energy-efficiency reference: per-frame association as
// above plus local max-SLNR beams; instantaneous power accounting every
// frame. The reported active set is frame 1's.
BaselineResult ref_ee(const NetworkTopology& topo,
                      const std::vector<ChannelSet>& frames,
                      const PowerParams& params, const RefEeParams& ref);

// Sum-rate reference: the cloud association of the two-phase heuristic with
// the deactivation stage skipped. Every F-AP with at least one user stays
// on; all frames run local max-SLNR beams at full instantaneous power cost.
// Pass shared_assoc to reuse an association already computed for the same
// drop (paired comparisons).
BaselineResult ref_sr(const NetworkTopology& topo,
                      const std::vector<ChannelSet>& frames,
                      const PowerParams& params, const ReweightOptions& opts,
                      const AssociationResult* shared_assoc = nullptr);

}  // namespace fogsim
