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

#include "fogsim/metrics.hpp"
#include "fogsim/net_model.hpp"
#include "fogsim/power.hpp"

namespace fogsim {

// Knobs of the reweighted association stage (cloud side, outdated CSI).
struct ReweightOptions {
  double delta0 = 0.1;   // initial regularizer of the association weights
  double shrink = 0.5;   // geometric decay of the regularizer
  int max_iterations = 30;
  double stop_tol_scale = 1e-4;  // stop when ||w - w_prev||_F^2 < scale*K*M
  int wmmse_passes = 3;          // receiver/weight/beamformer rounds per step
  int dual_sweeps = 2;           // multiplier sweeps per beamformer update
  int first_dual_sweeps = 6;     // extra settling on the very first update
  int secular_step_cap = 60;
};

struct AssociationResult {
  Beamformer w;      // cleaned: at most one F-AP block per user
  ActiveSet active;  // all F-APs flagged active; association filled in
  bool fallback = false;
  int iterations = 0;
  double final_step_sq = 0.0;
};

// Centralized user association by reweighted sum-rate maximization on the
// outdated CSI view, all F-APs on, full power budgets. Inside each
// reweighting step the non-convex rate objective is handled by alternating
// closed-form receiver/weight updates with a convex quadratically
// constrained beamformer update (solved exactly in its dual); per-F-AP
// fronthaul overloads are cleared afterwards by releasing lowest-rate users.
AssociationResult associate_users(const NetworkTopology& topo,
                                  const ChannelSet& ch,
                                  const PowerParams& params,
                                  const ReweightOptions& opts);

struct GreedyStep {
  int fap = -1;
  double local_ee = 0.0;         // ranking value, bits/J
  double trial_global_ee = 0.0;  // bits/J with this F-AP also removed
  bool accepted = false;
};

struct GreedyResult {
  ActiveSet active;  // final set; orphans re-assigned where capacity allows
  std::vector<GreedyStep> steps;
  double initial_global_ee = 0.0;
  double final_global_ee = 0.0;  // on Phase-I beams, before re-assignment
};

// Switches off F-APs in ascending local-EE order while the global EE (on
// the Phase-I beams, outdated view) keeps improving; first rejected removal
// stops the loop. At least one F-AP stays on. Users of removed F-APs move
// to their strongest remaining F-AP when it has antenna headroom, otherwise
// they sit out the scheduling period.
GreedyResult greedy_deactivate(const Beamformer& w_init,
                               const ActiveSet& assoc,
                               const NetworkTopology& topo,
                               const ChannelSet& ch,
                               const PowerParams& params);

// Closed-form max-SLNR beams for one F-AP, one per served user, each at
// equal power share P_r/K_r exactly. Solved by power iteration on the
// rank-one whitened problem, dense eigensolver as fallback.
std::vector<Eigen::VectorXcd> slnr_beamform(int fap,
                                            const std::vector<int>& users,
                                            const ChannelSet& ch,
                                            const NetworkTopology& topo,
                                            bool* used_fallback = nullptr);

// Common reporting block every per-drop algorithm fills in.
struct SolutionMetrics {
  double ee_bits_per_joule = 0.0;
  double sumrate_bps = 0.0;
  std::vector<double> user_rates_bps;  // frame-averaged, true channels
  int active_faps = 0;
  double avg_power_w = 0.0;
  double min_power_slack_w = 0.0;
  double min_fronthaul_slack_bps = 0.0;
  int association_violations = 0;
  bool feasible = false;
  bool fallback = false;
  bool converged = true;
  int iterations = 0;
};

struct HeuristicResult {
  ActiveSet active;
  std::vector<Beamformer> frame_w;
  AssociationResult assoc;
  GreedyResult greedy;
  SolutionMetrics metrics;
};

// Full scheduling period: frame 1 = association + greedy deactivation +
// local SLNR beams; frames 2..T only refresh the SLNR beams on fresh local
// CSI. Reported rates use the true channels; reported power averages the
// period (re-association cost in frame 1 only).
HeuristicResult run_heuristic(const NetworkTopology& topo,
                              const std::vector<ChannelSet>& frames,
                              const PowerParams& params,
                              const ReweightOptions& opts,
                              const AssociationResult* shared_assoc = nullptr);

}  // namespace fogsim
