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

// Smooth surrogate of the "is this vector nonzero" indicator:
// ||y||^2 / (||y||^2 + delta), in [0, 1).
double phi(double norm_sq, double delta);
double phi(const Eigen::VectorXcd& y, double delta);

struct AlMultipliers {
  Eigen::VectorXd power;      // one per F-AP
  Eigen::VectorXd fronthaul;  // one per F-AP
  Eigen::VectorXd assoc;      // one per user

  static AlMultipliers zeros(int faps, int users);
};

struct AlOptions {
  double mu_max = 1.0;
  double violation_shrink = 0.25;  // keep penalty while V drops this fast
  double penalty_growth = 10.0;
  double initial_penalty = 10.0;
  int max_outer_iterations = 50;
  int max_inner_iterations = 500;
  double smoothing_delta = 0.1;
  double inner_tol_scale = 1e-4;     // inner tol = scale * (1 + |f|)
  double kkt_grad_tol = 1e-3;        // scaled by (1 + |f|)
  double kkt_violation_tol = 1e-3;   // on normalized residuals
  double init_power_fraction = 0.5;  // budget share of the starting point
  CsiView view = CsiView::outdated;
};

struct AlIterationRecord {
  int outer = 0;
  double objective = 0.0;      // smoothed negated EE at the iterate, Mbit/J
  double max_violation = 0.0;  // max positive normalized residual
  double kkt_measure = 0.0;    // max V of the penalty-update rule
  double penalty = 0.0;
  double grad_inf_norm = 0.0;
  int inner_iterations = 0;
};

struct AlDiagnostics {
  std::vector<AlIterationRecord> trace;
  bool kkt_converged = false;
  bool feasible = false;  // cleaned solution passes check_constraints
  bool line_search_degraded = false;
  int outer_iterations = 0;
  double final_objective = 0.0;
};

struct AlResult {
  Beamformer w;  // thresholded: at most one F-AP block kept per user
  ActiveSet active;
  AlDiagnostics diag;
};

// The smoothed EE problem over stacked real/imaginary beam coordinates,
// with normalized constraint residuals so that penalty parameters and
// multiplier caps of order one are meaningful:
//   power:      (sum_k ||w_rk||^2 - P_r^max) / P_r^max
//   fronthaul:  (B * sum_k R_k Phi(w_rk) - C_r) / C_r
//   assoc:      sum_r Phi(w_rk) - 1
// The objective is the negated smoothed EE in Mbit/J. Rates use the channel
// view the solver was constructed with.
class AlProblem {
 public:
  AlProblem(const NetworkTopology& topo, const ChannelSet& ch,
            const PowerParams& params, CsiView view, double delta);

  int dim() const { return 2 * m_ * k_; }
  int fap_count() const { return r_; }
  int user_count() const { return k_; }
  double delta() const { return delta_; }

  // Augmented Lagrangian value at x; fills the real gradient when grad is
  // non-null (length dim()).
  double objective(const Eigen::VectorXd& x, const AlMultipliers& mu,
                   double rho, Eigen::VectorXd* grad) const;

  struct ConstraintValues {
    double f = 0.0;
    Eigen::VectorXd power, fronthaul, assoc;
    double max_violation() const;
  };
  ConstraintValues constraint_values(const Eigen::VectorXd& x) const;

  Eigen::VectorXd pack(const Beamformer& w) const;
  Beamformer unpack(const Eigen::VectorXd& x) const;

 private:
  const NetworkTopology& topo_;
  const PowerParams params_;
  Eigen::MatrixXcd h_;  // selected CSI view, stacked channels
  double sigma2_ = 0.0;
  double delta_ = 0.1;
  double const_power_w_ = 0.0;  // CSI uplink + circuit, association-free
  double ee_scale_ = 1e-6;      // report the objective in Mbit/J
  int r_ = 0, k_ = 0, m_ = 0;
};

// Matched filter toward each user's strongest F-AP on the given view, every
// loaded F-AP scaled to the requested fraction of its power budget.
Beamformer al_initial_point(const NetworkTopology& topo, const ChannelSet& ch,
                            CsiView view, double power_fraction);

struct SubproblemReport {
  int iterations = 0;
  double objective = 0.0;
  double grad_inf_norm = 0.0;
  bool line_search_failed = false;
};

// Minimizes the augmented Lagrangian at fixed multipliers/penalty from the
// given start, quasi-Newton with backtracking.
Eigen::VectorXd solve_subproblem(const AlProblem& prob,
                                 const Eigen::VectorXd& x0,
                                 const AlMultipliers& mu, double rho,
                                 double inner_tol, int max_inner,
                                 SubproblemReport* report);

AlResult run_al(const NetworkTopology& topo, const ChannelSet& ch,
                const PowerParams& params, const AlOptions& opts);

}  // namespace fogsim
