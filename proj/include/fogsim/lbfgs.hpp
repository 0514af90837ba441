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

#include <Eigen/Dense>
#include <functional>

namespace fogsim {

// Objective callback: returns f(x); writes the gradient when grad != null.
using ObjectiveFn =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct LbfgsOptions {
  int max_iterations = 500;
  int memory = 8;
  double grad_tolerance = 1e-6;  // stop when ||grad||_inf falls below
  double armijo_c1 = 1e-4;
  double step_shrink = 0.5;
  int max_backtracks = 40;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double fx = 0.0;
  double grad_inf_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;         // gradient tolerance reached
  bool line_search_failed = false;
};

// Limited-memory BFGS with Armijo backtracking. Minimizes fn from x0;
// returns the best iterate seen. Descent is guaranteed per accepted step;
// when the two-loop direction loses descent the step falls back to steepest
// descent before giving up.
LbfgsResult lbfgs_minimize(const ObjectiveFn& fn, Eigen::VectorXd x0,
                           const LbfgsOptions& opts);

}  // namespace fogsim
