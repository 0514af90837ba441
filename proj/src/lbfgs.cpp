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

#include "fogsim/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace fogsim {

namespace {

struct Pair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

}  // namespace

LbfgsResult lbfgs_minimize(const ObjectiveFn& fn, Eigen::VectorXd x0,
                           const LbfgsOptions& opts) {
  if (opts.memory < 1 || opts.max_iterations < 1)
    throw std::invalid_argument("lbfgs: bad options");

  LbfgsResult res;
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd g(x.size()), g_new(x.size());
  double fx = fn(x, &g);
  ++res.evaluations;

  std::deque<Pair> mem;
  double gamma = 1.0;  // initial inverse-Hessian scale

  res.x = x;
  res.fx = fx;
  res.grad_inf_norm = g.lpNorm<Eigen::Infinity>();

  for (int it = 0; it < opts.max_iterations; ++it) {
    const double gnorm = g.lpNorm<Eigen::Infinity>();
    if (gnorm <= opts.grad_tolerance) {
      res.converged = true;
      break;
    }

    // Two-loop recursion for d = -H*g.
    Eigen::VectorXd d = -g;
    std::vector<double> alpha(mem.size());
    for (int i = static_cast<int>(mem.size()) - 1; i >= 0; --i) {
      alpha[i] = mem[i].rho * mem[i].s.dot(d);
      d -= alpha[i] * mem[i].y;
    }
    d *= gamma;
    for (size_t i = 0; i < mem.size(); ++i) {
      const double beta = mem[i].rho * mem[i].y.dot(d);
      d += (alpha[i] - beta) * mem[i].s;
    }

    double dir_deriv = g.dot(d);
    if (!(dir_deriv < 0.0)) {
      d = -g;
      dir_deriv = -g.squaredNorm();
      mem.clear();
      gamma = 1.0;
    }

    // Armijo backtracking from a unit step (scaled on the first iterate so
    // the very first trial is not absurdly long).
    double step = 1.0;
    if (it == 0) step = std::min(1.0, 1.0 / std::max(1.0, g.norm()));

    bool accepted = false;
    double f_new = fx;
    Eigen::VectorXd x_new;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      x_new = x + step * d;
      f_new = fn(x_new, nullptr);
      ++res.evaluations;
      if (std::isfinite(f_new) &&
          f_new <= fx + opts.armijo_c1 * step * dir_deriv) {
        accepted = true;
        break;
      }
      step *= opts.step_shrink;
    }
    if (!accepted) {
      res.line_search_failed = true;
      break;
    }

    f_new = fn(x_new, &g_new);
    ++res.evaluations;

    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = g_new - g;
    const double ys = y.dot(s);
    if (ys > 1e-10 * s.norm() * y.norm()) {
      mem.push_back({std::move(s), std::move(y), 1.0 / ys});
      if (static_cast<int>(mem.size()) > opts.memory) mem.pop_front();
      gamma = ys / mem.back().y.squaredNorm();
    }

    x = std::move(x_new);
    fx = f_new;
    g = g_new;
    res.iterations = it + 1;

    if (fx < res.fx) {
      res.x = x;
      res.fx = fx;
    }
  }

  res.grad_inf_norm = g.lpNorm<Eigen::Infinity>();
  // Keep the final iterate unless an earlier one was strictly better.
  if (fx <= res.fx) {
    res.x = x;
    res.fx = fx;
  }
  return res;
}

}  // namespace fogsim
