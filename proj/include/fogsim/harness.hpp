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

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fogsim/al_solver.hpp"
#include "fogsim/baselines.hpp"
#include "fogsim/heuristic.hpp"

namespace fogsim {

extern const char* const kFogsimVersion;

// One Monte-Carlo campaign: which deployments, error levels and algorithms
// to run, on how many seeded drops.
struct ExperimentConfig {
  std::string scenario = "small";  // "small" or "large"
  std::vector<int> user_counts = {5};
  std::vector<double> sigma_e2 = {0.0};
  std::vector<std::string> algorithms = {"heuristic", "ref_ee"};
  int drops = 1;
  int frames = 10;
  std::uint64_t seed = 1;
  int threads = 1;
  bool force = false;  // lets "al" run on the large scenario
  std::string out_dir = "results";
  PowerParams power;
  ReweightOptions reweight;
  AlOptions al;
  RefEeParams ref;

  void validate() const;
};

ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

// One algorithm's outcome on one drop. Wall time is reported in a separate
// plain-text file so the CSV outputs stay bit-reproducible.
struct DropReport {
  std::string scenario;
  int user_count = 0;
  double sigma_e2 = 0.0;
  int drop = 0;
  std::string algo;
  bool ok = true;
  std::string error;
  SolutionMetrics metrics;
  int al_outer = 0;
  bool al_kkt = false;
  bool al_stabilized = false;
  double wall_seconds = 0.0;
};

struct CampaignResult {
  std::vector<DropReport> rows;
  std::vector<std::string> files;
};

// Runs every requested algorithm on shared per-drop channel realizations
// (paired comparisons), writes drops.csv, user_rates.csv, aggregates.csv,
// campaign.json and timings.txt under config.out_dir. A failing algorithm
// is recorded in its row; the campaign continues.
CampaignResult run_campaign(const ExperimentConfig& config);

// Empirical CDF: ascending (value, k/N) pairs.
std::vector<std::pair<double, double>> aggregate_cdf(
    std::vector<double> values);

// Smallest value whose cumulative probability reaches p (ceiling rule).
double cdf_percentile(const std::vector<std::pair<double, double>>& cdf,
                      double p);

// Normalized frequency of each active-F-AP count.
std::map<int, double> active_fap_histogram(const std::vector<int>& counts);

// CSV serialization. Aggregates and report tables are always generated
// from rows that went through the CSV round trip, so regenerating them
// from the stored files reproduces them byte for byte.
std::string drops_csv(const std::vector<DropReport>& rows);
std::string user_rates_csv(const std::vector<DropReport>& rows);
std::vector<DropReport> parse_campaign_csv(const std::string& drops_text,
                                           const std::string& rates_text);
std::string aggregates_csv(const std::vector<DropReport>& rows,
                           int configured_drops);

// Aggregate table for one metric: "ee", "sumrate", "rate-cdf" or
// "active-faps".
std::string report_metric(const std::vector<DropReport>& rows,
                          const std::string& metric);

}  // namespace fogsim
