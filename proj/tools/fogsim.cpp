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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fogsim/harness.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_simulate(const std::string& config_path, const CLI::Option* seed_opt,
                 std::uint64_t seed, const CLI::Option* drops_opt, int drops,
                 const std::string& algos, const std::string& sigmas,
                 const std::string& out_dir, bool force) {
  fogsim::ExperimentConfig cfg = fogsim::load_config_file(config_path);
  if (seed_opt->count() > 0) cfg.seed = seed;
  if (drops_opt->count() > 0) cfg.drops = drops;
  if (!algos.empty()) cfg.algorithms = split_list(algos);
  if (!sigmas.empty()) {
    cfg.sigma_e2.clear();
    for (const auto& s : split_list(sigmas)) cfg.sigma_e2.push_back(std::stod(s));
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (force) cfg.force = true;
  cfg.validate();

  const fogsim::CampaignResult res = fogsim::run_campaign(cfg);
  int failures = 0;
  for (const auto& row : res.rows)
    if (!row.ok) ++failures;
  std::cout << "rows: " << res.rows.size() << " (" << failures
            << " failed)\n";
  for (const auto& f : res.files) std::cout << "wrote " << f << '\n';
  return failures == 0 ? 0 : 1;
}

int cmd_report(const std::string& in_dir, const std::string& metric) {
  namespace fs = std::filesystem;
  const std::string drops_text =
      read_file((fs::path(in_dir) / "drops.csv").string());
  const std::string rates_text =
      read_file((fs::path(in_dir) / "user_rates.csv").string());
  const auto rows = fogsim::parse_campaign_csv(drops_text, rates_text);
  const std::string table = fogsim::report_metric(rows, metric);
  const std::string out_path =
      (fs::path(in_dir) / ("report_" + metric + ".csv")).string();
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << table;
  std::cout << "wrote " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fogsim: seeded energy-efficiency experiments for fog radio "
               "access networks"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "run a Monte-Carlo campaign");
  std::string config_path;
  std::uint64_t seed = 0;
  int drops = 0;
  std::string algos, sigmas, out_dir;
  bool force = false;
  sim->add_option("--config", config_path, "JSON experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  const CLI::Option* seed_opt =
      sim->add_option("--seed", seed, "override the campaign seed");
  const CLI::Option* drops_opt =
      sim->add_option("--drops", drops, "override the drop count");
  sim->add_option("--algos", algos,
                  "comma-separated algorithms (al,heuristic,ref_ee,ref_sr)");
  sim->add_option("--sigma-e2", sigmas, "comma-separated CSI error levels");
  sim->add_option("--out", out_dir, "override the output directory");
  sim->add_flag("--force", force, "allow 'al' on the large scenario");

  auto* rep = app.add_subcommand("report", "regenerate an aggregate table");
  std::string in_dir, metric;
  rep->add_option("--in", in_dir, "campaign output directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  rep->add_option("--metric", metric, "ee | rate-cdf | active-faps | sumrate")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(config_path, seed_opt, seed, drops_opt, drops,
                          algos, sigmas, out_dir, force);
    return cmd_report(in_dir, metric);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
