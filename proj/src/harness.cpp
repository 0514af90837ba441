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

#include "fogsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "json.hpp"

#include "fogsim/metrics.hpp"
#include "fogsim/rng.hpp"

namespace fogsim {

const char* const kFogsimVersion = "0.1.0";

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str())
    throw std::invalid_argument("bad number in CSV: '" + s + "'");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

const std::set<std::string> kKnownAlgos = {"al", "heuristic", "ref_ee",
                                           "ref_sr"};

void apply_power_json(const json& j, PowerParams& p) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "p_fix_w") p.p_fix_w = it.value().get<double>();
    else if (key == "beta_redundancy") p.beta_redundancy = it.value().get<double>();
    else if (key == "b_iq_bits") p.b_iq_bits = it.value().get<double>();
    else if (key == "f_pre_hz") p.f_pre_hz = it.value().get<double>();
    else if (key == "p_td_w_per_bps") p.p_td_w_per_bps = it.value().get<double>();
    else if (key == "beta_amp") p.beta_amp = it.value().get<double>();
    else if (key == "rho_d_n0_w") p.rho_d_n0_w = it.value().get<double>();
    else if (key == "p_ic_w") p.p_ic_w = it.value().get<double>();
    else if (key == "bandwidth_hz") p.bandwidth_hz = it.value().get<double>();
    else throw std::invalid_argument("unknown power key: " + key);
  }
}

void apply_reweight_json(const json& j, ReweightOptions& o) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "delta0") o.delta0 = it.value().get<double>();
    else if (key == "shrink") o.shrink = it.value().get<double>();
    else if (key == "max_iterations") o.max_iterations = it.value().get<int>();
    else if (key == "stop_tol_scale") o.stop_tol_scale = it.value().get<double>();
    else if (key == "wmmse_passes") o.wmmse_passes = it.value().get<int>();
    else if (key == "dual_sweeps") o.dual_sweeps = it.value().get<int>();
    else if (key == "first_dual_sweeps") o.first_dual_sweeps = it.value().get<int>();
    else if (key == "secular_step_cap") o.secular_step_cap = it.value().get<int>();
    else throw std::invalid_argument("unknown reweight key: " + key);
  }
}

void apply_al_json(const json& j, AlOptions& o) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "mu_max") o.mu_max = it.value().get<double>();
    else if (key == "violation_shrink") o.violation_shrink = it.value().get<double>();
    else if (key == "penalty_growth") o.penalty_growth = it.value().get<double>();
    else if (key == "initial_penalty") o.initial_penalty = it.value().get<double>();
    else if (key == "max_outer_iterations") o.max_outer_iterations = it.value().get<int>();
    else if (key == "max_inner_iterations") o.max_inner_iterations = it.value().get<int>();
    else if (key == "smoothing_delta") o.smoothing_delta = it.value().get<double>();
    else if (key == "inner_tol_scale") o.inner_tol_scale = it.value().get<double>();
    else if (key == "kkt_grad_tol") o.kkt_grad_tol = it.value().get<double>();
    else if (key == "kkt_violation_tol") o.kkt_violation_tol = it.value().get<double>();
    else if (key == "init_power_fraction") o.init_power_fraction = it.value().get<double>();
    else throw std::invalid_argument("unknown al key: " + key);
  }
}

void apply_ref_json(const json& j, RefEeParams& o) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "min_users") o.min_users = it.value().get<int>();
    else if (key == "user_capacity") o.user_capacity = it.value().get<int>();
    else throw std::invalid_argument("unknown ref_ee key: " + key);
  }
}

// AL outer traces count as stabilized when the run either met its KKT test
// or its objective settled (span of the last ten outer values small) at an
// acceptably small residual.
bool al_trace_stabilized(const AlDiagnostics& diag) {
  if (diag.kkt_converged) return true;
  if (diag.trace.empty()) return false;
  const size_t n = diag.trace.size();
  const size_t first = n > 10 ? n - 10 : 0;
  double lo = diag.trace[first].objective;
  double hi = lo;
  for (size_t i = first; i < n; ++i) {
    lo = std::min(lo, diag.trace[i].objective);
    hi = std::max(hi, diag.trace[i].objective);
  }
  const double f_final = diag.trace.back().objective;
  const double span_ok = (hi - lo) <= 1e-2 * (1.0 + std::abs(f_final));
  const double viol = diag.trace.back().max_violation;
  return span_ok && viol <= 1e-2;
}

struct DropContext {
  const ExperimentConfig* config = nullptr;
  const NetworkTopology* topo = nullptr;
  const std::vector<ChannelSet>* frames = nullptr;
  const AssociationResult* shared_assoc = nullptr;
};

SolutionMetrics frame1_metrics(const Beamformer& w, const ActiveSet& active,
                               const DropContext& ctx) {
  const NetworkTopology& topo = *ctx.topo;
  const ChannelSet& ch = ctx.frames->front();
  const PowerParams& params = ctx.config->power;
  double p_scale = 0.0;
  double c_scale = 0.0;
  for (const auto& f : topo.faps) {
    p_scale = std::max(p_scale, f.tx_power_max_w);
    c_scale = std::max(c_scale, f.fronthaul_bps);
  }
  const double tau = spectral_efficiency(w, active, ch, CsiView::perfect);
  const PowerBreakdown bd = total_power(w, active, topo, params, tau);
  const ConstraintReport cr =
      check_constraints(w, active, ch, topo, params, CsiView::perfect);

  SolutionMetrics sm;
  sm.avg_power_w = bd.total_w();
  sm.sumrate_bps = params.bandwidth_hz * tau;
  sm.ee_bits_per_joule = sm.sumrate_bps / bd.total_w();
  sm.user_rates_bps.resize(topo.user_count());
  for (int kk = 0; kk < topo.user_count(); ++kk)
    sm.user_rates_bps[kk] = params.bandwidth_hz *
                            user_rate(kk, w, ch, CsiView::perfect);
  sm.active_faps = active.active_count();
  sm.min_power_slack_w = cr.min_power_slack();
  sm.min_fronthaul_slack_bps = cr.min_fronthaul_slack();
  sm.association_violations = cr.total_association_violations();
  sm.feasible = cr.feasible(1e-6 * p_scale, 1e-6 * c_scale) &&
                sm.association_violations == 0;
  return sm;
}

DropReport run_one_algo(const std::string& algo, const DropContext& ctx) {
  DropReport row;
  row.algo = algo;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (algo == "al") {
      const AlResult res =
          run_al(*ctx.topo, ctx.frames->front(), ctx.config->power,
                 ctx.config->al);
      row.metrics = frame1_metrics(res.w, res.active, ctx);
      row.metrics.iterations = res.diag.outer_iterations;
      row.metrics.converged = res.diag.kkt_converged;
      row.al_outer = res.diag.outer_iterations;
      row.al_kkt = res.diag.kkt_converged;
      row.al_stabilized = al_trace_stabilized(res.diag);
    } else if (algo == "heuristic") {
      const HeuristicResult res =
          run_heuristic(*ctx.topo, *ctx.frames, ctx.config->power,
                        ctx.config->reweight, ctx.shared_assoc);
      row.metrics = res.metrics;
    } else if (algo == "ref_ee") {
      const BaselineResult res =
          ref_ee(*ctx.topo, *ctx.frames, ctx.config->power, ctx.config->ref);
      row.metrics = res.metrics;
    } else if (algo == "ref_sr") {
      const BaselineResult res =
          ref_sr(*ctx.topo, *ctx.frames, ctx.config->power,
                 ctx.config->reweight, ctx.shared_assoc);
      row.metrics = res.metrics;
    } else {
      throw std::invalid_argument("unknown algorithm: " + algo);
    }
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
    row.metrics = SolutionMetrics{};
    row.metrics.user_rates_bps.assign(ctx.topo->user_count(), 0.0);
  }
  const auto t1 = std::chrono::steady_clock::now();
  row.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return row;
}

struct GroupKey {
  int user_count;
  double sigma_e2;
  std::string algo;
  bool operator<(const GroupKey& o) const {
    return std::tie(user_count, sigma_e2, algo) <
           std::tie(o.user_count, o.sigma_e2, o.algo);
  }
};

std::map<GroupKey, std::vector<const DropReport*>> group_rows(
    const std::vector<DropReport>& rows) {
  std::map<GroupKey, std::vector<const DropReport*>> groups;
  for (const auto& r : rows)
    groups[GroupKey{r.user_count, r.sigma_e2, r.algo}].push_back(&r);
  return groups;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (scenario != "small" && scenario != "large")
    throw std::invalid_argument("config: scenario must be small or large");
  if (drops < 1) throw std::invalid_argument("config: drops must be >= 1");
  if (frames < 1) throw std::invalid_argument("config: frames must be >= 1");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  if (user_counts.empty())
    throw std::invalid_argument("config: user_counts must not be empty");
  for (int u : user_counts)
    if (u < 1) throw std::invalid_argument("config: user counts must be >= 1");
  if (sigma_e2.empty())
    throw std::invalid_argument("config: sigma_e2 must not be empty");
  for (double s : sigma_e2)
    if (s < 0.0) throw std::invalid_argument("config: sigma_e2 must be >= 0");
  if (algorithms.empty())
    throw std::invalid_argument("config: algorithms must not be empty");
  for (const auto& a : algorithms) {
    if (!kKnownAlgos.count(a))
      throw std::invalid_argument("config: unknown algorithm '" + a + "'");
  }
  const bool wants_al =
      std::find(algorithms.begin(), algorithms.end(), "al") !=
      algorithms.end();
  if (wants_al && scenario == "large" && !force)
    throw std::invalid_argument(
        "config: 'al' on the large scenario needs force=true "
        "(centralized solve is impractical at that size)");
  if (out_dir.empty())
    throw std::invalid_argument("config: out_dir must not be empty");
  power.validate();
  ref.validate();
}

ExperimentConfig config_from_json(const std::string& text) {
  ExperimentConfig c;
  json j = json::parse(text);
  if (!j.is_object())
    throw std::invalid_argument("config: top level must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "scenario") c.scenario = it.value().get<std::string>();
    else if (key == "user_counts") c.user_counts = it.value().get<std::vector<int>>();
    else if (key == "sigma_e2") c.sigma_e2 = it.value().get<std::vector<double>>();
    else if (key == "algorithms") c.algorithms = it.value().get<std::vector<std::string>>();
    else if (key == "drops") c.drops = it.value().get<int>();
    else if (key == "frames") c.frames = it.value().get<int>();
    else if (key == "seed") c.seed = it.value().get<std::uint64_t>();
    else if (key == "threads") c.threads = it.value().get<int>();
    else if (key == "force") c.force = it.value().get<bool>();
    else if (key == "out_dir") c.out_dir = it.value().get<std::string>();
    else if (key == "power") apply_power_json(it.value(), c.power);
    else if (key == "reweight") apply_reweight_json(it.value(), c.reweight);
    else if (key == "al") apply_al_json(it.value(), c.al);
    else if (key == "ref_ee") apply_ref_json(it.value(), c.ref);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["user_counts"] = c.user_counts;
  j["sigma_e2"] = c.sigma_e2;
  j["algorithms"] = c.algorithms;
  j["drops"] = c.drops;
  j["frames"] = c.frames;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["force"] = c.force;
  j["out_dir"] = c.out_dir;
  j["power"] = {{"p_fix_w", c.power.p_fix_w},
                {"beta_redundancy", c.power.beta_redundancy},
                {"b_iq_bits", c.power.b_iq_bits},
                {"f_pre_hz", c.power.f_pre_hz},
                {"p_td_w_per_bps", c.power.p_td_w_per_bps},
                {"beta_amp", c.power.beta_amp},
                {"rho_d_n0_w", c.power.rho_d_n0_w},
                {"p_ic_w", c.power.p_ic_w},
                {"bandwidth_hz", c.power.bandwidth_hz}};
  j["version"] = kFogsimVersion;
  return j.dump(2) + "\n";
}

std::vector<std::pair<double, double>> aggregate_cdf(
    std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> out;
  const double n = static_cast<double>(values.size());
  out.reserve(values.size());
  for (size_t i = 0; i < values.size(); ++i)
    out.emplace_back(values[i], static_cast<double>(i + 1) / n);
  return out;
}

double cdf_percentile(const std::vector<std::pair<double, double>>& cdf,
                      double p) {
  if (cdf.empty()) throw std::invalid_argument("cdf_percentile: empty CDF");
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("cdf_percentile: p outside [0, 1]");
  for (const auto& [value, prob] : cdf) {
    if (prob >= p - 1e-15) return value;
  }
  return cdf.back().first;
}

std::map<int, double> active_fap_histogram(const std::vector<int>& counts) {
  std::map<int, double> hist;
  if (counts.empty()) return hist;
  const double w = 1.0 / static_cast<double>(counts.size());
  for (int c : counts) hist[c] += w;
  return hist;
}

std::string drops_csv(const std::vector<DropReport>& rows) {
  std::ostringstream os;
  os << "scenario,user_count,sigma_e2,drop,algo,ok,ee_mbit_per_j,"
        "sumrate_mbps,avg_power_w,active_faps,min_power_slack_w,"
        "min_fronthaul_slack_bps,assoc_violations,feasible,fallback,"
        "converged,iterations,al_outer,al_kkt,al_stabilized,error\n";
  for (const auto& r : rows) {
    const SolutionMetrics& m = r.metrics;
    os << r.scenario << ',' << r.user_count << ',' << fmt(r.sigma_e2) << ','
       << r.drop << ',' << r.algo << ',' << (r.ok ? 1 : 0) << ','
       << fmt(m.ee_bits_per_joule / 1e6) << ',' << fmt(m.sumrate_bps / 1e6)
       << ',' << fmt(m.avg_power_w) << ',' << m.active_faps << ','
       << fmt(m.min_power_slack_w) << ',' << fmt(m.min_fronthaul_slack_bps)
       << ',' << m.association_violations << ',' << (m.feasible ? 1 : 0)
       << ',' << (m.fallback ? 1 : 0) << ',' << (m.converged ? 1 : 0) << ','
       << m.iterations << ',' << r.al_outer << ',' << (r.al_kkt ? 1 : 0)
       << ',' << (r.al_stabilized ? 1 : 0) << ',' << sanitize(r.error)
       << '\n';
  }
  return os.str();
}

std::string user_rates_csv(const std::vector<DropReport>& rows) {
  std::ostringstream os;
  os << "scenario,user_count,sigma_e2,drop,algo,user,rate_bps\n";
  for (const auto& r : rows) {
    for (size_t u = 0; u < r.metrics.user_rates_bps.size(); ++u) {
      os << r.scenario << ',' << r.user_count << ',' << fmt(r.sigma_e2)
         << ',' << r.drop << ',' << r.algo << ',' << u << ','
         << fmt(r.metrics.user_rates_bps[u]) << '\n';
    }
  }
  return os.str();
}

std::vector<DropReport> parse_campaign_csv(const std::string& drops_text,
                                           const std::string& rates_text) {
  std::vector<DropReport> rows;
  std::map<std::tuple<int, double, int, std::string>, size_t> index;

  std::istringstream ds(drops_text);
  std::string line;
  bool header = true;
  while (std::getline(ds, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 21)
      throw std::invalid_argument("drops.csv: bad column count");
    DropReport r;
    r.scenario = f[0];
    r.user_count = std::atoi(f[1].c_str());
    r.sigma_e2 = parse_double(f[2]);
    r.drop = std::atoi(f[3].c_str());
    r.algo = f[4];
    r.ok = f[5] == "1";
    r.metrics.ee_bits_per_joule = parse_double(f[6]) * 1e6;
    r.metrics.sumrate_bps = parse_double(f[7]) * 1e6;
    r.metrics.avg_power_w = parse_double(f[8]);
    r.metrics.active_faps = std::atoi(f[9].c_str());
    r.metrics.min_power_slack_w = parse_double(f[10]);
    r.metrics.min_fronthaul_slack_bps = parse_double(f[11]);
    r.metrics.association_violations = std::atoi(f[12].c_str());
    r.metrics.feasible = f[13] == "1";
    r.metrics.fallback = f[14] == "1";
    r.metrics.converged = f[15] == "1";
    r.metrics.iterations = std::atoi(f[16].c_str());
    r.al_outer = std::atoi(f[17].c_str());
    r.al_kkt = f[18] == "1";
    r.al_stabilized = f[19] == "1";
    r.error = f[20];
    index[{r.user_count, r.sigma_e2, r.drop, r.algo}] = rows.size();
    rows.push_back(std::move(r));
  }

  std::istringstream rs(rates_text);
  header = true;
  while (std::getline(rs, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7)
      throw std::invalid_argument("user_rates.csv: bad column count");
    const std::tuple<int, double, int, std::string> key{
        std::atoi(f[1].c_str()), parse_double(f[2]), std::atoi(f[3].c_str()),
        f[4]};
    const auto it = index.find(key);
    if (it == index.end())
      throw std::invalid_argument("user_rates.csv: row without drops.csv row");
    auto& rates = rows[it->second].metrics.user_rates_bps;
    const size_t u = static_cast<size_t>(std::atoi(f[5].c_str()));
    if (rates.size() <= u) rates.resize(u + 1, 0.0);
    rates[u] = parse_double(f[6]);
  }
  return rows;
}

std::string aggregates_csv(const std::vector<DropReport>& rows,
                           int configured_drops) {
  std::ostringstream os;
  os << "scenario,user_count,sigma_e2,algo,drops_configured,drops_ok,"
        "partial,mean_ee_mbit_per_j,mean_sumrate_mbps,mean_active_faps,"
        "mean_power_w,feasible_fraction,fallback_count,mean_iterations,"
        "ee_p80_mbit_per_j\n";
  for (const auto& [key, group] : group_rows(rows)) {
    std::vector<double> ee;
    double sum_ee = 0.0, sum_sr = 0.0, sum_af = 0.0, sum_pw = 0.0;
    double sum_it = 0.0;
    int ok_count = 0, feas = 0, fb = 0;
    std::string scenario;
    for (const DropReport* r : group) {
      scenario = r->scenario;
      if (!r->ok) continue;
      ++ok_count;
      ee.push_back(r->metrics.ee_bits_per_joule / 1e6);
      sum_ee += r->metrics.ee_bits_per_joule / 1e6;
      sum_sr += r->metrics.sumrate_bps / 1e6;
      sum_af += r->metrics.active_faps;
      sum_pw += r->metrics.avg_power_w;
      sum_it += r->metrics.iterations;
      if (r->metrics.feasible) ++feas;
      if (r->metrics.fallback) ++fb;
    }
    const int partial = ok_count < configured_drops ? 1 : 0;
    const double n = ok_count > 0 ? ok_count : 1;
    const double p80 =
        ee.empty() ? 0.0 : cdf_percentile(aggregate_cdf(ee), 0.8);
    os << scenario << ',' << key.user_count << ',' << fmt(key.sigma_e2)
       << ',' << key.algo << ',' << configured_drops << ',' << ok_count
       << ',' << partial << ',' << fmt(sum_ee / n) << ',' << fmt(sum_sr / n)
       << ',' << fmt(sum_af / n) << ',' << fmt(sum_pw / n) << ','
       << fmt(static_cast<double>(feas) / n) << ',' << fb << ','
       << fmt(sum_it / n) << ',' << fmt(p80) << '\n';
  }
  return os.str();
}

std::string report_metric(const std::vector<DropReport>& rows,
                          const std::string& metric) {
  std::ostringstream os;
  if (metric == "ee" || metric == "sumrate") {
    os << "scenario,user_count,sigma_e2,algo,"
       << (metric == "ee" ? "ee_mbit_per_j" : "sumrate_mbps")
       << ",cum_prob\n";
    for (const auto& [key, group] : group_rows(rows)) {
      std::vector<double> vals;
      std::string scenario;
      for (const DropReport* r : group) {
        scenario = r->scenario;
        if (!r->ok) continue;
        vals.push_back(metric == "ee" ? r->metrics.ee_bits_per_joule / 1e6
                                      : r->metrics.sumrate_bps / 1e6);
      }
      for (const auto& [v, p] : aggregate_cdf(vals)) {
        os << scenario << ',' << key.user_count << ',' << fmt(key.sigma_e2)
           << ',' << key.algo << ',' << fmt(v) << ',' << fmt(p) << '\n';
      }
    }
  } else if (metric == "rate-cdf") {
    os << "scenario,user_count,sigma_e2,algo,rate_bps,cum_prob\n";
    for (const auto& [key, group] : group_rows(rows)) {
      std::vector<double> vals;
      std::string scenario;
      for (const DropReport* r : group) {
        scenario = r->scenario;
        if (!r->ok) continue;
        for (double v : r->metrics.user_rates_bps) vals.push_back(v);
      }
      for (const auto& [v, p] : aggregate_cdf(vals)) {
        os << scenario << ',' << key.user_count << ',' << fmt(key.sigma_e2)
           << ',' << key.algo << ',' << fmt(v) << ',' << fmt(p) << '\n';
      }
    }
  } else if (metric == "active-faps") {
    os << "scenario,user_count,sigma_e2,algo,active_faps,frequency\n";
    for (const auto& [key, group] : group_rows(rows)) {
      std::vector<int> counts;
      std::string scenario;
      for (const DropReport* r : group) {
        scenario = r->scenario;
        if (!r->ok) continue;
        counts.push_back(r->metrics.active_faps);
      }
      for (const auto& [count, freq] : active_fap_histogram(counts)) {
        os << scenario << ',' << key.user_count << ',' << fmt(key.sigma_e2)
           << ',' << key.algo << ',' << count << ',' << fmt(freq) << '\n';
      }
    }
  } else {
    throw std::invalid_argument("report_metric: unknown metric '" + metric +
                                "'");
  }
  return os.str();
}

CampaignResult run_campaign(const ExperimentConfig& config) {
  config.validate();
  const TopologyParams base =
      config.scenario == "small" ? small_scenario() : large_scenario();

  const bool wants_heuristic =
      std::find(config.algorithms.begin(), config.algorithms.end(),
                "heuristic") != config.algorithms.end();
  const bool wants_ref_sr =
      std::find(config.algorithms.begin(), config.algorithms.end(),
                "ref_sr") != config.algorithms.end();
  const bool share_assoc = wants_heuristic && wants_ref_sr;

  struct Task {
    int user_count;
    int drop;
  };
  std::vector<Task> tasks;
  for (int uc : config.user_counts)
    for (int d = 0; d < config.drops; ++d) tasks.push_back(Task{uc, d});

  std::vector<DropReport> rows;
  std::ostringstream timings;
  std::mutex merge_mutex;
  std::atomic<size_t> next_task{0};

  auto worker = [&]() {
    std::vector<DropReport> local_rows;
    std::ostringstream local_timings;
    for (;;) {
      const size_t ti = next_task.fetch_add(1);
      if (ti >= tasks.size()) break;
      const Task task = tasks[ti];
      TopologyParams tp = base;
      tp.user_count = task.user_count;
      const std::uint64_t drop_seed =
          Rng(config.seed, RngStream::scratch,
              static_cast<std::uint64_t>(task.user_count),
              static_cast<std::uint64_t>(task.drop))
              .next_u64();
      const NetworkTopology topo = generate_topology(tp, drop_seed);

      for (double s2 : config.sigma_e2) {
        ChannelParams cp;
        cp.sigma_e2 = s2;
        cp.bandwidth_hz = config.power.bandwidth_hz;
        std::vector<ChannelSet> frames;
        frames.reserve(config.frames);
        for (int t = 0; t < config.frames; ++t)
          frames.push_back(generate_channels(topo, cp, drop_seed, t));

        DropContext ctx;
        ctx.config = &config;
        ctx.topo = &topo;
        ctx.frames = &frames;

        AssociationResult assoc;
        bool assoc_ok = false;
        if (share_assoc) {
          const auto a0 = std::chrono::steady_clock::now();
          try {
            assoc = associate_users(topo, frames[0], config.power,
                                    config.reweight);
            assoc_ok = true;
          } catch (const std::exception&) {
            assoc_ok = false;
          }
          const auto a1 = std::chrono::steady_clock::now();
          local_timings << task.user_count << ' ' << fmt(s2) << ' '
                        << task.drop << " assoc "
                        << fmt(std::chrono::duration<double>(a1 - a0).count())
                        << '\n';
          if (assoc_ok) ctx.shared_assoc = &assoc;
        }

        for (const auto& algo : config.algorithms) {
          DropReport row = run_one_algo(algo, ctx);
          row.scenario = config.scenario;
          row.user_count = task.user_count;
          row.sigma_e2 = s2;
          row.drop = task.drop;
          local_timings << task.user_count << ' ' << fmt(s2) << ' '
                        << task.drop << ' ' << algo << ' '
                        << fmt(row.wall_seconds) << '\n';
          local_rows.push_back(std::move(row));
        }
      }
    }
    const std::lock_guard<std::mutex> lock(merge_mutex);
    for (auto& r : local_rows) rows.push_back(std::move(r));
    timings << local_timings.str();
  };

  if (config.threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(config.threads);
    for (int i = 0; i < config.threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Deterministic row order regardless of worker interleaving: campaign
  // coordinates first, then the configured algorithm order.
  std::map<std::string, size_t> algo_rank;
  for (size_t i = 0; i < config.algorithms.size(); ++i)
    algo_rank[config.algorithms[i]] = i;
  std::stable_sort(rows.begin(), rows.end(),
                   [&](const DropReport& a, const DropReport& b) {
                     if (std::tie(a.user_count, a.sigma_e2, a.drop) !=
                         std::tie(b.user_count, b.sigma_e2, b.drop))
                       return std::tie(a.user_count, a.sigma_e2, a.drop) <
                              std::tie(b.user_count, b.sigma_e2, b.drop);
                     return algo_rank.at(a.algo) < algo_rank.at(b.algo);
                   });

  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  const std::string drops_text = drops_csv(rows);
  const std::string rates_text = user_rates_csv(rows);

  // Aggregates come from the round-tripped rows so that `report` regenerates
  // them bit for bit from the stored files.
  const std::vector<DropReport> parsed =
      parse_campaign_csv(drops_text, rates_text);
  const std::string agg_text = aggregates_csv(parsed, config.drops);

  CampaignResult out;
  out.rows = rows;
  auto write_file = [&](const std::string& name, const std::string& text) {
    const std::string path = (fs::path(config.out_dir) / name).string();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
    out.files.push_back(path);
  };
  write_file("drops.csv", drops_text);
  write_file("user_rates.csv", rates_text);
  write_file("aggregates.csv", agg_text);
  write_file("campaign.json", config_to_json(config));
  write_file("timings.txt", timings.str());
  return out;
}

}  // namespace fogsim
