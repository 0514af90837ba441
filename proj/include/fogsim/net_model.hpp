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
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fogsim/rng.hpp"

namespace fogsim {

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);

enum class FapClass { macro, pico };

struct FapConfig {
  FapClass cls = FapClass::pico;
  int antennas = 2;
  double tx_power_max_w = 1.0;    // downlink budget P_r
  double fronthaul_bps = 107e6;   // capacity C_r
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
};

// Static deployment for one drop: F-AP sites plus user positions.
// Antenna blocks of the stacked channel/beamforming vectors are addressed
// through antenna_offset: F-AP r owns rows [antenna_offset[r],
// antenna_offset[r+1]).
struct NetworkTopology {
  std::vector<FapConfig> faps;
  std::vector<Eigen::Vector2d> users;
  double area_radius_m = 500.0;
  std::vector<int> antenna_offset;
  int total_antennas = 0;

  int fap_count() const { return static_cast<int>(faps.size()); }
  int user_count() const { return static_cast<int>(users.size()); }
  double distance_m(int fap, int user) const;

  // Rebuilds antenna offsets and validates the configuration.
  void finalize();
};

struct TopologyParams {
  int macro_count = 1;
  int pico_count = 3;
  int user_count = 5;
  double area_radius_m = 500.0;
  int macro_antennas = 4;
  int pico_antennas = 2;
  double macro_power_dbm = 43.0;
  double pico_power_dbm = 30.0;
  double macro_fronthaul_bps = 690e6;
  double pico_fronthaul_bps = 107e6;
  double min_fap_user_distance_m = 10.0;
};

TopologyParams small_scenario();
TopologyParams large_scenario();

// Macros sit at deterministic positions (origin; for several macros, evenly
// spaced on a ring of half the area radius). Picos and users are uniform on
// the disc, users re-drawn until at least min_fap_user_distance_m from every
// F-AP.
NetworkTopology generate_topology(const TopologyParams& params,
                                  std::uint64_t seed);

// 3GPP-style distance-dependent path loss, d in meters, result in dB.
double path_loss_db(FapClass cls, double distance_m);

enum class CsiView { perfect, outdated };

struct ChannelParams {
  double sigma_e2 = 0.0;           // CSI error variance per fading entry
  double shadowing_sigma_db = 8.0;
  double noise_psd_dbm_hz = -169.0;
  double bandwidth_hz = 10e6;
};

// One channel realization: column k of each matrix is the stacked channel of
// user k across all F-AP antennas. "perfect" is what the air applies;
// "outdated" is what the cloud optimizes with.
struct ChannelSet {
  Eigen::MatrixXcd perfect;
  Eigen::MatrixXcd outdated;
  double noise_power_w = 0.0;  // sigma_n^2 over the full band
  double sigma_e2 = 0.0;

  const Eigen::MatrixXcd& view(CsiView v) const {
    return v == CsiView::perfect ? perfect : outdated;
  }
  int user_count() const { return static_cast<int>(perfect.cols()); }
};

// Draws fading and CSI error for one frame of a drop. Shadowing is tied to
// the topology seed (held fixed across frames); fading and error change per
// frame. The error stream does not depend on sigma_e2, so runs at different
// error levels share realizations and differ only by scale (paired
// sampling).
ChannelSet generate_channels(const NetworkTopology& topo,
                             const ChannelParams& params, std::uint64_t seed,
                             int frame = 0);

// Plain-text fixture round-trip (exact: channels are printed as hex floats).
void save_channel_fixture(std::ostream& os, const ChannelSet& ch);
ChannelSet load_channel_fixture(std::istream& is);
void save_channel_fixture_file(const std::string& path, const ChannelSet& ch);
ChannelSet load_channel_fixture_file(const std::string& path);

// Beamforming matrix with the same stacking as ChannelSet: column k is the
// beam w_k of user k, rows grouped per F-AP.
class Beamformer {
 public:
  Beamformer() = default;
  explicit Beamformer(const NetworkTopology& topo);

  Eigen::MatrixXcd w;  // total_antennas x user_count

  int user_count() const { return static_cast<int>(w.cols()); }
  int fap_count() const { return static_cast<int>(offsets_.size()) - 1; }

  Eigen::Block<Eigen::MatrixXcd> block(int fap, int user);
  Eigen::Block<const Eigen::MatrixXcd> block(int fap, int user) const;

  // ||w_rk||^2 for one F-AP/user pair.
  double block_power(int fap, int user) const;

  // sum_k ||w_rk||^2, the wireless transmit power of F-AP r.
  double fap_power(int fap) const;

  const std::vector<int>& offsets() const { return offsets_; }

 private:
  std::vector<int> offsets_;
};

// Which F-APs are on and who serves whom (-1 = unserved).
struct ActiveSet {
  std::vector<char> fap_active;
  std::vector<int> serving_fap;

  static ActiveSet all_active(const NetworkTopology& topo);

  int active_count() const;
  int served_count(int fap) const;
  std::vector<int> users_of(int fap) const;
  bool is_active(int fap) const { return fap_active[fap] != 0; }
};

}  // namespace fogsim
