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

#include "fogsim/net_model.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fogsim {

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

double NetworkTopology::distance_m(int fap, int user) const {
  return (faps[fap].position - users[user]).norm();
}

void NetworkTopology::finalize() {
  if (faps.empty()) throw std::invalid_argument("topology: no F-APs");
  antenna_offset.assign(faps.size() + 1, 0);
  for (size_t r = 0; r < faps.size(); ++r) {
    if (faps[r].antennas <= 0)
      throw std::invalid_argument("topology: F-AP needs >= 1 antenna");
    if (faps[r].tx_power_max_w <= 0.0)
      throw std::invalid_argument("topology: nonpositive power budget");
    if (faps[r].fronthaul_bps <= 0.0)
      throw std::invalid_argument("topology: nonpositive fronthaul capacity");
    antenna_offset[r + 1] = antenna_offset[r] + faps[r].antennas;
  }
  total_antennas = antenna_offset.back();
}

TopologyParams small_scenario() { return TopologyParams{}; }

TopologyParams large_scenario() {
  TopologyParams p;
  p.macro_count = 3;
  p.pico_count = 9;
  p.user_count = 60;
  p.area_radius_m = 1000.0;
  return p;
}

namespace {

Eigen::Vector2d uniform_disc_point(Rng& rng, double radius) {
  const double rho = radius * std::sqrt(rng.uniform());
  const double ang = 2.0 * M_PI * rng.uniform();
  return {rho * std::cos(ang), rho * std::sin(ang)};
}

}  // namespace

NetworkTopology generate_topology(const TopologyParams& params,
                                  std::uint64_t seed) {
  if (params.macro_count < 0 || params.pico_count < 0 ||
      params.macro_count + params.pico_count < 1)
    throw std::invalid_argument("generate_topology: need at least one F-AP");
  if (params.user_count < 1)
    throw std::invalid_argument("generate_topology: need at least one user");
  if (params.area_radius_m <= params.min_fap_user_distance_m)
    throw std::invalid_argument("generate_topology: radius too small");

  NetworkTopology topo;
  topo.area_radius_m = params.area_radius_m;

  for (int i = 0; i < params.macro_count; ++i) {
    FapConfig f;
    f.cls = FapClass::macro;
    f.antennas = params.macro_antennas;
    f.tx_power_max_w = dbm_to_watt(params.macro_power_dbm);
    f.fronthaul_bps = params.macro_fronthaul_bps;
    if (params.macro_count == 1) {
      f.position.setZero();
    } else {
      const double ang = 2.0 * M_PI * i / params.macro_count;
      f.position = 0.5 * params.area_radius_m *
                   Eigen::Vector2d(std::cos(ang), std::sin(ang));
    }
    topo.faps.push_back(f);
  }

  Rng rng(seed, RngStream::topology);
  for (int i = 0; i < params.pico_count; ++i) {
    FapConfig f;
    f.cls = FapClass::pico;
    f.antennas = params.pico_antennas;
    f.tx_power_max_w = dbm_to_watt(params.pico_power_dbm);
    f.fronthaul_bps = params.pico_fronthaul_bps;
    f.position = uniform_disc_point(rng, params.area_radius_m);
    topo.faps.push_back(f);
  }

  topo.users.reserve(params.user_count);
  for (int k = 0; k < params.user_count; ++k) {
    Eigen::Vector2d pos;
    bool ok = false;
    for (int attempt = 0; attempt < 1000000 && !ok; ++attempt) {
      pos = uniform_disc_point(rng, params.area_radius_m);
      ok = true;
      for (const auto& f : topo.faps)
        if ((f.position - pos).norm() < params.min_fap_user_distance_m) {
          ok = false;
          break;
        }
    }
    if (!ok)
      throw std::runtime_error(
          "generate_topology: could not place user away from F-APs");
    topo.users.push_back(pos);
  }

  topo.finalize();
  return topo;
}

double path_loss_db(FapClass cls, double distance_m) {
  const double d_km = std::max(distance_m, 1.0) * 1e-3;
  if (cls == FapClass::macro) return 128.1 + 37.6 * std::log10(d_km);
  return 140.7 + 36.7 * std::log10(d_km);
}

ChannelSet generate_channels(const NetworkTopology& topo,
                             const ChannelParams& params, std::uint64_t seed,
                             int frame) {
  if (params.sigma_e2 < 0.0)
    throw std::invalid_argument("generate_channels: sigma_e2 < 0");
  if (frame < 0) throw std::invalid_argument("generate_channels: frame < 0");

  const int R = topo.fap_count();
  const int K = topo.user_count();
  const int M = topo.total_antennas;

  ChannelSet ch;
  ch.sigma_e2 = params.sigma_e2;
  ch.noise_power_w =
      dbm_to_watt(params.noise_psd_dbm_hz) * params.bandwidth_hz;
  ch.perfect.resize(M, K);
  ch.outdated.resize(M, K);

  // Large-scale attenuation: path loss plus lognormal shadowing, one value
  // per (F-AP, user) link, fixed over the frames of a drop.
  Eigen::MatrixXd gain_lin(R, K);
  Rng shadow_rng(seed, RngStream::shadowing);
  for (int r = 0; r < R; ++r)
    for (int k = 0; k < K; ++k) {
      const double pl = path_loss_db(topo.faps[r].cls, topo.distance_m(r, k));
      const double sh = params.shadowing_sigma_db * shadow_rng.normal();
      gain_lin(r, k) = std::pow(10.0, -(pl + sh) / 10.0);
    }

  // Fast fading and the CSI error are redrawn every frame. The error draw is
  // independent of sigma_e2, which only scales it: campaigns sweeping the
  // error level on the same seed stay paired sample-by-sample.
  Rng fade_rng(seed, RngStream::fading, static_cast<std::uint64_t>(frame));
  Rng err_rng(seed, RngStream::csi_error, static_cast<std::uint64_t>(frame));
  const double err_scale = std::sqrt(params.sigma_e2);
  for (int r = 0; r < R; ++r) {
    const int off = topo.antenna_offset[r];
    for (int k = 0; k < K; ++k) {
      const double amp = std::sqrt(gain_lin(r, k));
      for (int m = 0; m < topo.faps[r].antennas; ++m) {
        const std::complex<double> g = fade_rng.cnormal();
        const std::complex<double> e = err_rng.cnormal();
        ch.perfect(off + m, k) = amp * g;
        ch.outdated(off + m, k) = amp * (g + err_scale * e);
      }
    }
  }
  return ch;
}

namespace {

void put_hex(std::ostream& os, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  os << buf;
}

double get_double(std::istream& is) {
  std::string tok;
  if (!(is >> tok)) throw std::runtime_error("channel fixture: short read");
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str())
    throw std::runtime_error("channel fixture: bad number '" + tok + "'");
  return v;
}

void put_matrix(std::ostream& os, const Eigen::MatrixXcd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      put_hex(os, m(r, c).real());
      os << ' ';
      put_hex(os, m(r, c).imag());
      os << '\n';
    }
}

void get_matrix(std::istream& is, Eigen::MatrixXcd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double re = get_double(is);
      const double im = get_double(is);
      m(r, c) = {re, im};
    }
}

}  // namespace

void save_channel_fixture(std::ostream& os, const ChannelSet& ch) {
  os << "fogsim-channels v1\n";
  os << ch.perfect.rows() << ' ' << ch.perfect.cols() << '\n';
  put_hex(os, ch.noise_power_w);
  os << ' ';
  put_hex(os, ch.sigma_e2);
  os << '\n';
  put_matrix(os, ch.perfect);
  put_matrix(os, ch.outdated);
}

ChannelSet load_channel_fixture(std::istream& is) {
  std::string word, ver;
  is >> word >> ver;
  if (word != "fogsim-channels" || ver != "v1")
    throw std::runtime_error("channel fixture: bad header");
  int m = 0, k = 0;
  is >> m >> k;
  if (!is || m < 1 || k < 1)
    throw std::runtime_error("channel fixture: bad dimensions");
  ChannelSet ch;
  ch.noise_power_w = get_double(is);
  ch.sigma_e2 = get_double(is);
  ch.perfect.resize(m, k);
  ch.outdated.resize(m, k);
  get_matrix(is, ch.perfect);
  get_matrix(is, ch.outdated);
  return ch;
}

void save_channel_fixture_file(const std::string& path, const ChannelSet& ch) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  save_channel_fixture(os, ch);
}

ChannelSet load_channel_fixture_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return load_channel_fixture(is);
}

Beamformer::Beamformer(const NetworkTopology& topo)
    : w(Eigen::MatrixXcd::Zero(topo.total_antennas, topo.user_count())),
      offsets_(topo.antenna_offset) {}

Eigen::Block<Eigen::MatrixXcd> Beamformer::block(int fap, int user) {
  return w.block(offsets_[fap], user, offsets_[fap + 1] - offsets_[fap], 1);
}

Eigen::Block<const Eigen::MatrixXcd> Beamformer::block(int fap,
                                                       int user) const {
  return w.block(offsets_[fap], user, offsets_[fap + 1] - offsets_[fap], 1);
}

double Beamformer::block_power(int fap, int user) const {
  return block(fap, user).squaredNorm();
}

double Beamformer::fap_power(int fap) const {
  return w
      .block(offsets_[fap], 0, offsets_[fap + 1] - offsets_[fap], w.cols())
      .squaredNorm();
}

ActiveSet ActiveSet::all_active(const NetworkTopology& topo) {
  ActiveSet s;
  s.fap_active.assign(topo.fap_count(), 1);
  s.serving_fap.assign(topo.user_count(), -1);
  return s;
}

int ActiveSet::active_count() const {
  int n = 0;
  for (char a : fap_active) n += (a != 0);
  return n;
}

int ActiveSet::served_count(int fap) const {
  int n = 0;
  for (int f : serving_fap) n += (f == fap);
  return n;
}

std::vector<int> ActiveSet::users_of(int fap) const {
  std::vector<int> out;
  for (size_t k = 0; k < serving_fap.size(); ++k)
    if (serving_fap[k] == fap) out.push_back(static_cast<int>(k));
  return out;
}

}  // namespace fogsim
