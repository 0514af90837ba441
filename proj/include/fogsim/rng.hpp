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

#include <complex>
#include <cstdint>
#include <random>

namespace fogsim {

// Independent substreams of one master seed. Every stochastic quantity in a
// drop is drawn from its own stream so that adding draws to one stage never
// shifts another (e.g. CSI error realizations must not disturb the fading).
enum class RngStream : std::uint64_t {
  topology = 1,
  shadowing = 2,
  fading = 3,
  csi_error = 4,
  scratch = 5,
};

// Deterministic generator with platform-stable output. mt19937_64 is
// bit-exact everywhere; the normal transform is done by hand because
// std::normal_distribution is not portable across standard libraries.
class Rng {
 public:
  Rng(std::uint64_t master_seed, RngStream stream, std::uint64_t tag_a = 0,
      std::uint64_t tag_b = 0);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform();

  // Standard normal via Box-Muller, second variate cached.
  double normal();

  // Circularly-symmetric complex normal, unit variance per complex entry.
  std::complex<double> cnormal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// splitmix64 finalizer, used to whiten (seed, stream, tag) tuples into
// well-separated engine seeds.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace fogsim
