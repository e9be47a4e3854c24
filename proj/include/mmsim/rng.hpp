// SPDX-License-Identifier: Apache-2.0
//
// mmsim: downlink link-level simulator for distributed and centralized
// massive MIMO deployments in an indoor office building.
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
#include <initializer_list>
#include <random>

#include "mmsim/common.hpp"

namespace mmsim {

using Rng = std::mt19937_64;

// Stream tags keep derived seeds of different purposes apart.
enum class StreamTag : std::uint64_t {
  kDrop = 1,
  kShadowing = 2,
  kFading = 3,
  kEstimation = 4,
  kSnrMap = 5,
  kTest = 99,
};

// Counter-based seed derivation: the result depends only on the master seed
// and the path, never on the order in which streams are requested.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

inline std::uint64_t derive_seed(std::uint64_t master, StreamTag tag,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = derive_seed(master, {static_cast<std::uint64_t>(tag)});
  return derive_seed(s, path);
}

// Proper complex Gaussian with E|z|^2 = variance.
inline cd complex_normal(Rng& rng, double variance) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

}  // namespace mmsim
