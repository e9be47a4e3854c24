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

#include <vector>

#include "mmsim/modulation.hpp"

namespace mmsim {

// Parallel channels sharing one sum-power budget. gains[j] is the received
// snr per unit transmit power on channel j.
struct ParallelChannels {
  std::vector<double> gains;
  double budget = 0.0;
};

struct PowerAllocation {
  std::vector<double> powers;
  double water_level = 0.0;
  std::vector<int> active_set;
};

// Channels weaker than this are never given power.
inline constexpr double kMinUsableGain = 1e-20;

// Classic water-filling, q_j = max(0, mu - 1/g_j) with sum q_j = P.
PowerAllocation waterfill(const ParallelChannels& ch);

// Mercury/water-filling for the given alphabet: g_j mmse(g_j q_j) = 1/mu on
// every active channel. water_level holds mu.
PowerAllocation mercury_waterfill(const ParallelChannels& ch, const Alphabet& alphabet);

// max_j |g_j mmse(g_j q_j) mu - 1| over active channels whose snr lies below
// the alphabet's saturation point.
double kkt_residual(const ParallelChannels& ch, const PowerAllocation& a, const Alphabet& alphabet);

// Sum of mi_bits(g_j q_j).
double sum_mi(const ParallelChannels& ch, const std::vector<double>& powers, const Alphabet& alphabet);

}  // namespace mmsim
