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

#include "mmsim/channel.hpp"

namespace mmsim {

// Sum-capacity problem of the dual MAC: single-antenna users, subcarriers as
// parallel blocks sharing one total power budget.
struct DualMacProblem {
  const ChannelTensor* channels = nullptr;
  double noise_w = 0.0;
  double total_power_w = 0.0;
  double tolerance = 1e-8;
  int max_iters = 1000;
};

struct CapacityResult {
  // sum_f log2 det(I + noise^-1 sum_k p_k h_k h_k^H)
  double bits = 0.0;
  // Spectral efficiency with each simulated subcarrier standing for
  // 1200 / F physical ones.
  double se = 0.0;
  int iterations = 0;
  std::vector<double> objective_trace;
  // powers[f * K + k]
  std::vector<double> powers;
};

// Sum-power iterative water-filling with damping 1/K on the new iterate.
// Throws NumericalError on non-convergence or a decreasing objective.
CapacityResult sum_capacity_bound(const DualMacProblem& p);

// Objective for an arbitrary power vector powers[f * K + k].
double dual_mac_bits(const ChannelTensor& h, double noise_w, const std::vector<double>& powers);

// Bits per simulated subcarrier use summed over subcarriers to bit/s/Hz.
double bits_to_se(double bits, std::size_t num_subcarriers);

}  // namespace mmsim
