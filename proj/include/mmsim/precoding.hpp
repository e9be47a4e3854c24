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

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

#include "mmsim/channel.hpp"
#include "mmsim/geometry.hpp"
#include "mmsim/modulation.hpp"

namespace mmsim {

enum class Scheme { kLocal, kLsMimo, kNetwork, kNetworkTotal, kMrtSingle };

std::string_view to_string(Scheme s);
Scheme parse_scheme(std::string_view name);

// Budgets of one simulated realization. bs_budget_w[i] is the power BS i may
// spend summed over all simulated subcarriers; noise_w is the per-subcarrier
// noise variance.
struct LinkBudget {
  std::vector<double> bs_budget_w;
  double noise_w = 0.0;

  double total_budget() const;
};

// Budget for F simulated subcarriers, each representing 1200/F physical
// subcarriers: P_i * F / num_physical_subcarriers.
LinkBudget make_link_budget(const Deployment& dep, int num_subcarriers, double noise_w,
                            int num_physical_subcarriers = 1200);

// Linear precoder for every simulated subcarrier. Column j of w[f] carries
// the stream of UE stream_ue[f][j]; rows are the stacked BS antennas.
struct Precoder {
  Scheme scheme = Scheme::kNetwork;
  std::vector<Eigen::MatrixXcd> w;
  std::vector<std::vector<int>> stream_ue;
  std::vector<std::size_t> site_offsets;
  std::vector<double> budgets;
  // Power scale applied by the per-BS rescaling (1 when none).
  double scale_factor = 1.0;

  std::size_t num_sites() const { return site_offsets.size(); }
  std::size_t site_size(std::size_t i) const;
  // sum_f ||W_i^(f)||_F^2
  double bs_power(std::size_t i) const;
  double total_power() const;
};

// Checks the declared power constraint: per BS for every scheme except the
// total-power variant, which is checked against the summed budget.
bool satisfies_power_constraints(const Precoder& p, double rel_tol = 1e-9);

struct Association {
  std::vector<int> serving_bs;
  std::vector<int> per_bs_ues;
};

// UE k goes to argmax_i mean|h_{k,i}|^2 * P_i / M_i; lowest index on ties.
Association associate_ues(const ChannelTensor& h, const Deployment& dep);

// Greedy semi-orthogonal selection of at most max_users rows of h (rows are
// the UE channels h_k^H). Returns selected row indices in ascending order.
std::vector<int> schedule_users(const Eigen::MatrixXcd& h, int max_users);

struct ZfResult {
  Eigen::MatrixXcd t;          // M x K', h * t = I
  std::vector<double> gains;   // 1 / ||t_k||^2
  double condition = 1.0;
};

inline constexpr double kMaxCondition = 1e12;

// Right pseudo-inverse of the K' x M matrix h via a thin QR of h^H. Throws
// RankDeficientError when the condition number exceeds kMaxCondition.
ZfResult zf_pseudo_inverse(const Eigen::MatrixXcd& h);

// zf_pseudo_inverse on the given rows of h, dropping the weakest remaining
// row on rank deficiency. rows is updated to the kept subset.
ZfResult zf_with_fallback(const Eigen::MatrixXcd& h, std::vector<int>& rows);

// Rows ues, antennas [m0, m0 + mc) of subcarrier f.
Eigen::MatrixXcd channel_block(const ChannelTensor& h, std::size_t f, const std::vector<int>& ues, std::size_t m0,
                               std::size_t mc);

// Per-BS ZF over each BS's own UEs with local CSI; scheduling when a BS has
// more UEs than antennas.
Precoder precode_local(const ChannelTensor& h, const Association& assoc, const LinkBudget& link,
                       const Alphabet& alphabet);

// Each BS nulls every UE in the network. Requires M_i >= K for all i.
Precoder precode_lsmimo(const ChannelTensor& h, const Association& assoc, const LinkBudget& link,
                        const Alphabet& alphabet);

enum class PowerConstraint { kPerBs, kTotal };

// Global ZF with a joint power allocation under the summed budget. kPerBs
// then scales all subcarriers by one factor so that no BS exceeds its budget.
Precoder precode_network(const ChannelTensor& h, const LinkBudget& link, const Alphabet& alphabet,
                         PowerConstraint constraint);

// Maximum ratio transmission to UE ue alone, every BS spending its budget
// evenly over the subcarriers.
Precoder precode_mrt_single(const ChannelTensor& h, std::size_t ue, const LinkBudget& link);

// (sum_i sqrt(P_i / F) ||h_{ue,i}||)^2 / noise per subcarrier.
std::vector<double> mrt_single_snr(const ChannelTensor& h, std::size_t ue, const LinkBudget& link);

Precoder precode(Scheme scheme, const ChannelTensor& h, const Association& assoc, const LinkBudget& link,
                 const Alphabet& alphabet);

}  // namespace mmsim
