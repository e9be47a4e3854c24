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
#include <iosfwd>
#include <limits>
#include <vector>

#include "mmsim/common.hpp"
#include "mmsim/geometry.hpp"

namespace mmsim {

// Pathloss A*log10(d) + B + C*log10(f/5 GHz) plus the large-scale parameters
// of one propagation class. rice_k_db = -inf means no LOS component.
struct PathlossClass {
  double slope_db = 0.0;
  double intercept_db = 0.0;
  double freq_db = 0.0;
  double shadow_sigma_db = 0.0;
  double rice_k_db = -std::numeric_limits<double>::infinity();
  double delay_spread_s = 0.0;

  double pathloss_db(double distance_m, double carrier_hz) const;
};

// Defaults approximate the WINNER II A1 (indoor office) and WINNER+ B4
// (outdoor-to-indoor) parameter sets; they are configuration, not constants.
struct ChannelModelConfig {
  double carrier_hz = 2.1e9;
  double wall_loss_db = 12.0;
  PathlossClass indoor_los{18.7, 46.8, 20.0, 3.0, 7.0, 40e-9};
  PathlossClass indoor_nlos{36.8, 43.8, 20.0, 4.0, -std::numeric_limits<double>::infinity(), 25e-9};
  PathlossClass outdoor_to_indoor{36.8, 43.8, 20.0, 7.0, -std::numeric_limits<double>::infinity(), 49e-9};
  double building_entry_loss_db = 14.0;
  int num_taps = 8;
  double tap_spacing_s = 10e-9;
  bool shadowing = true;
};

enum class LinkClass { kIndoorLos, kIndoorNlos, kOutdoorToIndoor };

struct LinkProfile {
  LinkClass link_class = LinkClass::kIndoorLos;
  double pathloss_db = 0.0;
  bool los = false;
  int num_walls = 0;
  double shadowing_db = 0.0;
  double rice_k_linear = 0.0;  // +inf: pure LOS
  double distance_m = 0.0;
  double delay_spread_s = 0.0;

  // Mean channel power gain 10^(-(PL + SF)/10).
  double gain_linear() const { return std::pow(10.0, -(pathloss_db + shadowing_db) / 10.0); }
};

// Large-scale description of the link from one site to one UE. Shadowing is a
// zero-mean Gaussian (dB) with the class sigma drawn from shadow_seed.
LinkProfile classify_link(const FloorPlan& plan, const BsSite& site, const Vec3& ue,
                          const ChannelModelConfig& cfg, std::uint64_t shadow_seed);

// Profiles for every (UE, site) pair, UE-major: profiles[k * num_sites + i].
// Shadowing for pair (i, k) is drawn from derive_seed(shadow_seed, {i, k}).
std::vector<LinkProfile> classify_links(const FloorPlan& plan, const Deployment& dep,
                                        const std::vector<Vec3>& ues, const ChannelModelConfig& cfg,
                                        std::uint64_t shadow_seed);

// Replaces the shadowing of every profile by a fresh draw, using the same
// per-pair streams as classify_links.
void redraw_shadowing(std::vector<LinkProfile>& profiles, std::size_t num_sites, const ChannelModelConfig& cfg,
                      std::uint64_t shadow_seed);

// Baseband offsets (Hz) of F representative subcarriers spread evenly over
// the active band, one per group of PRBs.
std::vector<double> representative_subcarriers(int num_subcarriers, double active_bandwidth_hz);

// Complex channel coefficients for K single-antenna UEs, M stacked BS
// antennas and F subcarriers. coeff(k, m, f) is the m-th entry of the row
// vector h_k^H at subcarrier f, i.e. y_k = sum_m coeff(k, m, f) x_m + z_k.
// Storage is subcarrier-major so that each h_k^H is contiguous.
class ChannelTensor {
 public:
  ChannelTensor() = default;
  ChannelTensor(std::size_t num_ues, std::size_t num_antennas, std::size_t num_subcarriers,
                std::vector<std::size_t> site_offsets = {0});

  std::size_t num_ues() const { return k_; }
  std::size_t num_antennas() const { return m_; }
  std::size_t num_subcarriers() const { return f_; }
  std::size_t num_sites() const { return site_offsets_.size(); }
  std::size_t site_begin(std::size_t i) const { return site_offsets_[i]; }
  std::size_t site_size(std::size_t i) const {
    return (i + 1 < site_offsets_.size() ? site_offsets_[i + 1] : m_) - site_offsets_[i];
  }
  const std::vector<std::size_t>& site_offsets() const { return site_offsets_; }

  cd& coeff(std::size_t k, std::size_t m, std::size_t f) { return data_[(f * k_ + k) * m_ + m]; }
  const cd& coeff(std::size_t k, std::size_t m, std::size_t f) const { return data_[(f * k_ + k) * m_ + m]; }
  // Contiguous row h_k^H at subcarrier f (length M).
  cd* row(std::size_t f, std::size_t k) { return data_.data() + (f * k_ + k) * m_; }
  const cd* row(std::size_t f, std::size_t k) const { return data_.data() + (f * k_ + k) * m_; }
  // K x M row-major block for subcarrier f.
  const cd* subcarrier(std::size_t f) const { return data_.data() + f * k_ * m_; }

  const std::vector<cd>& data() const { return data_; }
  std::vector<cd>& data() { return data_; }

  std::vector<double> subcarrier_freqs;
  int realization_index = 0;
  std::uint64_t seed = 0;

 private:
  std::size_t k_ = 0;
  std::size_t m_ = 0;
  std::size_t f_ = 0;
  std::vector<std::size_t> site_offsets_{0};
  std::vector<cd> data_;
};

// Tapped-delay-line fading with exponentially decaying NLOS taps and an
// optional LOS first tap carrying the exact per-antenna phase. The mean power
// of every coefficient equals the link gain. NLOS taps for each (UE, site) are
// drawn antenna by antenna from derive_seed(seed, {k, i}).
ChannelTensor generate_channel(const std::vector<LinkProfile>& profiles, const Deployment& dep,
                               const std::vector<Vec3>& ues, const ChannelModelConfig& cfg,
                               const std::vector<double>& subcarrier_freqs, std::uint64_t seed);

struct NoisyChannelTensor {
  ChannelTensor coeffs;
  double nmse = 0.0;
};

// h_hat = h + e with e ~ CN(0, mean_{m in site i, f}(|h|)^2 * nmse) for each
// (site, UE) pair. nmse = 0 returns an exact copy.
NoisyChannelTensor add_estimation_error(const ChannelTensor& h, double nmse, std::uint64_t seed);

// Binary fixture format: ASCII header line "K M F\n" followed by K*M*F
// little-endian float64 (re, im) pairs in [k][m][f] order.
void write_tensor(std::ostream& os, const ChannelTensor& h);
ChannelTensor read_tensor(std::istream& is);

}  // namespace mmsim
