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
#include <filesystem>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "mmsim/channel.hpp"
#include "mmsim/geometry.hpp"
#include "mmsim/modulation.hpp"

namespace mmsim {

inline constexpr double kPerfectCsi = -std::numeric_limits<double>::infinity();

// Simulation parameters. Defaults reproduce the full-scale office setup; an
// empty JSON object yields exactly these values.
struct SimConfig {
  int schema_version = 1;

  double bandwidth_hz = 20e6;
  double active_bandwidth_hz = 18e6;
  double subcarrier_spacing_hz = 15e3;
  int subcarriers = 1200;
  int prbs = 100;
  // Representative subcarriers actually simulated (one per PRB group).
  int simulated_prbs = 100;

  double sum_power_dbm = 26.0;
  double noise_dbm = -125.1;
  int num_ues = 24;
  int drops = 300;
  int realizations = 10;

  std::string modulation = "qam256";
  std::vector<std::string> deployments = {"single-central", "two-indoor", "four-indoor",
                                          "forty-indoor",   "outdoor",    "indoor-outdoor"};
  std::vector<int> antennas = {24, 48, 72, 96, 120, 144, 168, 192, 216, 240};
  std::vector<std::string> schemes = {"network", "lsmimo", "local"};
  // Estimation-error NMSE in dB; kPerfectCsi for perfect CSI.
  std::vector<double> nmse_db = {kPerfectCsi};

  std::uint64_t seed = 1;
  int threads = 0;
  int quadrature_nodes = kDefaultQuadratureNodes;

  ScenarioConfig scenario;
  ChannelModelConfig channel;

  double snrmap_grid_step_m = 1.0;
  int snrmap_realizations = 300;
  double capacity_tolerance = 1e-8;
  int capacity_max_iters = 1000;

  double noise_w() const { return dbm_to_watt(noise_dbm); }
  // Throws ConfigError on any inconsistent or out-of-range field.
  void validate() const;
};

SimConfig config_from_json_text(const std::string& text);
SimConfig load_config(const std::filesystem::path& path);
// Canonical JSON form (every field present, keys sorted).
std::string config_to_json_text(const SimConfig& cfg);
// FNV-1a of the canonical JSON form without the thread count, 16 hex digits.
std::string config_hash(const SimConfig& cfg);

// "qam4" ... "qam256" or "gaussian".
std::unique_ptr<Alphabet> make_alphabet(const std::string& name, int quadrature_nodes = kDefaultQuadratureNodes);

}  // namespace mmsim
