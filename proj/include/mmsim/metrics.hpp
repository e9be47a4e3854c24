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

#include <iosfwd>
#include <string>
#include <vector>

#include "mmsim/channel.hpp"
#include "mmsim/modulation.hpp"
#include "mmsim/precoding.hpp"

namespace mmsim {

inline constexpr int kPhysicalSubcarriers = 1200;
inline constexpr int kSymbolsPerSlot = 14;
inline constexpr double kSlotDuration = 1e-3;
inline constexpr double kBandwidth = 20e6;

// Linear SINRs, UE-major: at(k, f).
struct SinrGrid {
  std::size_t num_ues = 0;
  std::size_t num_subcarriers = 0;
  std::vector<double> values;

  double& at(std::size_t k, std::size_t f) { return values[k * num_subcarriers + f]; }
  double at(std::size_t k, std::size_t f) const { return values[k * num_subcarriers + f]; }
};

// SINR of every UE on every subcarrier against the true channel h. UEs
// without a stream on a subcarrier get 0 there.
SinrGrid compute_sinr(const ChannelTensor& h, const Precoder& w, double noise_w);

struct SpectralEfficiency {
  std::vector<double> per_ue;
  double sum = 0.0;
};

// bit/s/Hz contributed by one bit per channel use on one of F simulated
// subcarriers: (1200 / F) * 14 / (1 ms * 20 MHz).
double se_per_bit(std::size_t num_subcarriers);

SpectralEfficiency spectral_efficiency(const SinrGrid& sinr, const Alphabet& alphabet);

// (sum S_k)^2 / (K sum S_k^2). Throws ArgumentError for an empty or all-zero vector.
double jain_index(const std::vector<double>& se);

// Nearest-rank percentile, p in (0, 100].
double percentile(std::vector<double> values, double p);

struct MetricsRecord {
  std::string deployment;
  std::string scheme;
  std::string modulation;
  int antennas = 0;
  int num_ues = 0;
  double sigma_e2_db = 0.0;
  int drop = 0;
  int realization = 0;
  std::vector<double> per_ue_se;
  double sum_se = 0.0;
  double jain = 0.0;
  double se_p5 = 0.0;
  double se_p95 = 0.0;
};

// Fills sum_se, jain and the per-UE percentiles from per_ue_se.
void finish_record(MetricsRecord& r);

struct SummaryRow {
  std::string deployment;
  std::string scheme;
  std::string modulation;
  int antennas = 0;
  int num_ues = 0;
  double sigma_e2_db = 0.0;
  int count = 0;
  double sum_se_mean = 0.0;
  double sum_se_p5 = 0.0;
  double sum_se_p95 = 0.0;
  double jain_mean = 0.0;
  double jain_p5 = 0.0;
  double jain_p95 = 0.0;
  std::string status = "ok";
};

// One row per (deployment, scheme, modulation, M, sigma_E^2) cell, in order
// of first appearance.
std::vector<SummaryRow> aggregate(const std::vector<MetricsRecord>& records);

// Shortest round-trip decimal form; infinities as "inf" / "-inf".
std::string format_number(double v);

extern const char* const kRecordHeader;
extern const char* const kPerUeHeader;
extern const char* const kSummaryHeader;

void write_record_row(std::ostream& os, const MetricsRecord& r);
void write_per_ue_rows(std::ostream& os, const MetricsRecord& r);
void write_summary_row(std::ostream& os, const SummaryRow& s);

}  // namespace mmsim
