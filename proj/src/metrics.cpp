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

#include "mmsim/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <tuple>

#include "mmsim/kernels.hpp"

namespace mmsim {

SinrGrid compute_sinr(const ChannelTensor& h, const Precoder& w, double noise_w) {
  const std::size_t nk = h.num_ues();
  const std::size_t nf = h.num_subcarriers();
  const std::size_t nm = h.num_antennas();
  if (w.w.size() != nf || w.stream_ue.size() != nf) throw ArgumentError("compute_sinr: subcarrier count mismatch");
  SinrGrid g{nk, nf, std::vector<double>(nk * nf, 0.0)};
  std::vector<cd> rx;
  for (std::size_t f = 0; f < nf; ++f) {
    const Eigen::MatrixXcd& wf = w.w[f];
    const auto& ues = w.stream_ue[f];
    const std::size_t ns = static_cast<std::size_t>(wf.cols());
    if (ns != ues.size()) throw ArgumentError("compute_sinr: stream map does not match the precoder");
    if (ns == 0) continue;
    if (static_cast<std::size_t>(wf.rows()) != nm) throw ArgumentError("compute_sinr: antenna count mismatch");
    rx.resize(ns);
    for (std::size_t k = 0; k < nk; ++k) {
      kernels::row_times_matrix(h.row(f, k), wf.data(), nm, ns, nm, rx.data());
      double total = 0.0;
      double signal = 0.0;
      bool served = false;
      for (std::size_t j = 0; j < ns; ++j) {
        const double p = std::norm(rx[j]);
        total += p;
        if (static_cast<std::size_t>(ues[j]) == k) {
          signal += p;
          served = true;
        }
      }
      if (!served) continue;
      g.at(k, f) = signal / (noise_w + std::max(0.0, total - signal));
    }
  }
  return g;
}

double se_per_bit(std::size_t num_subcarriers) {
  return static_cast<double>(kPhysicalSubcarriers) / static_cast<double>(num_subcarriers) * kSymbolsPerSlot /
         (kSlotDuration * kBandwidth);
}

SpectralEfficiency spectral_efficiency(const SinrGrid& sinr, const Alphabet& alphabet) {
  SpectralEfficiency s;
  s.per_ue.assign(sinr.num_ues, 0.0);
  const double scale = se_per_bit(sinr.num_subcarriers);
  for (std::size_t k = 0; k < sinr.num_ues; ++k) {
    double bits = 0.0;
    for (std::size_t f = 0; f < sinr.num_subcarriers; ++f) bits += alphabet.mi_bits(sinr.at(k, f));
    s.per_ue[k] = bits * scale;
  }
  s.sum = std::accumulate(s.per_ue.begin(), s.per_ue.end(), 0.0);
  return s;
}

double jain_index(const std::vector<double>& se) {
  if (se.empty()) throw ArgumentError("jain_index: empty input");
  double s = 0.0;
  double s2 = 0.0;
  for (double v : se) {
    if (v < 0.0) throw ArgumentError("jain_index: negative spectral efficiency");
    s += v;
    s2 += v * v;
  }
  if (!(s2 > 0.0)) throw ArgumentError("jain_index: undefined for an all-zero vector");
  return s * s / (static_cast<double>(se.size()) * s2);
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ArgumentError("percentile: empty input");
  if (!(p > 0.0 && p <= 100.0)) throw ArgumentError("percentile: p must lie in (0, 100]");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size()) - 1e-9));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

void finish_record(MetricsRecord& r) {
  r.num_ues = static_cast<int>(r.per_ue_se.size());
  r.sum_se = std::accumulate(r.per_ue_se.begin(), r.per_ue_se.end(), 0.0);
  const bool any = std::any_of(r.per_ue_se.begin(), r.per_ue_se.end(), [](double v) { return v > 0.0; });
  r.jain = any ? jain_index(r.per_ue_se) : std::nan("");
  r.se_p5 = percentile(r.per_ue_se, 5.0);
  r.se_p95 = percentile(r.per_ue_se, 95.0);
}

std::vector<SummaryRow> aggregate(const std::vector<MetricsRecord>& records) {
  using Key = std::tuple<std::string, std::string, std::string, int, double>;
  std::vector<Key> order;
  std::map<Key, std::vector<const MetricsRecord*>> groups;
  for (const MetricsRecord& r : records) {
    Key key{r.deployment, r.scheme, r.modulation, r.antennas, r.sigma_e2_db};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (const Key& key : order) {
    const auto& g = groups[key];
    SummaryRow s;
    std::tie(s.deployment, s.scheme, s.modulation, s.antennas, s.sigma_e2_db) = key;
    s.num_ues = g.front()->num_ues;
    s.count = static_cast<int>(g.size());
    std::vector<double> se;
    std::vector<double> jain;
    for (const MetricsRecord* r : g) {
      se.push_back(r->sum_se);
      if (!std::isnan(r->jain)) jain.push_back(r->jain);
    }
    s.sum_se_mean = std::accumulate(se.begin(), se.end(), 0.0) / static_cast<double>(se.size());
    s.sum_se_p5 = percentile(se, 5.0);
    s.sum_se_p95 = percentile(se, 95.0);
    if (jain.empty()) {
      s.jain_mean = s.jain_p5 = s.jain_p95 = std::nan("");
    } else {
      s.jain_mean = std::accumulate(jain.begin(), jain.end(), 0.0) / static_cast<double>(jain.size());
      s.jain_p5 = percentile(jain, 5.0);
      s.jain_p95 = percentile(jain, 95.0);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const char* const kRecordHeader =
    "deployment,scheme,modulation,M,K,sigmaE2_db,drop,realization,sum_se,jain,se_p5,se_p95";
const char* const kPerUeHeader = "deployment,scheme,modulation,M,K,sigmaE2_db,drop,realization,ue_index,se";
const char* const kSummaryHeader =
    "deployment,scheme,modulation,M,K,sigmaE2_db,n,sum_se_mean,sum_se_p5,sum_se_p95,jain_mean,jain_p5,jain_p95,status";

namespace {

void write_prefix(std::ostream& os, const MetricsRecord& r) {
  os << r.deployment << ',' << r.scheme << ',' << r.modulation << ',' << r.antennas << ',' << r.num_ues << ','
     << format_number(r.sigma_e2_db) << ',' << r.drop << ',' << r.realization;
}

}  // namespace

void write_record_row(std::ostream& os, const MetricsRecord& r) {
  write_prefix(os, r);
  os << ',' << format_number(r.sum_se) << ',' << format_number(r.jain) << ',' << format_number(r.se_p5) << ','
     << format_number(r.se_p95) << '\n';
}

void write_per_ue_rows(std::ostream& os, const MetricsRecord& r) {
  for (std::size_t k = 0; k < r.per_ue_se.size(); ++k) {
    write_prefix(os, r);
    os << ',' << k << ',' << format_number(r.per_ue_se[k]) << '\n';
  }
}

void write_summary_row(std::ostream& os, const SummaryRow& s) {
  os << s.deployment << ',' << s.scheme << ',' << s.modulation << ',' << s.antennas << ',' << s.num_ues << ','
     << format_number(s.sigma_e2_db) << ',' << s.count << ',' << format_number(s.sum_se_mean) << ','
     << format_number(s.sum_se_p5) << ',' << format_number(s.sum_se_p95) << ',' << format_number(s.jain_mean) << ','
     << format_number(s.jain_p5) << ',' << format_number(s.jain_p95) << ',' << s.status << '\n';
}

}  // namespace mmsim
