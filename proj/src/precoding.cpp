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

#include "mmsim/precoding.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mmsim/kernels.hpp"
#include "mmsim/powalloc.hpp"

namespace mmsim {

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::kLocal: return "local";
    case Scheme::kLsMimo: return "lsmimo";
    case Scheme::kNetwork: return "network";
    case Scheme::kNetworkTotal: return "network-total";
    case Scheme::kMrtSingle: return "mrt-single";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::kLocal, Scheme::kLsMimo, Scheme::kNetwork, Scheme::kNetworkTotal, Scheme::kMrtSingle})
    if (name == to_string(s)) return s;
  throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

double LinkBudget::total_budget() const { return std::accumulate(bs_budget_w.begin(), bs_budget_w.end(), 0.0); }

LinkBudget make_link_budget(const Deployment& dep, int num_subcarriers, double noise_w,
                            int num_physical_subcarriers) {
  if (num_subcarriers <= 0 || num_physical_subcarriers <= 0) throw ArgumentError("subcarrier counts must be positive");
  LinkBudget b;
  b.noise_w = noise_w;
  for (const BsSite& s : dep.sites)
    b.bs_budget_w.push_back(s.power_budget_w * num_subcarriers / num_physical_subcarriers);
  return b;
}

std::size_t Precoder::site_size(std::size_t i) const {
  const std::size_t m = w.empty() ? 0 : static_cast<std::size_t>(w.front().rows());
  return (i + 1 < site_offsets.size() ? site_offsets[i + 1] : m) - site_offsets[i];
}

double Precoder::bs_power(std::size_t i) const {
  const auto r0 = static_cast<Eigen::Index>(site_offsets[i]);
  const auto nr = static_cast<Eigen::Index>(site_size(i));
  double p = 0.0;
  for (const auto& wf : w)
    if (wf.cols() > 0) p += wf.middleRows(r0, nr).squaredNorm();
  return p;
}

double Precoder::total_power() const {
  double p = 0.0;
  for (const auto& wf : w) p += wf.squaredNorm();
  return p;
}

bool satisfies_power_constraints(const Precoder& p, double rel_tol) {
  if (p.scheme == Scheme::kNetworkTotal) {
    const double budget = std::accumulate(p.budgets.begin(), p.budgets.end(), 0.0);
    return p.total_power() <= budget * (1.0 + rel_tol);
  }
  for (std::size_t i = 0; i < p.num_sites(); ++i)
    if (p.bs_power(i) > p.budgets[i] * (1.0 + rel_tol)) return false;
  return p.scale_factor > 0.0 && p.scale_factor <= 1.0;
}

Association associate_ues(const ChannelTensor& h, const Deployment& dep) {
  const std::size_t ns = h.num_sites();
  if (ns != dep.sites.size()) throw ArgumentError("associate_ues: site count mismatch");
  Association a;
  a.serving_bs.assign(h.num_ues(), 0);
  a.per_bs_ues.assign(ns, 0);
  for (std::size_t k = 0; k < h.num_ues(); ++k) {
    double best = -1.0;
    for (std::size_t i = 0; i < ns; ++i) {
      const std::size_t m0 = h.site_begin(i);
      const std::size_t mc = h.site_size(i);
      double g = 0.0;
      for (std::size_t f = 0; f < h.num_subcarriers(); ++f) g += kernels::norm_sq(h.row(f, k) + m0, mc);
      g /= static_cast<double>(mc * h.num_subcarriers());
      const double metric = g * dep.sites[i].power_budget_w / static_cast<double>(dep.sites[i].num_antennas);
      if (metric > best) {
        best = metric;
        a.serving_bs[k] = static_cast<int>(i);
      }
    }
    ++a.per_bs_ues[a.serving_bs[k]];
  }
  return a;
}

std::vector<int> schedule_users(const Eigen::MatrixXcd& h, int max_users) {
  const int n = static_cast<int>(h.rows());
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  if (n <= max_users) return all;

  // Residuals of each row after projecting out the selected span.
  Eigen::MatrixXcd res = h;
  std::vector<char> taken(n, 0);
  std::vector<int> picked;
  while (static_cast<int>(picked.size()) < max_users) {
    int best = -1;
    double best_norm = -1.0;
    for (int k = 0; k < n; ++k) {
      if (taken[k]) continue;
      const double v = res.row(k).squaredNorm();
      if (v > best_norm) {
        best_norm = v;
        best = k;
      }
    }
    taken[best] = 1;
    picked.push_back(best);
    if (best_norm <= 0.0) continue;
    const Eigen::RowVectorXcd q = res.row(best) / std::sqrt(best_norm);
    for (int k = 0; k < n; ++k) {
      if (taken[k]) continue;
      const cd c = res.row(k).dot(q);  // conj(res_k) . q
      res.row(k) -= std::conj(c) * q;
    }
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

ZfResult zf_pseudo_inverse(const Eigen::MatrixXcd& h) {
  const Eigen::Index k = h.rows();
  const Eigen::Index m = h.cols();
  if (k == 0) return {Eigen::MatrixXcd(m, 0), {}, 1.0};
  if (k > m) throw RankDeficientError("zf_pseudo_inverse: more streams than antennas", std::numeric_limits<double>::infinity());
  // h^H = Q R, so h = R^H Q^H and t = Q R^{-H}.
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(h.adjoint());
  const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(m, k);
  const Eigen::MatrixXcd r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(r);
  const auto& sv = svd.singularValues();
  const double cond = sv(k - 1) > 0.0 ? sv(0) / sv(k - 1) : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxCondition)) throw RankDeficientError("zf_pseudo_inverse: ill-conditioned channel", cond);
  ZfResult out;
  out.t = r.triangularView<Eigen::Upper>().solve(q.adjoint()).adjoint();
  out.condition = cond;
  out.gains.resize(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) out.gains[static_cast<std::size_t>(j)] = 1.0 / out.t.col(j).squaredNorm();
  return out;
}

ZfResult zf_with_fallback(const Eigen::MatrixXcd& h, std::vector<int>& rows) {
  while (true) {
    Eigen::MatrixXcd sub(static_cast<Eigen::Index>(rows.size()), h.cols());
    for (std::size_t j = 0; j < rows.size(); ++j) sub.row(static_cast<Eigen::Index>(j)) = h.row(rows[j]);
    try {
      return zf_pseudo_inverse(sub);
    } catch (const RankDeficientError&) {
      if (rows.size() <= 1) throw;
      std::size_t weakest = 0;
      for (std::size_t j = 1; j < rows.size(); ++j)
        if (sub.row(static_cast<Eigen::Index>(j)).squaredNorm() < sub.row(static_cast<Eigen::Index>(weakest)).squaredNorm())
          weakest = j;
      rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(weakest));
    }
  }
}

Eigen::MatrixXcd channel_block(const ChannelTensor& h, std::size_t f, const std::vector<int>& ues, std::size_t m0,
                               std::size_t mc) {
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(ues.size()), static_cast<Eigen::Index>(mc));
  for (std::size_t j = 0; j < ues.size(); ++j) {
    const cd* r = h.row(f, static_cast<std::size_t>(ues[j])) + m0;
    for (std::size_t m = 0; m < mc; ++m) out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m)) = r[m];
  }
  return out;
}

namespace {

PowerAllocation allocate(const ParallelChannels& ch, const Alphabet& alphabet) {
  if (dynamic_cast<const GaussianAlphabet*>(&alphabet)) return waterfill(ch);
  return mercury_waterfill(ch, alphabet);
}

// One ZF stream before power allocation: unit-diagonal beam t (rows
// [row0, row0 + t.size()) of the stacked array) with gain 1 / ||t||^2.
struct Stream {
  std::size_t f = 0;
  int ue = 0;
  std::size_t row0 = 0;
  Eigen::VectorXcd t;
  double gain = 0.0;
  double power = 0.0;
};

// Water-fills budget over streams and stores the power in each.
void allocate_streams(std::vector<Stream>& streams, double budget, double noise, const Alphabet& alphabet) {
  ParallelChannels ch;
  ch.budget = budget;
  bool any = false;
  for (const Stream& s : streams) {
    ch.gains.push_back(s.gain / noise);
    any = any || ch.gains.back() >= kMinUsableGain;
  }
  if (!any) return;
  const PowerAllocation a = allocate(ch, alphabet);
  for (std::size_t j = 0; j < streams.size(); ++j) streams[j].power = a.powers[j];
}

Precoder assemble(Scheme scheme, const ChannelTensor& h, const LinkBudget& link, std::vector<Stream>& streams) {
  Precoder p;
  p.scheme = scheme;
  p.site_offsets = h.site_offsets();
  p.budgets = link.bs_budget_w;
  const std::size_t nf = h.num_subcarriers();
  std::vector<std::vector<const Stream*>> per_f(nf);
  for (const Stream& s : streams)
    if (s.power > 0.0) per_f[s.f].push_back(&s);
  p.w.resize(nf);
  p.stream_ue.resize(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    auto& list = per_f[f];
    std::stable_sort(list.begin(), list.end(), [](const Stream* a, const Stream* b) { return a->ue < b->ue; });
    p.w[f] = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(h.num_antennas()), static_cast<Eigen::Index>(list.size()));
    for (std::size_t j = 0; j < list.size(); ++j) {
      const Stream& s = *list[j];
      p.w[f].col(static_cast<Eigen::Index>(j)).segment(static_cast<Eigen::Index>(s.row0), s.t.size()) =
          s.t * std::sqrt(s.power * s.gain);
      p.stream_ue[f].push_back(s.ue);
    }
  }
  return p;
}

void check_budget(const ChannelTensor& h, const LinkBudget& link) {
  if (link.bs_budget_w.size() != h.num_sites()) throw ArgumentError("link budget does not match the site count");
  if (!(link.noise_w > 0.0)) throw ArgumentError("noise variance must be positive");
}

}  // namespace

Precoder precode_local(const ChannelTensor& h, const Association& assoc, const LinkBudget& link,
                       const Alphabet& alphabet) {
  check_budget(h, link);
  std::vector<Stream> all;
  for (std::size_t i = 0; i < h.num_sites(); ++i) {
    std::vector<int> served;
    for (std::size_t k = 0; k < assoc.serving_bs.size(); ++k)
      if (assoc.serving_bs[k] == static_cast<int>(i)) served.push_back(static_cast<int>(k));
    if (served.empty()) continue;
    const std::size_t m0 = h.site_begin(i);
    const std::size_t mc = h.site_size(i);
    std::vector<Stream> streams;
    for (std::size_t f = 0; f < h.num_subcarriers(); ++f) {
      const Eigen::MatrixXcd hb = channel_block(h, f, served, m0, mc);
      std::vector<int> rows = schedule_users(hb, static_cast<int>(mc));
      const ZfResult zf = zf_with_fallback(hb, rows);
      for (std::size_t j = 0; j < rows.size(); ++j)
        streams.push_back({f, served[static_cast<std::size_t>(rows[j])], m0, zf.t.col(static_cast<Eigen::Index>(j)), zf.gains[j], 0.0});
    }
    allocate_streams(streams, link.bs_budget_w[i], link.noise_w, alphabet);
    all.insert(all.end(), std::make_move_iterator(streams.begin()), std::make_move_iterator(streams.end()));
  }
  return assemble(Scheme::kLocal, h, link, all);
}

Precoder precode_lsmimo(const ChannelTensor& h, const Association& assoc, const LinkBudget& link,
                        const Alphabet& alphabet) {
  check_budget(h, link);
  const std::size_t nk = h.num_ues();
  for (std::size_t i = 0; i < h.num_sites(); ++i)
    if (h.site_size(i) < nk)
      throw InfeasibleError("lsmimo-infeasible", "LS-MIMO needs at least K antennas at every BS");
  std::vector<int> everyone(nk);
  std::iota(everyone.begin(), everyone.end(), 0);
  std::vector<Stream> all;
  for (std::size_t i = 0; i < h.num_sites(); ++i) {
    const std::size_t m0 = h.site_begin(i);
    const std::size_t mc = h.site_size(i);
    std::vector<Stream> streams;
    for (std::size_t f = 0; f < h.num_subcarriers(); ++f) {
      const Eigen::MatrixXcd hb = channel_block(h, f, everyone, m0, mc);
      std::vector<int> rows = everyone;
      const ZfResult zf = zf_with_fallback(hb, rows);
      for (std::size_t j = 0; j < rows.size(); ++j) {
        if (assoc.serving_bs[static_cast<std::size_t>(rows[j])] != static_cast<int>(i)) continue;
        streams.push_back({f, rows[j], m0, zf.t.col(static_cast<Eigen::Index>(j)), zf.gains[j], 0.0});
      }
    }
    if (streams.empty()) continue;
    allocate_streams(streams, link.bs_budget_w[i], link.noise_w, alphabet);
    all.insert(all.end(), std::make_move_iterator(streams.begin()), std::make_move_iterator(streams.end()));
  }
  return assemble(Scheme::kLsMimo, h, link, all);
}

Precoder precode_network(const ChannelTensor& h, const LinkBudget& link, const Alphabet& alphabet,
                         PowerConstraint constraint) {
  check_budget(h, link);
  const std::size_t nk = h.num_ues();
  if (nk > h.num_antennas())
    throw InfeasibleError("network-infeasible", "network MIMO needs at least K antennas in total");
  std::vector<int> everyone(nk);
  std::iota(everyone.begin(), everyone.end(), 0);
  std::vector<Stream> streams;
  for (std::size_t f = 0; f < h.num_subcarriers(); ++f) {
    const Eigen::MatrixXcd hb = channel_block(h, f, everyone, 0, h.num_antennas());
    std::vector<int> rows = everyone;
    const ZfResult zf = zf_with_fallback(hb, rows);
    for (std::size_t j = 0; j < rows.size(); ++j)
      streams.push_back({f, rows[j], 0, zf.t.col(static_cast<Eigen::Index>(j)), zf.gains[j], 0.0});
  }
  allocate_streams(streams, link.total_budget(), link.noise_w, alphabet);
  Precoder p = assemble(constraint == PowerConstraint::kPerBs ? Scheme::kNetwork : Scheme::kNetworkTotal, h, link, streams);
  if (constraint == PowerConstraint::kPerBs) {
    double c = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.num_sites(); ++i) {
      const double pw = p.bs_power(i);
      if (pw > 0.0) c = std::min(c, link.bs_budget_w[i] / pw);
    }
    if (!std::isfinite(c)) c = 1.0;
    c = std::min(c, 1.0);
    const double a = std::sqrt(c);
    for (auto& wf : p.w) wf *= a;
    p.scale_factor = c;
  }
  return p;
}

std::vector<double> mrt_single_snr(const ChannelTensor& h, std::size_t ue, const LinkBudget& link) {
  check_budget(h, link);
  const double nf = static_cast<double>(h.num_subcarriers());
  std::vector<double> snr(h.num_subcarriers());
  for (std::size_t f = 0; f < h.num_subcarriers(); ++f) {
    double amp = 0.0;
    for (std::size_t i = 0; i < h.num_sites(); ++i)
      amp += std::sqrt(link.bs_budget_w[i] / nf * kernels::norm_sq(h.row(f, ue) + h.site_begin(i), h.site_size(i)));
    snr[f] = amp * amp / link.noise_w;
  }
  return snr;
}

Precoder precode_mrt_single(const ChannelTensor& h, std::size_t ue, const LinkBudget& link) {
  check_budget(h, link);
  if (ue >= h.num_ues()) throw ArgumentError("precode_mrt_single: UE index out of range");
  Precoder p;
  p.scheme = Scheme::kMrtSingle;
  p.site_offsets = h.site_offsets();
  p.budgets = link.bs_budget_w;
  const double nf = static_cast<double>(h.num_subcarriers());
  p.w.resize(h.num_subcarriers());
  p.stream_ue.assign(h.num_subcarriers(), {static_cast<int>(ue)});
  for (std::size_t f = 0; f < h.num_subcarriers(); ++f) {
    p.w[f] = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(h.num_antennas()), 1);
    const cd* r = h.row(f, ue);
    for (std::size_t i = 0; i < h.num_sites(); ++i) {
      const std::size_t m0 = h.site_begin(i);
      const std::size_t mc = h.site_size(i);
      const double nrm = std::sqrt(kernels::norm_sq(r + m0, mc));
      if (nrm <= 0.0) continue;
      // Conjugate beam: every BS contributes a positive real amplitude.
      const double a = std::sqrt(link.bs_budget_w[i] / nf) / nrm;
      for (std::size_t m = m0; m < m0 + mc; ++m) p.w[f](static_cast<Eigen::Index>(m), 0) = a * std::conj(r[m]);
    }
  }
  return p;
}

Precoder precode(Scheme scheme, const ChannelTensor& h, const Association& assoc, const LinkBudget& link,
                 const Alphabet& alphabet) {
  switch (scheme) {
    case Scheme::kLocal: return precode_local(h, assoc, link, alphabet);
    case Scheme::kLsMimo: return precode_lsmimo(h, assoc, link, alphabet);
    case Scheme::kNetwork: return precode_network(h, link, alphabet, PowerConstraint::kPerBs);
    case Scheme::kNetworkTotal: return precode_network(h, link, alphabet, PowerConstraint::kTotal);
    case Scheme::kMrtSingle: break;
  }
  throw ArgumentError("precode: scheme needs a dedicated entry point");
}

}  // namespace mmsim
