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

#include "mmsim/channel.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "mmsim/kernels.hpp"
#include "mmsim/rng.hpp"

namespace mmsim {

double PathlossClass::pathloss_db(double distance_m, double carrier_hz) const {
  return slope_db * std::log10(distance_m) + intercept_db + freq_db * std::log10(carrier_hz / 5e9);
}

namespace {

double draw_shadowing(double sigma_db, bool enabled, std::uint64_t seed) {
  if (!enabled || sigma_db <= 0.0) return 0.0;
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, sigma_db);
  return n(rng);
}

// Nearest point on the building's outer wall, at the height of p.
Vec3 nearest_outer_wall_point(const FloorPlan& plan, const Vec3& p) {
  const double dw = p.x;
  const double de = plan.width() - p.x;
  const double ds = p.y;
  const double dn = plan.depth() - p.y;
  const double best = std::min({dw, de, ds, dn});
  if (best == ds) return {p.x, 0.0, p.z};
  if (best == dn) return {p.x, plan.depth(), p.z};
  if (best == dw) return {0.0, p.y, p.z};
  return {plan.width(), p.y, p.z};
}

LinkProfile indoor_profile(const PathlossClass& los_cls, const PathlossClass& nlos_cls, const ChannelModelConfig& cfg,
                           double d, WallCount wc) {
  LinkProfile lp;
  lp.distance_m = d;
  lp.los = wc.los;
  lp.num_walls = wc.num_walls;
  if (wc.los) {
    lp.link_class = LinkClass::kIndoorLos;
    lp.pathloss_db = los_cls.pathloss_db(d, cfg.carrier_hz);
    lp.rice_k_linear = db_to_linear(los_cls.rice_k_db);
    lp.delay_spread_s = los_cls.delay_spread_s;
  } else {
    // The first penetrated wall is part of the NLOS class pathloss.
    lp.link_class = LinkClass::kIndoorNlos;
    lp.pathloss_db = nlos_cls.pathloss_db(d, cfg.carrier_hz) + cfg.wall_loss_db * std::max(0, wc.num_walls - 1);
    lp.rice_k_linear = 0.0;
    lp.delay_spread_s = nlos_cls.delay_spread_s;
  }
  return lp;
}

LinkProfile outdoor_profile(const FloorPlan& plan, const BsSite& site, const Vec3& ue, const ChannelModelConfig& cfg) {
  const Vec3 wall = nearest_outer_wall_point(plan, ue);
  const WallCount wc = count_walls(plan, wall, ue);
  LinkProfile lp;
  lp.link_class = LinkClass::kOutdoorToIndoor;
  lp.distance_m = distance(site.position, wall) + distance(wall, ue);
  lp.los = false;
  lp.num_walls = wc.num_walls;
  lp.pathloss_db = cfg.outdoor_to_indoor.pathloss_db(lp.distance_m, cfg.carrier_hz) + cfg.building_entry_loss_db +
                   cfg.wall_loss_db * wc.num_walls;
  lp.rice_k_linear = 0.0;
  lp.delay_spread_s = cfg.outdoor_to_indoor.delay_spread_s;
  return lp;
}

double shadow_sigma(const ChannelModelConfig& cfg, LinkClass c) {
  switch (c) {
    case LinkClass::kIndoorLos:
      return cfg.indoor_los.shadow_sigma_db;
    case LinkClass::kIndoorNlos:
      return cfg.indoor_nlos.shadow_sigma_db;
    case LinkClass::kOutdoorToIndoor:
      return cfg.outdoor_to_indoor.shadow_sigma_db;
  }
  return 0.0;
}

}  // namespace

LinkProfile classify_link(const FloorPlan& plan, const BsSite& site, const Vec3& ue, const ChannelModelConfig& cfg,
                          std::uint64_t shadow_seed) {
  LinkProfile lp = site.outdoor()
                       ? outdoor_profile(plan, site, ue, cfg)
                       : indoor_profile(cfg.indoor_los, cfg.indoor_nlos, cfg, distance(site.position, ue),
                                        count_walls(plan, site.position, ue));
  lp.shadowing_db = draw_shadowing(shadow_sigma(cfg, lp.link_class), cfg.shadowing, shadow_seed);
  return lp;
}

std::vector<LinkProfile> classify_links(const FloorPlan& plan, const Deployment& dep, const std::vector<Vec3>& ues,
                                        const ChannelModelConfig& cfg, std::uint64_t shadow_seed) {
  const std::size_t ns = dep.num_sites();
  std::vector<LinkProfile> out(ues.size() * ns);
  std::vector<std::vector<int>> ue_wp;
  ue_wp.reserve(ues.size());
  for (const Vec3& u : ues) ue_wp.push_back(waypoint_crossings(plan, u));
  for (std::size_t i = 0; i < ns; ++i) {
    const BsSite& site = dep.sites[i];
    const std::vector<int> site_wp = site.outdoor() ? std::vector<int>{} : waypoint_crossings(plan, site.position);
    for (std::size_t k = 0; k < ues.size(); ++k) {
      const std::uint64_t seed = derive_seed(shadow_seed, {i, k});
      LinkProfile lp;
      if (site.outdoor()) {
        lp = outdoor_profile(plan, site, ues[k], cfg);
      } else {
        lp = indoor_profile(cfg.indoor_los, cfg.indoor_nlos, cfg, distance(site.position, ues[k]),
                            count_walls(plan, site.position, ues[k], site_wp, ue_wp[k]));
      }
      lp.shadowing_db = draw_shadowing(shadow_sigma(cfg, lp.link_class), cfg.shadowing, seed);
      out[k * ns + i] = lp;
    }
  }
  return out;
}

void redraw_shadowing(std::vector<LinkProfile>& profiles, std::size_t num_sites, const ChannelModelConfig& cfg,
                      std::uint64_t shadow_seed) {
  if (num_sites == 0 || profiles.size() % num_sites != 0) throw ArgumentError("redraw_shadowing: bad site count");
  for (std::size_t j = 0; j < profiles.size(); ++j) {
    const std::size_t k = j / num_sites;
    const std::size_t i = j % num_sites;
    profiles[j].shadowing_db =
        draw_shadowing(shadow_sigma(cfg, profiles[j].link_class), cfg.shadowing, derive_seed(shadow_seed, {i, k}));
  }
}

std::vector<double> representative_subcarriers(int num_subcarriers, double active_bandwidth_hz) {
  if (num_subcarriers < 1) throw ArgumentError("need at least one subcarrier");
  std::vector<double> f(static_cast<std::size_t>(num_subcarriers));
  const double step = active_bandwidth_hz / num_subcarriers;
  for (int i = 0; i < num_subcarriers; ++i) f[static_cast<std::size_t>(i)] = -0.5 * active_bandwidth_hz + (i + 0.5) * step;
  return f;
}

ChannelTensor::ChannelTensor(std::size_t num_ues, std::size_t num_antennas, std::size_t num_subcarriers,
                             std::vector<std::size_t> site_offsets)
    : k_(num_ues), m_(num_antennas), f_(num_subcarriers), site_offsets_(std::move(site_offsets)),
      data_(num_ues * num_antennas * num_subcarriers) {
  if (site_offsets_.empty() || site_offsets_.front() != 0) throw ArgumentError("site offsets must start at 0");
  for (std::size_t i = 1; i < site_offsets_.size(); ++i)
    if (site_offsets_[i] < site_offsets_[i - 1] || site_offsets_[i] > m_) throw ArgumentError("bad site offsets");
}

ChannelTensor generate_channel(const std::vector<LinkProfile>& profiles, const Deployment& dep,
                               const std::vector<Vec3>& ues, const ChannelModelConfig& cfg,
                               const std::vector<double>& subcarrier_freqs, std::uint64_t seed) {
  const std::size_t K = ues.size();
  const std::size_t ns = dep.num_sites();
  const std::size_t F = subcarrier_freqs.size();
  if (F == 0) throw ArgumentError("generate_channel: no subcarriers");
  if (profiles.size() != K * ns) throw ArgumentError("generate_channel: profile count mismatch");
  if (cfg.num_taps < 1) throw ArgumentError("generate_channel: need at least one tap");
  const auto offsets = dep.antenna_offsets();
  ChannelTensor h(K, static_cast<std::size_t>(dep.total_antennas), F, offsets);
  h.subcarrier_freqs = subcarrier_freqs;
  h.seed = seed;

  const double lambda = kSpeedOfLight / cfg.carrier_hz;
  const std::size_t L = static_cast<std::size_t>(cfg.num_taps);
  // phasor[l * F + f] = exp(-j 2 pi f tau_l)
  std::vector<cd> phasor(L * F);
  for (std::size_t l = 0; l < L; ++l) {
    const double tau = static_cast<double>(l) * cfg.tap_spacing_s;
    for (std::size_t f = 0; f < F; ++f) phasor[l * F + f] = std::polar(1.0, -2.0 * kPi * subcarrier_freqs[f] * tau);
  }

  std::vector<double> tap_power(L);
  std::vector<cd> taps;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < ns; ++i) {
      const LinkProfile& lp = profiles[k * ns + i];
      const BsSite& site = dep.sites[i];
      const std::size_t Mi = static_cast<std::size_t>(site.num_antennas);
      const double gain = lp.gain_linear();
      const double kf = lp.rice_k_linear;
      const double los_frac = std::isinf(kf) ? 1.0 : kf / (kf + 1.0);
      const double nlos_frac = std::isinf(kf) ? 0.0 : 1.0 / (kf + 1.0);

      double norm = 0.0;
      for (std::size_t l = 0; l < L; ++l) {
        tap_power[l] = lp.delay_spread_s > 0.0
                           ? std::exp(-static_cast<double>(l) * cfg.tap_spacing_s / lp.delay_spread_s)
                           : (l == 0 ? 1.0 : 0.0);
        norm += tap_power[l];
      }
      for (double& p : tap_power) p *= gain * nlos_frac / norm;

      // taps[l * Mi + m]: antenna-contiguous per tap.
      taps.assign(L * Mi, cd{});
      Rng rng(derive_seed(seed, {k, i}));
      for (std::size_t m = 0; m < Mi; ++m)
        for (std::size_t l = 0; l < L; ++l) taps[l * Mi + m] = complex_normal(rng, 1.0) * std::sqrt(tap_power[l]);
      if (los_frac > 0.0) {
        const double amp = std::sqrt(gain * los_frac);
        for (std::size_t m = 0; m < Mi; ++m) {
          const double d = distance(site.antenna_positions[m], ues[k]);
          taps[m] += std::polar(amp, -2.0 * kPi * d / lambda);
        }
      }
      for (std::size_t f = 0; f < F; ++f) {
        cd* dst = h.row(f, k) + offsets[i];
        for (std::size_t l = 0; l < L; ++l) kernels::axpy(phasor[l * F + f], taps.data() + l * Mi, dst, Mi);
      }
    }
  }
  return h;
}

NoisyChannelTensor add_estimation_error(const ChannelTensor& h, double nmse, std::uint64_t seed) {
  if (!(nmse >= 0.0)) throw ArgumentError("estimation error variance must be non-negative");
  NoisyChannelTensor out{h, nmse};
  if (nmse == 0.0) return out;
  const std::size_t F = h.num_subcarriers();
  for (std::size_t k = 0; k < h.num_ues(); ++k) {
    for (std::size_t i = 0; i < h.num_sites(); ++i) {
      const std::size_t off = h.site_begin(i);
      const std::size_t Mi = h.site_size(i);
      if (Mi == 0) continue;
      double sum = 0.0;
      for (std::size_t f = 0; f < F; ++f) sum += kernels::sum_abs(h.row(f, k) + off, Mi);
      const double mean_abs = sum / static_cast<double>(Mi * F);
      const double var = mean_abs * mean_abs * nmse;
      Rng rng(derive_seed(seed, {k, i}));
      for (std::size_t f = 0; f < F; ++f) {
        cd* dst = out.coeffs.row(f, k) + off;
        for (std::size_t m = 0; m < Mi; ++m) dst[m] += complex_normal(rng, var);
      }
    }
  }
  return out;
}

namespace {

void put_le(std::ostream& os, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  char buf[8];
  for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  os.write(buf, 8);
}

double get_le(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw ArgumentError("tensor file truncated");
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_tensor(std::ostream& os, const ChannelTensor& h) {
  os << h.num_ues() << ' ' << h.num_antennas() << ' ' << h.num_subcarriers() << '\n';
  for (std::size_t k = 0; k < h.num_ues(); ++k)
    for (std::size_t m = 0; m < h.num_antennas(); ++m)
      for (std::size_t f = 0; f < h.num_subcarriers(); ++f) {
        put_le(os, h.coeff(k, m, f).real());
        put_le(os, h.coeff(k, m, f).imag());
      }
}

ChannelTensor read_tensor(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw ArgumentError("tensor file: missing header");
  std::istringstream hs(header);
  std::size_t K = 0, M = 0, F = 0;
  if (!(hs >> K >> M >> F)) throw ArgumentError("tensor file: malformed header");
  ChannelTensor h(K, M, F);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t f = 0; f < F; ++f) {
        const double re = get_le(is);
        const double im = get_le(is);
        h.coeff(k, m, f) = {re, im};
      }
  return h;
}

}  // namespace mmsim
