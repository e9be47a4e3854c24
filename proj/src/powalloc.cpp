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

#include "mmsim/powalloc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mmsim {

namespace {

void validate(const ParallelChannels& ch) {
  if (!(ch.budget > 0.0) || !std::isfinite(ch.budget)) throw ArgumentError("power budget must be positive");
  for (double g : ch.gains)
    if (!std::isfinite(g) || g < 0.0) throw ArgumentError("channel gains must be finite and nonnegative");
}

std::vector<int> usable(const ParallelChannels& ch) {
  std::vector<int> idx;
  for (std::size_t j = 0; j < ch.gains.size(); ++j)
    if (ch.gains[j] >= kMinUsableGain) idx.push_back(static_cast<int>(j));
  if (idx.empty()) throw ArgumentError("no usable channel");
  return idx;
}

void fill_active(PowerAllocation& a) {
  a.active_set.clear();
  for (std::size_t j = 0; j < a.powers.size(); ++j)
    if (a.powers[j] > 0.0) a.active_set.push_back(static_cast<int>(j));
}

}  // namespace

PowerAllocation waterfill(const ParallelChannels& ch) {
  validate(ch);
  std::vector<int> idx = usable(ch);
  // Strongest first; the active set is a prefix of this order.
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return ch.gains[a] > ch.gains[b] || (ch.gains[a] == ch.gains[b] && a < b); });
  double inv_sum = 0.0;
  double mu = 0.0;
  std::size_t n = 0;
  for (std::size_t m = 1; m <= idx.size(); ++m) {
    const double inv = 1.0 / ch.gains[idx[m - 1]];
    const double cand = (ch.budget + inv_sum + inv) / static_cast<double>(m);
    if (m > 1 && cand <= inv) break;
    inv_sum += inv;
    mu = cand;
    n = m;
  }
  PowerAllocation a;
  a.powers.assign(ch.gains.size(), 0.0);
  a.water_level = mu;
  for (std::size_t m = 0; m < n; ++m) a.powers[idx[m]] = std::max(0.0, mu - 1.0 / ch.gains[idx[m]]);
  const double total = std::accumulate(a.powers.begin(), a.powers.end(), 0.0);
  for (double& q : a.powers) q *= ch.budget / total;
  fill_active(a);
  return a;
}

PowerAllocation mercury_waterfill(const ParallelChannels& ch, const Alphabet& alphabet) {
  validate(ch);
  const std::vector<int> idx = usable(ch);
  double gmax = 0.0;
  for (int j : idx) gmax = std::max(gmax, ch.gains[j]);

  // Largest useful snr; beyond it the alphabet's mmse no longer moves.
  const double snr_cap = alphabet.mmse_inverse(0.0);
  PowerAllocation a;
  a.powers.assign(ch.gains.size(), 0.0);

  if (std::isfinite(snr_cap)) {
    double cap_sum = 0.0;
    for (int j : idx) cap_sum += snr_cap / ch.gains[j];
    if (cap_sum <= ch.budget) {
      // Every channel saturated; spend the remainder in proportion.
      for (int j : idx) a.powers[j] = snr_cap / ch.gains[j] * ch.budget / cap_sum;
      a.water_level = std::numeric_limits<double>::infinity();
      fill_active(a);
      return a;
    }
  }

  auto powers_at = [&](double log_mu, std::vector<double>* out) {
    const double mu = std::exp(log_mu);
    double s = 0.0;
    for (int j : idx) {
      const double g = ch.gains[j];
      const double t = 1.0 / (mu * g);
      const double q = t >= 1.0 ? 0.0 : alphabet.mmse_inverse(t) / g;
      if (out) (*out)[j] = q;
      s += q;
    }
    return s;
  };

  // Sum power is zero at mu = 1/gmax and increases with mu.
  double lo = -std::log(gmax);
  double f_lo = -ch.budget;
  double step = 1.0;
  double hi = lo + step;
  double f_hi = powers_at(hi, nullptr) - ch.budget;
  int iters = 0;
  constexpr int kMaxIters = 200;
  while (f_hi < 0.0) {
    lo = hi;
    f_lo = f_hi;
    step *= 2.0;
    hi = lo + step;
    f_hi = powers_at(hi, nullptr) - ch.budget;
    if (++iters > kMaxIters) throw NumericalError("mercury_waterfill: could not bracket the water level");
  }

  // Illinois variant of regula falsi on log mu.
  const double tol = 1e-12 * ch.budget;
  double x = hi;
  double fx = f_hi;
  int side = 0;
  for (iters = 0; iters < kMaxIters; ++iters) {
    x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    fx = powers_at(x, nullptr) - ch.budget;
    if (std::abs(fx) <= tol || hi - lo < 1e-15 * std::max(1.0, std::abs(x))) break;
    if (fx < 0.0) {
      lo = x;
      f_lo = fx;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = x;
      f_hi = fx;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
  }
  if (iters >= kMaxIters) throw NumericalError("mercury_waterfill: water level did not converge");

  const double total = powers_at(x, &a.powers);
  if (!(total > 0.0)) throw NumericalError("mercury_waterfill: zero allocation");
  for (double& q : a.powers) q *= ch.budget / total;
  a.water_level = std::exp(x);
  fill_active(a);
  return a;
}

double kkt_residual(const ParallelChannels& ch, const PowerAllocation& a, const Alphabet& alphabet) {
  if (!std::isfinite(a.water_level)) return 0.0;
  const double snr_cap = alphabet.mmse_inverse(0.0);
  double r = 0.0;
  for (int j : a.active_set) {
    const double g = ch.gains[j];
    const double snr = g * a.powers[j];
    if (snr >= snr_cap) continue;
    r = std::max(r, std::abs(g * alphabet.mmse(snr) * a.water_level - 1.0));
  }
  return r;
}

double sum_mi(const ParallelChannels& ch, const std::vector<double>& powers, const Alphabet& alphabet) {
  double s = 0.0;
  for (std::size_t j = 0; j < ch.gains.size(); ++j) s += alphabet.mi_bits(ch.gains[j] * powers[j]);
  return s;
}

}  // namespace mmsim
