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

#include <doctest.h>

#include <numeric>

#include "mmsim/capacity.hpp"
#include "mmsim/metrics.hpp"
#include "mmsim/rng.hpp"

using namespace mmsim;

namespace {

ChannelTensor random_tensor(Rng& rng, std::size_t K, std::size_t M, std::size_t F, double var) {
  ChannelTensor h(K, M, F);
  for (auto& c : h.data()) c = complex_normal(rng, var);
  return h;
}

// log2 det(I + (p1 h1 h1^H + p2 h2 h2^H) / noise) for two users on one subcarrier,
// by the 2 x 2 Gram form of the matrix determinant lemma.
double two_user_bits(const ChannelTensor& h, double noise, double p1, double p2) {
  const std::size_t M = h.num_antennas();
  double n1 = 0.0, n2 = 0.0;
  cd c{};
  for (std::size_t m = 0; m < M; ++m) {
    n1 += std::norm(h.coeff(0, m, 0));
    n2 += std::norm(h.coeff(1, m, 0));
    c += h.coeff(0, m, 0) * std::conj(h.coeff(1, m, 0));
  }
  const double a = 1.0 + p1 * n1 / noise;
  const double d = 1.0 + p2 * n2 / noise;
  return std::log2(a * d - p1 * p2 * std::norm(c) / (noise * noise));
}

}  // namespace

TEST_SUITE("capacity") {
  TEST_CASE("single user is water-filling over subcarriers") {
    Rng rng(derive_seed(1, StreamTag::kTest, {40}));
    const ChannelTensor one = random_tensor(rng, 1, 4, 1, 1.0);
    double g = 0.0;
    for (std::size_t m = 0; m < 4; ++m) g += std::norm(one.coeff(0, m, 0));
    const CapacityResult r = sum_capacity_bound({&one, 0.5, 3.0});
    CHECK(r.bits == doctest::Approx(std::log2(1.0 + 3.0 * g / 0.5)).epsilon(1e-10));

    // Two subcarriers with squared norms 4 and 1, noise 1, P = 2: level 1.625.
    ChannelTensor two(1, 1, 2);
    two.coeff(0, 0, 0) = 2.0;
    two.coeff(0, 0, 1) = 1.0;
    const CapacityResult w = sum_capacity_bound({&two, 1.0, 2.0});
    CHECK(w.powers[0] == doctest::Approx(1.375));
    CHECK(w.powers[1] == doctest::Approx(0.625));
    CHECK(w.bits == doctest::Approx(std::log2(6.5) + std::log2(1.625)));
    CHECK(w.se == doctest::Approx(w.bits * se_per_bit(2)));
  }

  TEST_CASE("identical channels share one dimension") {
    Rng rng(derive_seed(1, StreamTag::kTest, {41}));
    ChannelTensor h = random_tensor(rng, 2, 3, 1, 1.0);
    for (std::size_t m = 0; m < 3; ++m) h.coeff(1, m, 0) = h.coeff(0, m, 0);
    double g = 0.0;
    for (std::size_t m = 0; m < 3; ++m) g += std::norm(h.coeff(0, m, 0));
    const CapacityResult r = sum_capacity_bound({&h, 1.0, 10.0});
    CHECK(r.bits == doctest::Approx(std::log2(1.0 + 10.0 * g)).epsilon(1e-8));
  }

  TEST_CASE("two users on two antennas match a grid search") {
    Rng rng(derive_seed(1, StreamTag::kTest, {42}));
    for (int trial = 0; trial < 20; ++trial) {
      const ChannelTensor h = random_tensor(rng, 2, 2, 1, 1.0);
      const double P = std::pow(10.0, -1.0 + 0.15 * trial);
      double best = -1.0, arg = 0.0;
      const int n = 20000;
      for (int i = 0; i <= n; ++i) {
        const double p1 = P * i / n;
        const double v = two_user_bits(h, 1.0, p1, P - p1);
        if (v > best) best = v, arg = p1;
      }
      // Golden-section refinement around the best grid point.
      double lo = std::max(0.0, arg - P / n), hi = std::min(P, arg + P / n);
      const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
      for (int i = 0; i < 100; ++i) {
        const double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
        if (two_user_bits(h, 1.0, x1, P - x1) > two_user_bits(h, 1.0, x2, P - x2))
          hi = x2;
        else
          lo = x1;
      }
      best = std::max(best, two_user_bits(h, 1.0, 0.5 * (lo + hi), P - 0.5 * (lo + hi)));
      const CapacityResult r = sum_capacity_bound({&h, 1.0, P});
      CHECK(std::abs(r.bits - best) <= 1e-4);
      CHECK(r.bits <= best + 1e-9);
      CHECK(dual_mac_bits(h, 1.0, r.powers) == doctest::Approx(r.bits));
    }
  }

  TEST_CASE("invariant to a common scaling of channel and noise") {
    Rng rng(derive_seed(1, StreamTag::kTest, {43}));
    ChannelTensor h = random_tensor(rng, 4, 6, 3, 1.0);
    const CapacityResult a = sum_capacity_bound({&h, 1.0, 5.0});
    for (auto& c : h.data()) c *= 1e-5;
    const CapacityResult b = sum_capacity_bound({&h, 1e-10, 5.0});
    CHECK(b.bits == doctest::Approx(a.bits).epsilon(1e-9));
  }

  TEST_CASE("objective is monotone and powers meet the budget") {
    Rng rng(derive_seed(1, StreamTag::kTest, {44}));
    const ChannelTensor h = random_tensor(rng, 6, 8, 4, 1.0);
    const CapacityResult r = sum_capacity_bound({&h, 1.0, 20.0});
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
      CHECK(r.objective_trace[i] >= r.objective_trace[i - 1] - 1e-12 * r.objective_trace[i - 1]);
    CHECK(std::accumulate(r.powers.begin(), r.powers.end(), 0.0) == doctest::Approx(20.0));
    for (double p : r.powers) CHECK(p >= 0.0);
    const std::vector<double> uniform(24, 20.0 / 24.0);
    CHECK(r.bits >= dual_mac_bits(h, 1.0, uniform));
  }

  TEST_CASE("argument errors") {
    ChannelTensor h(1, 1, 1);
    h.coeff(0, 0, 0) = 1.0;
    CHECK_THROWS_AS(sum_capacity_bound({nullptr, 1.0, 1.0}), ArgumentError);
    CHECK_THROWS_AS(sum_capacity_bound({&h, 1.0, 0.0}), ArgumentError);
    CHECK_THROWS_AS(sum_capacity_bound({&h, 0.0, 1.0}), ArgumentError);
  }
}
