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

#include <vector>

#include "mmsim/kernels.hpp"
#include "mmsim/rng.hpp"

using namespace mmsim;
namespace k = mmsim::kernels;

namespace {

std::vector<cd> random_vec(Rng& rng, std::size_t n) {
  std::vector<cd> v(n);
  for (auto& x : v) x = complex_normal(rng, 1.0);
  return v;
}

double rel(cd a, cd b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }
double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("scalar kernels match direct loops") {
    Rng rng(derive_seed(7, StreamTag::kTest, {1}));
    const auto& t = k::scalar_table();
    const auto a = random_vec(rng, 13);
    const auto b = random_vec(rng, 13);
    cd du{}, dc{};
    double ns = 0, sa = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      du += a[i] * b[i];
      dc += std::conj(a[i]) * b[i];
      ns += std::norm(a[i]);
      sa += std::abs(a[i]);
    }
    CHECK(rel(t.dotu(a.data(), b.data(), a.size()), du) < 1e-14);
    CHECK(rel(t.dotc(a.data(), b.data(), a.size()), dc) < 1e-14);
    CHECK(rel(t.norm_sq(a.data(), a.size()), ns) < 1e-14);
    CHECK(rel(t.sum_abs(a.data(), a.size()), sa) < 1e-14);
  }

  TEST_CASE("avx2 kernels agree with scalar reference") {
    if (!k::isa_supported(k::Isa::kAvx2)) {
      MESSAGE("AVX2 not available; equivalence check skipped");
      return;
    }
    const auto& s = k::scalar_table();
    const auto& v = k::table_for(k::Isa::kAvx2);
    Rng rng(derive_seed(7, StreamTag::kTest, {2}));
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 31u, 64u, 240u, 1001u}) {
      CAPTURE(n);
      const auto a = random_vec(rng, n);
      const auto b = random_vec(rng, n);
      const double tol = 1e-12 * std::max<std::size_t>(1, n);
      CHECK(rel(v.dotu(a.data(), b.data(), n), s.dotu(a.data(), b.data(), n)) < tol);
      CHECK(rel(v.dotc(a.data(), b.data(), n), s.dotc(a.data(), b.data(), n)) < tol);
      CHECK(rel(v.norm_sq(a.data(), n), s.norm_sq(a.data(), n)) < tol);
      CHECK(rel(v.sum_abs(a.data(), n), s.sum_abs(a.data(), n)) < tol);

      auto y1 = random_vec(rng, n);
      auto y2 = y1;
      const cd alpha{0.3, -1.7};
      s.axpy(alpha, a.data(), y1.data(), n);
      v.axpy(alpha, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(rel(y2[i], y1[i]) < 1e-14);

      const std::size_t cols = 5;
      const std::size_t ld = n + 3;
      const auto w = random_vec(rng, ld * cols);
      std::vector<cd> o1(cols), o2(cols);
      s.row_times_matrix(a.data(), w.data(), n, cols, ld, o1.data());
      v.row_times_matrix(a.data(), w.data(), n, cols, ld, o2.data());
      for (std::size_t j = 0; j < cols; ++j) CHECK(rel(o2[j], o1[j]) < tol);
    }
  }

  TEST_CASE("dispatch can switch tables") {
    const auto& before = k::active();
    k::select(k::Isa::kScalar);
    CHECK(k::active().isa == k::Isa::kScalar);
    k::select(before.isa);
    CHECK(k::active().isa == before.isa);
  }
}
