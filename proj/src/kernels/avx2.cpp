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

// AVX2 + FMA variants. Two complex<double> values per __m256d, laid out as
// [re0, im0, re1, im1]. Compiled with -mavx2 -mfma; only called after a
// runtime CPU check.

#include <immintrin.h>

#include "mmsim/kernels.hpp"

namespace mmsim::kernels {
namespace {

inline __m256d load2(const cd* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// Returns (sum over even lanes, sum over odd lanes).
inline void hsum_even_odd(__m256d v, double& even, double& odd) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  even = _mm_cvtsd_f64(s);
  odd = _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

template <bool kConjA>
cd dot_avx2(const cd* a, const cd* b, std::size_t n) {
  // same = sum a*b lane-wise, cross = sum a*swap(b)
  __m256d same0 = _mm256_setzero_pd();
  __m256d same1 = _mm256_setzero_pd();
  __m256d cross0 = _mm256_setzero_pd();
  __m256d cross1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a0 = load2(a + i);
    const __m256d b0 = load2(b + i);
    const __m256d a1 = load2(a + i + 2);
    const __m256d b1 = load2(b + i + 2);
    same0 = _mm256_fmadd_pd(a0, b0, same0);
    same1 = _mm256_fmadd_pd(a1, b1, same1);
    cross0 = _mm256_fmadd_pd(a0, _mm256_permute_pd(b0, 0b0101), cross0);
    cross1 = _mm256_fmadd_pd(a1, _mm256_permute_pd(b1, 0b0101), cross1);
  }
  for (; i + 2 <= n; i += 2) {
    const __m256d a0 = load2(a + i);
    const __m256d b0 = load2(b + i);
    same0 = _mm256_fmadd_pd(a0, b0, same0);
    cross0 = _mm256_fmadd_pd(a0, _mm256_permute_pd(b0, 0b0101), cross0);
  }
  double rr, ii, ri, ir;
  hsum_even_odd(_mm256_add_pd(same0, same1), rr, ii);
  hsum_even_odd(_mm256_add_pd(cross0, cross1), ri, ir);
  for (; i < n; ++i) {
    rr += a[i].real() * b[i].real();
    ii += a[i].imag() * b[i].imag();
    ri += a[i].real() * b[i].imag();
    ir += a[i].imag() * b[i].real();
  }
  if constexpr (kConjA) return {rr + ii, ri - ir};
  return {rr - ii, ri + ir};
}

cd dotu_avx2(const cd* a, const cd* b, std::size_t n) { return dot_avx2<false>(a, b, n); }
cd dotc_avx2(const cd* a, const cd* b, std::size_t n) { return dot_avx2<true>(a, b, n); }

double norm_sq_avx2(const cd* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v0 = load2(a + i);
    const __m256d v1 = load2(a + i + 2);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    acc1 = _mm256_fmadd_pd(v1, v1, acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += std::norm(a[i]);
  return s;
}

double sum_abs_avx2(const cd* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v0 = load2(a + i);
    const __m256d v1 = load2(a + i + 2);
    // hadd -> [|z0|^2, |z2|^2, |z1|^2, |z3|^2]
    const __m256d sq = _mm256_hadd_pd(_mm256_mul_pd(v0, v0), _mm256_mul_pd(v1, v1));
    acc = _mm256_add_pd(acc, _mm256_sqrt_pd(sq));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::sqrt(std::norm(a[i]));
  return s;
}

void axpy_avx2(cd alpha, const cd* x, cd* y, std::size_t n) {
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_setr_pd(-alpha.imag(), alpha.imag(), -alpha.imag(), alpha.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = load2(x + i);
    __m256d yv = load2(y + i);
    yv = _mm256_fmadd_pd(ar, xv, yv);
    yv = _mm256_fmadd_pd(ai, _mm256_permute_pd(xv, 0b0101), yv);
    _mm256_storeu_pd(reinterpret_cast<double*>(y + i), yv);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void row_times_matrix_avx2(const cd* h, const cd* w, std::size_t n, std::size_t cols,
                           std::size_t ld, cd* out) {
  for (std::size_t j = 0; j < cols; ++j) out[j] = dot_avx2<false>(h, w + j * ld, n);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{Isa::kAvx2,  "avx2",        &dotu_avx2,
                                 &dotc_avx2,  &norm_sq_avx2, &sum_abs_avx2,
                                 &axpy_avx2,  &row_times_matrix_avx2};
  return table;
}

}  // namespace mmsim::kernels
