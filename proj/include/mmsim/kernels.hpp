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

// Data-parallel inner loops over complex<double> vectors. Each kernel has a
// scalar reference implementation and, where the CPU supports it, an AVX2/FMA
// variant; the variant is chosen once at runtime (override with the
// MMSIM_SIMD=scalar|avx2 environment variable).

#include <cstddef>
#include <string_view>

#include "mmsim/common.hpp"

namespace mmsim::kernels {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;
  // sum_i a_i * b_i
  cd (*dotu)(const cd* a, const cd* b, std::size_t n);
  // sum_i conj(a_i) * b_i
  cd (*dotc)(const cd* a, const cd* b, std::size_t n);
  // sum_i |a_i|^2
  double (*norm_sq)(const cd* a, std::size_t n);
  // sum_i |a_i|
  double (*sum_abs)(const cd* a, std::size_t n);
  // y_i += alpha * x_i
  void (*axpy)(cd alpha, const cd* x, cd* y, std::size_t n);
  // out_j = sum_m h_m * w[j * ld + m] for j < cols
  void (*row_times_matrix)(const cd* h, const cd* w, std::size_t n, std::size_t cols,
                           std::size_t ld, cd* out);
};

const KernelTable& scalar_table();
#if defined(MMSIM_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

bool isa_supported(Isa isa);
const KernelTable& table_for(Isa isa);

// Kernel table currently in use.
const KernelTable& active();
// Switches the process-wide kernel table; throws ArgumentError if unsupported.
void select(Isa isa);

inline cd dotu(const cd* a, const cd* b, std::size_t n) { return active().dotu(a, b, n); }
inline cd dotc(const cd* a, const cd* b, std::size_t n) { return active().dotc(a, b, n); }
inline double norm_sq(const cd* a, std::size_t n) { return active().norm_sq(a, n); }
inline double sum_abs(const cd* a, std::size_t n) { return active().sum_abs(a, n); }
inline void axpy(cd alpha, const cd* x, cd* y, std::size_t n) { active().axpy(alpha, x, y, n); }
inline void row_times_matrix(const cd* h, const cd* w, std::size_t n, std::size_t cols,
                             std::size_t ld, cd* out) {
  active().row_times_matrix(h, w, n, cols, ld, out);
}

}  // namespace mmsim::kernels
