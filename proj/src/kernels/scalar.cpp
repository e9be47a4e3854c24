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

#include "mmsim/kernels.hpp"

namespace mmsim::kernels {
namespace {

cd dotu_scalar(const cd* a, const cd* b, std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
  }
  return {re, im};
}

cd dotc_scalar(const cd* a, const cd* b, std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {re, im};
}

double norm_sq_scalar(const cd* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::norm(a[i]);
  return s;
}

double sum_abs_scalar(const cd* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::sqrt(std::norm(a[i]));
  return s;
}

void axpy_scalar(cd alpha, const cd* x, cd* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void row_times_matrix_scalar(const cd* h, const cd* w, std::size_t n, std::size_t cols,
                             std::size_t ld, cd* out) {
  for (std::size_t j = 0; j < cols; ++j) out[j] = dotu_scalar(h, w + j * ld, n);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::kScalar,   "scalar",      &dotu_scalar,
                                 &dotc_scalar,   &norm_sq_scalar, &sum_abs_scalar,
                                 &axpy_scalar,   &row_times_matrix_scalar};
  return table;
}

}  // namespace mmsim::kernels
