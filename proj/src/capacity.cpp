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

#include "mmsim/capacity.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "mmsim/metrics.hpp"
#include "mmsim/powalloc.hpp"

namespace mmsim {

namespace {

// Normalized Gram matrix B = H H^H / noise of one subcarrier.
Eigen::MatrixXcd gram(const ChannelTensor& h, std::size_t f, double noise_w) {
  const auto nk = static_cast<Eigen::Index>(h.num_ues());
  const auto nm = static_cast<Eigen::Index>(h.num_antennas());
  Eigen::Map<const Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> hf(h.subcarrier(f), nk, nm);
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(nk, nk);
  b.selfadjointView<Eigen::Lower>().rankUpdate(hf, 1.0 / noise_w);
  return b.selfadjointView<Eigen::Lower>();
}

// log2 det(I + P^1/2 B P^1/2) and, optionally, the gain each user sees
// against the others' current powers.
double block_eval(const Eigen::MatrixXcd& b, const double* p, double* gains) {
  const Eigen::Index n = b.rows();
  Eigen::VectorXd s(n);
  for (Eigen::Index k = 0; k < n; ++k) s(k) = std::sqrt(p[k]);
  Eigen::MatrixXcd c = s.asDiagonal() * b * s.asDiagonal();
  c.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXcd> llt(c);
  if (llt.info() != Eigen::Success) throw NumericalError("dual MAC: covariance not positive definite");
  double logdet = 0.0;
  const auto& l = llt.matrixL();
  for (Eigen::Index k = 0; k < n; ++k) logdet += 2.0 * std::log2(std::real(llt.matrixLLT()(k, k)));
  if (gains) {
    // a_k = h_k^H (I + sum_j p_j h_j h_j^H)^-1 h_k, then remove user k itself.
    const Eigen::MatrixXcd x = l.solve(s.asDiagonal() * b);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double a = std::max(0.0, std::real(b(k, k)) - x.col(k).squaredNorm());
      const double den = 1.0 - p[k] * a;
      gains[k] = den > 0.0 ? a / den : std::real(b(k, k));
    }
  }
  return logdet;
}

}  // namespace

double bits_to_se(double bits, std::size_t num_subcarriers) { return bits * se_per_bit(num_subcarriers); }

double dual_mac_bits(const ChannelTensor& h, double noise_w, const std::vector<double>& powers) {
  const std::size_t nk = h.num_ues();
  double bits = 0.0;
  for (std::size_t f = 0; f < h.num_subcarriers(); ++f)
    bits += block_eval(gram(h, f, noise_w), powers.data() + f * nk, nullptr);
  return bits;
}

CapacityResult sum_capacity_bound(const DualMacProblem& p) {
  if (!p.channels) throw ArgumentError("sum_capacity_bound: no channels");
  if (!(p.total_power_w > 0.0) || !(p.noise_w > 0.0)) throw ArgumentError("sum_capacity_bound: power and noise must be positive");
  const ChannelTensor& h = *p.channels;
  const std::size_t nk = h.num_ues();
  const std::size_t nf = h.num_subcarriers();
  const std::size_t n = nk * nf;
  if (n == 0) throw ArgumentError("sum_capacity_bound: empty problem");

  std::vector<Eigen::MatrixXcd> grams(nf);
  for (std::size_t f = 0; f < nf; ++f) grams[f] = gram(h, f, p.noise_w);

  CapacityResult r;
  r.powers.assign(n, p.total_power_w / static_cast<double>(n));
  std::vector<double> gains(n);
  auto evaluate = [&](std::vector<double>* g) {
    double bits = 0.0;
    for (std::size_t f = 0; f < nf; ++f)
      bits += block_eval(grams[f], r.powers.data() + f * nk, g ? g->data() + f * nk : nullptr);
    return bits;
  };

  const double keep = static_cast<double>(nk - 1) / static_cast<double>(nk);
  double obj = evaluate(&gains);
  r.objective_trace.push_back(obj);
  for (int it = 1; it <= p.max_iters; ++it) {
    ParallelChannels ch{gains, p.total_power_w};
    const PowerAllocation a = waterfill(ch);
    for (std::size_t j = 0; j < n; ++j) r.powers[j] = keep * r.powers[j] + (1.0 - keep) * a.powers[j];
    const double next = evaluate(&gains);
    r.objective_trace.push_back(next);
    if (next < obj - 1e-12 * std::max(1.0, std::abs(obj))) {
      std::ostringstream os;
      os << "dual MAC objective decreased at iteration " << it << ": " << obj << " -> " << next;
      throw NumericalError(os.str());
    }
    const double change = std::abs(next - obj);
    obj = next;
    r.iterations = it;
    if (change < p.tolerance * std::max(1.0, std::abs(obj))) {
      r.bits = obj;
      r.se = bits_to_se(obj, nf);
      return r;
    }
  }
  std::ostringstream os;
  os << "dual MAC iterative water-filling did not converge in " << p.max_iters << " iterations; last objective "
     << obj << " bits, last change " << std::abs(r.objective_trace.back() - r.objective_trace[r.objective_trace.size() - 2]);
  throw NumericalError(os.str());
}

}  // namespace mmsim
