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

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mmsim/common.hpp"

namespace mmsim {

// Unit-energy square QAM alphabet.
class Constellation {
 public:
  // order must be 4, 16, 64 or 256.
  static Constellation square_qam(int order);

  int order() const { return order_; }
  const std::vector<cd>& points() const { return points_; }
  // In-phase amplitude levels; points are every (a + jb) with a, b in levels().
  const std::vector<double>& levels() const { return levels_; }

 private:
  int order_ = 0;
  std::vector<cd> points_;
  std::vector<double> levels_;
};

inline constexpr int kDefaultQuadratureNodes = 128;

// Gauss-Hermite nodes and weights for the weight function exp(-x^2).
std::vector<std::pair<double, double>> gauss_hermite(int nodes);

// I(s; sqrt(snr) s + n) in bits for n ~ CN(0, 1), by Gauss-Hermite
// quadrature over the noise. Square QAM separates into two PAM components, so
// the product rule reduces to one-dimensional sums per axis.
double mutual_information(const Constellation& c, double snr, int nodes = kDefaultQuadratureNodes);
// E|s - E[s | y]|^2 for the same channel.
double mmse(const Constellation& c, double snr, int nodes = kDefaultQuadratureNodes);

// Direct two-dimensional product-rule quadrature over the full alphabet.
// O(nodes^2 * order^2) per point; reference for the separable evaluation.
double mutual_information_2d(const Constellation& c, double snr, int nodes = kDefaultQuadratureNodes);
double mmse_2d(const Constellation& c, double snr, int nodes = kDefaultQuadratureNodes);

inline double gaussian_mi(double snr) { return std::log2(1.0 + snr); }
inline double gaussian_mmse(double snr) { return 1.0 / (1.0 + snr); }

// Signaling alphabet as seen by the power allocator and the rate evaluation.
class Alphabet {
 public:
  virtual ~Alphabet() = default;
  virtual std::string name() const = 0;
  virtual double mi_bits(double snr) const = 0;
  virtual double mmse(double snr) const = 0;
  // Smallest snr with mmse(snr) <= t, for t in [0, 1].
  virtual double mmse_inverse(double t) const = 0;
  // Rate ceiling in bits per channel use (+inf for Gaussian).
  virtual double max_bits() const = 0;
};

class GaussianAlphabet final : public Alphabet {
 public:
  std::string name() const override { return "gaussian"; }
  double mi_bits(double snr) const override { return gaussian_mi(snr); }
  double mmse(double snr) const override { return gaussian_mmse(snr); }
  double mmse_inverse(double t) const override { return t >= 1.0 ? 0.0 : 1.0 / t - 1.0; }
  double max_bits() const override;
};

// Mutual information and MMSE of a QAM alphabet tabulated on a dB grid and
// interpolated with monotone cubic (PCHIP) segments. Below the grid both
// curves are continued linearly in snr; above it they are held constant.
class InfoTable final : public Alphabet {
 public:
  static InfoTable build(const Constellation& c, int nodes = kDefaultQuadratureNodes, double db_min = -30.0,
                         double db_max = 60.0, double db_step = 0.1);

  std::string name() const override;
  double mi_bits(double snr) const override;
  double mmse(double snr) const override;
  // Top of the grid when t lies below every tabulated value.
  double mmse_inverse(double t) const override;
  double max_bits() const override { return max_bits_; }

  int order() const { return order_; }
  int nodes() const { return nodes_; }
  const std::vector<double>& snr_grid_db() const { return db_; }
  const std::vector<double>& mi_table() const { return mi_; }
  const std::vector<double>& mmse_table() const { return mmse_; }

  // "snr_db,mi_bits,mmse" with a leading comment naming order and nodes.
  void save_csv(std::ostream& os) const;
  static InfoTable load_csv(std::istream& is);

 private:
  void finalize();
  double interp(const std::vector<double>& y, const std::vector<double>& d, double x_db) const;

  int order_ = 0;
  int nodes_ = 0;
  double max_bits_ = 0.0;
  double db_min_ = 0.0;
  double db_step_ = 0.0;
  std::vector<double> db_;
  std::vector<double> mi_;
  std::vector<double> mmse_;
  std::vector<double> dmi_;
  std::vector<double> dmmse_;
};

}  // namespace mmsim
