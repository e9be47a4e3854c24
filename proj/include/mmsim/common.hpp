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

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace mmsim {

using cd = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline double distance(const Vec3& a, const Vec3& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

// Invalid user input: bad tiling, non-divisible antenna counts, unknown names.
// Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of an operation (negative variance, shape mismatch).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failure (non-convergence, rank deficiency that could not be
// recovered). Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankDeficientError : public NumericalError {
 public:
  RankDeficientError(const std::string& what, double cond)
      : NumericalError(what), condition_(cond) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

// A scheme that cannot be applied to a deployment (e.g. LS-MIMO with M_i < K).
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(std::string reason_code, const std::string& what)
      : std::runtime_error(what), reason_(std::move(reason_code)) {}
  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
};

}  // namespace mmsim
