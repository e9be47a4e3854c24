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

#include "mmsim/modulation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace mmsim {

Constellation Constellation::square_qam(int order) {
  if (order != 4 && order != 16 && order != 64 && order != 256)
    throw ArgumentError("square QAM order must be 4, 16, 64 or 256");
  const int side = static_cast<int>(std::lround(std::sqrt(order)));
  // Levels +-1, +-3, ... scaled to unit average symbol energy.
  const double scale = std::sqrt(3.0 / (2.0 * (order - 1)));
  Constellation c;
  c.order_ = order;
  for (int i = 0; i < side; ++i) c.levels_.push_back(scale * (2 * i - (side - 1)));
  for (double re : c.levels_)
    for (double im : c.levels_) c.points_.emplace_back(re, im);
  return c;
}

std::vector<std::pair<double, double>> gauss_hermite(int nodes) {
  if (nodes < 1) throw ArgumentError("gauss_hermite: need at least one node");
  // Golub-Welsch: eigen-decomposition of the symmetric Jacobi matrix.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(nodes, nodes);
  for (int i = 1; i < nodes; ++i) J(i, i - 1) = J(i - 1, i) = std::sqrt(0.5 * i);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    out.emplace_back(es.eigenvalues()(i), std::sqrt(kPi) * v0 * v0);
  }
  return out;
}

namespace {

// One real PAM axis: y = a s + x with x of density exp(-x^2)/sqrt(pi).
// Returns (mutual information in nats, mmse) for that axis.
std::pair<double, double> pam_axis(const std::vector<double>& levels, double amp,
                                   const std::vector<std::pair<double, double>>& gh) {
  const std::size_t L = levels.size();
  std::vector<double> expo(L);
  double info = 0.0;
  double err = 0.0;
  for (double s : levels) {
    for (const auto& [x, w] : gh) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < L; ++j) {
        const double d = amp * (s - levels[j]) + x;
        expo[j] = -d * d + x * x;
        mx = std::max(mx, expo[j]);
      }
      double den = 0.0;
      double num = 0.0;
      for (std::size_t j = 0; j < L; ++j) {
        const double e = std::exp(expo[j] - mx);
        den += e;
        num += e * levels[j];
      }
      const double shat = num / den;
      info += w * (std::log(static_cast<double>(L)) - (std::log(den) + mx));
      err += w * (s - shat) * (s - shat);
    }
  }
  const double norm = 1.0 / (std::sqrt(kPi) * static_cast<double>(L));
  return {info * norm, err * norm};
}

}  // namespace

double mutual_information(const Constellation& c, double snr, int nodes) {
  if (!(snr > 0.0)) return 0.0;
  const auto gh = gauss_hermite(nodes);
  const double nats = 2.0 * pam_axis(c.levels(), std::sqrt(snr), gh).first;
  return std::clamp(nats / std::log(2.0), 0.0, std::log2(static_cast<double>(c.order())));
}

double mmse(const Constellation& c, double snr, int nodes) {
  if (!(snr > 0.0)) return 1.0;
  const auto gh = gauss_hermite(nodes);
  return std::clamp(2.0 * pam_axis(c.levels(), std::sqrt(snr), gh).second, 0.0, 1.0);
}

namespace {

std::pair<double, double> qam_2d(const Constellation& c, double snr, int nodes) {
  const auto gh = gauss_hermite(nodes);
  const auto& pts = c.points();
  const std::size_t N = pts.size();
  const double amp = std::sqrt(snr);
  std::vector<double> expo(N);
  double info = 0.0;
  double err = 0.0;
  for (const cd& s : pts) {
    for (const auto& [xa, wa] : gh) {
      for (const auto& [xb, wb] : gh) {
        const cd n{xa, xb};
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < N; ++j) {
          expo[j] = -std::norm(amp * (s - pts[j]) + n) + std::norm(n);
          mx = std::max(mx, expo[j]);
        }
        double den = 0.0;
        cd num{};
        for (std::size_t j = 0; j < N; ++j) {
          const double e = std::exp(expo[j] - mx);
          den += e;
          num += e * pts[j];
        }
        const double w = wa * wb;
        info += w * (std::log(static_cast<double>(N)) - (std::log(den) + mx));
        err += w * std::norm(s - num / den);
      }
    }
  }
  const double norm = 1.0 / (kPi * static_cast<double>(N));
  return {info * norm / std::log(2.0), err * norm};
}

}  // namespace

double mutual_information_2d(const Constellation& c, double snr, int nodes) {
  if (!(snr > 0.0)) return 0.0;
  return std::clamp(qam_2d(c, snr, nodes).first, 0.0, std::log2(static_cast<double>(c.order())));
}

double mmse_2d(const Constellation& c, double snr, int nodes) {
  if (!(snr > 0.0)) return 1.0;
  return std::clamp(qam_2d(c, snr, nodes).second, 0.0, 1.0);
}

double GaussianAlphabet::max_bits() const { return std::numeric_limits<double>::infinity(); }

// ---------------------------------------------------------------------------
// InfoTable

InfoTable InfoTable::build(const Constellation& c, int nodes, double db_min, double db_max, double db_step) {
  if (!(db_step > 0.0) || !(db_max > db_min)) throw ArgumentError("InfoTable: bad grid");
  InfoTable t;
  t.order_ = c.order();
  t.nodes_ = nodes;
  t.max_bits_ = std::log2(static_cast<double>(c.order()));
  t.db_min_ = db_min;
  t.db_step_ = db_step;
  const auto gh = gauss_hermite(nodes);
  const int n = static_cast<int>(std::lround((db_max - db_min) / db_step)) + 1;
  for (int i = 0; i < n; ++i) {
    const double db = db_min + i * db_step;
    const auto [nats, err] = pam_axis(c.levels(), std::sqrt(db_to_linear(db)), gh);
    t.db_.push_back(db);
    t.mi_.push_back(std::clamp(2.0 * nats / std::log(2.0), 0.0, t.max_bits_));
    t.mmse_.push_back(std::clamp(2.0 * err, 0.0, 1.0));
  }
  t.finalize();
  return t;
}

namespace {

// Fritsch-Carlson derivatives for monotone piecewise-cubic Hermite data on a
// uniform grid.
std::vector<double> pchip_slopes(const std::vector<double>& y, double h) {
  const std::size_t n = y.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y[i + 1] - y[i]) / h;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) continue;
    d[i] = 2.0 / (1.0 / delta[i - 1] + 1.0 / delta[i]);
  }
  d[0] = delta[0];
  d[n - 1] = delta[n - 2];
  return d;
}

}  // namespace

void InfoTable::finalize() {
  // Quadrature noise in the saturated tail must not break monotonicity.
  for (std::size_t i = 1; i < mi_.size(); ++i) mi_[i] = std::max(mi_[i], mi_[i - 1]);
  for (std::size_t i = 1; i < mmse_.size(); ++i) mmse_[i] = std::min(mmse_[i], mmse_[i - 1]);
  dmi_ = pchip_slopes(mi_, db_step_);
  dmmse_ = pchip_slopes(mmse_, db_step_);
}

std::string InfoTable::name() const { return "qam" + std::to_string(order_); }

double InfoTable::interp(const std::vector<double>& y, const std::vector<double>& d, double x_db) const {
  const double pos = (x_db - db_min_) / db_step_;
  std::size_t i = static_cast<std::size_t>(std::max(0.0, std::floor(pos)));
  if (i + 1 >= y.size()) return y.back();
  const double t = pos - static_cast<double>(i);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * y[i] + h10 * db_step_ * d[i] + h01 * y[i + 1] + h11 * db_step_ * d[i + 1];
}

double InfoTable::mi_bits(double snr) const {
  if (!(snr > 0.0)) return 0.0;
  const double db = linear_to_db(snr);
  if (db < db_.front()) return mi_.front() * snr / db_to_linear(db_.front());
  if (db >= db_.back()) return mi_.back();
  return std::clamp(interp(mi_, dmi_, db), 0.0, max_bits_);
}

double InfoTable::mmse(double snr) const {
  if (!(snr > 0.0)) return 1.0;
  const double db = linear_to_db(snr);
  if (db < db_.front()) return 1.0 - (1.0 - mmse_.front()) * snr / db_to_linear(db_.front());
  if (db >= db_.back()) return mmse_.back();
  return std::clamp(interp(mmse_, dmmse_, db), 0.0, 1.0);
}

double InfoTable::mmse_inverse(double t) const {
  if (t >= 1.0) return 0.0;
  if (t > mmse_.front()) return db_to_linear(db_.front()) * (1.0 - t) / (1.0 - mmse_.front());
  // First grid index with mmse <= t; the root lies in the cell before it.
  const auto it = std::partition_point(mmse_.begin(), mmse_.end(), [t](double v) { return v > t; });
  if (it == mmse_.end()) return db_to_linear(db_.back());
  const std::size_t j = static_cast<std::size_t>(it - mmse_.begin());
  if (mmse_[j] == t) return db_to_linear(db_[j]);
  const std::size_t i = j - 1;
  double lo = db_[i];
  double hi = db_[j];
  double x = lo + db_step_ * (mmse_[i] - t) / (mmse_[i] - mmse_[j]);
  // Safeguarded Newton on the monotone cubic segment.
  for (int it2 = 0; it2 < 100; ++it2) {
    const double fx = interp(mmse_, dmmse_, x) - t;
    if (fx > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double pos = (x - db_min_) / db_step_ - static_cast<double>(i);
    const double tt = std::clamp(pos, 0.0, 1.0);
    const double dh00 = 6 * tt * tt - 6 * tt;
    const double dh10 = 3 * tt * tt - 4 * tt + 1;
    const double dh01 = -6 * tt * tt + 6 * tt;
    const double dh11 = 3 * tt * tt - 2 * tt;
    const double deriv =
        (dh00 * mmse_[i] + dh01 * mmse_[j]) / db_step_ + dh10 * dmmse_[i] + dh11 * dmmse_[j];
    double next = deriv < 0.0 ? x - fx / deriv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    // 1e-10 relative in snr is ~4.3e-10 dB.
    if (std::abs(next - x) < 4e-11 || hi - lo < 4e-11) {
      x = next;
      break;
    }
    x = next;
  }
  return db_to_linear(x);
}

void InfoTable::save_csv(std::ostream& os) const {
  os << "# order=" << order_ << " quadrature_nodes=" << nodes_ << '\n';
  os << "snr_db,mi_bits,mmse\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < db_.size(); ++i) os << db_[i] << ',' << mi_[i] << ',' << mmse_[i] << '\n';
}

InfoTable InfoTable::load_csv(std::istream& is) {
  InfoTable t;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string tok;
      while (ls >> tok) {
        if (tok.rfind("order=", 0) == 0) t.order_ = std::stoi(tok.substr(6));
        if (tok.rfind("quadrature_nodes=", 0) == 0) t.nodes_ = std::stoi(tok.substr(17));
      }
      continue;
    }
    if (!header) {
      if (line != "snr_db,mi_bits,mmse") throw ArgumentError("info table: unexpected header '" + line + "'");
      header = true;
      continue;
    }
    std::istringstream ls(line);
    double db, mi, mm;
    char c1, c2;
    if (!(ls >> db >> c1 >> mi >> c2 >> mm)) throw ArgumentError("info table: malformed row '" + line + "'");
    t.db_.push_back(db);
    t.mi_.push_back(mi);
    t.mmse_.push_back(mm);
  }
  if (t.order_ <= 0 || t.db_.size() < 2) throw ArgumentError("info table: missing order or rows");
  t.max_bits_ = std::log2(static_cast<double>(t.order_));
  t.db_min_ = t.db_.front();
  t.db_step_ = t.db_[1] - t.db_[0];
  t.finalize();
  return t;
}

}  // namespace mmsim
