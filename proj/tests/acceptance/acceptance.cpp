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

// Acceptance run: one PASS/FAIL line per criterion. A criterion marked as a
// known limitation still prints FAIL when it fails but does not change the
// exit status; any other failure exits with 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mmsim/capacity.hpp"
#include "mmsim/harness.hpp"
#include "mmsim/powalloc.hpp"
#include "mmsim/precoding.hpp"
#include "mmsim/rng.hpp"

using namespace mmsim;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;
int known_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail, double seconds, double limit_s,
            bool known_limitation = false) {
  const bool in_time = seconds <= limit_s;
  const bool pass = ok && in_time;
  if (!pass) ++(known_limitation ? known_failures : failures);
  std::printf("%s  %-26s %s [%.1f s, limit %.0f s%s]%s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str(), seconds,
              limit_s, in_time ? "" : ", over time", !pass && known_limitation ? " (known limitation)" : "");
  std::fflush(stdout);
}

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Audit {
  std::size_t precoders = 0;
  double min_scale = 1.0;
  double max_scale = 0.0;
  int violations = 0;
  int capacity_runs = 0;
} audit;

SweepResult audited_sweep(const SimConfig& cfg) {
  try {
    SweepResult r = run_sweep(cfg);
    audit.precoders += r.precoders_audited;
    if (r.precoders_audited > 0) {
      audit.min_scale = std::min(audit.min_scale, r.min_scale_factor);
      audit.max_scale = std::max(audit.max_scale, r.max_scale_factor);
    }
    return r;
  } catch (const NumericalError& e) {
    ++audit.violations;
    std::printf("      audit: %s\n", e.what());
    throw;
  }
}

const SummaryRow* find_row(const std::vector<SummaryRow>& rows, const std::string& dep, const std::string& scheme,
                           int m, double nmse_db) {
  for (const SummaryRow& r : rows)
    if (r.deployment == dep && r.scheme == scheme && r.antennas == m &&
        (r.sigma_e2_db == nmse_db || (std::isinf(r.sigma_e2_db) && std::isinf(nmse_db))))
      return &r;
  return nullptr;
}

const InfoTable& qam256() {
  static const InfoTable t = InfoTable::build(Constellation::square_qam(256));
  return t;
}

Eigen::MatrixXcd random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Eigen::MatrixXcd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = complex_normal(rng, 1.0);
  return m;
}

void saturation_anchor() {
  const auto t0 = Clock::now();
  SimConfig c;
  c.deployments = {"single-central"};
  c.antennas = {240};
  c.schemes = {"network"};
  c.num_ues = 24;
  c.noise_dbm -= 40.0;
  c.drops = 5;
  c.realizations = 1;
  c.simulated_prbs = 100;
  double mean = 0.0;
  bool ok = false;
  try {
    const SweepResult r = audited_sweep(c);
    mean = r.summary.at(0).sum_se_mean;
    ok = std::abs(mean - 161.28) <= 0.02 * 161.28;
  } catch (const std::exception& e) {
    std::printf("      error: %s\n", e.what());
  }
  report("saturation-anchor", ok, fmt("mean sum SE %.4f", mean) + fmt(" vs 161.28 (%.3f%%)", 100 * std::abs(mean - 161.28) / 161.28),
         elapsed(t0), 300);
}

void zf_orthogonality() {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(7, StreamTag::kTest, {1}));
  std::uniform_int_distribution<int> md(1, 64);
  double worst = 0.0;
  int done = 0;
  while (done < 1000) {
    const int m = md(rng);
    const int k = std::uniform_int_distribution<int>(1, m)(rng);
    const Eigen::MatrixXcd h = random_matrix(rng, k, m);
    const ZfResult z = zf_pseudo_inverse(h);
    if (z.condition > 1e4) continue;  // keep well-conditioned draws only
    const Eigen::MatrixXcd p = h * z.t;
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < k; ++i)
        if (i != j) worst = std::max(worst, std::norm(p(i, j)) / std::norm(p(j, j)));
    ++done;
  }
  report("zf-orthogonality", worst <= 1e-10, fmt("max relative leakage %.3e over 1000 instances", worst), elapsed(t0), 60);
}

void mercury_optimality() {
  const auto t0 = Clock::now();
  const InfoTable& t = qam256();
  const GaussianAlphabet gauss;
  Rng rng(derive_seed(7, StreamTag::kTest, {2}));
  std::uniform_int_distribution<int> nd(1, 16);
  std::normal_distribution<double> ldb(10.0, 15.0);
  std::exponential_distribution<double> ex(1.0);
  int below_uniform = 0, below_random = 0;
  double worst_kkt = 0.0, worst_gauss = 0.0;
  for (int inst = 0; inst < 200; ++inst) {
    ParallelChannels ch;
    const int n = nd(rng);
    for (int j = 0; j < n; ++j) ch.gains.push_back(db_to_linear(ldb(rng)));
    ch.budget = db_to_linear(ldb(rng) - 10.0);
    const PowerAllocation a = mercury_waterfill(ch, t);
    const double best = sum_mi(ch, a.powers, t);
    const double slack = 1e-12 * std::max(1.0, best);
    if (best + slack < sum_mi(ch, std::vector<double>(n, ch.budget / n), t)) ++below_uniform;
    bool beaten = false;
    for (int s = 0; s < 1000; ++s) {
      std::vector<double> q(n);
      for (double& v : q) v = ex(rng);
      const double tot = std::accumulate(q.begin(), q.end(), 0.0);
      for (double& v : q) v *= ch.budget / tot;
      if (sum_mi(ch, q, t) > best + slack) beaten = true;
    }
    below_random += beaten;
    worst_kkt = std::max(worst_kkt, kkt_residual(ch, a, t));
    const PowerAllocation g = mercury_waterfill(ch, gauss);
    const PowerAllocation w = waterfill(ch);
    for (int j = 0; j < n; ++j) worst_gauss = std::max(worst_gauss, std::abs(g.powers[j] - w.powers[j]) / ch.budget);
  }
  std::ostringstream d;
  d << "below uniform " << below_uniform << "/200, beaten by a random point " << below_random << "/200, "
    << fmt("max KKT %.2e, ", worst_kkt) << fmt("Gaussian vs water-filling %.2e", worst_gauss);
  report("mercury-optimality", below_uniform == 0 && below_random == 0 && worst_kkt <= 1e-6 && worst_gauss <= 1e-8,
         d.str(), elapsed(t0), 120);
}

void immse_consistency() {
  const auto t0 = Clock::now();
  const InfoTable& t = qam256();
  const auto& db = t.snr_grid_db();
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < db.size(); ++i) {
    const double d = (t.mi_table()[i + 1] - t.mi_table()[i - 1]) * std::log(2.0) /
                     (db_to_linear(db[i + 1]) - db_to_linear(db[i - 1]));
    worst = std::max(worst, std::abs(d - t.mmse_table()[i]));
  }
  const double top = t.mi_bits(db_to_linear(60.0));
  report("i-mmse", worst <= 1e-3 && top >= 7.99,
         fmt("max |dI/dsnr - mmse| %.2e over -30..60 dB, ", worst) + fmt("MI(60 dB) %.6f bits", top), elapsed(t0), 60);
}

void capacity_dominance() {
  const auto t0 = Clock::now();
  SimConfig c;
  c.modulation = "gaussian";
  c.drops = 10;
  c.simulated_prbs = 10;
  c.realizations = 1;
  std::vector<CapacityRow> rows;
  try {
    rows = run_capacity_compare(c, DeploymentKind::kTwoIndoor, {24, 48, 96});
    ++audit.capacity_runs;
  } catch (const std::exception& e) {
    std::printf("      error: %s\n", e.what());
    if (dynamic_cast<const NumericalError*>(&e)) ++audit.violations;
  }
  int dominated = 0;
  std::map<int, std::pair<double, int>> gap;
  for (const CapacityRow& r : rows) {
    if (r.bound_se >= r.network_se && r.bound_se >= r.network_total_se) ++dominated;
    gap[r.antennas].first += r.bound_se - r.network_total_se;
    gap[r.antennas].second += 1;
  }
  const double g24 = gap[24].second ? gap[24].first / gap[24].second : NAN;
  const double g96 = gap[96].second ? gap[96].first / gap[96].second : NAN;
  std::ostringstream d;
  d << "bound dominates " << dominated << "/" << rows.size() << " realizations, "
    << fmt("mean gap M=24 %.3f", g24) << fmt(" > M=96 %.3f", g96);
  report("capacity-dominance", !rows.empty() && dominated == static_cast<int>(rows.size()) && g96 < g24, d.str(),
         elapsed(t0), 600);
}

double two_user_bits(const Eigen::MatrixXcd& h, double p1, double p2) {
  const double n1 = h.row(0).squaredNorm(), n2 = h.row(1).squaredNorm();
  const double c = std::norm(h.row(0).dot(h.row(1)));
  return std::log2((1.0 + p1 * n1) * (1.0 + p2 * n2) - p1 * p2 * c);
}

double subset_rate(const Eigen::MatrixXcd& h, const std::vector<int>& rows, double snr) {
  Eigen::MatrixXcd sub(static_cast<Eigen::Index>(rows.size()), h.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = h.row(rows[i]);
  ZfResult z;
  try {
    z = zf_pseudo_inverse(sub);
  } catch (const RankDeficientError&) {
    return 0.0;
  }
  ParallelChannels ch{z.gains, snr};
  return sum_mi(ch, mercury_waterfill(ch, qam256()).powers, qam256());
}

void oracles() {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(7, StreamTag::kTest, {3}));
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const Eigen::MatrixXcd h = random_matrix(rng, 2, 2);
    const double P = db_to_linear(std::uniform_real_distribution<double>(-10.0, 30.0)(rng));
    ChannelTensor t(2, 2, 1);
    for (int k = 0; k < 2; ++k)
      for (int m = 0; m < 2; ++m) t.coeff(k, m, 0) = h(k, m);
    const CapacityResult r = sum_capacity_bound({&t, 1.0, P});
    const int n = 20000;
    double best = 0.0, arg = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double v = two_user_bits(h, P * i / n, P - P * i / n);
      if (v > best) best = v, arg = P * i / n;
    }
    double lo = std::max(0.0, arg - P / n), hi = std::min(P, arg + P / n);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int i = 0; i < 100; ++i) {
      const double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
      if (two_user_bits(h, x1, P - x1) > two_user_bits(h, x2, P - x2))
        hi = x2;
      else
        lo = x1;
    }
    best = std::max(best, two_user_bits(h, 0.5 * (lo + hi), P - 0.5 * (lo + hi)));
    worst = std::max(worst, std::abs(r.bits - best));
  }

  // Greedy scheduler against all 3-of-6 subsets at a 25 dB operating point.
  const double snr = db_to_linear(25.0);
  double rank_sum = 0.0;
  int top = 0;
  for (int seed = 0; seed < 100; ++seed) {
    Rng r2(derive_seed(static_cast<std::uint64_t>(seed), StreamTag::kTest, {4}));
    const Eigen::MatrixXcd h = random_matrix(r2, 6, 3);
    const double chosen = subset_rate(h, schedule_users(h, 3), snr);
    std::vector<double> all;
    for (int a = 0; a < 6; ++a)
      for (int b = a + 1; b < 6; ++b)
        for (int c = b + 1; c < 6; ++c) all.push_back(subset_rate(h, {a, b, c}, snr));
    const double tol = 1e-12 * chosen;
    const auto worse = std::count_if(all.begin(), all.end(), [&](double v) { return v < chosen - tol; });
    const auto better = std::count_if(all.begin(), all.end(), [&](double v) { return v > chosen + tol; });
    rank_sum += static_cast<double>(worse) / static_cast<double>(all.size() - 1);
    if (better < 2) ++top;
  }
  const double mean_rank = rank_sum / 100.0;
  std::ostringstream d;
  d << fmt("dual MAC vs grid max %.2e bits; ", worst) << fmt("scheduler mean percentile %.3f, ", mean_rank)
    << "top-10% on " << top << "/100 seeds";
  report("brute-force-oracles", worst <= 1e-4 && top == 100, d.str(), elapsed(t0), 300, true);
}

std::vector<int> antenna_grid(const std::string& dep) {
  std::vector<int> m;
  const int step = dep == "forty-indoor" ? 40 : 24;
  for (int v = step; v <= 240; v += step) m.push_back(v);
  return m;
}

void trends() {
  const auto t0 = Clock::now();
  SimConfig base;
  base.drops = 20;
  base.simulated_prbs = 10;
  base.realizations = 5;
  std::vector<SummaryRow> rows;
  std::vector<double> all_jain;
  bool ran = true;
  auto sweep = [&](SimConfig c) {
    const SweepResult r = audited_sweep(c);
    rows.insert(rows.end(), r.summary.begin(), r.summary.end());
    for (const MetricsRecord& m : r.records)
      if (!std::isnan(m.jain)) all_jain.push_back(m.jain);
  };
  try {
    for (const std::string& dep : base.deployments) {
      SimConfig c = base;
      c.deployments = {dep};
      c.antennas = antenna_grid(dep);
      c.schemes = dep == "four-indoor" ? std::vector<std::string>{"network", "local"} : std::vector<std::string>{"network"};
      sweep(c);
    }
    SimConfig c = base;
    c.deployments = {"four-indoor"};
    c.antennas = {48};
    c.schemes = {"network", "local"};
    c.nmse_db = {-40, -30, -20, -10};
    sweep(c);
  } catch (const std::exception& e) {
    std::printf("      error: %s\n", e.what());
    ran = false;
  }

  // (a)
  bool a_ok = ran;
  std::ostringstream a;
  for (const std::string& dep : base.deployments) {
    double prev = -1.0;
    bool mono = true;
    std::ostringstream curve;
    for (int m : antenna_grid(dep)) {
      const SummaryRow* r = find_row(rows, dep, "network", m, kPerfectCsi);
      const double v = r ? r->sum_se_mean : NAN;
      if (!(v >= prev)) mono = false;
      prev = v;
      curve << fmt(" %.2f", v);
    }
    a_ok = a_ok && mono;
    std::printf("      %-15s network SE:%s%s\n", dep.c_str(), curve.str().c_str(), mono ? "" : "  (not monotone)");
  }
  report("trend-a-network-vs-M", a_ok, "mean sum SE nondecreasing in M for every deployment", elapsed(t0), 1200);

  // (b)
  const SummaryRow* net48 = find_row(rows, "four-indoor", "network", 48, kPerfectCsi);
  const SummaryRow* loc48 = find_row(rows, "four-indoor", "local", 48, kPerfectCsi);
  const double n48 = net48 ? net48->sum_se_mean : NAN, l48 = loc48 ? loc48->sum_se_mean : NAN;
  report("trend-b-network-vs-local", n48 > l48, fmt("four-indoor M=48: network %.2f", n48) + fmt(" vs local %.2f", l48),
         elapsed(t0), 1200);

  // (c)
  const SummaryRow* j24 = find_row(rows, "four-indoor", "network", 24, kPerfectCsi);
  const SummaryRow* j240 = find_row(rows, "four-indoor", "network", 240, kPerfectCsi);
  const double lo24 = j24 ? j24->jain_mean : NAN, hi240 = j240 ? j240->jain_mean : NAN;
  const auto out_of_range = std::count_if(all_jain.begin(), all_jain.end(),
                                          [](double j) { return j < 1.0 / 24.0 - 1e-12 || j > 1.0 + 1e-12; });
  std::ostringstream c;
  c << fmt("four-indoor Jain M=240 %.4f", hi240) << fmt(" vs M=24 %.4f; ", lo24) << out_of_range << "/"
    << all_jain.size() << " records outside [1/24, 1]";
  report("trend-c-fairness", hi240 > lo24 && out_of_range == 0 && !all_jain.empty(), c.str(), elapsed(t0), 1200);

  // (d)
  std::ostringstream d;
  bool dec = true;
  double prev = INFINITY;
  d << "four-indoor M=48 network SE:";
  for (double e : {-40.0, -30.0, -20.0, -10.0}) {
    const SummaryRow* r = find_row(rows, "four-indoor", "network", 48, e);
    const double v = r ? r->sum_se_mean : NAN;
    if (!(v < prev)) dec = false;
    prev = v;
    d << fmt(" %.2f", v);
  }
  const SummaryRow* l40 = find_row(rows, "four-indoor", "local", 48, -40.0);
  const double lv = l40 ? l40->sum_se_mean : NAN;
  const double rel = std::abs(lv - l48) / l48;
  d << fmt("; local -40 dB %.2f", lv) << fmt(" vs perfect %.2f", l48) << fmt(" (%.2f%%)", 100 * rel);
  report("trend-d-estimation-error", dec && rel <= 0.05, d.str(), elapsed(t0), 1200);
}

void snr_map_structure() {
  const auto t0 = Clock::now();
  SimConfig c;
  const FloorPlan plan = build_floor_plan(c.scenario);
  auto min_room = [&](DeploymentKind k) {
    const auto rooms = room_average_snr_db(plan, run_snr_map(c, k, 40, 5.0, 20));
    double m = INFINITY;
    for (double v : rooms)
      if (!std::isnan(v)) m = std::min(m, v);
    return m;
  };
  double forty = NAN, single = NAN;
  try {
    forty = min_room(DeploymentKind::kFortyIndoor);
    single = min_room(DeploymentKind::kSingleCentral);
  } catch (const std::exception& e) {
    std::printf("      error: %s\n", e.what());
  }
  report("snr-map-structure", forty > single,
         fmt("M=40 minimum room-average SNR: forty-indoor %.2f dB", forty) + fmt(" vs single-central %.2f dB", single),
         elapsed(t0), 600);
}

void power_audit() {
  std::ostringstream d;
  d << audit.precoders << " sweep precoders and " << audit.capacity_runs << " capacity runs audited, "
    << audit.violations << " violations, " << fmt("scale factor in [%.4f, ", audit.min_scale)
    << fmt("%.4f]", audit.max_scale);
  report("power-audit",
         audit.violations == 0 && audit.precoders > 0 && audit.min_scale > 0.0 && audit.max_scale <= 1.0, d.str(), 0.0,
         0.0);
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  saturation_anchor();
  zf_orthogonality();
  mercury_optimality();
  immse_consistency();
  capacity_dominance();
  oracles();
  trends();
  snr_map_structure();
  power_audit();
  std::printf("%d criteria failed, %d of them known limitations, total %.1f s\n", failures + known_failures,
              known_failures, elapsed(t0));
  return failures == 0 ? 0 : 1;
}
