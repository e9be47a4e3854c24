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

#include <algorithm>

#include "mmsim/metrics.hpp"
#include "mmsim/precoding.hpp"
#include "mmsim/rng.hpp"

using namespace mmsim;

namespace {

Eigen::MatrixXcd random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Eigen::MatrixXcd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = complex_normal(rng, 1.0);
  return m;
}

ChannelTensor random_tensor(Rng& rng, std::size_t K, std::vector<std::size_t> per_site, std::size_t F,
                            double scale = 1e-4) {
  std::vector<std::size_t> off;
  std::size_t M = 0;
  for (std::size_t s : per_site) {
    off.push_back(M);
    M += s;
  }
  ChannelTensor h(K, M, F, off);
  for (auto& c : h.data()) c = complex_normal(rng, scale * scale);
  return h;
}

Deployment synthetic_deployment(const std::vector<int>& antennas, double power_w) {
  Deployment d;
  for (int m : antennas) {
    BsSite s;
    s.num_antennas = m;
    s.power_budget_w = power_w;
    d.sites.push_back(s);
    d.total_antennas += m;
  }
  return d;
}

LinkBudget budget(std::size_t sites, double p, double noise) {
  LinkBudget b;
  b.bs_budget_w.assign(sites, p);
  b.noise_w = noise;
  return b;
}

const InfoTable& qam256() {
  static const InfoTable t = InfoTable::build(Constellation::square_qam(256));
  return t;
}

}  // namespace

TEST_SUITE("precoding") {
  TEST_CASE("ZF pseudo-inverse examples") {
    const ZfResult id = zf_pseudo_inverse(Eigen::MatrixXcd::Identity(3, 3));
    CHECK((id.t - Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-14);
    for (double g : id.gains) CHECK(g == doctest::Approx(1.0));

    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2, 3);
    h(0, 0) = 2.0;
    h(1, 2) = cd(0, 1);
    const ZfResult d = zf_pseudo_inverse(h);
    CHECK(d.t.col(0).norm() == doctest::Approx(0.5));
    CHECK(d.t.col(1).norm() == doctest::Approx(1.0));
    CHECK(d.gains[0] == doctest::Approx(4.0));
    CHECK(d.gains[1] == doctest::Approx(1.0));

    Rng rng(derive_seed(1, StreamTag::kTest, {30}));
    for (int i = 0; i < 50; ++i) {
      const Eigen::MatrixXcd a = random_matrix(rng, 4, 8);
      const ZfResult z = zf_pseudo_inverse(a);
      const Eigen::MatrixXcd p = a * z.t;
      CHECK((p - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }

  TEST_CASE("rank deficiency is detected and the weakest user dropped") {
    Rng rng(derive_seed(1, StreamTag::kTest, {31}));
    Eigen::MatrixXcd h = random_matrix(rng, 3, 6);
    h.row(2) = 0.5 * h.row(0);
    CHECK_THROWS_AS(zf_pseudo_inverse(h), RankDeficientError);
    std::vector<int> rows{0, 1, 2};
    const ZfResult z = zf_with_fallback(h, rows);
    CHECK(rows == std::vector<int>{0, 1});
    CHECK(z.t.cols() == 2);
  }

  TEST_CASE("scheduler") {
    Rng rng(derive_seed(1, StreamTag::kTest, {32}));
    const Eigen::MatrixXcd few = random_matrix(rng, 3, 4);
    CHECK(schedule_users(few, 4) == std::vector<int>{0, 1, 2});

    Eigen::MatrixXcd col(2, 3);
    col.row(0) = random_matrix(rng, 1, 3);
    col.row(1) = 3.0 * col.row(0);
    CHECK(schedule_users(col, 1) == std::vector<int>{1});

    const Eigen::MatrixXcd six = random_matrix(rng, 6, 3);
    const auto pick = schedule_users(six, 3);
    CHECK(pick.size() == 3);
    Eigen::Index strongest = 0;
    six.rowwise().squaredNorm().maxCoeff(&strongest);
    CHECK(std::find(pick.begin(), pick.end(), static_cast<int>(strongest)) != pick.end());
  }

  TEST_CASE("association") {
    Rng rng(derive_seed(1, StreamTag::kTest, {33}));
    const Deployment one = synthetic_deployment({4}, 0.1);
    const ChannelTensor h1 = random_tensor(rng, 5, {4}, 3);
    const Association a1 = associate_ues(h1, one);
    CHECK(a1.per_bs_ues == std::vector<int>{5});

    const Deployment two = synthetic_deployment({4, 4}, 0.1);
    ChannelTensor h2 = random_tensor(rng, 2, {4, 4}, 3);
    for (std::size_t f = 0; f < 3; ++f)
      for (std::size_t m = 4; m < 8; ++m) h2.coeff(0, m, f) *= std::sqrt(1000.0);
    const Association a2 = associate_ues(h2, two);
    CHECK(a2.serving_bs[0] == 1);

    // Mirror: swap the BSs and the UEs.
    ChannelTensor mir(2, 8, 3, {0, 4});
    for (std::size_t f = 0; f < 3; ++f)
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t m = 0; m < 8; ++m) mir.coeff(1 - k, (m + 4) % 8, f) = h2.coeff(k, m, f);
    const Association a3 = associate_ues(mir, two);
    CHECK(a3.serving_bs[1] == 1 - a2.serving_bs[0]);
    CHECK(a3.serving_bs[0] == 1 - a2.serving_bs[1]);
    CHECK(a3.per_bs_ues[0] == a2.per_bs_ues[1]);
  }

  TEST_CASE("local precoding on one BS equals network MIMO") {
    Rng rng(derive_seed(1, StreamTag::kTest, {34}));
    const Deployment dep = synthetic_deployment({8}, 0.05);
    const ChannelTensor h = random_tensor(rng, 4, {8}, 5);
    const LinkBudget link = budget(1, 0.05, 1e-12);
    const Association assoc = associate_ues(h, dep);
    const Precoder loc = precode_local(h, assoc, link, qam256());
    const Precoder net = precode_network(h, link, qam256(), PowerConstraint::kPerBs);
    CHECK(net.scale_factor == doctest::Approx(1.0));
    for (std::size_t f = 0; f < 5; ++f) CHECK((loc.w[f] - net.w[f]).norm() <= 1e-12 * net.w[f].norm());
    CHECK(satisfies_power_constraints(loc));
    CHECK(satisfies_power_constraints(net));
  }

  TEST_CASE("isolated cells reach the interference-free snr, coupled cells do not") {
    Rng rng(derive_seed(1, StreamTag::kTest, {35}));
    const Deployment dep = synthetic_deployment({6, 6}, 0.05);
    ChannelTensor h = random_tensor(rng, 4, {6, 6}, 4);
    Association assoc;
    assoc.serving_bs = {0, 0, 1, 1};
    assoc.per_bs_ues = {2, 2};
    const LinkBudget link = budget(2, 0.05, 1e-12);
    ChannelTensor iso = h;
    for (std::size_t f = 0; f < 4; ++f)
      for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t m = 0; m < 12; ++m)
          if ((m < 6) != (k < 2)) iso.coeff(k, m, f) = 0.0;

    const GaussianAlphabet g;
    const Precoder p_iso = precode_local(iso, assoc, link, g);
    const SinrGrid s_iso = compute_sinr(iso, p_iso, link.noise_w);
    for (std::size_t f = 0; f < 4; ++f)
      for (std::size_t j = 0; j < p_iso.stream_ue[f].size(); ++j) {
        const int k = p_iso.stream_ue[f][j];
        const cd sig = (Eigen::Map<const Eigen::RowVectorXcd>(iso.row(f, k), 12) * p_iso.w[f].col(j))(0);
        const double snr = std::norm(sig) / link.noise_w;
        CHECK(s_iso.at(k, f) == doctest::Approx(snr).epsilon(1e-10));
      }

    const Precoder p = precode_local(h, assoc, link, g);
    const SinrGrid s = compute_sinr(h, p, link.noise_w);
    for (std::size_t f = 0; f < 4; ++f)
      for (std::size_t j = 0; j < p.stream_ue[f].size(); ++j) {
        const int k = p.stream_ue[f][j];
        const cd sig = (Eigen::Map<const Eigen::RowVectorXcd>(h.row(f, k), 12) * p.w[f].col(j))(0);
        CHECK(s.at(k, f) < std::norm(sig) / link.noise_w);
      }
  }

  TEST_CASE("LS-MIMO nulls every UE") {
    Rng rng(derive_seed(1, StreamTag::kTest, {36}));
    const Deployment dep = synthetic_deployment({4, 4}, 0.05);
    const ChannelTensor h = random_tensor(rng, 4, {4, 4}, 3);
    const Association assoc = associate_ues(h, dep);
    const LinkBudget link = budget(2, 0.05, 1e-12);
    const Precoder p = precode_lsmimo(h, assoc, link, qam256());
    CHECK(satisfies_power_constraints(p));
    for (std::size_t f = 0; f < 3; ++f)
      for (std::size_t j = 0; j < p.stream_ue[f].size(); ++j) {
        const int served = p.stream_ue[f][j];
        const cd sig = (Eigen::Map<const Eigen::RowVectorXcd>(h.row(f, served), 8) * p.w[f].col(j))(0);
        for (std::size_t k = 0; k < 4; ++k) {
          if (static_cast<int>(k) == served) continue;
          const cd leak = (Eigen::Map<const Eigen::RowVectorXcd>(h.row(f, k), 8) * p.w[f].col(j))(0);
          CHECK(std::norm(leak) <= 1e-10 * std::norm(sig));
          CHECK(linear_to_db(std::norm(leak) / std::norm(sig)) <= -100.0);
        }
      }
    const ChannelTensor small = random_tensor(rng, 4, {3, 3}, 2);
    CHECK_THROWS_AS(precode_lsmimo(small, associate_ues(small, synthetic_deployment({3, 3}, 0.05)), link, qam256()),
                    InfeasibleError);
  }

  TEST_CASE("network MIMO scaling") {
    Rng rng(derive_seed(1, StreamTag::kTest, {37}));
    const LinkBudget link = budget(2, 0.05, 1e-12);
    // Swapping the BSs together with the UEs maps the channel onto itself.
    ChannelTensor sym(2, 4, 3, {0, 2});
    for (std::size_t f = 0; f < 3; ++f)
      for (std::size_t m = 0; m < 4; ++m) {
        const cd v = complex_normal(rng, 1e-8);
        sym.coeff(0, m, f) = v;
        sym.coeff(1, (m + 2) % 4, f) = v;
      }
    const Precoder ps = precode_network(sym, link, qam256(), PowerConstraint::kPerBs);
    CHECK(ps.scale_factor == doctest::Approx(1.0).epsilon(1e-9));

    const GaussianAlphabet g;
    for (int i = 0; i < 20; ++i) {
      ChannelTensor h = random_tensor(rng, 4, {3, 5}, 4);
      for (std::size_t f = 0; f < 4; ++f)
        for (std::size_t m = 0; m < 3; ++m) h.coeff(0, m, f) *= 10.0;
      const Precoder per = precode_network(h, link, g, PowerConstraint::kPerBs);
      const Precoder tot = precode_network(h, link, g, PowerConstraint::kTotal);
      CHECK(per.scale_factor > 0.0);
      CHECK(per.scale_factor <= 1.0);
      CHECK(satisfies_power_constraints(per));
      CHECK(satisfies_power_constraints(tot));
      CHECK(tot.total_power() == doctest::Approx(link.total_budget()));
      const double se_per = spectral_efficiency(compute_sinr(h, per, link.noise_w), g).sum;
      const double se_tot = spectral_efficiency(compute_sinr(h, tot, link.noise_w), g).sum;
      CHECK(se_per <= se_tot + 1e-9);
    }
  }

  TEST_CASE("single-UE MRT") {
    Rng rng(derive_seed(1, StreamTag::kTest, {38}));
    const ChannelTensor one = random_tensor(rng, 1, {1}, 4);
    const LinkBudget l1 = budget(1, 0.2, 1e-12);
    const auto s1 = mrt_single_snr(one, 0, l1);
    for (std::size_t f = 0; f < 4; ++f)
      CHECK(s1[f] == doctest::Approx(0.2 / 4 * std::norm(one.coeff(0, 0, f)) / 1e-12));

    // Two equal-norm BSs sharing the same sum power: coherent gain of 3 dB.
    ChannelTensor two(1, 2, 1, {0, 1});
    two.coeff(0, 0, 0) = cd(3e-5, 0);
    two.coeff(0, 1, 0) = cd(0, -3e-5);
    ChannelTensor single(1, 1, 1);
    single.coeff(0, 0, 0) = cd(3e-5, 0);
    const double g2 = mrt_single_snr(two, 0, budget(2, 0.05, 1e-12))[0];
    const double g1 = mrt_single_snr(single, 0, budget(1, 0.1, 1e-12))[0];
    CHECK(linear_to_db(g2 / g1) == doctest::Approx(3.0103).epsilon(1e-4));

    const ChannelTensor h = random_tensor(rng, 1, {4, 6, 2}, 3);
    const LinkBudget link{{0.1, 0.05, 0.2}, 1e-12};
    const Precoder p = precode_mrt_single(h, 0, link);
    CHECK(satisfies_power_constraints(p));
    const auto snr = mrt_single_snr(h, 0, link);
    const SinrGrid sg = compute_sinr(h, p, link.noise_w);
    for (std::size_t f = 0; f < 3; ++f) {
      CHECK(sg.at(0, f) == doctest::Approx(snr[f]).epsilon(1e-9));
      // Cauchy-Schwarz: per-BS beams aligned with h give sum_i sqrt(P_i / F) ||h_i||.
      double amp = 0.0;
      for (std::size_t i = 0; i < 3; ++i) {
        double n2 = 0.0;
        for (std::size_t m = 0; m < h.site_size(i); ++m) n2 += std::norm(h.coeff(0, h.site_begin(i) + m, f));
        amp += std::sqrt(link.bs_budget_w[i] / 3.0 * n2);
      }
      CHECK(snr[f] == doctest::Approx(amp * amp / link.noise_w).epsilon(1e-9));
      // No unit-norm per-BS beam does better.
      for (int r = 0; r < 200; ++r) {
        cd acc{};
        for (std::size_t i = 0; i < 3; ++i) {
          Eigen::VectorXcd v = random_matrix(rng, static_cast<Eigen::Index>(h.site_size(i)), 1);
          v *= std::sqrt(link.bs_budget_w[i] / 3.0) / v.norm();
          for (std::size_t m = 0; m < h.site_size(i); ++m) acc += h.coeff(0, h.site_begin(i) + m, f) * v(static_cast<Eigen::Index>(m));
        }
        CHECK(std::norm(acc) / link.noise_w <= snr[f] * (1 + 1e-9));
      }
    }
  }
}
