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

#include "mmsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <thread>

#include "mmsim/capacity.hpp"
#include "mmsim/precoding.hpp"
#include "mmsim/rng.hpp"

namespace mmsim {

namespace {

constexpr const char* kCodeVersion = "0.1.0";

std::uint64_t kind_code(DeploymentKind k) { return static_cast<std::uint64_t>(k); }

std::uint64_t ue_drop_seed(const SimConfig& cfg, int drop) {
  return derive_seed(cfg.seed, StreamTag::kDrop, {static_cast<std::uint64_t>(drop)});
}
std::uint64_t shadowing_seed(const SimConfig& cfg, DeploymentKind k, int drop) {
  return derive_seed(cfg.seed, StreamTag::kShadowing, {kind_code(k), static_cast<std::uint64_t>(drop)});
}
std::uint64_t fading_seed(const SimConfig& cfg, DeploymentKind k, int drop, int r) {
  return derive_seed(cfg.seed, StreamTag::kFading,
                     {kind_code(k), static_cast<std::uint64_t>(drop), static_cast<std::uint64_t>(r)});
}
std::uint64_t estimation_seed(const SimConfig& cfg, DeploymentKind k, int drop, int r, double nmse_db) {
  return derive_seed(cfg.seed, StreamTag::kEstimation,
                     {kind_code(k), static_cast<std::uint64_t>(drop), static_cast<std::uint64_t>(r),
                      std::bit_cast<std::uint64_t>(nmse_db)});
}

std::ofstream open_csv(const std::filesystem::path& path, const SimConfig& cfg, const char* header) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << "# run " << config_hash(cfg) << '\n' << header << '\n';
  return os;
}

}  // namespace

int resolve_threads(const SimConfig& cfg) {
  if (const char* env = std::getenv("MMSIM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  if (cfg.threads > 0) return cfg.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (std::size_t i = next++; i < n && !failed; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

SweepResult run_sweep(const SimConfig& cfg) {
  cfg.validate();
  const FloorPlan plan = build_floor_plan(cfg.scenario);
  const auto alphabet = make_alphabet(cfg.modulation, cfg.quadrature_nodes);
  const int threads = resolve_threads(cfg);
  const int nf = cfg.simulated_prbs;
  const auto freqs = representative_subcarriers(nf, cfg.active_bandwidth_hz);
  const double noise = cfg.noise_w();

  std::vector<DeploymentKind> kinds;
  for (const auto& d : cfg.deployments) kinds.push_back(parse_deployment(d));
  std::vector<Scheme> schemes;
  for (const auto& s : cfg.schemes) schemes.push_back(parse_scheme(s));

  // Feasibility per (deployment, M, scheme).
  struct Cell {
    std::size_t d = 0;
    int m = 0;
    bool placed = false;
    Deployment dep;
    std::vector<std::string> skip;  // per scheme; empty string when runnable
  };
  std::vector<Cell> cells;
  for (std::size_t d = 0; d < kinds.size(); ++d) {
    for (int m : cfg.antennas) {
      Cell c;
      c.d = d;
      c.m = m;
      c.skip.assign(schemes.size(), "");
      try {
        c.dep = place_deployment(plan, kinds[d], m, cfg.sum_power_dbm, cfg.channel.carrier_hz);
        c.placed = true;
      } catch (const ConfigError&) {
        std::fill(c.skip.begin(), c.skip.end(), "skipped:antennas-not-divisible");
      }
      if (c.placed) {
        for (std::size_t s = 0; s < schemes.size(); ++s) {
          const int mi = m / static_cast<int>(c.dep.num_sites());
          if (schemes[s] == Scheme::kLsMimo && mi < cfg.num_ues) c.skip[s] = "skipped:lsmimo-infeasible";
          if ((schemes[s] == Scheme::kNetwork || schemes[s] == Scheme::kNetworkTotal) && m < cfg.num_ues)
            c.skip[s] = "skipped:network-infeasible";
        }
      }
      cells.push_back(std::move(c));
    }
  }

  std::vector<UeDrop> drops(static_cast<std::size_t>(cfg.drops));
  for (int q = 0; q < cfg.drops; ++q) drops[q] = sample_ue_drop(plan, cfg.num_ues, ue_drop_seed(cfg, q), q, cfg.scenario.ue_height_m);

  // Large-scale profiles depend on site positions only, not on M.
  std::map<std::size_t, std::size_t> profile_slot;  // deployment index -> representative cell
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (cells[c].placed && !profile_slot.count(cells[c].d)) profile_slot[cells[c].d] = c;
  std::vector<std::pair<std::size_t, int>> profile_jobs;
  for (const auto& [d, c] : profile_slot)
    for (int q = 0; q < cfg.drops; ++q) profile_jobs.emplace_back(d, q);
  std::map<std::pair<std::size_t, int>, std::vector<LinkProfile>> profiles;
  {
    std::vector<std::vector<LinkProfile>> out(profile_jobs.size());
    parallel_for(profile_jobs.size(), threads, [&](std::size_t j) {
      const auto [d, q] = profile_jobs[j];
      out[j] = classify_links(plan, cells[profile_slot.at(d)].dep, drops[q].positions, cfg.channel,
                              shadowing_seed(cfg, kinds[d], q));
    });
    for (std::size_t j = 0; j < profile_jobs.size(); ++j) profiles[profile_jobs[j]] = std::move(out[j]);
  }

  struct Unit {
    std::size_t cell = 0;
    int drop = 0;
    int realization = 0;
  };
  std::vector<Unit> units;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (!cells[c].placed) continue;
    if (std::all_of(cells[c].skip.begin(), cells[c].skip.end(), [](const std::string& s) { return !s.empty(); }))
      continue;
    for (int q = 0; q < cfg.drops; ++q)
      for (int r = 0; r < cfg.realizations; ++r) units.push_back({c, q, r});
  }

  struct UnitOut {
    std::vector<MetricsRecord> records;
    std::size_t audited = 0;
    double min_scale = 1.0;
    double max_scale = 0.0;
  };
  std::vector<UnitOut> results(units.size());
  parallel_for(units.size(), threads, [&](std::size_t u) {
    const Unit& unit = units[u];
    const Cell& cell = cells[unit.cell];
    const DeploymentKind kind = kinds[cell.d];
    const auto& prof = profiles.at({cell.d, unit.drop});
    const auto& ues = drops[unit.drop].positions;
    const ChannelTensor h =
        generate_channel(prof, cell.dep, ues, cfg.channel, freqs, fading_seed(cfg, kind, unit.drop, unit.realization));
    const LinkBudget link = make_link_budget(cell.dep, nf, noise, cfg.subcarriers);
    UnitOut& out = results[u];
    for (double nmse_db : cfg.nmse_db) {
      ChannelTensor noisy;
      const bool perfect = std::isinf(nmse_db);
      if (!perfect)
        noisy = add_estimation_error(h, db_to_linear(nmse_db), estimation_seed(cfg, kind, unit.drop, unit.realization, nmse_db)).coeffs;
      const ChannelTensor& hest = perfect ? h : noisy;
      const Association assoc = associate_ues(hest, cell.dep);
      for (std::size_t s = 0; s < schemes.size(); ++s) {
        if (!cell.skip[s].empty()) continue;
        const Precoder p = precode(schemes[s], hest, assoc, link, *alphabet);
        ++out.audited;
        if (!satisfies_power_constraints(p))
          throw NumericalError("power constraint violated by " + std::string(to_string(schemes[s])) + " precoder");
        if (schemes[s] == Scheme::kNetwork) {
          out.min_scale = std::min(out.min_scale, p.scale_factor);
          out.max_scale = std::max(out.max_scale, p.scale_factor);
        }
        const SpectralEfficiency se = spectral_efficiency(compute_sinr(h, p, noise), *alphabet);
        MetricsRecord rec;
        rec.deployment = std::string(to_string(kind));
        rec.scheme = std::string(to_string(schemes[s]));
        rec.modulation = cfg.modulation;
        rec.antennas = cell.m;
        rec.sigma_e2_db = nmse_db;
        rec.drop = unit.drop;
        rec.realization = unit.realization;
        rec.per_ue_se = se.per_ue;
        finish_record(rec);
        out.records.push_back(std::move(rec));
      }
    }
  });

  SweepResult res;
  for (UnitOut& o : results) {
    res.precoders_audited += o.audited;
    res.min_scale_factor = std::min(res.min_scale_factor, o.min_scale);
    res.max_scale_factor = std::max(res.max_scale_factor, o.max_scale);
    for (auto& r : o.records) res.records.push_back(std::move(r));
  }

  // Summary in grid order, skipped cells included.
  const auto agg = aggregate(res.records);
  using Key = std::tuple<std::string, std::string, int, double>;
  std::map<Key, SummaryRow> by_key;
  for (const SummaryRow& s : agg) by_key[{s.deployment, s.scheme, s.antennas, s.sigma_e2_db}] = s;
  for (const Cell& c : cells) {
    for (std::size_t s = 0; s < schemes.size(); ++s) {
      for (double nmse_db : cfg.nmse_db) {
        const std::string dname(to_string(kinds[c.d]));
        const std::string sname(to_string(schemes[s]));
        if (c.skip[s].empty()) {
          res.summary.push_back(by_key.at({dname, sname, c.m, nmse_db}));
          continue;
        }
        SummaryRow row;
        row.deployment = dname;
        row.scheme = sname;
        row.modulation = cfg.modulation;
        row.antennas = c.m;
        row.num_ues = cfg.num_ues;
        row.sigma_e2_db = nmse_db;
        row.count = 0;
        row.sum_se_mean = row.sum_se_p5 = row.sum_se_p95 = std::nan("");
        row.jain_mean = row.jain_p5 = row.jain_p95 = std::nan("");
        row.status = c.skip[s];
        res.summary.push_back(row);
      }
    }
  }
  return res;
}

void write_sweep(const SweepResult& result, const SimConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    auto os = open_csv(out_dir / "records.csv", cfg, kRecordHeader);
    for (const auto& r : result.records) write_record_row(os, r);
  }
  {
    auto os = open_csv(out_dir / "per_ue.csv", cfg, kPerUeHeader);
    for (const auto& r : result.records) write_per_ue_rows(os, r);
  }
  {
    auto os = open_csv(out_dir / "summary.csv", cfg, kSummaryHeader);
    for (const auto& s : result.summary) write_summary_row(os, s);
  }
  {
    std::ofstream os(out_dir / "walls.csv");
    if (!os) throw ConfigError("cannot write walls.csv");
    build_floor_plan(cfg.scenario).write_walls_csv(os);
  }
}

std::vector<SnrMapPoint> run_snr_map(const SimConfig& cfg, DeploymentKind kind, int antennas, double grid_step_m,
                                     int realizations) {
  if (!(grid_step_m > 0.0)) throw ConfigError("grid step must be positive");
  if (realizations <= 0) throw ConfigError("realizations must be positive");
  const FloorPlan plan = build_floor_plan(cfg.scenario);
  const Deployment dep = place_deployment(plan, kind, antennas, cfg.sum_power_dbm, cfg.channel.carrier_hz);
  const int nf = cfg.simulated_prbs;
  const auto freqs = representative_subcarriers(nf, cfg.active_bandwidth_hz);
  const LinkBudget link = make_link_budget(dep, nf, cfg.noise_w(), cfg.subcarriers);

  std::vector<SnrMapPoint> map;
  const int nx = static_cast<int>(std::floor(plan.width() / grid_step_m + 1e-9));
  const int ny = static_cast<int>(std::floor(plan.depth() / grid_step_m + 1e-9));
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) map.push_back({(ix + 0.5) * grid_step_m, (iy + 0.5) * grid_step_m, 0.0});

  parallel_for(map.size(), resolve_threads(cfg), [&](std::size_t p) {
    const std::vector<Vec3> ue{{map[p].x, map[p].y, cfg.scenario.ue_height_m}};
    std::vector<LinkProfile> prof = classify_links(plan, dep, ue, cfg.channel, 0);
    double acc = 0.0;
    for (int r = 0; r < realizations; ++r) {
      const std::uint64_t base = derive_seed(cfg.seed, StreamTag::kSnrMap,
                                             {kind_code(kind), static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(r)});
      redraw_shadowing(prof, dep.num_sites(), cfg.channel, derive_seed(base, {0}));
      const ChannelTensor h = generate_channel(prof, dep, ue, cfg.channel, freqs, derive_seed(base, {1}));
      for (double s : mrt_single_snr(h, 0, link)) acc += s;
    }
    map[p].snr_db = linear_to_db(acc / (static_cast<double>(realizations) * nf));
  });
  return map;
}

std::vector<double> room_average_snr_db(const FloorPlan& plan, const std::vector<SnrMapPoint>& map) {
  std::vector<double> sum(plan.rooms().size(), 0.0);
  std::vector<int> count(plan.rooms().size(), 0);
  for (const SnrMapPoint& p : map) {
    const int r = plan.room_index(p.x, p.y);
    if (r < 0) continue;
    sum[r] += p.snr_db;
    ++count[r];
  }
  for (std::size_t r = 0; r < sum.size(); ++r) sum[r] = count[r] ? sum[r] / count[r] : std::nan("");
  return sum;
}

void write_snr_map(const std::vector<SnrMapPoint>& map, const SimConfig& cfg, const std::filesystem::path& path) {
  auto os = open_csv(path, cfg, "x,y,snr_db");
  for (const SnrMapPoint& p : map)
    os << format_number(p.x) << ',' << format_number(p.y) << ',' << format_number(p.snr_db) << '\n';
}

std::vector<CapacityRow> run_capacity_compare(const SimConfig& cfg, DeploymentKind kind,
                                              const std::vector<int>& antennas) {
  cfg.validate();
  const FloorPlan plan = build_floor_plan(cfg.scenario);
  const GaussianAlphabet gaussian;
  const int threads = resolve_threads(cfg);
  const int nf = cfg.simulated_prbs;
  const auto freqs = representative_subcarriers(nf, cfg.active_bandwidth_hz);
  const double noise = cfg.noise_w();

  std::vector<Deployment> deps;
  for (int m : antennas) deps.push_back(place_deployment(plan, kind, m, cfg.sum_power_dbm, cfg.channel.carrier_hz));
  std::vector<UeDrop> drops(static_cast<std::size_t>(cfg.drops));
  std::vector<std::vector<LinkProfile>> profiles(drops.size());
  parallel_for(drops.size(), threads, [&](std::size_t q) {
    const int qi = static_cast<int>(q);
    drops[q] = sample_ue_drop(plan, cfg.num_ues, ue_drop_seed(cfg, qi), qi, cfg.scenario.ue_height_m);
    profiles[q] = classify_links(plan, deps.front(), drops[q].positions, cfg.channel, shadowing_seed(cfg, kind, qi));
  });

  std::vector<CapacityRow> rows(antennas.size() * drops.size() * static_cast<std::size_t>(cfg.realizations));
  parallel_for(rows.size(), threads, [&](std::size_t u) {
    const std::size_t r = u % static_cast<std::size_t>(cfg.realizations);
    const std::size_t q = (u / static_cast<std::size_t>(cfg.realizations)) % drops.size();
    const std::size_t mi = u / (static_cast<std::size_t>(cfg.realizations) * drops.size());
    const Deployment& dep = deps[mi];
    const ChannelTensor h = generate_channel(profiles[q], dep, drops[q].positions, cfg.channel, freqs,
                                             fading_seed(cfg, kind, static_cast<int>(q), static_cast<int>(r)));
    const LinkBudget link = make_link_budget(dep, nf, noise, cfg.subcarriers);
    CapacityRow& row = rows[u];
    row.deployment = std::string(to_string(kind));
    row.antennas = antennas[mi];
    row.drop = static_cast<int>(q);
    row.realization = static_cast<int>(r);
    DualMacProblem prob{&h, noise, link.total_budget(), cfg.capacity_tolerance, cfg.capacity_max_iters};
    const CapacityResult cap = sum_capacity_bound(prob);
    row.bound_se = cap.se;
    row.iterations = cap.iterations;
    for (PowerConstraint pc : {PowerConstraint::kTotal, PowerConstraint::kPerBs}) {
      const Precoder p = precode_network(h, link, gaussian, pc);
      if (!satisfies_power_constraints(p)) throw NumericalError("power constraint violated by network precoder");
      const double se = spectral_efficiency(compute_sinr(h, p, noise), gaussian).sum;
      (pc == PowerConstraint::kTotal ? row.network_total_se : row.network_se) = se;
    }
  });
  return rows;
}

void write_capacity(const std::vector<CapacityRow>& rows, const SimConfig& cfg, const std::filesystem::path& path) {
  auto os = open_csv(path, cfg, "deployment,M,drop,realization,bound_se,network_total_se,network_se,iterations");
  for (const CapacityRow& r : rows)
    os << r.deployment << ',' << r.antennas << ',' << r.drop << ',' << r.realization << ',' << format_number(r.bound_se)
       << ',' << format_number(r.network_total_se) << ',' << format_number(r.network_se) << ',' << r.iterations << '\n';
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const SimConfig& cfg, const std::filesystem::path& out_dir, const std::vector<std::string>& files,
                    const std::string& started, const std::string& finished) {
  nlohmann::json j;
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  j["code_version"] = kCodeVersion;
  j["started"] = started;
  j["finished"] = finished;
  j["outputs"] = files;
  j["config"] = nlohmann::json::parse(config_to_json_text(cfg));
  std::ofstream os(out_dir / "manifest.json");
  if (!os) throw ConfigError("cannot write manifest.json");
  os << j.dump(2) << '\n';
}

}  // namespace mmsim
