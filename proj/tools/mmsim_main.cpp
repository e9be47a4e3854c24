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

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mmsim/config.hpp"
#include "mmsim/harness.hpp"
#include "mmsim/kernels.hpp"

namespace fs = std::filesystem;
using namespace mmsim;

namespace {

struct CommonFlags {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::string deployments;
  std::string schemes;
  std::string antennas;
  std::string modulation;
  std::string nmse_db;
  std::optional<int> drops;
  std::optional<int> realizations;
  std::optional<int> prbs;
  std::optional<int> threads;
};

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

double parse_double(const std::string& s) {
  if (s == "-inf" || s == "perfect") return kPerfectCsi;
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

int parse_int(const std::string& s) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("not an integer: '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError("not an integer: '" + s + "'");
  return v;
}

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "JSON configuration file");
  app->add_option("--out", f.out, "Output directory");
  app->add_option("--seed", f.seed, "Master seed");
  app->add_option("--deployment", f.deployments, "Deployment name(s), comma separated");
  app->add_option("--scheme", f.schemes, "Scheme name(s): local, lsmimo, network, network-total");
  app->add_option("--antennas", f.antennas, "Total antenna counts, comma separated");
  app->add_option("--modulation", f.modulation, "qam256 or gaussian")->check(CLI::IsMember({"qam256", "gaussian"}));
  app->add_option("--nmse-db", f.nmse_db, "Estimation NMSE values in dB (-inf for perfect CSI)");
  app->add_option("--drops", f.drops, "Number of UE drops");
  app->add_option("--realizations", f.realizations, "Channel realizations per drop");
  app->add_option("--prbs", f.prbs, "Simulated PRBs (one representative subcarrier each)");
  app->add_option("--threads", f.threads, "Worker threads");
}

SimConfig build_config(const CommonFlags& f) {
  SimConfig cfg = f.config.empty() ? SimConfig{} : load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.deployments.empty()) cfg.deployments = split(f.deployments);
  if (!f.schemes.empty()) cfg.schemes = split(f.schemes);
  if (!f.antennas.empty()) {
    cfg.antennas.clear();
    for (const auto& s : split(f.antennas)) cfg.antennas.push_back(parse_int(s));
  }
  if (!f.modulation.empty()) cfg.modulation = f.modulation;
  if (!f.nmse_db.empty()) {
    cfg.nmse_db.clear();
    for (const auto& s : split(f.nmse_db)) cfg.nmse_db.push_back(parse_double(s));
  }
  if (f.drops) cfg.drops = *f.drops;
  if (f.realizations) cfg.realizations = *f.realizations;
  if (f.prbs) cfg.simulated_prbs = *f.prbs;
  if (f.threads) cfg.threads = *f.threads;
  cfg.validate();
  return cfg;
}

int cmd_simulate(const CommonFlags& f) {
  const SimConfig cfg = build_config(f);
  const std::string started = utc_now();
  const SweepResult res = run_sweep(cfg);
  write_sweep(res, cfg, f.out);
  write_manifest(cfg, f.out, {"records.csv", "per_ue.csv", "summary.csv", "walls.csv"}, started, utc_now());
  std::cerr << res.records.size() << " records, " << res.precoders_audited << " precoders audited -> " << f.out << '\n';
  return 0;
}

int cmd_snrmap(const CommonFlags& f, double step, std::optional<int> map_realizations) {
  SimConfig cfg = build_config(f);
  if (cfg.deployments.size() != 1 || cfg.antennas.size() != 1)
    throw ConfigError("snrmap needs exactly one --deployment and one --antennas value");
  const DeploymentKind kind = parse_deployment(cfg.deployments.front());
  const double grid = step > 0.0 ? step : cfg.snrmap_grid_step_m;
  const int reals = map_realizations ? *map_realizations : cfg.snrmap_realizations;
  const std::string started = utc_now();
  const auto map = run_snr_map(cfg, kind, cfg.antennas.front(), grid, reals);
  fs::create_directories(f.out);
  write_snr_map(map, cfg, fs::path(f.out) / "snr_map.csv");
  {
    std::ofstream os(fs::path(f.out) / "walls.csv");
    build_floor_plan(cfg.scenario).write_walls_csv(os);
  }
  write_manifest(cfg, f.out, {"snr_map.csv", "walls.csv"}, started, utc_now());
  return 0;
}

int cmd_capacity(const CommonFlags& f) {
  SimConfig cfg = build_config(f);
  cfg.modulation = "gaussian";
  const std::string started = utc_now();
  std::vector<CapacityRow> rows;
  for (const auto& d : cfg.deployments) {
    auto part = run_capacity_compare(cfg, parse_deployment(d), cfg.antennas);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  fs::create_directories(f.out);
  write_capacity(rows, cfg, fs::path(f.out) / "capacity.csv");
  write_manifest(cfg, f.out, {"capacity.csv"}, started, utc_now());
  return 0;
}

int cmd_tables(const CommonFlags& f) {
  const SimConfig cfg = build_config(f);
  fs::create_directories(f.out);
  std::vector<std::string> files;
  for (int order : {4, 16, 64, 256}) {
    const InfoTable t = InfoTable::build(Constellation::square_qam(order), cfg.quadrature_nodes);
    const std::string name = "info_qam" + std::to_string(order) + ".csv";
    std::ofstream os(fs::path(f.out) / name);
    if (!os) throw ConfigError("cannot write " + name);
    t.save_csv(os);
    files.push_back(name);
  }
  write_manifest(cfg, f.out, files, utc_now(), utc_now());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mmsim: downlink simulator for distributed and centralized massive MIMO"};
  app.require_subcommand(1);
  CommonFlags sim_f, map_f, cap_f, tab_f;
  auto* sim = app.add_subcommand("simulate", "Sweep deployments, antennas, schemes and NMSE values");
  add_common(sim, sim_f);
  auto* map = app.add_subcommand("snrmap", "Single-UE SNR map over the floor plan");
  add_common(map, map_f);
  double step = 0.0;
  std::optional<int> map_reals;
  map->add_option("--grid-step", step, "Grid step in meters");
  map->add_option("--map-realizations", map_reals, "Realizations per map point");
  auto* cap = app.add_subcommand("capacity", "Sum-capacity bound against Gaussian-input network MIMO");
  add_common(cap, cap_f);
  auto* tab = app.add_subcommand("tables", "Write QAM mutual-information and MMSE tables");
  add_common(tab, tab_f);
  app.add_flag_callback("--isa-info", [] { std::cout << kernels::active().name << '\n'; }, "Print the active kernel ISA");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (*sim) return cmd_simulate(sim_f);
    if (*map) return cmd_snrmap(map_f, step, map_reals);
    if (*cap) return cmd_capacity(cap_f);
    if (*tab) return cmd_tables(tab_f);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const ArgumentError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
