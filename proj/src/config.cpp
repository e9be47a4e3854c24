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

#include "mmsim/config.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace mmsim {

using nlohmann::json;

namespace {

template <typename T>
void get_opt(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

double number_or_inf(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "-inf" || s == "perfect") return kPerfectCsi;
  }
  throw ConfigError("nmse_db entries must be numbers or \"-inf\"");
}

json pathloss_to_json(const PathlossClass& c) {
  json j;
  j["slope_db"] = c.slope_db;
  j["intercept_db"] = c.intercept_db;
  j["freq_db"] = c.freq_db;
  j["shadow_sigma_db"] = c.shadow_sigma_db;
  j["rice_k_db"] = std::isinf(c.rice_k_db) ? json("-inf") : json(c.rice_k_db);
  j["delay_spread_s"] = c.delay_spread_s;
  return j;
}

void pathloss_from_json(const json& j, PathlossClass& c) {
  get_opt(j, "slope_db", c.slope_db);
  get_opt(j, "intercept_db", c.intercept_db);
  get_opt(j, "freq_db", c.freq_db);
  get_opt(j, "shadow_sigma_db", c.shadow_sigma_db);
  if (j.contains("rice_k_db")) c.rice_k_db = number_or_inf(j["rice_k_db"]);
  get_opt(j, "delay_spread_s", c.delay_spread_s);
}

json to_json(const SimConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["bandwidth_hz"] = c.bandwidth_hz;
  j["active_bandwidth_hz"] = c.active_bandwidth_hz;
  j["subcarrier_spacing_hz"] = c.subcarrier_spacing_hz;
  j["subcarriers"] = c.subcarriers;
  j["prbs"] = c.prbs;
  j["simulated_prbs"] = c.simulated_prbs;
  j["sum_power_dbm"] = c.sum_power_dbm;
  j["noise_dbm"] = c.noise_dbm;
  j["num_ues"] = c.num_ues;
  j["drops"] = c.drops;
  j["realizations"] = c.realizations;
  j["modulation"] = c.modulation;
  j["deployments"] = c.deployments;
  j["antennas"] = c.antennas;
  j["schemes"] = c.schemes;
  json nmse = json::array();
  for (double v : c.nmse_db) nmse.push_back(std::isinf(v) ? json("-inf") : json(v));
  j["nmse_db"] = nmse;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["quadrature_nodes"] = c.quadrature_nodes;

  json sc;
  sc["rooms_per_row"] = c.scenario.rooms_per_row;
  sc["room_width_m"] = c.scenario.room_width_m;
  json bands = json::array();
  for (const FloorBand& b : c.scenario.bands)
    bands.push_back({{"kind", b.kind == FloorBand::Kind::kRooms ? "rooms" : "corridor"}, {"depth_m", b.depth_m}});
  sc["bands"] = bands;
  sc["ceiling_height_m"] = c.scenario.ceiling_height_m;
  sc["ue_height_m"] = c.scenario.ue_height_m;
  sc["corridor_waypoint_step_m"] = c.scenario.corridor_waypoint_step_m;
  j["scenario"] = sc;

  json ch;
  ch["carrier_hz"] = c.channel.carrier_hz;
  ch["wall_loss_db"] = c.channel.wall_loss_db;
  ch["indoor_los"] = pathloss_to_json(c.channel.indoor_los);
  ch["indoor_nlos"] = pathloss_to_json(c.channel.indoor_nlos);
  ch["outdoor_to_indoor"] = pathloss_to_json(c.channel.outdoor_to_indoor);
  ch["building_entry_loss_db"] = c.channel.building_entry_loss_db;
  ch["num_taps"] = c.channel.num_taps;
  ch["tap_spacing_s"] = c.channel.tap_spacing_s;
  ch["shadowing"] = c.channel.shadowing;
  j["channel"] = ch;

  j["snrmap"] = {{"grid_step_m", c.snrmap_grid_step_m}, {"realizations", c.snrmap_realizations}};
  j["capacity"] = {{"tolerance", c.capacity_tolerance}, {"max_iters", c.capacity_max_iters}};
  return j;
}

SimConfig from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  SimConfig c;
  get_opt(j, "schema_version", c.schema_version);
  if (c.schema_version != 1) throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));
  get_opt(j, "bandwidth_hz", c.bandwidth_hz);
  get_opt(j, "active_bandwidth_hz", c.active_bandwidth_hz);
  get_opt(j, "subcarrier_spacing_hz", c.subcarrier_spacing_hz);
  get_opt(j, "subcarriers", c.subcarriers);
  get_opt(j, "prbs", c.prbs);
  get_opt(j, "simulated_prbs", c.simulated_prbs);
  get_opt(j, "sum_power_dbm", c.sum_power_dbm);
  get_opt(j, "noise_dbm", c.noise_dbm);
  get_opt(j, "num_ues", c.num_ues);
  get_opt(j, "drops", c.drops);
  get_opt(j, "realizations", c.realizations);
  get_opt(j, "modulation", c.modulation);
  get_opt(j, "deployments", c.deployments);
  get_opt(j, "antennas", c.antennas);
  get_opt(j, "schemes", c.schemes);
  if (j.contains("nmse_db")) {
    if (!j["nmse_db"].is_array()) throw ConfigError("nmse_db must be an array");
    c.nmse_db.clear();
    for (const json& v : j["nmse_db"]) c.nmse_db.push_back(number_or_inf(v));
  }
  get_opt(j, "seed", c.seed);
  get_opt(j, "threads", c.threads);
  get_opt(j, "quadrature_nodes", c.quadrature_nodes);

  if (j.contains("scenario")) {
    const json& sc = j["scenario"];
    get_opt(sc, "rooms_per_row", c.scenario.rooms_per_row);
    get_opt(sc, "room_width_m", c.scenario.room_width_m);
    if (sc.contains("bands")) {
      c.scenario.bands.clear();
      for (const json& b : sc["bands"]) {
        FloorBand band;
        const std::string kind = b.value("kind", "rooms");
        if (kind == "rooms") {
          band.kind = FloorBand::Kind::kRooms;
        } else if (kind == "corridor") {
          band.kind = FloorBand::Kind::kCorridor;
        } else {
          throw ConfigError("unknown band kind '" + kind + "'");
        }
        get_opt(b, "depth_m", band.depth_m);
        c.scenario.bands.push_back(band);
      }
    }
    get_opt(sc, "ceiling_height_m", c.scenario.ceiling_height_m);
    get_opt(sc, "ue_height_m", c.scenario.ue_height_m);
    get_opt(sc, "corridor_waypoint_step_m", c.scenario.corridor_waypoint_step_m);
  }
  if (j.contains("channel")) {
    const json& ch = j["channel"];
    get_opt(ch, "carrier_hz", c.channel.carrier_hz);
    get_opt(ch, "wall_loss_db", c.channel.wall_loss_db);
    if (ch.contains("indoor_los")) pathloss_from_json(ch["indoor_los"], c.channel.indoor_los);
    if (ch.contains("indoor_nlos")) pathloss_from_json(ch["indoor_nlos"], c.channel.indoor_nlos);
    if (ch.contains("outdoor_to_indoor")) pathloss_from_json(ch["outdoor_to_indoor"], c.channel.outdoor_to_indoor);
    get_opt(ch, "building_entry_loss_db", c.channel.building_entry_loss_db);
    get_opt(ch, "num_taps", c.channel.num_taps);
    get_opt(ch, "tap_spacing_s", c.channel.tap_spacing_s);
    get_opt(ch, "shadowing", c.channel.shadowing);
  }
  if (j.contains("snrmap")) {
    get_opt(j["snrmap"], "grid_step_m", c.snrmap_grid_step_m);
    get_opt(j["snrmap"], "realizations", c.snrmap_realizations);
  }
  if (j.contains("capacity")) {
    get_opt(j["capacity"], "tolerance", c.capacity_tolerance);
    get_opt(j["capacity"], "max_iters", c.capacity_max_iters);
  }
  c.validate();
  return c;
}

}  // namespace

void SimConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(prbs > 0 && prbs * 12 == subcarriers, "subcarriers must equal 12 * prbs");
  require(simulated_prbs > 0 && simulated_prbs <= prbs, "simulated_prbs must lie in [1, prbs]");
  require(bandwidth_hz > 0 && active_bandwidth_hz > 0 && active_bandwidth_hz <= bandwidth_hz, "bad bandwidths");
  require(subcarrier_spacing_hz > 0, "subcarrier spacing must be positive");
  require(num_ues > 0, "num_ues must be positive");
  require(drops > 0 && realizations > 0, "drops and realizations must be positive");
  require(modulation == "gaussian" || modulation == "qam4" || modulation == "qam16" || modulation == "qam64" ||
              modulation == "qam256",
          "unknown modulation '" + modulation + "'");
  require(!deployments.empty() && !antennas.empty() && !schemes.empty() && !nmse_db.empty(),
          "deployment, antenna, scheme and nmse lists must be non-empty");
  for (const std::string& d : deployments) parse_deployment(d);
  for (int m : antennas) require(m > 0, "antenna counts must be positive");
  for (const std::string& s : schemes)
    require(s == "local" || s == "lsmimo" || s == "network" || s == "network-total", "unknown scheme '" + s + "'");
  for (double v : nmse_db) require(!std::isnan(v) && v < std::numeric_limits<double>::infinity(), "bad nmse_db entry");
  require(threads >= 0, "threads must be nonnegative");
  require(quadrature_nodes >= 2, "quadrature_nodes must be at least 2");
  require(channel.carrier_hz > 0 && channel.num_taps > 0 && channel.tap_spacing_s > 0, "bad channel parameters");
  require(snrmap_grid_step_m > 0 && snrmap_realizations > 0, "bad snrmap parameters");
  require(capacity_tolerance > 0 && capacity_max_iters > 0, "bad capacity parameters");
}

SimConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return from_json(j);
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json_text(const SimConfig& cfg) { return to_json(cfg).dump(2); }

std::string config_hash(const SimConfig& cfg) {
  json j = to_json(cfg);
  j.erase("threads");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::unique_ptr<Alphabet> make_alphabet(const std::string& name, int quadrature_nodes) {
  if (name == "gaussian") return std::make_unique<GaussianAlphabet>();
  for (int order : {4, 16, 64, 256})
    if (name == "qam" + std::to_string(order))
      return std::make_unique<InfoTable>(InfoTable::build(Constellation::square_qam(order), quadrature_nodes));
  throw ConfigError("unknown modulation '" + name + "'");
}

}  // namespace mmsim
