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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mmsim/common.hpp"

namespace mmsim {

struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double depth() const { return y1 - y0; }
  double area() const { return width() * depth(); }
  double cx() const { return 0.5 * (x0 + x1); }
  double cy() const { return 0.5 * (y0 + y1); }
  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  bool strictly_contains(double x, double y) const { return x > x0 && x < x1 && y > y0 && y < y1; }
};

struct Segment {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;
};

// One horizontal band of the building, listed south to north. A room band is
// split into equal rooms; a corridor band spans the full width.
struct FloorBand {
  enum class Kind { kRooms, kCorridor };
  Kind kind = Kind::kRooms;
  double depth_m = 10.0;
};

struct ScenarioConfig {
  int rooms_per_row = 10;
  double room_width_m = 10.0;
  std::vector<FloorBand> bands = {
      {FloorBand::Kind::kRooms, 10.0}, {FloorBand::Kind::kCorridor, 5.0},
      {FloorBand::Kind::kRooms, 10.0}, {FloorBand::Kind::kRooms, 10.0},
      {FloorBand::Kind::kCorridor, 5.0}, {FloorBand::Kind::kRooms, 10.0}};
  double ceiling_height_m = 3.0;
  double ue_height_m = 1.5;
  double corridor_waypoint_step_m = 1.0;
};

// Axis-aligned single-floor building. Rooms and corridors tile the footprint;
// interior walls are derived from shared tile edges (corridor-corridor edges
// are open).
class FloorPlan {
 public:
  // Validates the tiling; throws ConfigError on overlap, gaps or tiles
  // outside the footprint.
  static FloorPlan from_tiles(double width_m, double depth_m, std::vector<Rect> rooms,
                              std::vector<Rect> corridors, double ceiling_height_m,
                              double waypoint_step_m = 1.0);

  double width() const { return width_; }
  double depth() const { return depth_; }
  double ceiling_height() const { return ceiling_; }
  const std::vector<Rect>& rooms() const { return rooms_; }
  const std::vector<Rect>& corridors() const { return corridors_; }
  const std::vector<Segment>& interior_walls() const { return walls_; }
  // Sample points on corridor centerlines used as detour waypoints.
  const std::vector<Vec3>& waypoints() const { return waypoints_; }

  bool inside(double x, double y) const { return x > 0.0 && x < width_ && y > 0.0 && y < depth_; }
  // Index into rooms(), or -1 when the point is not inside a room.
  int room_index(double x, double y) const;

  // Wall segments as CSV (x1,y1,x2,y2), header included.
  void write_walls_csv(std::ostream& os) const;

 private:
  double width_ = 0.0;
  double depth_ = 0.0;
  double ceiling_ = 3.0;
  std::vector<Rect> rooms_;
  std::vector<Rect> corridors_;
  std::vector<Segment> walls_;
  std::vector<Vec3> waypoints_;
};

FloorPlan build_floor_plan(const ScenarioConfig& config);

struct WallCount {
  int num_walls = 0;
  bool los = false;
};

// Number of distinct interior-wall crossings along the straight segment a-b.
// Several walls meeting at one crossing point count once.
int count_crossings(const FloorPlan& plan, double ax, double ay, double bx, double by);

// Minimum wall count over the direct path and all two-segment detours through
// a corridor waypoint. los is true iff the direct path crosses no wall.
WallCount count_walls(const FloorPlan& plan, const Vec3& a, const Vec3& b);

// Crossing counts from p to every corridor waypoint. Precomputing these for
// both endpoints turns each detour evaluation into one addition.
std::vector<int> waypoint_crossings(const FloorPlan& plan, const Vec3& p);

// Same result as count_walls(plan, a, b) given waypoint_crossings of a and b.
WallCount count_walls(const FloorPlan& plan, const Vec3& a, const Vec3& b, const std::vector<int>& a_to_waypoints,
                      const std::vector<int>& b_to_waypoints);

enum class ArrayKind { kRectangularCeiling, kUlaOutdoor };

struct BsSite {
  Vec3 position;
  ArrayKind array_kind = ArrayKind::kRectangularCeiling;
  int num_antennas = 1;
  double power_budget_w = 0.0;
  std::vector<Vec3> antenna_positions;

  bool outdoor() const { return array_kind == ArrayKind::kUlaOutdoor; }
};

enum class DeploymentKind {
  kSingleCentral,
  kTwoIndoor,
  kFourIndoor,
  kFortyIndoor,
  kOutdoor,
  kIndoorOutdoor,
};

std::string_view to_string(DeploymentKind kind);
// Throws ConfigError for unknown names.
DeploymentKind parse_deployment(std::string_view name);
const std::vector<DeploymentKind>& all_deployments();

struct Deployment {
  DeploymentKind kind = DeploymentKind::kSingleCentral;
  std::vector<BsSite> sites;
  int total_antennas = 0;

  std::string_view name() const { return to_string(kind); }
  std::size_t num_sites() const { return sites.size(); }
  // First antenna column of site i in the stacked channel vector.
  std::vector<std::size_t> antenna_offsets() const;
};

// Number of sites a deployment places on the given plan.
std::size_t site_count(const FloorPlan& plan, DeploymentKind kind);

// Places the sites and builds their arrays. Each site receives
// sum_power_dbm - 10 log10(N_BS). Throws ConfigError when M is not divisible
// by the site count.
Deployment place_deployment(const FloorPlan& plan, DeploymentKind kind, int total_antennas,
                            double sum_power_dbm, double carrier_hz);

// Antenna positions at half-wavelength spacing: a ceil(sqrt(M))-wide grid
// under the ceiling for indoor sites, or a line parallel to the x axis for
// outdoor sites.
std::vector<Vec3> build_array(const BsSite& site, int num_antennas, double carrier_hz,
                              double ceiling_height_m = 3.0);

struct UeDrop {
  std::vector<Vec3> positions;
  int drop_index = 0;
  std::uint64_t seed = 0;
};

UeDrop sample_ue_drop(const FloorPlan& plan, int num_ues, std::uint64_t seed, int drop_index = 0,
                      double ue_height_m = 1.5);

}  // namespace mmsim
