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

#include "mmsim/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <random>
#include <tuple>

#include "mmsim/rng.hpp"

namespace mmsim {
namespace {

constexpr double kEps = 1e-9;

double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

// Length of the overlap of [a0,a1] and [b0,b1]; negative when disjoint.
double overlap(double a0, double a1, double b0, double b1) { return std::min(a1, b1) - std::max(a0, b0); }

void add_shared_edges(const Rect& a, const Rect& b, std::vector<Segment>& out) {
  const double oy = overlap(a.y0, a.y1, b.y0, b.y1);
  if (oy > kEps) {
    for (double x : {a.x0, a.x1}) {
      if (std::abs(x - b.x0) < kEps || std::abs(x - b.x1) < kEps) {
        out.push_back({x, std::max(a.y0, b.y0), x, std::min(a.y1, b.y1)});
        return;
      }
    }
  }
  const double ox = overlap(a.x0, a.x1, b.x0, b.x1);
  if (ox > kEps) {
    for (double y : {a.y0, a.y1}) {
      if (std::abs(y - b.y0) < kEps || std::abs(y - b.y1) < kEps) {
        out.push_back({std::max(a.x0, b.x0), y, std::min(a.x1, b.x1), y});
        return;
      }
    }
  }
}

}  // namespace

FloorPlan FloorPlan::from_tiles(double width_m, double depth_m, std::vector<Rect> rooms,
                                std::vector<Rect> corridors, double ceiling_height_m,
                                double waypoint_step_m) {
  if (!(width_m > 0.0) || !(depth_m > 0.0)) throw ConfigError("floor plan: footprint must be positive");
  if (!(ceiling_height_m > 0.0)) throw ConfigError("floor plan: ceiling height must be positive");
  if (!(waypoint_step_m > 0.0)) throw ConfigError("floor plan: waypoint step must be positive");
  if (rooms.empty() && corridors.empty()) throw ConfigError("floor plan: no tiles");

  std::vector<const Rect*> tiles;
  for (const Rect& r : rooms) tiles.push_back(&r);
  for (const Rect& r : corridors) tiles.push_back(&r);

  double area = 0.0;
  for (const Rect* t : tiles) {
    if (!(t->width() > 0.0) || !(t->depth() > 0.0)) throw ConfigError("floor plan: degenerate tile");
    if (t->x0 < -kEps || t->y0 < -kEps || t->x1 > width_m + kEps || t->y1 > depth_m + kEps)
      throw ConfigError("floor plan: tile outside the footprint");
    area += t->area();
  }
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    for (std::size_t j = i + 1; j < tiles.size(); ++j) {
      const double ox = overlap(tiles[i]->x0, tiles[i]->x1, tiles[j]->x0, tiles[j]->x1);
      const double oy = overlap(tiles[i]->y0, tiles[i]->y1, tiles[j]->y0, tiles[j]->y1);
      if (ox > kEps && oy > kEps) throw ConfigError("floor plan: overlapping tiles");
    }
  }
  if (std::abs(area - width_m * depth_m) > 1e-6) throw ConfigError("floor plan: tiles leave gaps in the footprint");

  FloorPlan plan;
  plan.width_ = width_m;
  plan.depth_ = depth_m;
  plan.ceiling_ = ceiling_height_m;
  plan.rooms_ = std::move(rooms);
  plan.corridors_ = std::move(corridors);

  const std::size_t nrooms = plan.rooms_.size();
  std::vector<const Rect*> all;
  for (const Rect& r : plan.rooms_) all.push_back(&r);
  for (const Rect& r : plan.corridors_) all.push_back(&r);
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (i >= nrooms && j >= nrooms) continue;  // corridors connect openly
      add_shared_edges(*all[i], *all[j], plan.walls_);
    }
  }

  for (const Rect& c : plan.corridors_) {
    if (c.width() >= c.depth()) {
      for (double x = c.x0 + 0.5 * waypoint_step_m; x < c.x1; x += waypoint_step_m)
        plan.waypoints_.push_back({x, c.cy(), 0.0});
    } else {
      for (double y = c.y0 + 0.5 * waypoint_step_m; y < c.y1; y += waypoint_step_m)
        plan.waypoints_.push_back({c.cx(), y, 0.0});
    }
  }
  return plan;
}

int FloorPlan::room_index(double x, double y) const {
  for (std::size_t i = 0; i < rooms_.size(); ++i)
    if (rooms_[i].strictly_contains(x, y)) return static_cast<int>(i);
  return -1;
}

void FloorPlan::write_walls_csv(std::ostream& os) const {
  os << "x1,y1,x2,y2\n";
  for (const Segment& s : walls_) os << s.x1 << ',' << s.y1 << ',' << s.x2 << ',' << s.y2 << '\n';
}

FloorPlan build_floor_plan(const ScenarioConfig& config) {
  if (config.rooms_per_row < 1) throw ConfigError("floor plan: rooms_per_row must be >= 1");
  if (!(config.room_width_m > 0.0)) throw ConfigError("floor plan: room width must be positive");
  if (config.bands.empty()) throw ConfigError("floor plan: no bands");
  const double width = config.rooms_per_row * config.room_width_m;
  std::vector<Rect> rooms;
  std::vector<Rect> corridors;
  double y = 0.0;
  for (const FloorBand& band : config.bands) {
    if (!(band.depth_m > 0.0)) throw ConfigError("floor plan: band depth must be positive");
    if (band.kind == FloorBand::Kind::kCorridor) {
      corridors.push_back({0.0, y, width, y + band.depth_m});
    } else {
      for (int i = 0; i < config.rooms_per_row; ++i)
        rooms.push_back({i * config.room_width_m, y, (i + 1) * config.room_width_m, y + band.depth_m});
    }
    y += band.depth_m;
  }
  return FloorPlan::from_tiles(width, y, std::move(rooms), std::move(corridors), config.ceiling_height_m,
                               config.corridor_waypoint_step_m);
}

int count_crossings(const FloorPlan& plan, double ax, double ay, double bx, double by) {
  // Canonical orientation keeps the count exactly symmetric in (a, b).
  if (std::tie(bx, by) < std::tie(ax, ay)) {
    std::swap(ax, bx);
    std::swap(ay, by);
  }
  const double dx = bx - ax;
  const double dy = by - ay;
  std::array<double, 64> local{};
  std::vector<double> spill;
  std::size_t n = 0;
  for (const Segment& w : plan.interior_walls()) {
    const double ex = w.x2 - w.x1;
    const double ey = w.y2 - w.y1;
    const double denom = cross(dx, dy, ex, ey);
    if (std::abs(denom) < 1e-14) continue;  // parallel: running along a wall is not a crossing
    const double cx = w.x1 - ax;
    const double cy = w.y1 - ay;
    const double t = cross(cx, cy, ex, ey) / denom;
    const double u = cross(cx, cy, dx, dy) / denom;
    if (t < -kEps || t > 1.0 + kEps || u < -kEps || u > 1.0 + kEps) continue;
    if (n < local.size()) {
      local[n] = t;
    } else {
      spill.push_back(t);
    }
    ++n;
  }
  if (n == 0) return 0;
  std::vector<double> ts(local.begin(), local.begin() + std::min(n, local.size()));
  ts.insert(ts.end(), spill.begin(), spill.end());
  std::sort(ts.begin(), ts.end());
  const double len = std::hypot(dx, dy);
  const double tol = len > 0.0 ? 1e-9 / len : 1e-9;
  int distinct = 1;
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (ts[i] - ts[i - 1] > tol) ++distinct;
  return distinct;
}

WallCount count_walls(const FloorPlan& plan, const Vec3& a, const Vec3& b) {
  WallCount result;
  const int direct = count_crossings(plan, a.x, a.y, b.x, b.y);
  result.los = direct == 0;
  result.num_walls = direct;
  if (direct <= 1) return result;
  for (const Vec3& w : plan.waypoints()) {
    const int first = count_crossings(plan, a.x, a.y, w.x, w.y);
    if (first >= result.num_walls) continue;
    const int total = first + count_crossings(plan, w.x, w.y, b.x, b.y);
    result.num_walls = std::min(result.num_walls, total);
    if (result.num_walls <= 1) break;
  }
  return result;
}

std::vector<int> waypoint_crossings(const FloorPlan& plan, const Vec3& p) {
  std::vector<int> counts;
  counts.reserve(plan.waypoints().size());
  for (const Vec3& w : plan.waypoints()) counts.push_back(count_crossings(plan, p.x, p.y, w.x, w.y));
  return counts;
}

WallCount count_walls(const FloorPlan& plan, const Vec3& a, const Vec3& b, const std::vector<int>& a_to_waypoints,
                      const std::vector<int>& b_to_waypoints) {
  WallCount result;
  const int direct = count_crossings(plan, a.x, a.y, b.x, b.y);
  result.los = direct == 0;
  result.num_walls = direct;
  if (direct <= 1) return result;
  for (std::size_t w = 0; w < a_to_waypoints.size(); ++w)
    result.num_walls = std::min(result.num_walls, a_to_waypoints[w] + b_to_waypoints[w]);
  return result;
}

namespace {

constexpr std::array<std::string_view, 6> kDeploymentNames = {
    "single-central", "two-indoor", "four-indoor", "forty-indoor", "outdoor", "indoor-outdoor"};

constexpr double kOutdoorOffsetM = 15.0;
constexpr double kOutdoorHeightM = 10.0;

Vec3 central_site(const FloorPlan& plan) {
  const double cx = 0.5 * plan.width();
  const double cy = 0.5 * plan.depth();
  const int idx = plan.room_index(cx - 1e-6, cy - 1e-6);
  if (idx < 0) throw ConfigError("floor plan: no room southwest of the building center");
  const Rect& r = plan.rooms()[idx];
  const double corner_x = std::abs(r.x0 - cx) < std::abs(r.x1 - cx) ? r.x0 : r.x1;
  const double corner_y = std::abs(r.y0 - cy) < std::abs(r.y1 - cy) ? r.y0 : r.y1;
  const double off = 0.5;
  return {corner_x == r.x1 ? corner_x - off : corner_x + off,
          corner_y == r.y1 ? corner_y - off : corner_y + off, plan.ceiling_height()};
}

std::vector<Vec3> outdoor_sites(const FloorPlan& plan) {
  return {{0.5 * plan.width(), -kOutdoorOffsetM, kOutdoorHeightM},
          {0.5 * plan.width(), plan.depth() + kOutdoorOffsetM, kOutdoorHeightM}};
}

std::vector<BsSite> site_skeleton(const FloorPlan& plan, DeploymentKind kind) {
  std::vector<BsSite> sites;
  auto indoor = [&](Vec3 p) {
    BsSite s;
    s.position = p;
    s.array_kind = ArrayKind::kRectangularCeiling;
    sites.push_back(s);
  };
  auto outdoor = [&](Vec3 p) {
    BsSite s;
    s.position = p;
    s.array_kind = ArrayKind::kUlaOutdoor;
    sites.push_back(s);
  };
  const double h = plan.ceiling_height();
  switch (kind) {
    case DeploymentKind::kSingleCentral:
      indoor(central_site(plan));
      break;
    case DeploymentKind::kTwoIndoor:
      for (const Rect& c : plan.corridors()) indoor({c.cx(), c.cy(), h});
      break;
    case DeploymentKind::kFourIndoor:
      for (const Rect& c : plan.corridors()) {
        if (c.width() >= c.depth()) {
          indoor({c.x0 + 0.25 * c.width(), c.cy(), h});
          indoor({c.x0 + 0.75 * c.width(), c.cy(), h});
        } else {
          indoor({c.cx(), c.y0 + 0.25 * c.depth(), h});
          indoor({c.cx(), c.y0 + 0.75 * c.depth(), h});
        }
      }
      break;
    case DeploymentKind::kFortyIndoor:
      for (const Rect& r : plan.rooms()) indoor({r.cx(), r.cy(), h});
      break;
    case DeploymentKind::kOutdoor:
      for (const Vec3& p : outdoor_sites(plan)) outdoor(p);
      break;
    case DeploymentKind::kIndoorOutdoor:
      indoor(central_site(plan));
      for (const Vec3& p : outdoor_sites(plan)) outdoor(p);
      break;
  }
  if (sites.empty()) throw ConfigError("deployment has no sites on this floor plan");
  return sites;
}

}  // namespace

std::string_view to_string(DeploymentKind kind) { return kDeploymentNames[static_cast<std::size_t>(kind)]; }

DeploymentKind parse_deployment(std::string_view name) {
  for (std::size_t i = 0; i < kDeploymentNames.size(); ++i)
    if (kDeploymentNames[i] == name) return static_cast<DeploymentKind>(i);
  throw ConfigError("unknown deployment '" + std::string(name) + "'");
}

const std::vector<DeploymentKind>& all_deployments() {
  static const std::vector<DeploymentKind> kinds = {
      DeploymentKind::kSingleCentral, DeploymentKind::kTwoIndoor, DeploymentKind::kFourIndoor,
      DeploymentKind::kFortyIndoor,   DeploymentKind::kOutdoor,   DeploymentKind::kIndoorOutdoor};
  return kinds;
}

std::vector<std::size_t> Deployment::antenna_offsets() const {
  std::vector<std::size_t> off;
  std::size_t acc = 0;
  for (const BsSite& s : sites) {
    off.push_back(acc);
    acc += static_cast<std::size_t>(s.num_antennas);
  }
  return off;
}

std::size_t site_count(const FloorPlan& plan, DeploymentKind kind) { return site_skeleton(plan, kind).size(); }

Deployment place_deployment(const FloorPlan& plan, DeploymentKind kind, int total_antennas,
                            double sum_power_dbm, double carrier_hz) {
  if (total_antennas < 1) throw ConfigError("deployment: total antennas must be positive");
  if (!(carrier_hz > 0.0)) throw ConfigError("deployment: carrier must be positive");
  Deployment dep;
  dep.kind = kind;
  dep.sites = site_skeleton(plan, kind);
  const int n = static_cast<int>(dep.sites.size());
  if (total_antennas % n != 0)
    throw ConfigError("deployment " + std::string(to_string(kind)) + ": " + std::to_string(total_antennas) +
                      " antennas not divisible by " + std::to_string(n) + " sites");
  dep.total_antennas = total_antennas;
  const double per_bs_w = dbm_to_watt(sum_power_dbm - 10.0 * std::log10(static_cast<double>(n)));
  for (BsSite& s : dep.sites) {
    s.num_antennas = total_antennas / n;
    s.power_budget_w = per_bs_w;
    s.antenna_positions = build_array(s, s.num_antennas, carrier_hz, plan.ceiling_height());
  }
  return dep;
}

std::vector<Vec3> build_array(const BsSite& site, int num_antennas, double carrier_hz, double ceiling_height_m) {
  if (num_antennas < 1) throw ArgumentError("build_array: need at least one antenna");
  const double spacing = 0.5 * kSpeedOfLight / carrier_hz;
  std::vector<Vec3> pos;
  pos.reserve(static_cast<std::size_t>(num_antennas));
  if (site.array_kind == ArrayKind::kUlaOutdoor) {
    const double mid = 0.5 * (num_antennas - 1);
    for (int m = 0; m < num_antennas; ++m)
      pos.push_back({site.position.x + (m - mid) * spacing, site.position.y, site.position.z});
    return pos;
  }
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(num_antennas)) - 1e-12));
  const int rows = (num_antennas + cols - 1) / cols;
  const double cmid = 0.5 * (cols - 1);
  const double rmid = 0.5 * (rows - 1);
  for (int m = 0; m < num_antennas; ++m) {
    const int c = m % cols;
    const int r = m / cols;
    pos.push_back({site.position.x + (c - cmid) * spacing, site.position.y + (r - rmid) * spacing, ceiling_height_m});
  }
  return pos;
}

UeDrop sample_ue_drop(const FloorPlan& plan, int num_ues, std::uint64_t seed, int drop_index, double ue_height_m) {
  if (num_ues < 1) throw ArgumentError("sample_ue_drop: need at least one UE");
  std::vector<const Rect*> tiles;
  std::vector<double> areas;
  for (const Rect& r : plan.rooms()) tiles.push_back(&r);
  for (const Rect& r : plan.corridors()) tiles.push_back(&r);
  for (const Rect* t : tiles) areas.push_back(t->area());

  Rng rng(seed);
  std::discrete_distribution<std::size_t> pick(areas.begin(), areas.end());
  UeDrop drop;
  drop.drop_index = drop_index;
  drop.seed = seed;
  drop.positions.reserve(static_cast<std::size_t>(num_ues));
  for (int k = 0; k < num_ues; ++k) {
    const Rect& t = *tiles[pick(rng)];
    // Half-open draws from the open interval (x0, x1).
    std::uniform_real_distribution<double> ux(std::nextafter(t.x0, t.x1), t.x1);
    std::uniform_real_distribution<double> uy(std::nextafter(t.y0, t.y1), t.y1);
    const double x = ux(rng);
    const double y = uy(rng);
    drop.positions.push_back({std::min(x, std::nextafter(plan.width(), 0.0)),
                              std::min(y, std::nextafter(plan.depth(), 0.0)), ue_height_m});
  }
  return drop;
}

}  // namespace mmsim
