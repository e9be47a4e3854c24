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
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "mmsim/config.hpp"
#include "mmsim/metrics.hpp"

namespace mmsim {

// Worker count: MMSIM_THREADS if set, else cfg.threads if positive, else the
// hardware concurrency.
int resolve_threads(const SimConfig& cfg);

// Runs fn(0) ... fn(n - 1) on a pool of workers. The first exception (by
// index) is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

struct SweepResult {
  std::vector<MetricsRecord> records;
  // One row per requested grid cell, including skipped cells.
  std::vector<SummaryRow> summary;
  std::size_t precoders_audited = 0;
  double min_scale_factor = 1.0;
  double max_scale_factor = 0.0;
};

// Every (deployment, M, scheme, sigma_E^2) cell over all drops and
// realizations. Throws NumericalError if any precoder violates its power
// constraint.
SweepResult run_sweep(const SimConfig& cfg);

// records.csv, per_ue.csv, summary.csv and walls.csv.
void write_sweep(const SweepResult& result, const SimConfig& cfg, const std::filesystem::path& out_dir);

struct SnrMapPoint {
  double x = 0.0;
  double y = 0.0;
  double snr_db = 0.0;
};

// Single-UE MRT snr on a grid of UE positions (cell centers of a grid_step_m
// raster at UE height), averaged linearly over realizations and subcarriers.
std::vector<SnrMapPoint> run_snr_map(const SimConfig& cfg, DeploymentKind kind, int antennas, double grid_step_m,
                                     int realizations);

// Mean snr (dB) of the map points inside each room; NaN for rooms without
// points.
std::vector<double> room_average_snr_db(const FloorPlan& plan, const std::vector<SnrMapPoint>& map);

void write_snr_map(const std::vector<SnrMapPoint>& map, const SimConfig& cfg, const std::filesystem::path& path);

struct CapacityRow {
  std::string deployment;
  int antennas = 0;
  int drop = 0;
  int realization = 0;
  double bound_se = 0.0;
  double network_total_se = 0.0;
  double network_se = 0.0;
  int iterations = 0;
};

// Dual-MAC sum-capacity bound next to Gaussian-input network MIMO under the
// total and the per-BS power constraint, per (M, drop, realization).
std::vector<CapacityRow> run_capacity_compare(const SimConfig& cfg, DeploymentKind kind,
                                              const std::vector<int>& antennas);

void write_capacity(const std::vector<CapacityRow>& rows, const SimConfig& cfg, const std::filesystem::path& path);

// manifest.json listing the given output files.
void write_manifest(const SimConfig& cfg, const std::filesystem::path& out_dir, const std::vector<std::string>& files,
                    const std::string& started, const std::string& finished);

// UTC timestamp, ISO 8601.
std::string utc_now();

}  // namespace mmsim
