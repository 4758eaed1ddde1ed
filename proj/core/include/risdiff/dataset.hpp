// SPDX-License-Identifier: Apache-2.0
//
// risdiff: generative placement of reconfigurable intelligent surfaces
// Copyright (C) 2026 The risdiff authors
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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "risdiff/channel.hpp"
#include "risdiff/scenario.hpp"
#include "risdiff/solver.hpp"

namespace risdiff {

/// Random world generator settings. Obstacles are ground-based boxes: the
/// footprint center is uniform over the region, each footprint side is
/// uniform in [obstacle_size_min, obstacle_size_max] and the height uniform
/// in [obstacle_height_min, obstacle_height_max].
struct ScenarioConfig {
    std::size_t n_obstacles = 3;
    std::size_t n_users = 3;
    Region region{0.0, 100.0, 0.0, 100.0, 2.0, 10.0};
    GridSpec grid_spec{4, 4, 3};
    std::optional<Point3> bs_fixed;  // empty: uniform over the region
    double obstacle_size_min = 10.0;
    double obstacle_size_max = 30.0;
    double obstacle_height_min = 4.0;
    double obstacle_height_max = 16.0;
    double user_height = 1.5;
    std::uint64_t seed = 1;

    void validate() const;
};

inline constexpr int kMaxObstaclePlacementTries = 1000;

/// Deterministic in (config.seed, index).
Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t index);

/// Fixed condition layout shared by every dataset so one network serves all
/// densities: [BS xyz | user xyz x max_users | obstacle min,max x max_obstacles].
struct EncodingLayout {
    std::size_t max_users = 10;
    std::size_t max_obstacles = 10;

    std::size_t condition_dim() const noexcept { return 3 * (1 + max_users) + 6 * max_obstacles; }
    friend bool operator==(const EncodingLayout&, const EncodingLayout&) = default;
};

inline constexpr int kConditionLayoutVersion = 1;
inline constexpr double kAbsentSlot = -2.0;

/// Affine map of [lo, hi] onto [-1, 1].
inline double normalize_coord(double v, double lo, double hi) { return 2.0 * (v - lo) / (hi - lo) - 1.0; }
inline double denormalize_coord(double u, double lo, double hi) { return lo + 0.5 * (u + 1.0) * (hi - lo); }

/// Throws ArgumentError when the scenario has more users or obstacles than slots.
std::vector<double> encode_condition(const Scenario& scenario, const EncodingLayout& layout);

enum class TargetMode { multihot, coords };

std::string_view to_string(TargetMode mode) noexcept;
TargetMode target_mode_from_string(std::string_view name);

/// Length of the target vector for a mode: M for multihot, 3 L for coords.
std::size_t target_dim(TargetMode mode, std::size_t grid_size, std::size_t l_count) noexcept;

/// multihot: s mapped to {-1, +1}; coords: L x 3 region-normalized
/// coordinates in grid-index order.
std::vector<double> encode_target(const DeploymentPlan& plan, const Grid& grid, TargetMode mode);

/// Projects a real vector to a feasible plan. multihot: scores are visited in
/// descending order (ties to the lower index) and a site is kept when it is
/// compatible with those already kept, so an admissible top-L passes
/// unchanged. coords: each triple snaps to its nearest grid point; a
/// conflicting point is replaced by the grid point nearest to the predicted
/// coordinate that is compatible with the earlier ones. Throws
/// InfeasibleError when no repair exists and ArgumentError on a length mismatch.
DeploymentPlan decode_target(std::span<const double> y, const Grid& grid,
                             const ConstraintSet& constraints, TargetMode mode);

/// Everything needed to reproduce a labeled dataset.
struct DatasetConfig {
    ScenarioConfig scenario;
    RadioParams radio;
    std::size_t l_count = 2;
    std::optional<double> d_min;  // empty: one grid-cell diagonal
    Objective objective = Objective::sum_snr;
    std::size_t n_mc = 256;
    EncodingLayout layout;
    TargetMode target_mode = TargetMode::multihot;

    ConstraintSet constraints(const Grid& grid) const;
    void validate() const;
};

/// Conventional dataset name, e.g. 3obs_3users or 3obs_1user.
std::string dataset_name(std::size_t n_obstacles, std::size_t n_users);

struct LabeledSample {
    std::uint64_t index = 0;
    Scenario scenario;
    std::vector<double> condition;
    DeploymentPlan target_plan;
    double oracle_objective = 0.0;
    std::uint64_t mc_seed = 0;
    TargetMode target_mode = TargetMode::multihot;

    friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

/// Common-random-number seed used to label sample `index`.
std::uint64_t sample_mc_seed(std::uint64_t seed, std::uint64_t index) noexcept;

ProblemInstance make_instance(const Scenario& scenario, const DatasetConfig& config,
                              std::uint64_t mc_seed);
inline ProblemInstance make_instance(const LabeledSample& sample, const DatasetConfig& config) {
    return make_instance(sample.scenario, config, sample.mc_seed);
}

/// Runs the exhaustive oracle and encodes the condition.
LabeledSample label_scenario(const Scenario& scenario, const DatasetConfig& config,
                             std::uint64_t index, std::uint64_t mc_seed);

/// Generates and labels indices [first, first + count) in parallel; the
/// result is always in index order.
std::vector<LabeledSample> generate_dataset(const DatasetConfig& config, std::size_t count,
                                            std::uint64_t first_index = 0, int workers = 1);

inline constexpr int kDatasetFormatVersion = 1;

struct DatasetManifest {
    std::string name;
    std::size_t sample_count = 0;
    DatasetConfig config;
    int format_version = kDatasetFormatVersion;
    std::string digest;  // sha256 of the JSONL file
};

struct Dataset {
    DatasetManifest manifest;
    std::vector<LabeledSample> samples;
};

std::string manifest_path(const std::string& dataset_path);

/// Writes `path` (JSON Lines, one sample per line) and `path`.manifest.json.
DatasetManifest save_dataset(const std::string& path, const std::string& name,
                             const DatasetConfig& config, std::span<const LabeledSample> samples);

/// Validates schema, every sample invariant and the digest. Throws
/// FormatError carrying the 1-based line number of the first bad line.
Dataset load_dataset(const std::string& path);

// JSON bindings shared with checkpoints and reports.
nlohmann::json to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DatasetConfig& config);
DatasetConfig dataset_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RadioParams& params);
RadioParams radio_params_from_json(const nlohmann::json& j);
std::string sample_to_line(const LabeledSample& sample);

}  // namespace risdiff
