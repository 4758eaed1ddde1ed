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
#include <span>
#include <vector>

#include "risdiff/geometry.hpp"

namespace risdiff {

/// Immutable world: deployment region, candidate grid, BS, users, obstacles.
struct Scenario {
    Region region;
    GridSpec grid_spec;
    Point3 bs;
    std::vector<Point3> users;
    std::vector<Box3> obstacles;

    Grid grid() const { return build_grid(region, grid_spec); }
    std::size_t n_users() const noexcept { return users.size(); }

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// The decision variable: binary selection s over the grid, the sorted set of
/// selected indices, and the resolved coordinates of each RIS.
struct DeploymentPlan {
    std::vector<std::uint8_t> selection;
    std::vector<std::size_t> indices;
    std::vector<Point3> coords;

    std::size_t size() const noexcept { return indices.size(); }

    /// Builds a plan from grid indices (any order, duplicates rejected).
    /// Throws ArgumentError on an out-of-range or repeated index.
    static DeploymentPlan from_indices(const Grid& grid, std::span<const std::size_t> indices);

    friend bool operator==(const DeploymentPlan&, const DeploymentPlan&) = default;
};

}  // namespace risdiff
