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

#include "risdiff/scenario.hpp"

#include <algorithm>
#include <string>

#include "risdiff/error.hpp"

namespace risdiff {

DeploymentPlan DeploymentPlan::from_indices(const Grid& grid, std::span<const std::size_t> indices) {
    DeploymentPlan plan;
    plan.indices.assign(indices.begin(), indices.end());
    std::sort(plan.indices.begin(), plan.indices.end());
    if (std::adjacent_find(plan.indices.begin(), plan.indices.end()) != plan.indices.end()) {
        throw ArgumentError("deployment plan selects the same grid point twice");
    }
    plan.selection.assign(grid.size(), 0);
    plan.coords.reserve(plan.indices.size());
    for (std::size_t i : plan.indices) {
        if (i >= grid.size()) {
            throw ArgumentError("grid index " + std::to_string(i) + " out of range (M = " +
                                std::to_string(grid.size()) + ")");
        }
        plan.selection[i] = 1;
        plan.coords.push_back(grid.points[i]);
    }
    return plan;
}

}  // namespace risdiff
