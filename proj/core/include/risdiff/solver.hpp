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
#include <string_view>
#include <vector>

#include "risdiff/channel.hpp"
#include "risdiff/scenario.hpp"

namespace risdiff {

struct ConstraintSet {
    std::size_t l_count = 2;  // L
    double d_min = 0.0;       // minimum pairwise RIS spacing [m]
    Region region;

    void validate(std::size_t grid_size) const;
};

/// Spacing comparisons accept pairs this close below d_min, so grid points
/// exactly one cell diagonal apart stay feasible despite rounding.
inline constexpr double kSpacingTolerance = 1e-9;

enum class Objective { sum_snr, coverage };

std::string_view to_string(Objective objective) noexcept;
/// Throws ConfigError on an unknown name.
Objective objective_from_string(std::string_view name);

struct ProblemInstance {
    Scenario scenario;
    RadioParams params;
    ConstraintSet constraints;
    Objective objective = Objective::sum_snr;
    std::uint64_t mc_seed = 0;
    std::size_t n_mc = 256;

    AmplitudeTable amplitude_table() const {
        return AmplitudeTable(scenario, params, n_mc, mc_seed);
    }
};

struct SolverResult {
    DeploymentPlan plan;
    double objective = 0.0;
};

/// Value of the instance objective for a set of sorted site indices.
double objective_value(const AmplitudeTable& table, Objective objective,
                       std::span<const std::size_t> sites);

/// Cardinality, region membership and pairwise spacing. Throws ArgumentError
/// when the selection length differs from the grid size.
bool feasible(const DeploymentPlan& plan, const ConstraintSet& constraints, const Grid& grid);

/// Number of L-subsets of M, saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t m, std::uint64_t l) noexcept;

inline constexpr std::uint64_t kOracleSubsetLimit = 1'000'000;

/// Exact maximizer of the seeded estimator over all feasible plans, ties going
/// to the lexicographically smallest index set. Enumeration is split over the
/// first index across `workers`; the reduction is order-independent.
/// Throws ResourceError when C(M, L) exceeds kOracleSubsetLimit and
/// InfeasibleError when no plan satisfies the spacing constraint.
SolverResult exhaustive_oracle(const ProblemInstance& instance, int workers = 1);
SolverResult exhaustive_oracle(const ProblemInstance& instance, const AmplitudeTable& table,
                               int workers = 1);

/// Adds one RIS at a time, each maximizing the objective of the partial plan
/// subject to spacing; ties go to the lower index.
SolverResult greedy_baseline(const ProblemInstance& instance);
SolverResult greedy_baseline(const ProblemInstance& instance, const AmplitudeTable& table);

inline constexpr std::size_t kRandomBaselineAttempts = 100'000;

/// Uniformly random feasible plan by rejection sampling.
SolverResult random_baseline(const ProblemInstance& instance, std::uint64_t seed);
SolverResult random_baseline(const ProblemInstance& instance, const AmplitudeTable& table,
                             std::uint64_t seed);

}  // namespace risdiff
