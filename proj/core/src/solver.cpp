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

#include "risdiff/solver.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "risdiff/error.hpp"
#include "risdiff/random.hpp"

namespace risdiff {

namespace {

// Pairwise spacing and region admissibility, precomputed once per instance.
class SpacingRules {
public:
    SpacingRules(const Grid& grid, const ConstraintSet& constraints)
        : m_(grid.size()), allowed_site_(m_), compatible_(m_ * m_) {
        for (std::size_t i = 0; i < m_; ++i) {
            allowed_site_[i] = constraints.region.contains(grid.points[i]);
            for (std::size_t j = 0; j < m_; ++j) {
                compatible_[i * m_ + j] =
                    i != j && distance(grid.points[i], grid.points[j]) >=
                                  constraints.d_min - kSpacingTolerance;
            }
        }
    }

    bool site(std::size_t i) const { return allowed_site_[i] != 0; }
    bool pair(std::size_t i, std::size_t j) const { return compatible_[i * m_ + j] != 0; }

    bool extends(std::span<const std::size_t> chosen, std::size_t candidate) const {
        if (!site(candidate)) {
            return false;
        }
        return std::all_of(chosen.begin(), chosen.end(),
                           [&](std::size_t c) { return pair(c, candidate); });
    }

private:
    std::size_t m_;
    std::vector<std::uint8_t> allowed_site_;
    std::vector<std::uint8_t> compatible_;
};

struct Candidate {
    bool found = false;
    double value = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> sites;
};

// Depth-first enumeration of sorted index sets in lexicographic order; only
// strictly better values replace the incumbent, which realizes the tie-break.
void enumerate(const SpacingRules& rules, const AmplitudeTable& table, Objective objective,
               std::size_t m, std::size_t l, std::vector<std::size_t>& prefix, Candidate& best) {
    if (prefix.size() == l) {
        const double value = objective_value(table, objective, prefix);
        if (!best.found || value > best.value) {
            best.found = true;
            best.value = value;
            best.sites = prefix;
        }
        return;
    }
    const std::size_t remaining = l - prefix.size();
    for (std::size_t i = prefix.back() + 1; i + remaining <= m; ++i) {
        if (!rules.extends(prefix, i)) {
            continue;
        }
        prefix.push_back(i);
        enumerate(rules, table, objective, m, l, prefix, best);
        prefix.pop_back();
    }
}

SolverResult finish(const Grid& grid, const AmplitudeTable& table, Objective objective,
                    const std::vector<std::size_t>& sites) {
    SolverResult result;
    result.plan = DeploymentPlan::from_indices(grid, sites);
    result.objective = objective_value(table, objective, result.plan.indices);
    return result;
}

void check_table(const ProblemInstance& instance, const AmplitudeTable& table) {
    if (table.n_sites() != instance.scenario.grid_spec.size() ||
        table.n_users() != instance.scenario.users.size()) {
        throw ArgumentError("amplitude table does not belong to this instance");
    }
}

}  // namespace

void ConstraintSet::validate(std::size_t grid_size) const {
    if (l_count < 1 || l_count > grid_size) {
        throw ConfigError("RIS count L must satisfy 1 <= L <= M (M = " +
                          std::to_string(grid_size) + ")");
    }
    if (!(d_min >= 0.0) || !std::isfinite(d_min)) {
        throw ConfigError("d_min must be a non-negative finite distance");
    }
    if (!region.valid()) {
        throw ConfigError("constraint region is invalid");
    }
}

std::string_view to_string(Objective objective) noexcept {
    return objective == Objective::coverage ? "coverage" : "sum_snr";
}

Objective objective_from_string(std::string_view name) {
    if (name == "sum_snr") {
        return Objective::sum_snr;
    }
    if (name == "coverage") {
        return Objective::coverage;
    }
    throw ConfigError("unknown objective '" + std::string(name) + "' (expected sum_snr or coverage)");
}

double objective_value(const AmplitudeTable& table, Objective objective,
                       std::span<const std::size_t> sites) {
    return objective == Objective::coverage ? table.coverage(sites) : table.sum_snr(sites);
}

bool feasible(const DeploymentPlan& plan, const ConstraintSet& constraints, const Grid& grid) {
    if (plan.selection.size() != grid.size()) {
        throw ArgumentError("selection vector length " + std::to_string(plan.selection.size()) +
                            " differs from grid size " + std::to_string(grid.size()));
    }
    std::vector<std::size_t> selected;
    for (std::size_t i = 0; i < plan.selection.size(); ++i) {
        if (plan.selection[i] > 1) {
            return false;
        }
        if (plan.selection[i] == 1) {
            selected.push_back(i);
        }
    }
    if (selected.size() != constraints.l_count || selected != plan.indices ||
        plan.coords.size() != selected.size()) {
        return false;
    }
    for (std::size_t a = 0; a < selected.size(); ++a) {
        const Point3& p = grid.points[selected[a]];
        if (!(plan.coords[a] == p) || !constraints.region.contains(p)) {
            return false;
        }
        for (std::size_t b = 0; b < a; ++b) {
            if (distance(p, grid.points[selected[b]]) < constraints.d_min - kSpacingTolerance) {
                return false;
            }
        }
    }
    return true;
}

std::uint64_t binomial(std::uint64_t m, std::uint64_t l) noexcept {
    if (l > m) {
        return 0;
    }
    l = std::min(l, m - l);
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= l; ++i) {
        const std::uint64_t numerator = m - l + i;
        // result * numerator / i is exact at every step; guard the product.
        if (result > std::numeric_limits<std::uint64_t>::max() / numerator) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        result = result * numerator / i;
    }
    return result;
}

SolverResult exhaustive_oracle(const ProblemInstance& instance, int workers) {
    const AmplitudeTable table = instance.amplitude_table();
    return exhaustive_oracle(instance, table, workers);
}

SolverResult exhaustive_oracle(const ProblemInstance& instance, const AmplitudeTable& table,
                               int workers) {
    const Grid grid = instance.scenario.grid();
    const std::size_t m = grid.size();
    const std::size_t l = instance.constraints.l_count;
    instance.constraints.validate(m);
    check_table(instance, table);
    if (binomial(m, l) > kOracleSubsetLimit) {
        throw ResourceError("exhaustive search over C(" + std::to_string(m) + ", " +
                            std::to_string(l) + ") subsets exceeds the enumeration limit");
    }

    const SpacingRules rules(grid, instance.constraints);
    std::vector<Candidate> per_first(m);
    const long n_first = static_cast<long>(m - l + 1);

#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, workers))
    for (long first = 0; first < n_first; ++first) {
        const auto i = static_cast<std::size_t>(first);
        if (!rules.site(i)) {
            continue;
        }
        std::vector<std::size_t> prefix{i};
        enumerate(rules, table, instance.objective, m, l, prefix, per_first[i]);
    }

    // per_first is ordered by leading index, hence lexicographically.
    const Candidate* best = nullptr;
    for (const Candidate& c : per_first) {
        if (c.found && (best == nullptr || c.value > best->value)) {
            best = &c;
        }
    }
    if (best == nullptr) {
        throw InfeasibleError("no deployment satisfies the spacing constraint (d_min = " +
                              std::to_string(instance.constraints.d_min) + " m)");
    }
    return finish(grid, table, instance.objective, best->sites);
}

SolverResult greedy_baseline(const ProblemInstance& instance) {
    const AmplitudeTable table = instance.amplitude_table();
    return greedy_baseline(instance, table);
}

SolverResult greedy_baseline(const ProblemInstance& instance, const AmplitudeTable& table) {
    const Grid grid = instance.scenario.grid();
    const std::size_t m = grid.size();
    instance.constraints.validate(m);
    check_table(instance, table);
    const SpacingRules rules(grid, instance.constraints);

    std::vector<std::size_t> chosen;
    std::vector<std::size_t> trial;
    while (chosen.size() < instance.constraints.l_count) {
        bool found = false;
        double best_value = 0.0;
        std::size_t best_site = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (std::find(chosen.begin(), chosen.end(), i) != chosen.end() ||
                !rules.extends(chosen, i)) {
                continue;
            }
            trial = chosen;
            trial.insert(std::upper_bound(trial.begin(), trial.end(), i), i);
            const double value = objective_value(table, instance.objective, trial);
            if (!found || value > best_value) {
                found = true;
                best_value = value;
                best_site = i;
            }
        }
        if (!found) {
            throw InfeasibleError("greedy placement found no site compatible with d_min after " +
                                  std::to_string(chosen.size()) + " RIS");
        }
        chosen.insert(std::upper_bound(chosen.begin(), chosen.end(), best_site), best_site);
    }
    return finish(grid, table, instance.objective, chosen);
}

SolverResult random_baseline(const ProblemInstance& instance, std::uint64_t seed) {
    const AmplitudeTable table = instance.amplitude_table();
    return random_baseline(instance, table, seed);
}

SolverResult random_baseline(const ProblemInstance& instance, const AmplitudeTable& table,
                             std::uint64_t seed) {
    const Grid grid = instance.scenario.grid();
    const std::size_t m = grid.size();
    const std::size_t l = instance.constraints.l_count;
    instance.constraints.validate(m);
    check_table(instance, table);
    const SpacingRules rules(grid, instance.constraints);

    Rng rng = make_rng(seed, 0);
    std::vector<std::size_t> pick;
    for (std::size_t attempt = 0; attempt < kRandomBaselineAttempts; ++attempt) {
        // Floyd's algorithm: a uniform L-subset of {0..M-1}.
        pick.clear();
        for (std::size_t j = m - l; j < m; ++j) {
            std::uniform_int_distribution<std::size_t> dist(0, j);
            const std::size_t t = dist(rng);
            if (std::find(pick.begin(), pick.end(), t) == pick.end()) {
                pick.push_back(t);
            } else {
                pick.push_back(j);
            }
        }
        std::sort(pick.begin(), pick.end());
        bool ok = true;
        for (std::size_t a = 0; a < pick.size() && ok; ++a) {
            ok = rules.extends(std::span<const std::size_t>(pick.data(), a), pick[a]);
        }
        if (ok) {
            return finish(grid, table, instance.objective, pick);
        }
    }
    throw InfeasibleError("random placement found no feasible plan after " +
                          std::to_string(kRandomBaselineAttempts) + " attempts");
}

}  // namespace risdiff
