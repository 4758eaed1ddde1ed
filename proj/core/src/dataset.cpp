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

#include "risdiff/dataset.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "risdiff/digest.hpp"
#include "risdiff/error.hpp"
#include "risdiff/random.hpp"

namespace risdiff {

using nlohmann::json;

namespace {

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

json point_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

Point3 point_from(const json& j) {
    if (!j.is_array() || j.size() != 3) {
        throw FormatError("point must be an array of three numbers");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json region_json(const Region& r) {
    return {{"x", {r.x_min, r.x_max}}, {"y", {r.y_min, r.y_max}}, {"z", {r.z_min, r.z_max}}};
}

Region region_from(const json& j) {
    Region r;
    r.x_min = j.at("x").at(0).get<double>();
    r.x_max = j.at("x").at(1).get<double>();
    r.y_min = j.at("y").at(0).get<double>();
    r.y_max = j.at("y").at(1).get<double>();
    r.z_min = j.at("z").at(0).get<double>();
    r.z_max = j.at("z").at(1).get<double>();
    return r;
}

json grid_json(const GridSpec& g) { return json::array({g.n_x, g.n_y, g.n_z}); }

GridSpec grid_from(const json& j) {
    return {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>(), j.at(2).get<std::size_t>()};
}

std::size_t nearest_point(const Grid& grid, const Point3& p) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = distance(grid.points[i], p);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

bool compatible(const Grid& grid, const ConstraintSet& c, std::span<const std::size_t> chosen,
                std::size_t candidate) {
    if (!c.region.contains(grid.points[candidate])) {
        return false;
    }
    return std::all_of(chosen.begin(), chosen.end(), [&](std::size_t s) {
        return s != candidate &&
               distance(grid.points[s], grid.points[candidate]) >= c.d_min - kSpacingTolerance;
    });
}

}  // namespace

void ScenarioConfig::validate() const {
    if (!region.valid()) {
        throw ConfigError("scenario region is invalid");
    }
    if (grid_spec.size() == 0) {
        throw ConfigError("grid counts must be positive");
    }
    if (!(obstacle_size_min > 0.0) || obstacle_size_max < obstacle_size_min) {
        throw ConfigError("obstacle size range must satisfy 0 < min <= max");
    }
    if (!(obstacle_height_min > 0.0) || obstacle_height_max < obstacle_height_min) {
        throw ConfigError("obstacle height range must satisfy 0 < min <= max");
    }
    if (!std::isfinite(user_height)) {
        throw ConfigError("user height must be finite");
    }
}

Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t index) {
    Rng rng = make_rng(config.seed, index);
    const Region& r = config.region;
    Scenario s;
    s.region = r;
    s.grid_spec = config.grid_spec;
    if (config.bs_fixed) {
        s.bs = *config.bs_fixed;
    } else {
        s.bs.x = uniform(rng, r.x_min, r.x_max);
        s.bs.y = uniform(rng, r.y_min, r.y_max);
        s.bs.z = uniform(rng, r.z_min, r.z_max);
    }
    s.users.reserve(config.n_users);
    for (std::size_t k = 0; k < config.n_users; ++k) {
        const double x = uniform(rng, r.x_min, r.x_max);
        const double y = uniform(rng, r.y_min, r.y_max);
        s.users.push_back({x, y, config.user_height});
    }
    for (std::size_t o = 0; o < config.n_obstacles; ++o) {
        for (int attempt = 0; attempt < kMaxObstaclePlacementTries; ++attempt) {
            const double cx = uniform(rng, r.x_min, r.x_max);
            const double cy = uniform(rng, r.y_min, r.y_max);
            const double sx = uniform(rng, config.obstacle_size_min, config.obstacle_size_max);
            const double sy = uniform(rng, config.obstacle_size_min, config.obstacle_size_max);
            const double h = uniform(rng, config.obstacle_height_min, config.obstacle_height_max);
            const Box3 box{{cx - 0.5 * sx, cy - 0.5 * sy, 0.0}, {cx + 0.5 * sx, cy + 0.5 * sy, h}};
            if (!box.contains(s.bs)) {
                s.obstacles.push_back(box);
                break;
            }
        }
    }
    return s;
}

std::vector<double> encode_condition(const Scenario& scenario, const EncodingLayout& layout) {
    if (scenario.users.size() > layout.max_users) {
        throw ArgumentError("scenario has " + std::to_string(scenario.users.size()) +
                            " users; the encoding holds at most " + std::to_string(layout.max_users));
    }
    if (scenario.obstacles.size() > layout.max_obstacles) {
        throw ArgumentError("scenario has " + std::to_string(scenario.obstacles.size()) +
                            " obstacles; the encoding holds at most " +
                            std::to_string(layout.max_obstacles));
    }
    const Region& r = scenario.region;
    std::vector<double> x;
    x.reserve(layout.condition_dim());
    const auto push = [&](const Point3& p) {
        x.push_back(normalize_coord(p.x, r.x_min, r.x_max));
        x.push_back(normalize_coord(p.y, r.y_min, r.y_max));
        x.push_back(normalize_coord(p.z, r.z_min, r.z_max));
    };
    push(scenario.bs);
    for (const Point3& u : scenario.users) {
        push(u);
    }
    x.resize(3 * (1 + layout.max_users), kAbsentSlot);
    for (const Box3& b : scenario.obstacles) {
        push(b.min);
        push(b.max);
    }
    x.resize(layout.condition_dim(), kAbsentSlot);
    return x;
}

std::string_view to_string(TargetMode mode) noexcept {
    return mode == TargetMode::coords ? "coords" : "multihot";
}

TargetMode target_mode_from_string(std::string_view name) {
    if (name == "multihot") {
        return TargetMode::multihot;
    }
    if (name == "coords") {
        return TargetMode::coords;
    }
    throw ConfigError("unknown target mode '" + std::string(name) + "' (expected multihot or coords)");
}

std::size_t target_dim(TargetMode mode, std::size_t grid_size, std::size_t l_count) noexcept {
    return mode == TargetMode::multihot ? grid_size : 3 * l_count;
}

std::vector<double> encode_target(const DeploymentPlan& plan, const Grid& grid, TargetMode mode) {
    if (mode == TargetMode::multihot) {
        std::vector<double> y(grid.size(), -1.0);
        for (std::size_t i : plan.indices) {
            y.at(i) = 1.0;
        }
        return y;
    }
    const Region& r = grid.region;
    std::vector<double> y;
    y.reserve(3 * plan.size());
    for (std::size_t i : plan.indices) {
        const Point3& p = grid.points.at(i);
        y.push_back(normalize_coord(p.x, r.x_min, r.x_max));
        y.push_back(normalize_coord(p.y, r.y_min, r.y_max));
        y.push_back(normalize_coord(p.z, r.z_min, r.z_max));
    }
    return y;
}

DeploymentPlan decode_target(std::span<const double> y, const Grid& grid,
                             const ConstraintSet& constraints, TargetMode mode) {
    const std::size_t l = constraints.l_count;
    if (y.size() != target_dim(mode, grid.size(), l)) {
        throw ArgumentError("target vector has length " + std::to_string(y.size()) + ", expected " +
                            std::to_string(target_dim(mode, grid.size(), l)));
    }
    std::vector<std::size_t> chosen;
    chosen.reserve(l);

    if (mode == TargetMode::multihot) {
        std::vector<std::size_t> order(y.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        const auto score = [&](std::size_t i) {
            return std::isnan(y[i]) ? -std::numeric_limits<double>::infinity() : y[i];
        };
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return score(a) > score(b); });
        for (std::size_t i : order) {
            if (chosen.size() == l) {
                break;
            }
            if (compatible(grid, constraints, chosen, i)) {
                chosen.push_back(i);
            }
        }
    } else {
        const Region& r = grid.region;
        for (std::size_t j = 0; j < l; ++j) {
            const Point3 p{denormalize_coord(y[3 * j], r.x_min, r.x_max),
                           denormalize_coord(y[3 * j + 1], r.y_min, r.y_max),
                           denormalize_coord(y[3 * j + 2], r.z_min, r.z_max)};
            const std::size_t snapped = nearest_point(grid, p);
            if (compatible(grid, constraints, chosen, snapped)) {
                chosen.push_back(snapped);
                continue;
            }
            std::size_t best = grid.size();
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < grid.size(); ++i) {
                if (!compatible(grid, constraints, chosen, i)) {
                    continue;
                }
                const double d = distance(grid.points[i], p);
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            if (best == grid.size()) {
                break;
            }
            chosen.push_back(best);
        }
    }
    if (chosen.size() != l) {
        throw InfeasibleError("cannot project the generated vector onto a feasible plan");
    }
    return DeploymentPlan::from_indices(grid, chosen);
}

ConstraintSet DatasetConfig::constraints(const Grid& grid) const {
    ConstraintSet c;
    c.l_count = l_count;
    c.d_min = d_min.value_or(grid.cell_diagonal());
    c.region = grid.region;
    return c;
}

void DatasetConfig::validate() const {
    scenario.validate();
    radio.validate();
    if (n_mc == 0) {
        throw ConfigError("n_mc must be at least 1");
    }
    if (scenario.n_users > layout.max_users || scenario.n_obstacles > layout.max_obstacles) {
        throw ConfigError("user/obstacle counts exceed the condition layout maxima");
    }
    const Grid grid = build_grid(scenario.region, scenario.grid_spec);
    constraints(grid).validate(grid.size());
}

std::string dataset_name(std::size_t n_obstacles, std::size_t n_users) {
    return std::to_string(n_obstacles) + "obs_" + std::to_string(n_users) +
           (n_users == 1 ? "user" : "users");
}

std::uint64_t sample_mc_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix_seed(seed ^ 0x6d6f6e746563ULL, index);
}

ProblemInstance make_instance(const Scenario& scenario, const DatasetConfig& config,
                              std::uint64_t mc_seed) {
    ProblemInstance instance;
    instance.scenario = scenario;
    instance.params = config.radio;
    instance.constraints = config.constraints(scenario.grid());
    instance.objective = config.objective;
    instance.mc_seed = mc_seed;
    instance.n_mc = config.n_mc;
    return instance;
}

LabeledSample label_scenario(const Scenario& scenario, const DatasetConfig& config,
                             std::uint64_t index, std::uint64_t mc_seed) {
    const ProblemInstance instance = make_instance(scenario, config, mc_seed);
    const SolverResult best = exhaustive_oracle(instance);
    LabeledSample sample;
    sample.index = index;
    sample.scenario = scenario;
    sample.condition = encode_condition(scenario, config.layout);
    sample.target_plan = best.plan;
    sample.oracle_objective = best.objective;
    sample.mc_seed = mc_seed;
    sample.target_mode = config.target_mode;
    return sample;
}

std::vector<LabeledSample> generate_dataset(const DatasetConfig& config, std::size_t count,
                                            std::uint64_t first_index, int workers) {
    config.validate();
    std::vector<LabeledSample> samples(count);
    std::vector<std::string> errors(count);
    const long n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, workers))
    for (long i = 0; i < n; ++i) {
        const std::uint64_t index = first_index + static_cast<std::uint64_t>(i);
        try {
            const Scenario scenario = generate_scenario(config.scenario, index);
            samples[i] = label_scenario(scenario, config, index,
                                        sample_mc_seed(config.scenario.seed, index));
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }
    for (std::size_t i = 0; i < count; ++i) {
        if (!errors[i].empty()) {
            throw Error("labeling sample " + std::to_string(first_index + i) + " failed: " + errors[i]);
        }
    }
    return samples;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

json to_json(const Scenario& s) {
    json users = json::array();
    for (const Point3& u : s.users) {
        users.push_back(point_json(u));
    }
    json obstacles = json::array();
    for (const Box3& b : s.obstacles) {
        obstacles.push_back(json::array({b.min.x, b.min.y, b.min.z, b.max.x, b.max.y, b.max.z}));
    }
    return {{"region", region_json(s.region)},
            {"grid", grid_json(s.grid_spec)},
            {"bs", point_json(s.bs)},
            {"users", std::move(users)},
            {"obstacles", std::move(obstacles)}};
}

Scenario scenario_from_json(const json& j) {
    Scenario s;
    s.region = region_from(j.at("region"));
    s.grid_spec = grid_from(j.at("grid"));
    s.bs = point_from(j.at("bs"));
    for (const auto& u : j.at("users")) {
        s.users.push_back(point_from(u));
    }
    for (const auto& b : j.at("obstacles")) {
        if (!b.is_array() || b.size() != 6) {
            throw FormatError("obstacle must be [min_x, min_y, min_z, max_x, max_y, max_z]");
        }
        Box3 box{{b[0].get<double>(), b[1].get<double>(), b[2].get<double>()},
                 {b[3].get<double>(), b[4].get<double>(), b[5].get<double>()}};
        if (!box.valid()) {
            throw FormatError("obstacle box has min > max");
        }
        s.obstacles.push_back(box);
    }
    return s;
}

json to_json(const RadioParams& p) {
    return {{"lambda", p.lambda},
            {"g_t", p.g_t},
            {"g_r", p.g_r},
            {"alpha", p.alpha},
            {"p_tx", p.p_tx},
            {"noise_power", p.noise_power},
            {"gamma_th", p.gamma_th},
            {"n_elements", p.n_elements},
            {"gate_cascade", p.gate_cascade}};
}

RadioParams radio_params_from_json(const json& j) {
    RadioParams p;
    p.lambda = j.at("lambda").get<double>();
    p.g_t = j.at("g_t").get<double>();
    p.g_r = j.at("g_r").get<double>();
    p.alpha = j.at("alpha").get<double>();
    p.p_tx = j.at("p_tx").get<double>();
    p.noise_power = j.at("noise_power").get<double>();
    p.gamma_th = j.at("gamma_th").get<double>();
    p.n_elements = j.at("n_elements").get<std::size_t>();
    p.gate_cascade = j.at("gate_cascade").get<bool>();
    return p;
}

json to_json(const DatasetConfig& c) {
    const ScenarioConfig& s = c.scenario;
    json scenario = {{"n_obstacles", s.n_obstacles},
                     {"n_users", s.n_users},
                     {"region", region_json(s.region)},
                     {"grid", grid_json(s.grid_spec)},
                     {"bs", s.bs_fixed ? point_json(*s.bs_fixed) : json("random")},
                     {"obstacle_size", {s.obstacle_size_min, s.obstacle_size_max}},
                     {"obstacle_height", {s.obstacle_height_min, s.obstacle_height_max}},
                     {"user_height", s.user_height},
                     {"seed", s.seed}};
    return {{"scenario", std::move(scenario)},
            {"radio", to_json(c.radio)},
            {"l_count", c.l_count},
            {"d_min", c.d_min ? json(*c.d_min) : json("cell_diagonal")},
            {"objective", std::string(to_string(c.objective))},
            {"n_mc", c.n_mc},
            {"max_users", c.layout.max_users},
            {"max_obstacles", c.layout.max_obstacles},
            {"target_mode", std::string(to_string(c.target_mode))}};
}

DatasetConfig dataset_config_from_json(const json& j) {
    DatasetConfig c;
    const json& s = j.at("scenario");
    c.scenario.n_obstacles = s.at("n_obstacles").get<std::size_t>();
    c.scenario.n_users = s.at("n_users").get<std::size_t>();
    c.scenario.region = region_from(s.at("region"));
    c.scenario.grid_spec = grid_from(s.at("grid"));
    if (s.at("bs").is_string()) {
        c.scenario.bs_fixed.reset();
    } else {
        c.scenario.bs_fixed = point_from(s.at("bs"));
    }
    c.scenario.obstacle_size_min = s.at("obstacle_size").at(0).get<double>();
    c.scenario.obstacle_size_max = s.at("obstacle_size").at(1).get<double>();
    c.scenario.obstacle_height_min = s.at("obstacle_height").at(0).get<double>();
    c.scenario.obstacle_height_max = s.at("obstacle_height").at(1).get<double>();
    c.scenario.user_height = s.at("user_height").get<double>();
    c.scenario.seed = s.at("seed").get<std::uint64_t>();
    c.radio = radio_params_from_json(j.at("radio"));
    c.l_count = j.at("l_count").get<std::size_t>();
    if (j.at("d_min").is_string()) {
        c.d_min.reset();
    } else {
        c.d_min = j.at("d_min").get<double>();
    }
    c.objective = objective_from_string(j.at("objective").get<std::string>());
    c.n_mc = j.at("n_mc").get<std::size_t>();
    c.layout.max_users = j.at("max_users").get<std::size_t>();
    c.layout.max_obstacles = j.at("max_obstacles").get<std::size_t>();
    c.target_mode = target_mode_from_string(j.at("target_mode").get<std::string>());
    return c;
}

std::string sample_to_line(const LabeledSample& sample) {
    json line = {{"version", kDatasetFormatVersion},
                 {"index", sample.index},
                 {"scenario", to_json(sample.scenario)},
                 {"condition", sample.condition},
                 {"target_indices", sample.target_plan.indices},
                 {"target_mode", std::string(to_string(sample.target_mode))},
                 {"oracle_objective", sample.oracle_objective},
                 {"mc_seed", sample.mc_seed}};
    return line.dump();
}

std::string manifest_path(const std::string& dataset_path) {
    return dataset_path + ".manifest.json";
}

DatasetManifest save_dataset(const std::string& path, const std::string& name,
                             const DatasetConfig& config, std::span<const LabeledSample> samples) {
    std::string body;
    for (const LabeledSample& s : samples) {
        body += sample_to_line(s);
        body += '\n';
    }
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write dataset '" + path + "'");
        }
        out << body;
    }
    DatasetManifest manifest;
    manifest.name = name;
    manifest.sample_count = samples.size();
    manifest.config = config;
    manifest.digest = sha256_hex(body);

    const json m = {{"format_version", manifest.format_version},
                    {"name", manifest.name},
                    {"sample_count", manifest.sample_count},
                    {"condition_layout_version", kConditionLayoutVersion},
                    {"config", to_json(config)},
                    {"digest", "sha256:" + manifest.digest}};
    std::ofstream out(manifest_path(path), std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write manifest '" + manifest_path(path) + "'");
    }
    out << m.dump(2) << '\n';
    return manifest;
}

Dataset load_dataset(const std::string& path) {
    Dataset ds;
    {
        std::ifstream in(manifest_path(path));
        if (!in) {
            throw FormatError("missing manifest '" + manifest_path(path) + "'");
        }
        json m;
        try {
            m = json::parse(in);
            ds.manifest.format_version = m.at("format_version").get<int>();
            if (ds.manifest.format_version != kDatasetFormatVersion) {
                throw FormatError("unsupported dataset format version " +
                                  std::to_string(ds.manifest.format_version));
            }
            if (m.at("condition_layout_version").get<int>() != kConditionLayoutVersion) {
                throw FormatError("unsupported condition layout version");
            }
            ds.manifest.name = m.at("name").get<std::string>();
            ds.manifest.sample_count = m.at("sample_count").get<std::size_t>();
            ds.manifest.config = dataset_config_from_json(m.at("config"));
            const std::string digest = m.at("digest").get<std::string>();
            if (digest.rfind("sha256:", 0) != 0) {
                throw FormatError("manifest digest must start with 'sha256:'");
            }
            ds.manifest.digest = digest.substr(7);
        } catch (const json::exception& e) {
            throw FormatError("malformed manifest: " + std::string(e.what()));
        } catch (const ConfigError& e) {
            throw FormatError("malformed manifest: " + std::string(e.what()));
        }
    }
    const DatasetConfig& config = ds.manifest.config;
    const Grid grid = build_grid(config.scenario.region, config.scenario.grid_spec);
    const ConstraintSet constraints = config.constraints(grid);

    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open dataset '" + path + "'");
    }
    std::stringstream whole;
    whole << in.rdbuf();
    const std::string body = whole.str();

    std::istringstream lines(body);
    std::string text;
    long line_no = 0;
    while (std::getline(lines, text)) {
        ++line_no;
        LabeledSample s;
        try {
            const json j = json::parse(text);
            if (j.at("version").get<int>() != kDatasetFormatVersion) {
                throw FormatError("schema version mismatch", line_no);
            }
            s.index = j.at("index").get<std::uint64_t>();
            s.scenario = scenario_from_json(j.at("scenario"));
            s.condition = j.at("condition").get<std::vector<double>>();
            const auto indices = j.at("target_indices").get<std::vector<std::size_t>>();
            s.target_mode = target_mode_from_string(j.at("target_mode").get<std::string>());
            s.oracle_objective = j.at("oracle_objective").get<double>();
            s.mc_seed = j.at("mc_seed").get<std::uint64_t>();
            if (!(s.scenario.region == grid.region) || !(s.scenario.grid_spec == grid.spec)) {
                throw FormatError("scenario grid differs from the manifest", line_no);
            }
            s.target_plan = DeploymentPlan::from_indices(grid, indices);
        } catch (const FormatError&) {
            throw;
        } catch (const std::exception& e) {
            throw FormatError("malformed sample: " + std::string(e.what()), line_no);
        }
        if (s.condition != encode_condition(s.scenario, config.layout)) {
            throw FormatError("invariant violation: condition does not encode the scenario", line_no);
        }
        if (!feasible(s.target_plan, constraints, grid)) {
            throw FormatError("invariant violation: target plan is infeasible", line_no);
        }
        if (!std::isfinite(s.oracle_objective) || s.oracle_objective < 0.0) {
            throw FormatError("invariant violation: oracle objective must be finite and >= 0",
                              line_no);
        }
        ds.samples.push_back(std::move(s));
    }
    if (!body.empty() && body.back() != '\n') {
        throw FormatError("truncated final line", line_no);
    }
    if (ds.samples.size() != ds.manifest.sample_count) {
        throw FormatError("manifest declares " + std::to_string(ds.manifest.sample_count) +
                          " samples but the file holds " + std::to_string(ds.samples.size()),
                          line_no + 1);
    }
    if (sha256_hex(body) != ds.manifest.digest) {
        throw FormatError("content digest does not match the manifest");
    }
    return ds;
}

}  // namespace risdiff
