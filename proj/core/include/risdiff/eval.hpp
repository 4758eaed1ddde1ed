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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "risdiff/dataset.hpp"
#include "risdiff/diffusion.hpp"
#include "risdiff/solver.hpp"

namespace risdiff {

enum class Method { diffusion, greedy, random, oracle };

std::string_view to_string(Method method) noexcept;
/// Throws ConfigError on an unknown name.
Method method_from_string(std::string_view name);

/// gamma_p / gamma_t with both values from the same seeded estimator.
/// Throws UndefinedMetricError unless oracle_value > 0.
double exceed_ratio(const DeploymentPlan& pred, const ProblemInstance& instance, double oracle_value);
double exceed_ratio(const DeploymentPlan& pred, const AmplitudeTable& table, Objective objective,
                    double oracle_value);

enum class EvalStatus { ok, undefined, failed };

struct ExceedReport {
    std::string method;
    std::string dataset;
    std::vector<std::uint64_t> indices;  // every scenario, in dataset order
    std::vector<EvalStatus> status;
    std::vector<double> values;          // E where status is ok, else NaN
    std::size_t evaluated = 0;
    std::size_t undefined = 0;           // oracle objective 0
    std::size_t failures = 0;            // method raised an error
    double median = 0.0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double fraction_ge_095 = 0.0;
};

/// Fills the aggregates from per-scenario entries. Aggregates are NaN when
/// nothing was evaluated.
void summarize(ExceedReport& report);

struct EvalOptions {
    SampleConfig sample;
    std::uint64_t random_seed = 0;
    int workers = 1;
};

/// Runs the method on every scenario. Scenarios whose oracle objective is 0
/// are excluded and counted as undefined; per-scenario method errors are
/// excluded and counted as failures. `model` is required for diffusion. Under
/// best_of_n the candidates are ranked on a second, independent set of fading
/// draws, so selection never sees the draws that grade the chosen plan.
ExceedReport evaluate_method(Method method, const Dataset& dataset, const DiffusionModel* model,
                             const EvalOptions& options);

nlohmann::json summary_json(const ExceedReport& report);
/// Header: index,status,exceed_ratio
std::string report_csv(const ExceedReport& report);
/// Writes <prefix>.csv and <prefix>.json.
void write_report(const std::string& prefix, const ExceedReport& report);

enum class SweepParameter { omega, p_uncond, T };

std::string_view to_string(SweepParameter parameter) noexcept;
SweepParameter sweep_parameter_from_string(std::string_view name);

struct SweepResult {
    SweepParameter parameter = SweepParameter::omega;
    std::vector<double> values;  // strictly increasing
    std::vector<ExceedReport> reports;

    std::vector<double> medians() const;
};

/// Fixed inputs shared by every sweep point.
struct SweepSetup {
    const Dataset* train = nullptr;  // needed for p_uncond and T
    const Dataset* test = nullptr;
    TrainConfig train_config;
    TargetMode target_mode = TargetMode::multihot;
    EvalOptions eval;
    const DiffusionModel* model = nullptr;  // needed for omega
};

/// Sorts the values and throws ConfigError on fewer than three values,
/// duplicates, or values outside the parameter's domain.
std::vector<double> validate_sweep_values(SweepParameter parameter, std::span<const double> values);

/// omega re-samples the given model; p_uncond and T train one model per value.
SweepResult sweep(SweepParameter parameter, std::span<const double> values, const SweepSetup& setup);

/// Header: parameter,value,median,mean,fraction_ge_0_95,evaluated,undefined,failures
std::string sweep_csv(const SweepResult& result);

struct GeneralizationMatrix {
    std::vector<std::string> train_names;
    std::vector<std::string> test_names;
    std::vector<std::vector<double>> median;  // [train][test]
};

/// One model per training set (optionally pre-trained), each evaluated on every test set.
GeneralizationMatrix generalization_matrix(std::span<const Dataset* const> train_sets,
                                           std::span<const Dataset* const> test_sets,
                                           const TrainConfig& train_config, TargetMode mode,
                                           const EvalOptions& eval);
GeneralizationMatrix generalization_matrix(std::span<const std::string> train_names,
                                           std::span<const DiffusionModel* const> models,
                                           std::span<const Dataset* const> test_sets,
                                           const EvalOptions& eval);

/// Wide CSV: first column the training set, one column per test set.
std::string matrix_csv(const GeneralizationMatrix& matrix);

/// Called after every epoch with the mean loss.
using EpochCallback = std::function<void(std::size_t epoch, double loss, const Trainer& trainer)>;

/// Trains for config.epochs epochs on the dataset encoded in `mode`.
Checkpoint train_model(const Dataset& dataset, const TrainConfig& config, TargetMode mode,
                       const EpochCallback& on_epoch = {});

/// Shortest round-trip decimal text for a double, used in every CSV.
std::string format_number(double v);

}  // namespace risdiff
