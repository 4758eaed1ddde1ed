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

#include "risdiff/eval.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include "risdiff/error.hpp"

namespace risdiff {

namespace {

// Scenarios per block; bounds the number of live amplitude tables.
constexpr std::size_t kEvalBlock = 256;
// Fading stream for best_of_n scoring, disjoint from the one that grades the plan.
constexpr std::uint64_t kSelectionStream = 0x73656c656374ULL;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ConstraintSet constraints_for(const Dataset& dataset, const Scenario& scenario) {
    return dataset.manifest.config.constraints(scenario.grid());
}

}  // namespace

std::string_view to_string(Method method) noexcept {
    switch (method) {
        case Method::diffusion: return "diffusion";
        case Method::greedy: return "greedy";
        case Method::random: return "random";
        case Method::oracle: return "oracle";
    }
    return "unknown";
}

Method method_from_string(std::string_view name) {
    for (Method m : {Method::diffusion, Method::greedy, Method::random, Method::oracle}) {
        if (name == to_string(m)) {
            return m;
        }
    }
    throw ConfigError("unknown method '" + std::string(name) +
                      "' (expected diffusion, greedy, random or oracle)");
}

double exceed_ratio(const DeploymentPlan& pred, const AmplitudeTable& table, Objective objective,
                    double oracle_value) {
    if (!(oracle_value > 0.0)) {
        throw UndefinedMetricError("exceed ratio is undefined for a zero oracle objective");
    }
    return objective_value(table, objective, pred.indices) / oracle_value;
}

double exceed_ratio(const DeploymentPlan& pred, const ProblemInstance& instance, double oracle_value) {
    if (!(oracle_value > 0.0)) {
        throw UndefinedMetricError("exceed ratio is undefined for a zero oracle objective");
    }
    return exceed_ratio(pred, instance.amplitude_table(), instance.objective, oracle_value);
}

void summarize(ExceedReport& r) {
    std::vector<double> ok;
    r.evaluated = r.undefined = r.failures = 0;
    for (std::size_t i = 0; i < r.status.size(); ++i) {
        switch (r.status[i]) {
            case EvalStatus::ok: ok.push_back(r.values[i]); break;
            case EvalStatus::undefined: ++r.undefined; break;
            case EvalStatus::failed: ++r.failures; break;
        }
    }
    r.evaluated = ok.size();
    if (ok.empty()) {
        r.median = r.mean = r.min = r.max = r.fraction_ge_095 = kNaN;
        return;
    }
    std::sort(ok.begin(), ok.end());
    const std::size_t n = ok.size();
    r.median = n % 2 == 1 ? ok[n / 2] : 0.5 * (ok[n / 2 - 1] + ok[n / 2]);
    double sum = 0.0;
    for (double v : ok) {
        sum += v;
    }
    r.mean = sum / static_cast<double>(n);
    r.min = ok.front();
    r.max = ok.back();
    const auto good = std::count_if(ok.begin(), ok.end(), [](double v) { return v >= 0.95; });
    r.fraction_ge_095 = static_cast<double>(good) / static_cast<double>(n);
}

ExceedReport evaluate_method(Method method, const Dataset& dataset, const DiffusionModel* model,
                             const EvalOptions& options) {
    if (method == Method::diffusion && model == nullptr) {
        throw ConfigError("diffusion evaluation needs a checkpoint");
    }
    if (model != nullptr && method == Method::diffusion &&
        model->layout != dataset.manifest.config.layout) {
        throw ConfigError("checkpoint and dataset use different condition layouts");
    }
    const auto& config = dataset.manifest.config;
    const std::size_t n = dataset.samples.size();
    ExceedReport report;
    report.method = std::string(to_string(method));
    report.dataset = dataset.manifest.name;
    report.indices.resize(n);
    report.status.assign(n, EvalStatus::failed);
    report.values.assign(n, kNaN);
    const int workers = std::max(1, options.workers);

    for (std::size_t lo = 0; lo < n; lo += kEvalBlock) {
        const std::size_t hi = std::min(n, lo + kEvalBlock);
        std::vector<std::unique_ptr<AmplitudeTable>> tables(hi - lo);
        std::vector<std::unique_ptr<AmplitudeTable>> selection_tables(hi - lo);
        std::vector<ProblemInstance> instances(hi - lo);
        const bool selecting = method == Method::diffusion &&
                               options.sample.selection == SelectionRule::best_of_n;
#pragma omp parallel for schedule(dynamic) num_threads(workers)
        for (std::size_t i = lo; i < hi; ++i) {
            const auto& s = dataset.samples[i];
            instances[i - lo] = make_instance(s, config);
            if (s.oracle_objective > 0.0) {
                tables[i - lo] = std::make_unique<AmplitudeTable>(instances[i - lo].amplitude_table());
                if (selecting) {
                    ProblemInstance fresh = instances[i - lo];
                    fresh.mc_seed = mix_seed(s.mc_seed, kSelectionStream);
                    selection_tables[i - lo] = std::make_unique<AmplitudeTable>(fresh.amplitude_table());
                }
            }
        }

        std::vector<std::optional<DeploymentPlan>> plans(hi - lo);
        std::vector<std::uint8_t> errored(hi - lo, 0);
        if (method == Method::diffusion) {
            std::vector<PlanRequest> requests;
            std::vector<std::size_t> slot;
            for (std::size_t i = lo; i < hi; ++i) {
                if (!tables[i - lo]) {
                    continue;
                }
                const auto* table = selecting ? selection_tables[i - lo].get() : tables[i - lo].get();
                const Objective objective = config.objective;
                requests.push_back({&dataset.samples[i].scenario, dataset.samples[i].index,
                                    [table, objective](const DeploymentPlan& p) {
                                        return objective_value(*table, objective, p.indices);
                                    }});
                slot.push_back(i - lo);
            }
            // All scenarios in a dataset share one grid and constraint set.
            if (!requests.empty()) {
                const auto constraints = constraints_for(dataset, *requests.front().scenario);
                auto out = generate_plans(*model, requests, constraints, options.sample, workers);
                for (std::size_t q = 0; q < out.size(); ++q) {
                    plans[slot[q]] = std::move(out[q]);
                }
            }
        } else {
#pragma omp parallel for schedule(dynamic) num_threads(workers)
            for (std::size_t i = lo; i < hi; ++i) {
                if (!tables[i - lo]) {
                    continue;
                }
                const auto& inst = instances[i - lo];
                const auto& table = *tables[i - lo];
                try {
                    switch (method) {
                        case Method::greedy: plans[i - lo] = greedy_baseline(inst, table).plan; break;
                        case Method::random:
                            plans[i - lo] = random_baseline(inst, table,
                                                            mix_seed(options.random_seed,
                                                                     dataset.samples[i].index))
                                                .plan;
                            break;
                        case Method::oracle: plans[i - lo] = exhaustive_oracle(inst, table).plan; break;
                        case Method::diffusion: break;
                    }
                } catch (const Error&) {
                    errored[i - lo] = 1;
                }
            }
        }

        for (std::size_t i = lo; i < hi; ++i) {
            const auto& s = dataset.samples[i];
            report.indices[i] = s.index;
            if (!(s.oracle_objective > 0.0)) {
                report.status[i] = EvalStatus::undefined;
                continue;
            }
            const auto& plan = plans[i - lo];
            if (errored[i - lo] || !plan ||
                !feasible(*plan, instances[i - lo].constraints, s.scenario.grid())) {
                report.status[i] = EvalStatus::failed;
                continue;
            }
            report.status[i] = EvalStatus::ok;
            report.values[i] =
                exceed_ratio(*plan, *tables[i - lo], config.objective, s.oracle_objective);
        }
    }
    summarize(report);
    return report;
}

std::string format_number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

nlohmann::json summary_json(const ExceedReport& r) {
    auto num = [](double v) -> nlohmann::json {
        return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
    };
    return {{"method", r.method},
            {"dataset", r.dataset},
            {"scenarios", r.indices.size()},
            {"evaluated", r.evaluated},
            {"undefined", r.undefined},
            {"failures", r.failures},
            {"median", num(r.median)},
            {"mean", num(r.mean)},
            {"min", num(r.min)},
            {"max", num(r.max)},
            {"fraction_ge_0_95", num(r.fraction_ge_095)}};
}

std::string report_csv(const ExceedReport& r) {
    std::ostringstream out;
    out << "index,status,exceed_ratio\n";
    for (std::size_t i = 0; i < r.indices.size(); ++i) {
        out << r.indices[i] << ',';
        switch (r.status[i]) {
            case EvalStatus::ok: out << "ok," << format_number(r.values[i]); break;
            case EvalStatus::undefined: out << "undefined,"; break;
            case EvalStatus::failed: out << "failed,"; break;
        }
        out << '\n';
    }
    return out.str();
}

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ResourceError("cannot open '" + path + "' for writing");
    }
    out << text;
    if (!out) {
        throw ResourceError("failed writing '" + path + "'");
    }
}

}  // namespace

void write_report(const std::string& prefix, const ExceedReport& report) {
    write_text(prefix + ".csv", report_csv(report));
    write_text(prefix + ".json", summary_json(report).dump(2) + "\n");
}

std::string_view to_string(SweepParameter p) noexcept {
    switch (p) {
        case SweepParameter::omega: return "omega";
        case SweepParameter::p_uncond: return "p_uncond";
        case SweepParameter::T: return "T";
    }
    return "unknown";
}

SweepParameter sweep_parameter_from_string(std::string_view name) {
    for (auto p : {SweepParameter::omega, SweepParameter::p_uncond, SweepParameter::T}) {
        if (name == to_string(p)) {
            return p;
        }
    }
    throw ConfigError("unknown sweep parameter '" + std::string(name) +
                      "' (expected omega, p_uncond or T)");
}

std::vector<double> SweepResult::medians() const {
    std::vector<double> m;
    for (const auto& r : reports) {
        m.push_back(r.median);
    }
    return m;
}

std::vector<double> validate_sweep_values(SweepParameter parameter, std::span<const double> values) {
    if (values.size() < 3) {
        throw ConfigError("a sweep needs at least three values");
    }
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end()) {
        throw ConfigError("sweep values must be distinct");
    }
    for (double x : v) {
        const bool ok = [&] {
            switch (parameter) {
                case SweepParameter::omega: return std::isfinite(x) && x >= 0.0;
                case SweepParameter::p_uncond: return x >= 0.0 && x <= 1.0;
                case SweepParameter::T: return x >= 1.0 && x <= 10000.0 && x == std::floor(x);
            }
            return false;
        }();
        if (!ok) {
            throw ConfigError("sweep value " + format_number(x) + " is outside the domain of " +
                              std::string(to_string(parameter)));
        }
    }
    return v;
}

Checkpoint train_model(const Dataset& dataset, const TrainConfig& config, TargetMode mode,
                       const EpochCallback& on_epoch) {
    DatasetConfig data_config = dataset.manifest.config;
    data_config.target_mode = mode;
    const auto set = make_training_set(dataset.samples, data_config);
    DenoiserConfig net;
    net.target_dim = set.target_dim;
    net.cond_dim = set.cond_dim;
    net.hidden = config.hidden;
    net.n_blocks = config.n_blocks;
    net.time_dim = config.time_dim;
    Trainer trainer(config, net);
    for (std::size_t e = 1; e <= config.epochs; ++e) {
        const double loss = trainer.train_epoch(set);
        if (on_epoch) {
            on_epoch(e, loss, trainer);
        }
    }
    return trainer.checkpoint(data_config);
}

SweepResult sweep(SweepParameter parameter, std::span<const double> values, const SweepSetup& setup) {
    SweepResult result;
    result.parameter = parameter;
    result.values = validate_sweep_values(parameter, values);
    if (setup.test == nullptr) {
        throw ConfigError("sweep needs a test dataset");
    }
    for (double v : result.values) {
        if (parameter == SweepParameter::omega) {
            if (setup.model == nullptr) {
                throw ConfigError("omega sweep needs a trained checkpoint");
            }
            EvalOptions eval = setup.eval;
            eval.sample.omega = v;
            result.reports.push_back(evaluate_method(Method::diffusion, *setup.test, setup.model, eval));
            continue;
        }
        if (setup.train == nullptr) {
            throw ConfigError("sweep over a training parameter needs a training dataset");
        }
        TrainConfig tc = setup.train_config;
        EvalOptions eval = setup.eval;
        if (parameter == SweepParameter::p_uncond) {
            tc.p_uncond = v;
        } else {
            tc.T = static_cast<int>(v);
            eval.sample.tau.clear();
        }
        const auto model =
            DiffusionModel::from_checkpoint(train_model(*setup.train, tc, setup.target_mode));
        result.reports.push_back(evaluate_method(Method::diffusion, *setup.test, &model, eval));
    }
    return result;
}

std::string sweep_csv(const SweepResult& result) {
    std::ostringstream out;
    out << "parameter,value,median,mean,fraction_ge_0_95,evaluated,undefined,failures\n";
    for (std::size_t i = 0; i < result.values.size(); ++i) {
        const auto& r = result.reports[i];
        out << to_string(result.parameter) << ',' << format_number(result.values[i]) << ','
            << format_number(r.median) << ',' << format_number(r.mean) << ','
            << format_number(r.fraction_ge_095) << ',' << r.evaluated << ',' << r.undefined << ','
            << r.failures << '\n';
    }
    return out.str();
}

GeneralizationMatrix generalization_matrix(std::span<const std::string> train_names,
                                           std::span<const DiffusionModel* const> models,
                                           std::span<const Dataset* const> test_sets,
                                           const EvalOptions& eval) {
    if (train_names.size() != models.size()) {
        throw ArgumentError("one name per model is required");
    }
    if (models.empty() || test_sets.empty()) {
        throw ConfigError("the matrix needs at least one training and one test set");
    }
    GeneralizationMatrix m;
    m.train_names.assign(train_names.begin(), train_names.end());
    for (const auto* t : test_sets) {
        m.test_names.push_back(t->manifest.name);
    }
    for (const auto* model : models) {
        std::vector<double> row;
        for (const auto* test : test_sets) {
            row.push_back(evaluate_method(Method::diffusion, *test, model, eval).median);
        }
        m.median.push_back(std::move(row));
    }
    return m;
}

GeneralizationMatrix generalization_matrix(std::span<const Dataset* const> train_sets,
                                           std::span<const Dataset* const> test_sets,
                                           const TrainConfig& train_config, TargetMode mode,
                                           const EvalOptions& eval) {
    std::vector<std::string> names;
    std::vector<DiffusionModel> models;
    for (const auto* train : train_sets) {
        names.push_back(train->manifest.name);
        models.push_back(DiffusionModel::from_checkpoint(train_model(*train, train_config, mode)));
    }
    std::vector<const DiffusionModel*> ptrs;
    for (const auto& m : models) {
        ptrs.push_back(&m);
    }
    return generalization_matrix(names, ptrs, test_sets, eval);
}

std::string matrix_csv(const GeneralizationMatrix& m) {
    std::ostringstream out;
    out << "train";
    for (const auto& name : m.test_names) {
        out << ',' << name;
    }
    out << '\n';
    for (std::size_t i = 0; i < m.train_names.size(); ++i) {
        out << m.train_names[i];
        for (double v : m.median[i]) {
            out << ',' << format_number(v);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace risdiff
