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
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "risdiff/dataset.hpp"
#include "risdiff/random.hpp"
#include "risdiff/tensorkit.hpp"

namespace risdiff {

/// beta_t, alpha_t = 1 - beta_t and alpha_bar_t = prod_{i<=t} alpha_i, stored
/// at [t - 1] for t = 1..T.
struct NoiseSchedule {
    int T = 0;
    std::vector<double> beta;
    std::vector<double> alpha;
    std::vector<double> alpha_bar;

    double beta_at(int t) const { return beta.at(static_cast<std::size_t>(t - 1)); }
    double alpha_at(int t) const { return alpha.at(static_cast<std::size_t>(t - 1)); }
    /// alpha_bar_0 = 1.
    double alpha_bar_at(int t) const {
        return t == 0 ? 1.0 : alpha_bar.at(static_cast<std::size_t>(t - 1));
    }
};

/// Linear betas over T steps. Throws ConfigError unless
/// 0 < beta_start <= beta_end < 1 and T >= 1.
NoiseSchedule linear_schedule(int T, double beta_start, double beta_end);

/// Linear schedule whose endpoints 1e-4 and 0.02 are scaled by 1000 / T and
/// clamped at 0.999, so a short chain still reaches near-total corruption.
NoiseSchedule default_schedule(int T);

/// sqrt(alpha_bar_t) y0 + sqrt(1 - alpha_bar_t) eps.
std::vector<double> forward_sample(std::span<const double> y0, int t, std::span<const double> eps,
                                   const NoiseSchedule& schedule);

/// One Markov step y_t ~ N(sqrt(alpha_t) y_{t-1}, beta_t I) with the given noise.
std::vector<double> forward_step(std::span<const double> y_prev, int t, std::span<const double> eps,
                                 const NoiseSchedule& schedule);

/// How the raw network output F becomes the noise prediction:
/// epsilon: eps_hat = F; velocity: eps_hat = sqrt(abar_t) F + sqrt(1 - abar_t) y_t.
enum class OutputHead { epsilon, velocity };

std::string_view to_string(OutputHead head) noexcept;
OutputHead output_head_from_string(std::string_view name);

struct TrainConfig {
    int T = 20;
    double omega = 180.0;
    double p_uncond = 0.1;
    double lr = 1e-4;
    std::size_t batch_size = 64;
    std::size_t epochs = 400;
    double lambda_card = 1e-3;
    double ema_decay = 0.999;
    std::uint64_t seed = 0;
    std::size_t hidden = 256;
    std::size_t n_blocks = 4;
    std::size_t time_dim = 64;
    /// Re-draw a plane symmetry of the region and the user and obstacle order
    /// for every training item.
    bool augment = true;
    OutputHead head = OutputHead::velocity;

    void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// Slope of the logistic map applied to +-1-coded bits in the cardinality penalty.
inline constexpr double kCardinalitySlope = 6.0;

/// Flattened (condition, target) pairs ready for batching.
struct TrainingSet {
    std::size_t n = 0;
    std::size_t cond_dim = 0;
    std::size_t target_dim = 0;
    std::size_t l_count = 0;
    TargetMode mode = TargetMode::multihot;
    EncodingLayout layout;
    std::vector<float> cond;  // n x cond_dim
    std::vector<float> y0;    // n x target_dim
    std::vector<Scenario> scenarios;
    std::vector<std::vector<std::size_t>> targets;
};

/// Symmetries of the square footprint: bit 0 swaps x and y, bit 1 mirrors x,
/// bit 2 mirrors y (applied in that order about the region center). Returns
/// the usable transform count: 8 for a square region with n_x == n_y, else 4.
std::size_t plane_symmetry_count(const Scenario& scenario) noexcept;
Scenario apply_plane_symmetry(const Scenario& scenario, std::size_t transform);
/// Image of grid index `site` under the same transform.
std::size_t map_site(const GridSpec& spec, std::size_t site, std::size_t transform);

TrainingSet make_training_set(std::span<const LabeledSample> samples, const DatasetConfig& config);

/// Owns the network, Adam and EMA state and the training RNG stream.
class Trainer {
public:
    Trainer(const TrainConfig& config, const DenoiserConfig& network);
    /// Resumes from raw weights (EMA restarts from the stored EMA weights).
    Trainer(const TrainConfig& config, const Checkpoint& checkpoint);

    /// One pass over a shuffled copy of the set. For each item: t uniform on
    /// {1..T}, the condition dropped with probability p_uncond, eps ~ N(0, I).
    /// Loss is ||eps - eps_hat||^2 averaged over items for the epsilon head and
    /// ||v - F||^2 with v = sqrt(abar) eps - sqrt(1 - abar) y0 for the velocity
    /// head (the same residual divided by abar_t). Multihot mode adds
    /// lambda_card (sum_i logistic(k y0_hat_i) - L)^2 with y0_hat recovered from
    /// the network output. Returns the mean loss. Throws NumericError on a non-finite
    /// loss, leaving the last good state untouched.
    double train_epoch(const TrainingSet& data);

    const DenoiserParams& params() const noexcept { return params_; }
    const DenoiserParams& ema_params() const noexcept { return ema_.shadow; }
    const NoiseSchedule& schedule() const noexcept { return schedule_; }
    const TrainConfig& config() const noexcept { return config_; }
    std::size_t epochs_done() const noexcept { return epochs_; }
    std::uint64_t items_seen() const noexcept { return items_; }
    std::uint64_t items_unconditional() const noexcept { return items_absent_; }

    /// EMA weights for inference plus raw weights and training metadata.
    Checkpoint checkpoint(const DatasetConfig& data_config) const;

private:
    void augment_item(const TrainingSet& data, std::size_t item, std::vector<float>& x,
                      std::vector<float>& y0);

    TrainConfig config_;
    NoiseSchedule schedule_;
    DenoiserParams params_;
    OptimizerState opt_;
    EmaState ema_;
    Rng rng_;
    std::size_t epochs_ = 0;
    std::uint64_t items_ = 0;
    std::uint64_t items_absent_ = 0;
};

/// eps_theta(y_t, t, x): the network plus its output head.
struct NoisePredictor {
    const DenoiserParams* params = nullptr;
    const NoiseSchedule* schedule = nullptr;  // required by the velocity head
    OutputHead head = OutputHead::epsilon;

    /// One prediction per batch row.
    std::vector<float> operator()(const DenoiserBatch& batch) const;
};

/// (1 + omega) eps(y_t | x) - omega eps(y_t) for every row of a batch whose
/// conditions are all present. The conditional and unconditional passes run
/// separately so omega = 0 reproduces the conditional output bit for bit.
std::vector<float> guided_epsilon(const NoisePredictor& net, const DenoiserBatch& batch, double omega);
std::vector<float> guided_epsilon(const NoisePredictor& net, std::span<const float> y_t, int t,
                                  std::span<const float> cond, double omega);

enum class SamplerKind { ddim, ddpm };
enum class SelectionRule { first, best_of_n };

std::string_view to_string(SamplerKind kind) noexcept;
SamplerKind sampler_from_string(std::string_view name);
std::string_view to_string(SelectionRule rule) noexcept;
SelectionRule selection_from_string(std::string_view name);

struct SampleConfig {
    double omega = 180.0;
    std::vector<int> tau;  // strictly decreasing, within [1, T]; empty = T..1
    double eta = 0.0;
    std::size_t n_samples = 1;
    SelectionRule selection = SelectionRule::first;
    SamplerKind sampler = SamplerKind::ddim;
    bool clip_denoised = true;  // clamp y0_hat to [-1, 1] in every update but the last
    std::uint64_t seed = 0;

    void validate(int T) const;
};

/// Ancestral sampling with the fixed posterior variance
/// sigma_t^2 = beta_t (1 - alpha_bar_{t-1}) / (1 - alpha_bar_t); no noise
/// is added at t = 1. `conds` holds n rows; row r draws from rngs[r].
/// With clip_denoised the mean is the posterior mean given the clamped y0_hat,
/// which equals the unclipped form whenever y0_hat already lies in [-1, 1].
std::vector<float> ddpm_sample(const NoisePredictor& net, std::span<const float> conds,
                               std::size_t n, double omega, std::span<Rng> rngs,
                               bool clip_denoised = false);

/// DDIM over the subsequence tau with stochasticity eta (eta = 0 is deterministic).
std::vector<float> ddim_sample(const NoisePredictor& net, std::span<const float> conds,
                               std::size_t n, const SampleConfig& config, std::span<Rng> rngs);

/// Single DDIM update from step t to t_prev given the guided noise.
std::vector<double> ddim_step(std::span<const double> y_t, std::span<const double> eps, int t,
                              int t_prev, const NoiseSchedule& schedule, double eta,
                              std::span<const double> z, bool clip_denoised = false);

/// Single ancestral update from t to t - 1 given the guided noise.
std::vector<double> ddpm_step(std::span<const double> y_t, std::span<const double> eps, int t,
                              const NoiseSchedule& schedule, std::span<const double> z,
                              bool clip_denoised = false);

/// Trained model plus everything needed to decode its samples.
struct DiffusionModel {
    DenoiserParams weights;
    NoiseSchedule schedule;
    TargetMode mode = TargetMode::multihot;
    EncodingLayout layout;
    TrainConfig train;

    NoisePredictor predictor() const { return {&weights, &schedule, train.head}; }
    static DiffusionModel from_checkpoint(const Checkpoint& checkpoint);
};

/// Scores a candidate plan (higher is better); used by best_of_n.
using PlanScorer = std::function<double(const DeploymentPlan&)>;

/// Request for one scenario. `key` selects the RNG stream, so results do not
/// depend on how requests are batched.
struct PlanRequest {
    const Scenario* scenario = nullptr;
    std::uint64_t key = 0;
    PlanScorer scorer;  // required for best_of_n
};

/// Encodes the condition, samples n_samples raw vectors, projects each onto a
/// feasible plan and applies the selection rule. Requests are processed in
/// fixed chunks spread over `workers`, so output is worker-count invariant.
/// A request that cannot be decoded yields std::nullopt.
std::vector<std::optional<DeploymentPlan>> generate_plans(const DiffusionModel& model,
                                                          std::span<const PlanRequest> requests,
                                                          const ConstraintSet& constraints,
                                                          const SampleConfig& config,
                                                          int workers = 1);

/// Single-scenario form; throws InfeasibleError when decoding fails.
DeploymentPlan generate_plan(const DiffusionModel& model, const Scenario& scenario,
                             const ConstraintSet& constraints, const SampleConfig& config,
                             std::uint64_t key = 0, PlanScorer scorer = {});

}  // namespace risdiff
