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

#include "risdiff/diffusion.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "risdiff/error.hpp"

namespace risdiff {

namespace {

constexpr std::size_t kSampleChunk = 64;

float standard_normal(Rng& rng) { return std::normal_distribution<float>{}(rng); }

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

std::vector<int> full_tau(int T) {
    std::vector<int> tau(static_cast<std::size_t>(T));
    std::iota(tau.rbegin(), tau.rend(), 1);
    return tau;
}

}  // namespace

NoiseSchedule linear_schedule(int T, double beta_start, double beta_end) {
    if (T < 1) {
        throw ConfigError("diffusion steps T must be at least 1");
    }
    if (!(beta_start > 0.0) || !(beta_end >= beta_start) || !(beta_end < 1.0)) {
        throw ConfigError("noise schedule needs 0 < beta_start <= beta_end < 1");
    }
    NoiseSchedule s;
    s.T = T;
    double bar = 1.0;
    for (int t = 1; t <= T; ++t) {
        const double b = T == 1 ? beta_end
                                : beta_start + (beta_end - beta_start) * (t - 1) / (T - 1);
        bar *= 1.0 - b;
        s.beta.push_back(b);
        s.alpha.push_back(1.0 - b);
        s.alpha_bar.push_back(bar);
    }
    return s;
}

NoiseSchedule default_schedule(int T) {
    if (T < 1) {
        throw ConfigError("diffusion steps T must be at least 1");
    }
    const double scale = 1000.0 / T;
    return linear_schedule(T, std::min(1e-4 * scale, 0.999), std::min(0.02 * scale, 0.999));
}

std::vector<double> forward_sample(std::span<const double> y0, int t, std::span<const double> eps,
                                   const NoiseSchedule& schedule) {
    if (y0.size() != eps.size()) {
        throw ArgumentError("forward_sample: y0 and eps lengths differ");
    }
    if (t < 0 || t > schedule.T) {
        throw ArgumentError("forward_sample: step out of range");
    }
    const double a = std::sqrt(schedule.alpha_bar_at(t));
    const double b = std::sqrt(1.0 - schedule.alpha_bar_at(t));
    std::vector<double> y(y0.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = a * y0[i] + b * eps[i];
    }
    return y;
}

std::vector<double> forward_step(std::span<const double> y_prev, int t, std::span<const double> eps,
                                 const NoiseSchedule& schedule) {
    if (y_prev.size() != eps.size()) {
        throw ArgumentError("forward_step: lengths differ");
    }
    if (t < 1 || t > schedule.T) {
        throw ArgumentError("forward_step: step out of range");
    }
    const double a = std::sqrt(schedule.alpha_at(t));
    const double b = std::sqrt(schedule.beta_at(t));
    std::vector<double> y(y_prev.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = a * y_prev[i] + b * eps[i];
    }
    return y;
}

std::string_view to_string(OutputHead head) noexcept {
    return head == OutputHead::epsilon ? "epsilon" : "velocity";
}

OutputHead output_head_from_string(std::string_view name) {
    if (name == "epsilon") return OutputHead::epsilon;
    if (name == "velocity") return OutputHead::velocity;
    throw ConfigError("unknown output head '" + std::string(name) + "' (expected epsilon or velocity)");
}

void TrainConfig::validate() const {
    if (T < 1) {
        throw ConfigError("T must be at least 1");
    }
    if (!(p_uncond >= 0.0 && p_uncond <= 1.0)) {
        throw ConfigError("p_uncond must lie in [0, 1]");
    }
    if (!(lr > 0.0) || !std::isfinite(lr)) {
        throw ConfigError("learning rate must be positive");
    }
    if (batch_size == 0) {
        throw ConfigError("batch_size must be positive");
    }
    if (!(lambda_card >= 0.0)) {
        throw ConfigError("lambda_card must be non-negative");
    }
    if (!(ema_decay >= 0.0 && ema_decay <= 1.0)) {
        throw ConfigError("ema_decay must lie in [0, 1]");
    }
    if (!std::isfinite(omega) || omega < 0.0) {
        throw ConfigError("omega must be a finite non-negative number");
    }
    if (hidden == 0 || time_dim == 0) {
        throw ConfigError("network widths must be positive");
    }
}

nlohmann::json to_json(const TrainConfig& c) {
    return {{"T", c.T},
            {"omega", c.omega},
            {"p_uncond", c.p_uncond},
            {"lr", c.lr},
            {"batch_size", c.batch_size},
            {"epochs", c.epochs},
            {"lambda_card", c.lambda_card},
            {"ema_decay", c.ema_decay},
            {"seed", c.seed},
            {"hidden", c.hidden},
            {"n_blocks", c.n_blocks},
            {"time_dim", c.time_dim},
            {"augment", c.augment},
            {"head", std::string(to_string(c.head))}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.T = j.at("T").get<int>();
    c.omega = j.at("omega").get<double>();
    c.p_uncond = j.at("p_uncond").get<double>();
    c.lr = j.at("lr").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.lambda_card = j.at("lambda_card").get<double>();
    c.ema_decay = j.at("ema_decay").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.hidden = j.at("hidden").get<std::size_t>();
    c.n_blocks = j.at("n_blocks").get<std::size_t>();
    c.time_dim = j.at("time_dim").get<std::size_t>();
    c.augment = j.at("augment").get<bool>();
    c.head = output_head_from_string(j.at("head").get<std::string>());
    return c;
}

TrainingSet make_training_set(std::span<const LabeledSample> samples, const DatasetConfig& config) {
    TrainingSet set;
    set.mode = config.target_mode;
    set.l_count = config.l_count;
    set.cond_dim = config.layout.condition_dim();
    set.layout = config.layout;
    set.n = samples.size();
    for (const auto& s : samples) {
        const Grid grid = s.scenario.grid();
        const auto y = encode_target(s.target_plan, grid, config.target_mode);
        if (set.target_dim == 0) {
            set.target_dim = y.size();
        } else if (y.size() != set.target_dim) {
            throw ArgumentError("training samples disagree on target length");
        }
        if (s.condition.size() != set.cond_dim) {
            throw ArgumentError("sample condition does not match the layout");
        }
        set.y0.insert(set.y0.end(), y.begin(), y.end());
        set.cond.insert(set.cond.end(), s.condition.begin(), s.condition.end());
        set.scenarios.push_back(s.scenario);
        set.targets.push_back(s.target_plan.indices);
    }
    return set;
}

std::size_t plane_symmetry_count(const Scenario& scenario) noexcept {
    const Region& r = scenario.region;
    const bool square = r.x_max - r.x_min == r.y_max - r.y_min &&
                        scenario.grid_spec.n_x == scenario.grid_spec.n_y;
    return square ? 8 : 4;
}

namespace {

Point3 transform_point(const Point3& p, const Region& r, std::size_t transform) {
    const double cx = 0.5 * (r.x_min + r.x_max);
    const double cy = 0.5 * (r.y_min + r.y_max);
    double u = p.x - cx;
    double v = p.y - cy;
    if (transform & 1) std::swap(u, v);
    if (transform & 2) u = -u;
    if (transform & 4) v = -v;
    return {cx + u, cy + v, p.z};
}

}  // namespace

Scenario apply_plane_symmetry(const Scenario& scenario, std::size_t transform) {
    if (transform >= plane_symmetry_count(scenario)) {
        throw ArgumentError("plane symmetry index out of range for this region");
    }
    Scenario out = scenario;
    out.bs = transform_point(scenario.bs, scenario.region, transform);
    for (auto& u : out.users) {
        u = transform_point(u, scenario.region, transform);
    }
    for (auto& b : out.obstacles) {
        const Point3 a = transform_point(b.min, scenario.region, transform);
        const Point3 c = transform_point(b.max, scenario.region, transform);
        b.min = {std::min(a.x, c.x), std::min(a.y, c.y), b.min.z};
        b.max = {std::max(a.x, c.x), std::max(a.y, c.y), b.max.z};
    }
    return out;
}

std::size_t map_site(const GridSpec& spec, std::size_t site, std::size_t transform) {
    std::size_t iz = site % spec.n_z;
    std::size_t iy = (site / spec.n_z) % spec.n_y;
    std::size_t ix = site / (spec.n_z * spec.n_y);
    if (transform & 1) std::swap(ix, iy);
    if (transform & 2) ix = spec.n_x - 1 - ix;
    if (transform & 4) iy = spec.n_y - 1 - iy;
    return (ix * spec.n_y + iy) * spec.n_z + iz;
}

Trainer::Trainer(const TrainConfig& config, const DenoiserConfig& network)
    : config_(config),
      schedule_(default_schedule(config.T)),
      params_(init_denoiser(network, mix_seed(config.seed, 1))),
      opt_(OptimizerState::for_params(params_, config.lr)),
      ema_(EmaState::for_params(params_, config.ema_decay)),
      rng_(make_rng(config.seed, 2)) {
    config_.validate();
}

Trainer::Trainer(const TrainConfig& config, const Checkpoint& checkpoint)
    : Trainer(config, checkpoint.weights.config) {
    params_ = checkpoint.raw ? *checkpoint.raw : checkpoint.weights;
    ema_.shadow = checkpoint.weights;
}

double Trainer::train_epoch(const TrainingSet& data) {
    const DenoiserConfig& net = params_.config;
    if (data.n == 0) {
        throw ArgumentError("empty training set");
    }
    if (data.target_dim != net.target_dim || data.cond_dim != net.cond_dim) {
        throw ArgumentError("training set shape does not match the network");
    }
    std::vector<std::size_t> order(data.n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng_);

    const std::size_t D = net.target_dim;
    const std::size_t C = net.cond_dim;
    const bool penalize = data.mode == TargetMode::multihot && config_.lambda_card > 0.0;
    std::uniform_int_distribution<int> step(1, config_.T);
    DenoiserBatch batch;
    std::vector<float> eps;
    std::vector<float> clean_y0;
    std::vector<double> s0(config_.batch_size), s1(config_.batch_size);
    double total = 0.0;

    for (std::size_t start = 0; start < data.n; start += config_.batch_size) {
        const std::size_t B = std::min(config_.batch_size, data.n - start);
        batch.resize(B, net);
        eps.assign(B * D, 0.0f);
        clean_y0.assign(B * D, 0.0f);
        std::uint64_t absent = 0;
        for (std::size_t r = 0; r < B; ++r) {
            const std::size_t item = order[start + r];
            const int t = step(rng_);
            const bool drop = uniform01(rng_) < config_.p_uncond;
            absent += drop ? 1 : 0;
            batch.t[r] = static_cast<float>(t);
            batch.present[r] = drop ? 0 : 1;
            const float* x = data.cond.data() + item * C;
            const float* y0 = data.y0.data() + item * D;
            std::vector<float> x_aug, y0_aug;
            if (config_.augment) {
                augment_item(data, item, x_aug, y0_aug);
                x = x_aug.data();
                y0 = y0_aug.data();
            }
            std::copy_n(x, C, batch.cond.begin() + static_cast<std::ptrdiff_t>(r * C));
            std::copy_n(y0, D, clean_y0.begin() + static_cast<std::ptrdiff_t>(r * D));
            s0[r] = std::sqrt(schedule_.alpha_bar_at(t));
            s1[r] = std::sqrt(1.0 - schedule_.alpha_bar_at(t));
            for (std::size_t i = 0; i < D; ++i) {
                const float e = standard_normal(rng_);
                eps[r * D + i] = e;
                batch.y_t[r * D + i] = static_cast<float>(s0[r] * y0[i] + s1[r] * e);
            }
        }

        DenoiserTape tape(params_, batch);
        const std::vector<float>& out = tape.output();
        const bool velocity = config_.head == OutputHead::velocity;
        std::vector<float> grad(B * D);
        std::vector<double> y0_hat(D);
        double loss = 0.0;
        for (std::size_t r = 0; r < B; ++r) {
            const float* y0 = clean_y0.data() + r * D;
            double row = 0.0;
            for (std::size_t i = 0; i < D; ++i) {
                const double f = out[r * D + i];
                const double y_t = batch.y_t[r * D + i];
                // epsilon head: residual against eps. velocity head: residual
                // against v = sqrt(abar) eps - sqrt(1 - abar) y0.
                const double target = velocity ? s0[r] * eps[r * D + i] - s1[r] * y0[i]
                                               : static_cast<double>(eps[r * D + i]);
                const double diff = f - target;
                row += diff * diff;
                grad[r * D + i] = static_cast<float>(2.0 * diff / B);
                y0_hat[i] = velocity ? s0[r] * y_t - s1[r] * f : (y_t - s1[r] * f) / s0[r];
            }
            if (penalize) {
                // d y0_hat / d F for the active head.
                const double dy = velocity ? -s1[r] : -s1[r] / s0[r];
                double count = 0.0;
                for (std::size_t i = 0; i < D; ++i) {
                    count += logistic(kCardinalitySlope * y0_hat[i]);
                }
                const double excess = count - static_cast<double>(data.l_count);
                row += config_.lambda_card * excess * excess;
                const double scale = config_.lambda_card * 2.0 * excess / B;
                for (std::size_t i = 0; i < D; ++i) {
                    const double sig = logistic(kCardinalitySlope * y0_hat[i]);
                    grad[r * D + i] += static_cast<float>(scale * sig * (1.0 - sig) * kCardinalitySlope * dy);
                }
            }
            loss += row;
        }
        loss /= static_cast<double>(B);
        if (!std::isfinite(loss)) {
            throw NumericError("training loss became non-finite at epoch " +
                               std::to_string(epochs_ + 1));
        }
        DenoiserParams grads = params_.zeros_like();
        tape.backward(grad, grads);
        adam_step(params_, grads, opt_);
        ema_update(ema_, params_);
        items_ += B;
        items_absent_ += absent;
        total += loss * static_cast<double>(B);
    }
    ++epochs_;
    return total / static_cast<double>(data.n);
}

void Trainer::augment_item(const TrainingSet& data, std::size_t item, std::vector<float>& x,
                           std::vector<float>& y0) {
    const Scenario& base = data.scenarios.at(item);
    const std::size_t transform =
        std::uniform_int_distribution<std::size_t>(0, plane_symmetry_count(base) - 1)(rng_);
    Scenario s = apply_plane_symmetry(base, transform);
    std::shuffle(s.users.begin(), s.users.end(), rng_);
    std::shuffle(s.obstacles.begin(), s.obstacles.end(), rng_);
    std::vector<std::size_t> sites;
    for (std::size_t i : data.targets.at(item)) {
        sites.push_back(map_site(s.grid_spec, i, transform));
    }
    const Grid grid = s.grid();
    const auto xd = encode_condition(s, data.layout);
    const auto yd = encode_target(DeploymentPlan::from_indices(grid, sites), grid, data.mode);
    x.assign(xd.begin(), xd.end());
    y0.assign(yd.begin(), yd.end());
}

Checkpoint Trainer::checkpoint(const DatasetConfig& data_config) const {
    Checkpoint ckpt;
    ckpt.weights = ema_.shadow;
    ckpt.raw = params_;
    ckpt.metadata = {{"train", to_json(config_)},
                     {"epochs_done", epochs_},
                     {"schedule", {{"T", schedule_.T}, {"beta", schedule_.beta}}},
                     {"target_mode", std::string(to_string(data_config.target_mode))},
                     {"layout",
                      {{"max_users", data_config.layout.max_users},
                       {"max_obstacles", data_config.layout.max_obstacles},
                       {"version", kConditionLayoutVersion}}},
                     {"dataset", to_json(data_config)}};
    return ckpt;
}

DiffusionModel DiffusionModel::from_checkpoint(const Checkpoint& checkpoint) {
    const auto& m = checkpoint.metadata;
    try {
        DiffusionModel model;
        model.weights = checkpoint.weights;
        model.train = train_config_from_json(m.at("train"));
        const auto betas = m.at("schedule").at("beta").get<std::vector<double>>();
        const int T = m.at("schedule").at("T").get<int>();
        if (betas.size() != static_cast<std::size_t>(T)) {
            throw FormatError("checkpoint schedule length does not match T");
        }
        model.schedule.T = T;
        double bar = 1.0;
        for (double b : betas) {
            if (!(b > 0.0 && b < 1.0)) {
                throw FormatError("checkpoint schedule has a beta outside (0, 1)");
            }
            bar *= 1.0 - b;
            model.schedule.beta.push_back(b);
            model.schedule.alpha.push_back(1.0 - b);
            model.schedule.alpha_bar.push_back(bar);
        }
        model.mode = target_mode_from_string(m.at("target_mode").get<std::string>());
        const auto& layout = m.at("layout");
        if (layout.at("version").get<int>() != kConditionLayoutVersion) {
            throw FormatError("checkpoint uses an unsupported condition layout");
        }
        model.layout.max_users = layout.at("max_users").get<std::size_t>();
        model.layout.max_obstacles = layout.at("max_obstacles").get<std::size_t>();
        if (model.layout.condition_dim() != model.weights.config.cond_dim) {
            throw FormatError("checkpoint layout does not match the network input");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint metadata: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint metadata: ") + e.what());
    }
}

std::vector<float> NoisePredictor::operator()(const DenoiserBatch& batch) const {
    auto out = denoiser_forward(*params, batch);
    if (head == OutputHead::velocity) {
        if (schedule == nullptr) {
            throw ArgumentError("the velocity head needs a noise schedule");
        }
        const std::size_t D = params->config.target_dim;
        for (std::size_t r = 0; r < batch.size; ++r) {
            const int t = static_cast<int>(batch.t[r]);
            const double a = std::sqrt(schedule->alpha_bar_at(t));
            const double b = std::sqrt(1.0 - schedule->alpha_bar_at(t));
            for (std::size_t i = 0; i < D; ++i) {
                out[r * D + i] = static_cast<float>(a * out[r * D + i] + b * batch.y_t[r * D + i]);
            }
        }
    }
    return out;
}

std::vector<float> guided_epsilon(const NoisePredictor& net, const DenoiserBatch& batch, double omega) {
    auto cond = net(batch);
    if (omega == 0.0) {
        return cond;
    }
    DenoiserBatch uncond = batch;
    std::fill(uncond.present.begin(), uncond.present.end(), std::uint8_t{0});
    const auto free = net(uncond);
    const float a = static_cast<float>(1.0 + omega);
    const float b = static_cast<float>(omega);
    for (std::size_t i = 0; i < cond.size(); ++i) {
        cond[i] = a * cond[i] - b * free[i];
    }
    return cond;
}

std::vector<float> guided_epsilon(const NoisePredictor& net, std::span<const float> y_t, int t,
                                  std::span<const float> cond, double omega) {
    const DenoiserConfig& config = net.params->config;
    if (y_t.size() != config.target_dim || cond.size() != config.cond_dim) {
        throw ArgumentError("guided_epsilon: input length mismatch");
    }
    DenoiserBatch batch;
    batch.resize(1, config);
    std::copy(y_t.begin(), y_t.end(), batch.y_t.begin());
    std::copy(cond.begin(), cond.end(), batch.cond.begin());
    batch.t[0] = static_cast<float>(t);
    batch.present[0] = 1;
    return guided_epsilon(net, batch, omega);
}

std::string_view to_string(SamplerKind kind) noexcept {
    return kind == SamplerKind::ddim ? "ddim" : "ddpm";
}

SamplerKind sampler_from_string(std::string_view name) {
    if (name == "ddim") return SamplerKind::ddim;
    if (name == "ddpm") return SamplerKind::ddpm;
    throw ConfigError("unknown sampler '" + std::string(name) + "' (expected ddim or ddpm)");
}

std::string_view to_string(SelectionRule rule) noexcept {
    return rule == SelectionRule::first ? "first" : "best_of_n";
}

SelectionRule selection_from_string(std::string_view name) {
    if (name == "first") return SelectionRule::first;
    if (name == "best_of_n") return SelectionRule::best_of_n;
    throw ConfigError("unknown selection rule '" + std::string(name) +
                      "' (expected first or best_of_n)");
}

void SampleConfig::validate(int T) const {
    if (!std::isfinite(omega) || omega < 0.0) {
        throw ConfigError("omega must be a finite non-negative number");
    }
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw ConfigError("eta must lie in [0, 1]");
    }
    if (n_samples == 0) {
        throw ConfigError("n_samples must be at least 1");
    }
    for (std::size_t i = 0; i < tau.size(); ++i) {
        if (tau[i] < 1 || tau[i] > T) {
            throw ConfigError("tau entries must lie in [1, T]");
        }
        if (i > 0 && tau[i] >= tau[i - 1]) {
            throw ConfigError("tau must be strictly decreasing");
        }
    }
}

std::vector<double> ddpm_step(std::span<const double> y_t, std::span<const double> eps, int t,
                              const NoiseSchedule& schedule, std::span<const double> z,
                              bool clip_denoised) {
    const double a = schedule.alpha_at(t);
    const double bar = schedule.alpha_bar_at(t);
    const double bar_prev = schedule.alpha_bar_at(t - 1);
    const double beta = schedule.beta_at(t);
    const double sigma = t > 1 ? std::sqrt(beta * (1.0 - bar_prev) / (1.0 - bar)) : 0.0;
    std::vector<double> y(y_t.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        double mean = 0.0;
        if (clip_denoised && t > 1) {
            const double y0 =
                std::clamp((y_t[i] - std::sqrt(1.0 - bar) * eps[i]) / std::sqrt(bar), -1.0, 1.0);
            mean = std::sqrt(bar_prev) * beta / (1.0 - bar) * y0 +
                   std::sqrt(a) * (1.0 - bar_prev) / (1.0 - bar) * y_t[i];
        } else {
            mean = (y_t[i] - beta / std::sqrt(1.0 - bar) * eps[i]) / std::sqrt(a);
        }
        y[i] = mean + (t > 1 ? sigma * z[i] : 0.0);
    }
    return y;
}

std::vector<double> ddim_step(std::span<const double> y_t, std::span<const double> eps, int t,
                              int t_prev, const NoiseSchedule& schedule, double eta,
                              std::span<const double> z, bool clip_denoised) {
    const double bar = schedule.alpha_bar_at(t);
    const double bar_prev = schedule.alpha_bar_at(t_prev);
    std::vector<double> y(y_t.size());
    double sigma = 0.0;
    double dir = 0.0;
    if (t_prev > 0) {
        sigma = eta * std::sqrt((1.0 - bar_prev) / (1.0 - bar)) * std::sqrt(1.0 - bar / bar_prev);
        dir = std::sqrt(std::max(0.0, 1.0 - bar_prev - sigma * sigma));
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        double y0 = (y_t[i] - std::sqrt(1.0 - bar) * eps[i]) / std::sqrt(bar);
        double e = eps[i];
        // The final estimate stays unclamped so decoding keeps the score order.
        if (clip_denoised && t_prev > 0) {
            y0 = std::clamp(y0, -1.0, 1.0);
            // Direction term consistent with the clamped estimate.
            e = (y_t[i] - std::sqrt(bar) * y0) / std::sqrt(1.0 - bar);
        }
        y[i] = t_prev == 0 ? y0
                           : std::sqrt(bar_prev) * y0 + dir * e +
                                 (sigma > 0.0 ? sigma * z[i] : 0.0);
    }
    return y;
}

namespace {

// Shared driver: y_T ~ N(0, I) per row, then one guided evaluation per visited
// step. `update` maps (rows, eps, t, index in steps) to the next state.
template <typename Update>
std::vector<float> run_chain(const NoisePredictor& net, std::span<const float> conds,
                             std::size_t n, const std::vector<int>& steps, double omega,
                             std::span<Rng> rngs, Update update) {
    const DenoiserConfig& config = net.params->config;
    const std::size_t D = config.target_dim;
    const std::size_t C = config.cond_dim;
    if (conds.size() != n * C || rngs.size() != n) {
        throw ArgumentError("sampler: condition rows and RNG streams must match n");
    }
    DenoiserBatch batch;
    batch.resize(n, config);
    std::copy(conds.begin(), conds.end(), batch.cond.begin());
    std::fill(batch.present.begin(), batch.present.end(), std::uint8_t{1});
    std::vector<double> y(n * D);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < D; ++i) {
            y[r * D + i] = standard_normal(rngs[r]);
        }
    }
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const int t = steps[k];
        for (std::size_t i = 0; i < y.size(); ++i) {
            batch.y_t[i] = static_cast<float>(y[i]);
        }
        std::fill(batch.t.begin(), batch.t.end(), static_cast<float>(t));
        const auto eps = guided_epsilon(net, batch, omega);
        for (std::size_t r = 0; r < n; ++r) {
            std::vector<double> row(y.begin() + static_cast<std::ptrdiff_t>(r * D),
                                    y.begin() + static_cast<std::ptrdiff_t>((r + 1) * D));
            std::vector<double> e(eps.begin() + static_cast<std::ptrdiff_t>(r * D),
                                  eps.begin() + static_cast<std::ptrdiff_t>((r + 1) * D));
            const auto next = update(row, e, k, rngs[r]);
            std::copy(next.begin(), next.end(), y.begin() + static_cast<std::ptrdiff_t>(r * D));
        }
    }
    return {y.begin(), y.end()};
}

std::vector<double> draw_noise(std::size_t d, Rng& rng) {
    std::vector<double> z(d);
    for (auto& v : z) {
        v = standard_normal(rng);
    }
    return z;
}

}  // namespace

std::vector<float> ddpm_sample(const NoisePredictor& net, std::span<const float> conds,
                               std::size_t n, double omega, std::span<Rng> rngs,
                               bool clip_denoised) {
    const NoiseSchedule& schedule = *net.schedule;
    const auto steps = full_tau(schedule.T);
    const std::size_t D = net.params->config.target_dim;
    return run_chain(net, conds, n, steps, omega, rngs,
                     [&](const std::vector<double>& y, const std::vector<double>& e, std::size_t k,
                         Rng& rng) {
                         const int t = steps[k];
                         const auto z = t > 1 ? draw_noise(D, rng) : std::vector<double>(D, 0.0);
                         return ddpm_step(y, e, t, schedule, z, clip_denoised);
                     });
}

std::vector<float> ddim_sample(const NoisePredictor& net, std::span<const float> conds,
                               std::size_t n, const SampleConfig& config, std::span<Rng> rngs) {
    const NoiseSchedule& schedule = *net.schedule;
    config.validate(schedule.T);
    const auto steps = config.tau.empty() ? full_tau(schedule.T) : config.tau;
    const std::size_t D = net.params->config.target_dim;
    return run_chain(net, conds, n, steps, config.omega, rngs,
                     [&](const std::vector<double>& y, const std::vector<double>& e, std::size_t k,
                         Rng& rng) {
                         const int t = steps[k];
                         const int t_prev = k + 1 < steps.size() ? steps[k + 1] : 0;
                         const bool noisy = config.eta > 0.0 && t_prev > 0;
                         const auto z = noisy ? draw_noise(D, rng) : std::vector<double>(D, 0.0);
                         return ddim_step(y, e, t, t_prev, schedule, config.eta, z,
                                          config.clip_denoised);
                     });
}

std::vector<std::optional<DeploymentPlan>> generate_plans(const DiffusionModel& model,
                                                          std::span<const PlanRequest> requests,
                                                          const ConstraintSet& constraints,
                                                          const SampleConfig& config,
                                                          int workers) {
    config.validate(model.schedule.T);
    const std::size_t D = model.weights.config.target_dim;
    const std::size_t C = model.weights.config.cond_dim;
    const std::size_t S = config.n_samples;
    for (const auto& req : requests) {
        if (req.scenario == nullptr) {
            throw ArgumentError("plan request without a scenario");
        }
        if (config.selection == SelectionRule::best_of_n && !req.scorer) {
            throw ArgumentError("best_of_n selection needs a scorer");
        }
    }
    // Each chunk holds whole requests so a request's rows never straddle chunks.
    const std::size_t per_chunk = std::max<std::size_t>(1, kSampleChunk / S);
    const std::size_t n_chunks = (requests.size() + per_chunk - 1) / per_chunk;
    std::vector<std::optional<DeploymentPlan>> plans(requests.size());
    std::vector<std::exception_ptr> errors(n_chunks);

#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, workers))
    for (std::size_t c = 0; c < n_chunks; ++c) {
        try {
            const std::size_t lo = c * per_chunk;
            const std::size_t hi = std::min(requests.size(), lo + per_chunk);
            const std::size_t rows = (hi - lo) * S;
            std::vector<float> conds(rows * C);
            std::vector<Rng> rngs;
            rngs.reserve(rows);
            for (std::size_t q = lo; q < hi; ++q) {
                const auto x = encode_condition(*requests[q].scenario, model.layout);
                for (std::size_t s = 0; s < S; ++s) {
                    const std::size_t row = (q - lo) * S + s;
                    std::transform(x.begin(), x.end(),
                                   conds.begin() + static_cast<std::ptrdiff_t>(row * C),
                                   [](double v) { return static_cast<float>(v); });
                    rngs.push_back(make_rng(mix_seed(config.seed, requests[q].key), s));
                }
            }
            const auto y = config.sampler == SamplerKind::ddpm
                               ? ddpm_sample(model.predictor(), conds, rows, config.omega, rngs,
                                             config.clip_denoised)
                               : ddim_sample(model.predictor(), conds, rows, config, rngs);
            for (std::size_t q = lo; q < hi; ++q) {
                const Grid grid = requests[q].scenario->grid();
                std::optional<DeploymentPlan> best;
                double best_score = 0.0;
                for (std::size_t s = 0; s < S; ++s) {
                    const std::size_t row = (q - lo) * S + s;
                    const std::vector<double> v(y.begin() + static_cast<std::ptrdiff_t>(row * D),
                                                y.begin() + static_cast<std::ptrdiff_t>((row + 1) * D));
                    std::optional<DeploymentPlan> plan;
                    try {
                        plan = decode_target(v, grid, constraints, model.mode);
                    } catch (const InfeasibleError&) {
                        continue;
                    }
                    if (config.selection == SelectionRule::first) {
                        best = std::move(plan);
                        break;
                    }
                    const double score = requests[q].scorer(*plan);
                    if (!best || score > best_score) {
                        best = std::move(plan);
                        best_score = score;
                    }
                }
                plans[q] = std::move(best);
            }
        } catch (...) {
            errors[c] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return plans;
}

DeploymentPlan generate_plan(const DiffusionModel& model, const Scenario& scenario,
                             const ConstraintSet& constraints, const SampleConfig& config,
                             std::uint64_t key, PlanScorer scorer) {
    const PlanRequest req{&scenario, key, std::move(scorer)};
    auto plans = generate_plans(model, std::span<const PlanRequest>(&req, 1), constraints, config);
    if (!plans[0]) {
        throw InfeasibleError("no sampled vector could be projected onto a feasible plan");
    }
    return std::move(*plans[0]);
}

}  // namespace risdiff
