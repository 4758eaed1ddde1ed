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
#include <vector>

#include <nlohmann/json.hpp>

namespace risdiff {

/// Dense row-major float32 tensor.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> dims);

    std::size_t size() const noexcept { return data.size(); }
    std::size_t rows() const noexcept { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const noexcept { return shape.size() < 2 ? 1 : shape[1]; }
    void fill(float v);
    bool all_finite() const noexcept;

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// Residual dense noise predictor:
///   c   = W_c2 silu(W_c1 x + b_c1) + b_c2   (learned null vector when x is absent)
///   e   = c + W_t sin_embed(t) + b_t
///   h   = W_in y_t + b_in + e
///   h  += W_2 silu(W_1 LN(h) + b_1 + e) + b_2      (per residual block)
///   eps = W_out silu(LN(h)) + b_out
struct DenoiserConfig {
    std::size_t target_dim = 48;
    std::size_t cond_dim = 93;
    std::size_t hidden = 256;
    std::size_t n_blocks = 4;
    std::size_t time_dim = 64;

    friend bool operator==(const DenoiserConfig&, const DenoiserConfig&) = default;
};

/// Named parameter tensors in a fixed manifest order.
struct DenoiserParams {
    DenoiserConfig config;
    std::vector<std::string> names;
    std::vector<Tensor> tensors;

    std::size_t index_of(const std::string& name) const;
    Tensor& at(const std::string& name) { return tensors[index_of(name)]; }
    const Tensor& at(const std::string& name) const { return tensors[index_of(name)]; }
    std::size_t parameter_count() const noexcept;
    /// Same names and shapes, all zeros.
    DenoiserParams zeros_like() const;
};

/// Uniform(+-1/sqrt(fan_in)) weights, zero biases, unit LayerNorm gains.
/// With zero_head the output layer starts at zero so eps_hat = 0.
DenoiserParams init_denoiser(const DenoiserConfig& config, std::uint64_t seed, bool zero_head = true);

/// Sinusoidal embedding of a diffusion step.
std::vector<float> time_embedding(double t, std::size_t dim);

/// One row per item; absent conditions use the learned null embedding.
struct DenoiserBatch {
    std::size_t size = 0;
    std::vector<float> y_t;              // size x target_dim
    std::vector<float> t;                // size
    std::vector<float> cond;             // size x cond_dim (ignored where absent)
    std::vector<std::uint8_t> present;   // size; 0 = absent condition

    void resize(std::size_t n, const DenoiserConfig& config);
};

/// Batched forward pass; returns size x target_dim. Throws ArgumentError on
/// shape mismatch.
std::vector<float> denoiser_forward(const DenoiserParams& params, const DenoiserBatch& batch);

/// Single-item convenience wrapper; an empty `cond` means absent.
std::vector<float> denoiser_forward(const DenoiserParams& params, std::span<const float> y_t,
                                    int t, std::optional<std::span<const float>> cond);

/// Forward pass that keeps activations, then backpropagates an arbitrary
/// output gradient d(loss)/d(eps_hat).
class DenoiserTape {
public:
    DenoiserTape(const DenoiserParams& params, const DenoiserBatch& batch);

    const std::vector<float>& output() const noexcept { return output_; }
    /// Accumulates parameter gradients into `grads` (same layout as params).
    void backward(std::span<const float> d_output, DenoiserParams& grads) const;

private:
    struct Block {
        std::vector<float> h_in, ln_hat, ln_inv_std, pre_act, act;
    };
    const DenoiserParams& params_;
    const DenoiserBatch& batch_;
    std::vector<float> c_pre_, c_act_, temb_in_, e_;
    std::vector<Block> blocks_;
    std::vector<float> h_final_, out_hat_, out_inv_std_, out_pre_, out_act_;
    std::vector<float> output_;
};

/// Noise-prediction batch: the target eps per item.
struct TrainingBatch {
    DenoiserBatch input;
    std::vector<float> eps;  // size x target_dim
};

struct LossAndGrads {
    double loss = 0.0;
    DenoiserParams grads;
};

/// loss = mean over items of ||eps - eps_hat||^2. Throws NumericError on a
/// non-finite loss and ArgumentError on an empty batch.
LossAndGrads loss_and_gradients(const DenoiserParams& params, const TrainingBatch& batch);

struct OptimizerState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t step = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;

    static OptimizerState for_params(const DenoiserParams& params, double lr = 1e-4);
};

/// Bias-corrected Adam.
void adam_step(DenoiserParams& params, const DenoiserParams& grads, OptimizerState& state);

struct EmaState {
    double decay = 0.999;
    DenoiserParams shadow;

    static EmaState for_params(const DenoiserParams& params, double decay = 0.999);
};

/// shadow <- decay * shadow + (1 - decay) * params.
void ema_update(EmaState& ema, const DenoiserParams& params);

inline constexpr int kCheckpointFormatVersion = 1;

/// Inference weights (EMA), raw training weights, and free-form metadata
/// (training and sampling hyperparameters).
struct Checkpoint {
    DenoiserParams weights;
    std::optional<DenoiserParams> raw;
    nlohmann::json metadata = nlohmann::json::object();
};

/// Blob file that accompanies a checkpoint manifest.
std::string checkpoint_blob_path(const std::string& manifest_path);

/// Writes `path` (JSON manifest: names, shapes, offsets, config, metadata,
/// blob digest) and `path`.bin (little-endian float32 in manifest order).
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);

/// Throws FormatError on any manifest/blob mismatch.
Checkpoint load_checkpoint(const std::string& path);

nlohmann::json to_json(const DenoiserConfig& config);
DenoiserConfig denoiser_config_from_json(const nlohmann::json& j);

}  // namespace risdiff
