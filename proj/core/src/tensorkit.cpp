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

#include "risdiff/tensorkit.hpp"

#include <Eigen/Core>

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "risdiff/digest.hpp"
#include "risdiff/error.hpp"
#include "risdiff/random.hpp"

namespace risdiff {

using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are written as native little-endian float32");

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Mat = Eigen::Map<RowMat>;
using CMat = Eigen::Map<const RowMat>;
using CVec = Eigen::Map<const Eigen::RowVectorXf>;
using Vec = Eigen::Map<Eigen::RowVectorXf>;

constexpr float kLayerNormEps = 1e-5F;

Mat mat(std::vector<float>& v, std::size_t rows, std::size_t cols) {
    return Mat(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
CMat cmat(const std::vector<float>& v, std::size_t rows, std::size_t cols) {
    return CMat(v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
CMat cmat(const Tensor& t) { return cmat(t.data, t.rows(), t.cols()); }
Mat mat(Tensor& t) { return mat(t.data, t.rows(), t.cols()); }
CVec cvec(const Tensor& t) { return CVec(t.data.data(), static_cast<Eigen::Index>(t.size())); }
Vec vec(Tensor& t) { return Vec(t.data.data(), static_cast<Eigen::Index>(t.size())); }

inline float sigmoid(float x) { return 1.0F / (1.0F + std::exp(-x)); }
inline float silu(float x) { return x * sigmoid(x); }
inline float silu_grad(float x) {
    const float s = sigmoid(x);
    return s * (1.0F + x * (1.0F - s));
}

// Row-wise LayerNorm without affine part: writes x_hat and 1/std.
void layer_norm(const std::vector<float>& x, std::size_t rows, std::size_t cols,
                std::vector<float>& x_hat, std::vector<float>& inv_std) {
    x_hat.resize(rows * cols);
    inv_std.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const float* in = x.data() + r * cols;
        float* out = x_hat.data() + r * cols;
        double mean = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            mean += in[c];
        }
        mean /= static_cast<double>(cols);
        double var = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double d = in[c] - mean;
            var += d * d;
        }
        var /= static_cast<double>(cols);
        const float inv = static_cast<float>(1.0 / std::sqrt(var + kLayerNormEps));
        inv_std[r] = inv;
        for (std::size_t c = 0; c < cols; ++c) {
            out[c] = static_cast<float>(in[c] - mean) * inv;
        }
    }
}

// Backward of y = g * x_hat + b given dy; accumulates dg, db and returns dx.
void layer_norm_backward(const std::vector<float>& dy, const std::vector<float>& x_hat,
                         const std::vector<float>& inv_std, const Tensor& gain, std::size_t rows,
                         std::size_t cols, Tensor& d_gain, Tensor& d_bias, std::vector<float>& dx) {
    dx.resize(rows * cols);
    std::vector<float> d_hat(cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const float* g = dy.data() + r * cols;
        const float* xh = x_hat.data() + r * cols;
        double mean_dh = 0.0;
        double mean_dh_xh = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            d_gain.data[c] += g[c] * xh[c];
            d_bias.data[c] += g[c];
            d_hat[c] = g[c] * gain.data[c];
            mean_dh += d_hat[c];
            mean_dh_xh += static_cast<double>(d_hat[c]) * xh[c];
        }
        mean_dh /= static_cast<double>(cols);
        mean_dh_xh /= static_cast<double>(cols);
        float* out = dx.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
            out[c] = inv_std[r] * static_cast<float>(d_hat[c] - mean_dh - xh[c] * mean_dh_xh);
        }
    }
}

std::vector<float> affine(const std::vector<float>& x_hat, std::size_t rows, const Tensor& gain,
                          const Tensor& bias) {
    std::vector<float> u(x_hat.size());
    mat(u, rows, gain.size()) =
        (cmat(x_hat, rows, gain.size()).array().rowwise() * cvec(gain).array()).rowwise() +
        cvec(bias).array();
    return u;
}

void add_rowwise(Mat m, const Tensor& bias) { m.rowwise() += cvec(bias); }

void accumulate_col_sum(const std::vector<float>& d, std::size_t rows, Tensor& db) {
    vec(db) += cmat(d, rows, db.size()).colwise().sum();
}

std::string block_name(std::size_t b, const char* leaf) {
    return "block" + std::to_string(b) + "." + leaf;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> dims) : shape(std::move(dims)) {
    const std::size_t n =
        std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
    data.assign(n, 0.0F);
}

void Tensor::fill(float v) { std::fill(data.begin(), data.end(), v); }

bool Tensor::all_finite() const noexcept {
    return std::all_of(data.begin(), data.end(), [](float v) { return std::isfinite(v); });
}

std::size_t DenoiserParams::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) {
            return i;
        }
    }
    throw ArgumentError("no parameter named '" + name + "'");
}

std::size_t DenoiserParams::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& t : tensors) {
        n += t.size();
    }
    return n;
}

DenoiserParams DenoiserParams::zeros_like() const {
    DenoiserParams z;
    z.config = config;
    z.names = names;
    z.tensors.reserve(tensors.size());
    for (const auto& t : tensors) {
        z.tensors.emplace_back(t.shape);
    }
    return z;
}

DenoiserParams init_denoiser(const DenoiserConfig& config, std::uint64_t seed, bool zero_head) {
    if (config.target_dim == 0 || config.cond_dim == 0 || config.hidden == 0 ||
        config.time_dim == 0 || config.time_dim % 2 != 0) {
        throw ConfigError("denoiser dimensions must be positive and time_dim even");
    }
    DenoiserParams p;
    p.config = config;
    Rng rng = make_rng(seed, 0);
    const std::size_t h = config.hidden;

    auto add = [&](const std::string& name, std::vector<std::size_t> shape) -> Tensor& {
        p.names.push_back(name);
        p.tensors.emplace_back(std::move(shape));
        return p.tensors.back();
    };
    auto dense = [&](const std::string& prefix, std::size_t out, std::size_t in, bool zero) {
        Tensor& w = add(prefix + ".w", {out, in});
        if (!zero) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(in));
            for (float& v : w.data) {
                v = static_cast<float>((2.0 * uniform01(rng) - 1.0) * bound);
            }
        }
        add(prefix + ".b", {out});
    };

    dense("cond1", h, config.cond_dim, false);
    dense("cond2", h, h, false);
    add("cond.null", {h});
    dense("time", h, config.time_dim, false);
    dense("in", h, config.target_dim, false);
    for (std::size_t b = 0; b < config.n_blocks; ++b) {
        add(block_name(b, "ln.gain"), {h}).fill(1.0F);
        add(block_name(b, "ln.bias"), {h});
        dense(block_name(b, "fc1"), h, h, false);
        dense(block_name(b, "fc2"), h, h, false);
    }
    add("out.ln.gain", {h}).fill(1.0F);
    add("out.ln.bias", {h});
    dense("out", config.target_dim, h, zero_head);
    return p;
}

std::vector<float> time_embedding(double t, std::size_t dim) {
    std::vector<float> e(dim);
    const std::size_t half = dim / 2;
    for (std::size_t i = 0; i < half; ++i) {
        const double freq =
            std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(half));
        e[i] = static_cast<float>(std::sin(t * freq));
        e[half + i] = static_cast<float>(std::cos(t * freq));
    }
    return e;
}

void DenoiserBatch::resize(std::size_t n, const DenoiserConfig& config) {
    size = n;
    y_t.assign(n * config.target_dim, 0.0F);
    t.assign(n, 0.0F);
    cond.assign(n * config.cond_dim, 0.0F);
    present.assign(n, 1);
}

DenoiserTape::DenoiserTape(const DenoiserParams& params, const DenoiserBatch& batch)
    : params_(params), batch_(batch) {
    const DenoiserConfig& cfg = params.config;
    const std::size_t n = batch.size;
    const std::size_t h = cfg.hidden;
    if (batch.y_t.size() != n * cfg.target_dim || batch.t.size() != n ||
        batch.cond.size() != n * cfg.cond_dim || batch.present.size() != n) {
        throw ArgumentError("denoiser batch shapes do not match the network configuration");
    }

    // Condition embedding.
    c_pre_.resize(n * h);
    mat(c_pre_, n, h).noalias() = cmat(batch.cond, n, cfg.cond_dim) * cmat(params.at("cond1.w")).transpose();
    add_rowwise(mat(c_pre_, n, h), params.at("cond1.b"));
    c_act_.resize(n * h);
    std::transform(c_pre_.begin(), c_pre_.end(), c_act_.begin(), silu);
    e_.resize(n * h);
    mat(e_, n, h).noalias() = cmat(c_act_, n, h) * cmat(params.at("cond2.w")).transpose();
    add_rowwise(mat(e_, n, h), params.at("cond2.b"));
    const Tensor& null = params.at("cond.null");
    for (std::size_t r = 0; r < n; ++r) {
        if (batch.present[r] == 0) {
            std::copy(null.data.begin(), null.data.end(), e_.begin() + static_cast<long>(r * h));
        }
    }

    // Time embedding.
    temb_in_.resize(n * cfg.time_dim);
    for (std::size_t r = 0; r < n; ++r) {
        const auto s = time_embedding(batch.t[r], cfg.time_dim);
        std::copy(s.begin(), s.end(), temb_in_.begin() + static_cast<long>(r * cfg.time_dim));
    }
    mat(e_, n, h).noalias() += cmat(temb_in_, n, cfg.time_dim) * cmat(params.at("time.w")).transpose();
    add_rowwise(mat(e_, n, h), params.at("time.b"));

    // Trunk.
    std::vector<float> hid(n * h);
    mat(hid, n, h).noalias() = cmat(batch.y_t, n, cfg.target_dim) * cmat(params.at("in.w")).transpose();
    add_rowwise(mat(hid, n, h), params.at("in.b"));
    mat(hid, n, h) += cmat(e_, n, h);

    blocks_.resize(cfg.n_blocks);
    for (std::size_t b = 0; b < cfg.n_blocks; ++b) {
        Block& blk = blocks_[b];
        blk.h_in = hid;
        layer_norm(blk.h_in, n, h, blk.ln_hat, blk.ln_inv_std);
        const auto u = affine(blk.ln_hat, n, params.at(block_name(b, "ln.gain")),
                              params.at(block_name(b, "ln.bias")));
        blk.pre_act.resize(n * h);
        mat(blk.pre_act, n, h).noalias() = cmat(u, n, h) * cmat(params.at(block_name(b, "fc1.w"))).transpose();
        add_rowwise(mat(blk.pre_act, n, h), params.at(block_name(b, "fc1.b")));
        mat(blk.pre_act, n, h) += cmat(e_, n, h);
        blk.act.resize(n * h);
        std::transform(blk.pre_act.begin(), blk.pre_act.end(), blk.act.begin(), silu);
        mat(hid, n, h).noalias() += cmat(blk.act, n, h) * cmat(params.at(block_name(b, "fc2.w"))).transpose();
        add_rowwise(mat(hid, n, h), params.at(block_name(b, "fc2.b")));
    }

    // Head.
    h_final_ = hid;
    layer_norm(h_final_, n, h, out_hat_, out_inv_std_);
    out_pre_ = affine(out_hat_, n, params.at("out.ln.gain"), params.at("out.ln.bias"));
    out_act_.resize(n * h);
    std::transform(out_pre_.begin(), out_pre_.end(), out_act_.begin(), silu);
    output_.resize(n * cfg.target_dim);
    mat(output_, n, cfg.target_dim).noalias() = cmat(out_act_, n, h) * cmat(params.at("out.w")).transpose();
    add_rowwise(mat(output_, n, cfg.target_dim), params.at("out.b"));
}

void DenoiserTape::backward(std::span<const float> d_output, DenoiserParams& grads) const {
    const DenoiserParams& p = params_;
    const DenoiserConfig& cfg = p.config;
    const std::size_t n = batch_.size;
    const std::size_t h = cfg.hidden;
    const std::size_t d = cfg.target_dim;
    if (d_output.size() != n * d) {
        throw ArgumentError("output gradient has the wrong length");
    }
    const CMat d_out(d_output.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));

    // Head.
    mat(grads.at("out.w")).noalias() += d_out.transpose() * cmat(out_act_, n, h);
    vec(grads.at("out.b")) += d_out.colwise().sum();
    std::vector<float> du(n * h);
    mat(du, n, h).noalias() = d_out * cmat(p.at("out.w"));
    for (std::size_t i = 0; i < du.size(); ++i) {
        du[i] *= silu_grad(out_pre_[i]);
    }
    std::vector<float> dh;
    layer_norm_backward(du, out_hat_, out_inv_std_, p.at("out.ln.gain"), n, h,
                        grads.at("out.ln.gain"), grads.at("out.ln.bias"), dh);

    std::vector<float> de(n * h, 0.0F);
    std::vector<float> d_pre(n * h);
    std::vector<float> d_ln;
    for (std::size_t bi = cfg.n_blocks; bi-- > 0;) {
        const Block& blk = blocks_[bi];
        // Residual branch: h_out = h_in + fc2(silu(fc1(LN(h_in)) + e)).
        mat(grads.at(block_name(bi, "fc2.w"))).noalias() += cmat(dh, n, h).transpose() * cmat(blk.act, n, h);
        accumulate_col_sum(dh, n, grads.at(block_name(bi, "fc2.b")));
        mat(d_pre, n, h).noalias() = cmat(dh, n, h) * cmat(p.at(block_name(bi, "fc2.w")));
        for (std::size_t i = 0; i < d_pre.size(); ++i) {
            d_pre[i] *= silu_grad(blk.pre_act[i]);
        }
        mat(de, n, h) += cmat(d_pre, n, h);
        const auto u = affine(blk.ln_hat, n, p.at(block_name(bi, "ln.gain")),
                              p.at(block_name(bi, "ln.bias")));
        mat(grads.at(block_name(bi, "fc1.w"))).noalias() += cmat(d_pre, n, h).transpose() * cmat(u, n, h);
        accumulate_col_sum(d_pre, n, grads.at(block_name(bi, "fc1.b")));
        mat(du, n, h).noalias() = cmat(d_pre, n, h) * cmat(p.at(block_name(bi, "fc1.w")));
        layer_norm_backward(du, blk.ln_hat, blk.ln_inv_std, p.at(block_name(bi, "ln.gain")), n, h,
                            grads.at(block_name(bi, "ln.gain")), grads.at(block_name(bi, "ln.bias")),
                            d_ln);
        mat(dh, n, h) += cmat(d_ln, n, h);
    }

    // Input projection: h0 = in(y_t) + e.
    mat(grads.at("in.w")).noalias() += cmat(dh, n, h).transpose() * cmat(batch_.y_t, n, d);
    accumulate_col_sum(dh, n, grads.at("in.b"));
    mat(de, n, h) += cmat(dh, n, h);

    // e = cond + time.
    mat(grads.at("time.w")).noalias() += cmat(de, n, h).transpose() * cmat(temb_in_, n, cfg.time_dim);
    accumulate_col_sum(de, n, grads.at("time.b"));

    Tensor& d_null = grads.at("cond.null");
    for (std::size_t r = 0; r < n; ++r) {
        if (batch_.present[r] == 0) {
            for (std::size_t c = 0; c < h; ++c) {
                d_null.data[c] += de[r * h + c];
                de[r * h + c] = 0.0F;
            }
        }
    }
    mat(grads.at("cond2.w")).noalias() += cmat(de, n, h).transpose() * cmat(c_act_, n, h);
    accumulate_col_sum(de, n, grads.at("cond2.b"));
    mat(du, n, h).noalias() = cmat(de, n, h) * cmat(p.at("cond2.w"));
    for (std::size_t i = 0; i < du.size(); ++i) {
        du[i] *= silu_grad(c_pre_[i]);
    }
    mat(grads.at("cond1.w")).noalias() += cmat(du, n, h).transpose() * cmat(batch_.cond, n, cfg.cond_dim);
    accumulate_col_sum(du, n, grads.at("cond1.b"));
}

std::vector<float> denoiser_forward(const DenoiserParams& params, const DenoiserBatch& batch) {
    const DenoiserTape tape(params, batch);
    return tape.output();
}

std::vector<float> denoiser_forward(const DenoiserParams& params, std::span<const float> y_t,
                                    int t, std::optional<std::span<const float>> cond) {
    const DenoiserConfig& cfg = params.config;
    if (y_t.size() != cfg.target_dim) {
        throw ArgumentError("y_t has length " + std::to_string(y_t.size()) + ", expected " +
                            std::to_string(cfg.target_dim));
    }
    if (cond && cond->size() != cfg.cond_dim) {
        throw ArgumentError("condition has length " + std::to_string(cond->size()) +
                            ", expected " + std::to_string(cfg.cond_dim));
    }
    DenoiserBatch batch;
    batch.resize(1, cfg);
    std::copy(y_t.begin(), y_t.end(), batch.y_t.begin());
    batch.t[0] = static_cast<float>(t);
    if (cond) {
        std::copy(cond->begin(), cond->end(), batch.cond.begin());
    } else {
        batch.present[0] = 0;
    }
    return denoiser_forward(params, batch);
}

LossAndGrads loss_and_gradients(const DenoiserParams& params, const TrainingBatch& batch) {
    const std::size_t n = batch.input.size;
    const std::size_t d = params.config.target_dim;
    if (n == 0) {
        throw ArgumentError("loss needs a non-empty batch");
    }
    if (batch.eps.size() != n * d) {
        throw ArgumentError("eps has the wrong shape");
    }
    const DenoiserTape tape(params, batch.input);
    const auto& out = tape.output();
    std::vector<float> d_out(n * d);
    double loss = 0.0;
    const float scale = 2.0F / static_cast<float>(n);
    for (std::size_t i = 0; i < n * d; ++i) {
        const float diff = out[i] - batch.eps[i];
        loss += static_cast<double>(diff) * diff;
        d_out[i] = scale * diff;
    }
    loss /= static_cast<double>(n);
    if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss");
    }
    LossAndGrads result{loss, params.zeros_like()};
    tape.backward(d_out, result.grads);
    return result;
}

OptimizerState OptimizerState::for_params(const DenoiserParams& params, double lr) {
    OptimizerState s;
    s.lr = lr;
    for (const auto& t : params.tensors) {
        s.m.emplace_back(t.shape);
        s.v.emplace_back(t.shape);
    }
    return s;
}

void adam_step(DenoiserParams& params, const DenoiserParams& grads, OptimizerState& state) {
    if (grads.tensors.size() != params.tensors.size() || state.m.size() != params.tensors.size()) {
        throw ArgumentError("optimizer state does not match the parameters");
    }
    ++state.step;
    const double step = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, step);
    const double c2 = 1.0 - std::pow(state.beta2, step);
    for (std::size_t i = 0; i < params.tensors.size(); ++i) {
        auto& p = params.tensors[i].data;
        const auto& g = grads.tensors[i].data;
        auto& m = state.m[i].data;
        auto& v = state.v[i].data;
        if (g.size() != p.size()) {
            throw ArgumentError("gradient shape mismatch for " + params.names[i]);
        }
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double gk = g[k];
            const double mk = state.beta1 * m[k] + (1.0 - state.beta1) * gk;
            const double vk = state.beta2 * v[k] + (1.0 - state.beta2) * gk * gk;
            m[k] = static_cast<float>(mk);
            v[k] = static_cast<float>(vk);
            const double update = state.lr * (mk / c1) / (std::sqrt(vk / c2) + state.eps);
            p[k] = static_cast<float>(p[k] - update);
        }
    }
}

EmaState EmaState::for_params(const DenoiserParams& params, double decay) {
    return EmaState{decay, params};
}

void ema_update(EmaState& ema, const DenoiserParams& params) {
    const float keep = static_cast<float>(ema.decay);
    const float take = static_cast<float>(1.0 - ema.decay);
    for (std::size_t i = 0; i < params.tensors.size(); ++i) {
        auto& s = ema.shadow.tensors[i].data;
        const auto& p = params.tensors[i].data;
        if (ema.decay == 0.0) {
            s = p;
            continue;
        }
        if (ema.decay == 1.0) {
            continue;
        }
        for (std::size_t k = 0; k < s.size(); ++k) {
            s[k] = keep * s[k] + take * p[k];
        }
    }
}

json to_json(const DenoiserConfig& c) {
    return {{"target_dim", c.target_dim},
            {"cond_dim", c.cond_dim},
            {"hidden", c.hidden},
            {"n_blocks", c.n_blocks},
            {"time_dim", c.time_dim}};
}

DenoiserConfig denoiser_config_from_json(const json& j) {
    DenoiserConfig c;
    c.target_dim = j.at("target_dim").get<std::size_t>();
    c.cond_dim = j.at("cond_dim").get<std::size_t>();
    c.hidden = j.at("hidden").get<std::size_t>();
    c.n_blocks = j.at("n_blocks").get<std::size_t>();
    c.time_dim = j.at("time_dim").get<std::size_t>();
    return c;
}

std::string checkpoint_blob_path(const std::string& manifest_path) { return manifest_path + ".bin"; }

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::vector<std::pair<std::string, const DenoiserParams*>> groups{{"weights", &ckpt.weights}};
    if (ckpt.raw) {
        groups.emplace_back("raw", &*ckpt.raw);
    }
    std::string blob;
    json tensors = json::array();
    std::size_t offset = 0;
    for (const auto& [group, params] : groups) {
        if (!(params->config == ckpt.weights.config)) {
            throw ArgumentError("checkpoint groups must share one network configuration");
        }
        for (std::size_t i = 0; i < params->tensors.size(); ++i) {
            const Tensor& t = params->tensors[i];
            tensors.push_back({{"name", group + "/" + params->names[i]},
                               {"shape", t.shape},
                               {"offset", offset}});
            const auto* bytes = reinterpret_cast<const char*>(t.data.data());
            blob.append(bytes, t.data.size() * sizeof(float));
            offset += t.data.size();
        }
    }
    const json manifest = {{"format_version", kCheckpointFormatVersion},
                           {"dtype", "float32-le"},
                           {"network", to_json(ckpt.weights.config)},
                           {"groups", json::array({"weights"})},
                           {"has_raw", ckpt.raw.has_value()},
                           {"tensors", std::move(tensors)},
                           {"blob_floats", offset},
                           {"blob_digest", "sha256:" + sha256_hex(blob)},
                           {"metadata", ckpt.metadata}};
    {
        std::ofstream out(checkpoint_blob_path(path), std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write checkpoint blob '" + checkpoint_blob_path(path) + "'");
        }
        out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write checkpoint manifest '" + path + "'");
    }
    out << manifest.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
    json manifest;
    {
        std::ifstream in(path);
        if (!in) {
            throw FormatError("cannot open checkpoint manifest '" + path + "'");
        }
        try {
            manifest = json::parse(in);
        } catch (const json::exception& e) {
            throw FormatError("malformed checkpoint manifest: " + std::string(e.what()));
        }
    }
    std::ifstream in(checkpoint_blob_path(path), std::ios::binary);
    if (!in) {
        throw FormatError("missing checkpoint blob '" + checkpoint_blob_path(path) + "'");
    }
    const std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    try {
        if (manifest.at("format_version").get<int>() != kCheckpointFormatVersion) {
            throw FormatError("unsupported checkpoint format version");
        }
        if (manifest.at("dtype").get<std::string>() != "float32-le") {
            throw FormatError("unsupported checkpoint dtype");
        }
        const std::size_t floats = manifest.at("blob_floats").get<std::size_t>();
        if (blob.size() != floats * sizeof(float)) {
            throw FormatError("checkpoint blob size does not match the manifest");
        }
        if (manifest.at("blob_digest").get<std::string>() != "sha256:" + sha256_hex(blob)) {
            throw FormatError("checkpoint blob digest does not match the manifest");
        }
        const DenoiserConfig config = denoiser_config_from_json(manifest.at("network"));
        const bool has_raw = manifest.at("has_raw").get<bool>();

        Checkpoint ckpt;
        ckpt.weights = init_denoiser(config, 0);
        if (has_raw) {
            ckpt.raw = ckpt.weights;
        }
        ckpt.metadata = manifest.at("metadata");

        const auto& tensors = manifest.at("tensors");
        const std::size_t per_group = ckpt.weights.tensors.size();
        if (tensors.size() != per_group * (has_raw ? 2 : 1)) {
            throw FormatError("checkpoint tensor list does not match the network layout");
        }
        std::size_t expected_offset = 0;
        for (std::size_t i = 0; i < tensors.size(); ++i) {
            DenoiserParams& target = i < per_group ? ckpt.weights : *ckpt.raw;
            const std::size_t local = i % per_group;
            const std::string expected =
                std::string(i < per_group ? "weights/" : "raw/") + target.names[local];
            const auto& entry = tensors[i];
            Tensor& t = target.tensors[local];
            if (entry.at("name").get<std::string>() != expected ||
                entry.at("shape").get<std::vector<std::size_t>>() != t.shape ||
                entry.at("offset").get<std::size_t>() != expected_offset) {
                throw FormatError("checkpoint tensor '" + entry.at("name").get<std::string>() +
                                  "' does not match the expected layout");
            }
            std::memcpy(t.data.data(), blob.data() + expected_offset * sizeof(float),
                        t.data.size() * sizeof(float));
            expected_offset += t.data.size();
        }
        if (expected_offset != floats) {
            throw FormatError("checkpoint blob has trailing data");
        }
        return ckpt;
    } catch (const json::exception& e) {
        throw FormatError("malformed checkpoint manifest: " + std::string(e.what()));
    }
}

}  // namespace risdiff
