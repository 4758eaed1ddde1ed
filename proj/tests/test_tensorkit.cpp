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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "risdiff/error.hpp"
#include "risdiff/tensorkit.hpp"
#include "support.hpp"

namespace risdiff {
namespace {

// Independent double-precision forward pass over the documented architecture.
class Reference {
public:
    explicit Reference(const DenoiserParams& p) : cfg_(p.config) {
        for (std::size_t i = 0; i < p.names.size(); ++i) {
            names_.push_back(p.names[i]);
            values_.emplace_back(p.tensors[i].data.begin(), p.tensors[i].data.end());
            shapes_.push_back(p.tensors[i].shape);
        }
    }

    std::vector<double>& at(const std::string& name) {
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (names_[i] == name) return values_[i];
        }
        throw std::out_of_range(name);
    }
    std::vector<std::vector<double>>& values() { return values_; }

    std::vector<double> forward(const DenoiserBatch& b) {
        const std::size_t h = cfg_.hidden, d = cfg_.target_dim;
        std::vector<double> out;
        for (std::size_t r = 0; r < b.size; ++r) {
            std::vector<double> x(b.cond.begin() + r * cfg_.cond_dim,
                                  b.cond.begin() + (r + 1) * cfg_.cond_dim);
            std::vector<double> e;
            if (b.present[r]) {
                e = dense("cond2", silu(dense("cond1", x)));
            } else {
                e = at("cond.null");
            }
            std::vector<double> temb(cfg_.time_dim);
            const std::size_t half = cfg_.time_dim / 2;
            for (std::size_t i = 0; i < half; ++i) {
                const double f = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(half));
                temb[i] = std::sin(b.t[r] * f);
                temb[half + i] = std::cos(b.t[r] * f);
            }
            const auto te = dense("time", temb);
            for (std::size_t i = 0; i < h; ++i) e[i] += te[i];
            std::vector<double> y(b.y_t.begin() + r * d, b.y_t.begin() + (r + 1) * d);
            auto hid = dense("in", y);
            for (std::size_t i = 0; i < h; ++i) hid[i] += e[i];
            for (std::size_t k = 0; k < cfg_.n_blocks; ++k) {
                const std::string pre = "block" + std::to_string(k) + ".";
                auto u = dense(pre + "fc1", norm(hid, pre + "ln"));
                for (std::size_t i = 0; i < h; ++i) u[i] += e[i];
                const auto v = dense(pre + "fc2", silu(u));
                for (std::size_t i = 0; i < h; ++i) hid[i] += v[i];
            }
            const auto o = dense("out", silu(norm(hid, "out.ln")));
            out.insert(out.end(), o.begin(), o.end());
        }
        return out;
    }

private:
    std::vector<double> dense(const std::string& prefix, const std::vector<double>& x) {
        const auto& w = at(prefix + ".w");
        const auto& bias = at(prefix + ".b");
        std::vector<double> y(bias);
        for (std::size_t o = 0; o < y.size(); ++o) {
            for (std::size_t i = 0; i < x.size(); ++i) y[o] += w[o * x.size() + i] * x[i];
        }
        return y;
    }
    static std::vector<double> silu(std::vector<double> x) {
        for (double& v : x) v = v / (1.0 + std::exp(-v));
        return x;
    }
    std::vector<double> norm(const std::vector<double>& x, const std::string& prefix) {
        double mean = 0, var = 0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(x.size());
        for (double v : x) var += (v - mean) * (v - mean);
        var /= static_cast<double>(x.size());
        const auto& g = at(prefix + ".gain");
        const auto& b = at(prefix + ".bias");
        std::vector<double> y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            y[i] = g[i] * (x[i] - mean) / std::sqrt(var + 1e-5) + b[i];
        }
        return y;
    }

    DenoiserConfig cfg_;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> values_;
    std::vector<std::vector<std::size_t>> shapes_;
};

DenoiserConfig small_config() {
    DenoiserConfig c;
    c.target_dim = 6;
    c.cond_dim = 5;
    c.hidden = 16;
    c.n_blocks = 2;
    c.time_dim = 8;
    return c;
}

DenoiserBatch random_batch(const DenoiserConfig& c, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> normal;
    DenoiserBatch b;
    b.resize(n, c);
    for (float& v : b.y_t) v = normal(rng);
    for (float& v : b.cond) v = normal(rng);
    for (std::size_t r = 0; r < n; ++r) {
        b.t[r] = static_cast<float>(1 + rng() % 20);
        b.present[r] = r % 3 == 2 ? 0 : 1;
    }
    return b;
}

// Nonzero head and perturbed norms so every parameter influences the output.
DenoiserParams random_params(const DenoiserConfig& c, std::uint64_t seed) {
    DenoiserParams p = init_denoiser(c, seed, false);
    std::mt19937_64 rng(seed + 1);
    std::normal_distribution<float> normal(0.0f, 0.3f);
    for (std::size_t i = 0; i < p.names.size(); ++i) {
        const std::string& n = p.names[i];
        if (n.ends_with(".b") || n.ends_with(".bias") || n == "cond.null") {
            for (float& v : p.tensors[i].data) v = normal(rng);
        } else if (n.ends_with(".gain")) {
            for (float& v : p.tensors[i].data) v = 1.0f + normal(rng);
        }
    }
    return p;
}

TEST(Tensor, Basics) {
    Tensor t({2, 3});
    EXPECT_EQ(t.size(), 6u);
    EXPECT_EQ(t.rows(), 2u);
    EXPECT_EQ(t.cols(), 3u);
    t.fill(1.5f);
    EXPECT_TRUE(t.all_finite());
    t.data[4] = NAN;
    EXPECT_FALSE(t.all_finite());
}

TEST(Denoiser, LayoutAndShapes) {
    const DenoiserConfig c = small_config();
    const DenoiserParams p = init_denoiser(c, 1);
    EXPECT_EQ(p.names.size(), p.tensors.size());
    EXPECT_EQ(p.at("in.w").shape, (std::vector<std::size_t>{16, 6}));
    EXPECT_EQ(p.at("out.w").shape, (std::vector<std::size_t>{6, 16}));
    EXPECT_EQ(p.at("cond1.w").shape, (std::vector<std::size_t>{16, 5}));
    EXPECT_EQ(p.at("block1.fc2.w").shape, (std::vector<std::size_t>{16, 16}));
    EXPECT_THROW(p.index_of("nope"), ArgumentError);
    std::size_t count = 0;
    for (const auto& t : p.tensors) count += t.size();
    EXPECT_EQ(p.parameter_count(), count);
    EXPECT_THROW(init_denoiser(DenoiserConfig{6, 5, 16, 2, 7}, 1), ConfigError);
}

TEST(Denoiser, OutputLengthAndZeroHead) {
    const DenoiserConfig c = small_config();
    const DenoiserParams p = init_denoiser(c, 2);
    const std::vector<float> y(6, 0.3f), x(5, -0.2f);
    const auto out = denoiser_forward(p, y, 4, std::span<const float>(x));
    ASSERT_EQ(out.size(), 6u);
    for (float v : out) EXPECT_EQ(v, 0.0f);
}

TEST(Denoiser, PureAndBatchConsistent) {
    const DenoiserConfig c = small_config();
    const DenoiserParams p = random_params(c, 3);
    const DenoiserBatch b = random_batch(c, 5, 9);
    const auto a = denoiser_forward(p, b);
    EXPECT_EQ(a, denoiser_forward(p, b));
    for (std::size_t r = 0; r < b.size; ++r) {
        std::span<const float> y(b.y_t.data() + r * 6, 6);
        std::optional<std::span<const float>> x;
        if (b.present[r]) x = std::span<const float>(b.cond.data() + r * 5, 5);
        const auto single = denoiser_forward(p, y, static_cast<int>(b.t[r]), x);
        for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(single[i], a[r * 6 + i], 1e-5);
    }
}

TEST(Denoiser, ShapeMismatch) {
    const DenoiserConfig c = small_config();
    const DenoiserParams p = init_denoiser(c, 2);
    DenoiserBatch b = random_batch(c, 2, 1);
    b.y_t.pop_back();
    EXPECT_THROW(denoiser_forward(p, b), ArgumentError);
    const std::vector<float> y(5, 0.0f);
    EXPECT_THROW(denoiser_forward(p, y, 1, std::nullopt), ArgumentError);
}

TEST(Denoiser, MatchesDoubleReference) {
    const DenoiserConfig c = small_config();
    const DenoiserParams p = random_params(c, 4);
    const DenoiserBatch b = random_batch(c, 6, 2);
    const auto got = denoiser_forward(p, b);
    const auto ref = Reference(p).forward(b);
    ASSERT_EQ(got.size(), ref.size());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], ref[i], 1e-4 * (1 + std::abs(ref[i])));
}

// Every gradient entry against central differences of the double reference.
TEST(Gradients, EveryEntryMatchesFiniteDifferences) {
    const DenoiserConfig c = small_config();
    const DenoiserParams p = random_params(c, 5);
    const DenoiserBatch b = random_batch(c, 4, 3);
    std::mt19937_64 rng(8);
    std::normal_distribution<float> normal;
    std::vector<float> w(b.size * c.target_dim);
    for (float& v : w) v = normal(rng);

    DenoiserParams grads = p.zeros_like();
    DenoiserTape(p, b).backward(w, grads);

    Reference ref(p);
    auto objective = [&] {
        const auto out = ref.forward(b);
        double s = 0;
        for (std::size_t i = 0; i < out.size(); ++i) s += w[i] * out[i];
        return s;
    };
    const double h = 1e-6;
    std::size_t checked = 0;
    for (std::size_t ti = 0; ti < p.tensors.size(); ++ti) {
        auto& vals = ref.values()[ti];
        for (std::size_t k = 0; k < vals.size(); ++k) {
            const double keep = vals[k];
            vals[k] = keep + h;
            const double up = objective();
            vals[k] = keep - h;
            const double down = objective();
            vals[k] = keep;
            const double fd = (up - down) / (2 * h);
            const double an = grads.tensors[ti].data[k];
            const double abs_err = std::abs(an - fd);
            EXPECT_TRUE(abs_err <= 1e-4 || abs_err <= 1e-2 * std::abs(fd))
                << p.names[ti] << "[" << k << "] analytic " << an << " fd " << fd;
            ++checked;
        }
    }
    EXPECT_EQ(checked, p.parameter_count());
}

TEST(Gradients, RandomDirectionProbesFloat) {
    const DenoiserConfig c = small_config();
    const DenoiserParams p = random_params(c, 6);
    const DenoiserBatch b = random_batch(c, 4, 4);
    std::mt19937_64 rng(12);
    std::vector<float> w(b.size * c.target_dim);
    std::normal_distribution<float> normal;
    for (float& v : w) v = normal(rng);
    DenoiserParams grads = p.zeros_like();
    DenoiserTape(p, b).backward(w, grads);
    auto objective = [&](const DenoiserParams& q) {
        const auto out = denoiser_forward(q, b);
        double s = 0;
        for (std::size_t i = 0; i < out.size(); ++i) s += static_cast<double>(w[i]) * out[i];
        return s;
    };
    const float h = 1e-3f;
    for (int probe = 0; probe < 100; ++probe) {
        DenoiserParams up = p, down = p;
        double directional = 0.0;
        for (std::size_t ti = 0; ti < p.tensors.size(); ++ti) {
            for (std::size_t k = 0; k < p.tensors[ti].size(); ++k) {
                const float v = (rng() & 1) ? 1.0f : -1.0f;
                up.tensors[ti].data[k] += h * v;
                down.tensors[ti].data[k] -= h * v;
                directional += static_cast<double>(grads.tensors[ti].data[k]) * v;
            }
        }
        const double fd = (objective(up) - objective(down)) / (2.0 * h);
        const double err = std::abs(fd - directional);
        EXPECT_TRUE(err <= 1e-4 || err <= 1e-2 * std::abs(directional))
            << "probe " << probe << " fd " << fd << " analytic " << directional;
    }
}

TEST(Loss, PerfectPredictionGivesZero) {
    const DenoiserConfig c = small_config();
    const DenoiserParams p = init_denoiser(c, 7);  // zero head predicts 0
    TrainingBatch tb;
    tb.input = random_batch(c, 3, 5);
    tb.eps.assign(3 * 6, 0.0f);
    const LossAndGrads lg = loss_and_gradients(p, tb);
    EXPECT_EQ(lg.loss, 0.0);
    for (float g : lg.grads.at("out.w").data) EXPECT_EQ(g, 0.0f);
    for (float g : lg.grads.at("out.b").data) EXPECT_EQ(g, 0.0f);
}

TEST(Loss, NonNegativeAndMatchesDefinition) {
    const DenoiserConfig c = small_config();
    const DenoiserParams p = random_params(c, 8);
    std::mt19937_64 rng(1);
    std::normal_distribution<float> normal;
    for (int trial = 0; trial < 10; ++trial) {
        TrainingBatch tb;
        tb.input = random_batch(c, 4, static_cast<std::uint64_t>(trial));
        tb.eps.resize(4 * 6);
        for (float& v : tb.eps) v = normal(rng);
        const LossAndGrads lg = loss_and_gradients(p, tb);
        const auto out = denoiser_forward(p, tb.input);
        double expect = 0;
        for (std::size_t i = 0; i < out.size(); ++i) expect += std::pow(out[i] - tb.eps[i], 2);
        EXPECT_GE(lg.loss, 0.0);
        EXPECT_NEAR(lg.loss, expect / 4.0, 1e-5 * expect);
    }
}

TEST(Loss, Errors) {
    const DenoiserConfig c = small_config();
    DenoiserParams p = random_params(c, 9);
    TrainingBatch empty;
    empty.input.resize(0, c);
    EXPECT_THROW(loss_and_gradients(p, empty), ArgumentError);
    TrainingBatch tb;
    tb.input = random_batch(c, 2, 1);
    tb.eps.assign(12, 0.0f);
    p.at("out.b").data[0] = NAN;
    EXPECT_THROW(loss_and_gradients(p, tb), NumericError);
}

TEST(Adam, ZeroGradientLeavesParameters) {
    const DenoiserParams p0 = random_params(small_config(), 10);
    DenoiserParams p = p0;
    OptimizerState s = OptimizerState::for_params(p);
    adam_step(p, p.zeros_like(), s);
    EXPECT_EQ(p.tensors, p0.tensors);
    EXPECT_EQ(s.step, 1u);
}

TEST(Adam, FirstStepClosedForm) {
    const DenoiserParams p0 = random_params(small_config(), 11);
    DenoiserParams p = p0;
    OptimizerState s = OptimizerState::for_params(p);
    EXPECT_EQ(s.lr, 1e-4);
    EXPECT_EQ(s.beta1, 0.9);
    EXPECT_EQ(s.beta2, 0.999);
    EXPECT_EQ(s.eps, 1e-8);
    DenoiserParams g = p.zeros_like();
    for (auto& t : g.tensors) t.fill(1.0f);
    adam_step(p, g, s);
    // m_hat = v_hat = 1, so the step is lr / (1 + eps).
    const double expected = 1e-4 / (1.0 + 1e-8);
    for (std::size_t i = 0; i < p.tensors.size(); ++i) {
        for (std::size_t k = 0; k < p.tensors[i].size(); ++k) {
            const double change = static_cast<double>(p.tensors[i].data[k]) - p0.tensors[i].data[k];
            EXPECT_NEAR(change, -expected, 1e-7 * (1 + std::abs(p0.tensors[i].data[k])));
        }
    }
}

TEST(Ema, DecayLimits) {
    const DenoiserParams a = random_params(small_config(), 12);
    const DenoiserParams b = random_params(small_config(), 13);
    EmaState zero = EmaState::for_params(a, 0.0);
    ema_update(zero, b);
    EXPECT_EQ(zero.shadow.tensors, b.tensors);
    EmaState one = EmaState::for_params(a, 1.0);
    ema_update(one, b);
    EXPECT_EQ(one.shadow.tensors, a.tensors);
    EmaState half = EmaState::for_params(a, 0.5);
    ema_update(half, b);
    for (std::size_t i = 0; i < a.tensors.size(); ++i) {
        for (std::size_t k = 0; k < a.tensors[i].size(); ++k) {
            EXPECT_FLOAT_EQ(half.shadow.tensors[i].data[k],
                            0.5f * a.tensors[i].data[k] + 0.5f * b.tensors[i].data[k]);
        }
    }
    EXPECT_EQ(EmaState::for_params(a).decay, 0.999);
}

class CheckpointFiles : public ::testing::Test {
protected:
    void SetUp() override {
        ckpt.weights = random_params(small_config(), 14);
        ckpt.raw = random_params(small_config(), 15);
        ckpt.metadata = {{"note", "unit"}, {"epochs", 3}};
        path = dir.file("m.json");
        save_checkpoint(path, ckpt);
    }
    testing::TempDir dir;
    Checkpoint ckpt;
    std::string path;
};

TEST_F(CheckpointFiles, RoundTripExact) {
    const Checkpoint back = load_checkpoint(path);
    EXPECT_EQ(back.weights.tensors, ckpt.weights.tensors);
    EXPECT_EQ(back.weights.names, ckpt.weights.names);
    ASSERT_TRUE(back.raw.has_value());
    EXPECT_EQ(back.raw->tensors, ckpt.raw->tensors);
    EXPECT_EQ(back.metadata, ckpt.metadata);
    const DenoiserBatch b = random_batch(small_config(), 3, 1);
    EXPECT_EQ(denoiser_forward(back.weights, b), denoiser_forward(ckpt.weights, b));
}

TEST_F(CheckpointFiles, WithoutRaw) {
    ckpt.raw.reset();
    save_checkpoint(path, ckpt);
    EXPECT_FALSE(load_checkpoint(path).raw.has_value());
}

TEST_F(CheckpointFiles, CorruptBlob) {
    std::fstream f(checkpoint_blob_path(path), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(100);
    f.put('\x7f');
    f.close();
    EXPECT_THROW(load_checkpoint(path), FormatError);
}

TEST_F(CheckpointFiles, TruncatedBlob) {
    std::filesystem::resize_file(checkpoint_blob_path(path),
                                 std::filesystem::file_size(checkpoint_blob_path(path)) - 4);
    EXPECT_THROW(load_checkpoint(path), FormatError);
}

TEST_F(CheckpointFiles, ManifestShapeEdited) {
    nlohmann::json m;
    std::ifstream(path) >> m;
    m["tensors"][0]["shape"] = {5, 16};
    std::ofstream(path) << m.dump();
    EXPECT_THROW(load_checkpoint(path), FormatError);
}

TEST_F(CheckpointFiles, MissingFiles) {
    std::filesystem::remove(checkpoint_blob_path(path));
    EXPECT_THROW(load_checkpoint(path), FormatError);
    EXPECT_THROW(load_checkpoint(dir.file("absent.json")), FormatError);
}

TEST(TimeEmbedding, Values) {
    const auto e = time_embedding(3.0, 8);
    ASSERT_EQ(e.size(), 8u);
    EXPECT_FLOAT_EQ(e[0], static_cast<float>(std::sin(3.0)));
    EXPECT_FLOAT_EQ(e[4], static_cast<float>(std::cos(3.0)));
    EXPECT_FLOAT_EQ(e[1], static_cast<float>(std::sin(3.0 * std::pow(10000.0, -0.25))));
}

}  // namespace
}  // namespace risdiff
