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
#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "risdiff/channel.hpp"
#include "risdiff/dataset.hpp"
#include "risdiff/diffusion.hpp"
#include "risdiff/error.hpp"
#include "risdiff/solver.hpp"

namespace risdiff {
namespace {

// ---- schedule ----

TEST(Schedule, SingleStepExamples) {
    EXPECT_NEAR(linear_schedule(1, 0.02, 0.02).alpha_bar_at(1), 0.98, 1e-15);
    EXPECT_NEAR(linear_schedule(2, 0.1, 0.1).alpha_bar_at(2), 0.81, 1e-15);
    const auto s = linear_schedule(3, 0.1, 0.3);
    EXPECT_NEAR(s.beta_at(2), 0.2, 1e-15);
    EXPECT_NEAR(s.alpha_bar_at(3), 0.9 * 0.8 * 0.7, 1e-15);
    EXPECT_EQ(s.alpha_bar_at(0), 1.0);
}

TEST(Schedule, DefaultReachesNearTotalCorruption) {
    const auto s = default_schedule(20);
    EXPECT_LT(s.alpha_bar_at(20), 0.01);
    EXPECT_NEAR(s.beta_at(1), 0.005, 1e-12);
    // 0.02 * 1000 / 20 = 1 is clamped.
    EXPECT_NEAR(s.beta_at(20), 0.999, 1e-12);
    EXPECT_NEAR(default_schedule(1000).beta_at(1), 1e-4, 1e-18);
}

TEST(Schedule, Invariants) {
    for (int T : {1, 2, 5, 20, 50, 200, 1000}) {
        const auto s = default_schedule(T);
        ASSERT_EQ(s.T, T);
        EXPECT_LT(s.alpha_bar_at(1), 1.0);
        for (int t = 2; t <= T; ++t) {
            EXPECT_LT(s.alpha_bar_at(t), s.alpha_bar_at(t - 1));
            EXPECT_GE(s.beta_at(t), s.beta_at(t - 1));
            EXPECT_NEAR(s.alpha_at(t), 1.0 - s.beta_at(t), 1e-15);
        }
        for (int t = 1; t <= T; ++t) {
            EXPECT_GT(s.beta_at(t), 0.0);
            EXPECT_LT(s.beta_at(t), 1.0);
        }
    }
}

TEST(Schedule, Validation) {
    EXPECT_THROW(linear_schedule(0, 0.1, 0.2), ConfigError);
    EXPECT_THROW(linear_schedule(5, 0.0, 0.2), ConfigError);
    EXPECT_THROW(linear_schedule(5, 0.3, 0.2), ConfigError);
    EXPECT_THROW(linear_schedule(5, 0.1, 1.0), ConfigError);
    EXPECT_THROW(default_schedule(0), ConfigError);
}

// ---- forward process ----

TEST(Forward, ClosedFormExample) {
    const auto s = linear_schedule(1, 0.19, 0.19);
    const std::vector<double> y0{1.0, -1.0}, eps{0.5, 2.0};
    const auto y = forward_sample(y0, 1, eps, s);
    EXPECT_NEAR(y[0], 0.9 + std::sqrt(0.19) * 0.5, 1e-15);
    EXPECT_NEAR(y[1], -0.9 + std::sqrt(0.19) * 2.0, 1e-15);
    EXPECT_THROW(forward_sample(y0, 2, eps, s), ArgumentError);
}

TEST(Forward, MarkovChainMatchesClosedForm) {
    const auto s = default_schedule(20);
    const double y0 = 0.7;
    const std::size_t n = 100000;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    for (int t : {1, 6, 20}) {
        double sum = 0, sum2 = 0;
        for (std::size_t k = 0; k < n; ++k) {
            std::vector<double> y{y0};
            for (int i = 1; i <= t; ++i) {
                const double e = normal(rng);
                y = forward_step(y, i, std::span<const double>(&e, 1), s);
            }
            sum += y[0];
            sum2 += y[0] * y[0];
        }
        const double mean = sum / n;
        const double var = sum2 / n - mean * mean;
        const double var_ref = 1.0 - s.alpha_bar_at(t);
        EXPECT_LE(std::abs(mean - std::sqrt(s.alpha_bar_at(t)) * y0), 3.0 * std::sqrt(var_ref / n)) << t;
        EXPECT_LE(std::abs(var - var_ref), 3.0 * var_ref * std::sqrt(2.0 / n)) << t;
    }
}

// ---- reverse steps ----

TEST(Reverse, DdpmSingleStepAlgebra) {
    const auto s = linear_schedule(1, 0.19, 0.19);
    const std::vector<double> y{0.3, -1.2}, eps{0.5, -0.25}, z{9.0, 9.0};
    const auto out = ddpm_step(y, eps, 1, s, z);
    EXPECT_NEAR(out[0], (0.3 - std::sqrt(0.19) * 0.5) / 0.9, 1e-14);
    EXPECT_NEAR(out[1], (-1.2 + std::sqrt(0.19) * 0.25) / 0.9, 1e-14);
}

TEST(Reverse, DdpmPosteriorVarianceTerm) {
    const auto s = default_schedule(20);
    const std::vector<double> y{0.1}, eps{0.4}, zero{0.0}, one{1.0};
    const double spread = ddpm_step(y, eps, 7, s, one)[0] - ddpm_step(y, eps, 7, s, zero)[0];
    const double expected = std::sqrt(s.beta_at(7) * (1 - s.alpha_bar_at(6)) / (1 - s.alpha_bar_at(7)));
    EXPECT_NEAR(spread, expected, 1e-14);
}

TEST(Reverse, DdimWithFullNoiseEqualsDdpm) {
    const auto s = default_schedule(20);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> normal;
    for (int t = 2; t <= 20; ++t) {
        std::vector<double> y(5), eps(5), z(5);
        for (std::size_t i = 0; i < 5; ++i) {
            y[i] = normal(rng);
            eps[i] = normal(rng);
            z[i] = normal(rng);
        }
        const auto a = ddim_step(y, eps, t, t - 1, s, 1.0, z);
        const auto b = ddpm_step(y, eps, t, s, z);
        for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(a[i], b[i], 1e-9 * (1 + std::abs(b[i]))) << t;
    }
}

TEST(Reverse, DdimSingleJumpToZeroMatchesDdpmAtT1) {
    const auto s = linear_schedule(1, 0.05, 0.05);
    const std::vector<double> y{0.8, -0.4}, eps{-0.3, 0.2}, z{1.0, 1.0};
    const auto a = ddim_step(y, eps, 1, 0, s, 0.0, z);
    const auto b = ddpm_step(y, eps, 1, s, z);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
}

// With the exact noise of a point mass at c, every chain lands on c.
TEST(Reverse, PointMassIsRecoveredByExactNoise) {
    const auto s = default_schedule(20);
    const std::vector<double> c{0.6, -0.9, 0.1};
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    auto oracle = [&](const std::vector<double>& y, int t) {
        std::vector<double> e(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) {
            e[i] = (y[i] - std::sqrt(s.alpha_bar_at(t)) * c[i]) / std::sqrt(1 - s.alpha_bar_at(t));
        }
        return e;
    };
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> start(3);
        for (double& v : start) v = normal(rng);
        std::vector<double> ddpm = start, ddim = start, skip = start;
        for (int t = 20; t >= 1; --t) {
            std::vector<double> z(3);
            for (double& v : z) v = normal(rng);
            ddpm = ddpm_step(ddpm, oracle(ddpm, t), t, s, z);
            ddim = ddim_step(ddim, oracle(ddim, t), t, t - 1, s, 0.0, z);
        }
        const std::vector<int> tau{20, 14, 8, 3, 1};
        for (std::size_t k = 0; k < tau.size(); ++k) {
            const int prev = k + 1 < tau.size() ? tau[k + 1] : 0;
            skip = ddim_step(skip, oracle(skip, tau[k]), tau[k], prev, s, 0.0, {});
        }
        for (std::size_t i = 0; i < 3; ++i) {
            EXPECT_NEAR(ddpm[i], c[i], 1e-6);
            EXPECT_NEAR(ddim[i], c[i], 1e-6);
            EXPECT_NEAR(skip[i], c[i], 1e-6);
        }
    }
}

TEST(Reverse, ClippingBoundsTheEstimate) {
    const auto s = default_schedule(20);
    const std::vector<double> y{30.0}, eps{0.0}, z{0.0};
    const double bar_prev = s.alpha_bar_at(19);
    const auto out = ddim_step(y, eps, 20, 19, s, 0.0, z, true);
    // y0_hat clamps to 1 and the direction term is recomputed from it.
    const double e = (30.0 - std::sqrt(s.alpha_bar_at(20))) / std::sqrt(1 - s.alpha_bar_at(20));
    EXPECT_NEAR(out[0], std::sqrt(bar_prev) + std::sqrt(1 - bar_prev) * e, 1e-9);
    // The last update is left alone.
    const auto last = ddim_step(std::vector<double>{3.0}, eps, 1, 0, s, 0.0, z, true);
    EXPECT_GT(last[0], 1.0);
}

// ---- guidance ----

DenoiserConfig tiny_net() { return {4, 3, 16, 2, 8}; }

DenoiserParams random_params(const DenoiserConfig& c, std::uint64_t seed) {
    DenoiserParams p = init_denoiser(c, seed, false);
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> normal(0.0f, 0.5f);
    for (float& v : p.at("cond.null").data) v = normal(rng);
    for (float& v : p.at("out.b").data) v = normal(rng);
    return p;
}

TEST(Guidance, ZeroOmegaIsBitwiseConditional) {
    const DenoiserConfig c = tiny_net();
    const DenoiserParams p = random_params(c, 1);
    const auto s = default_schedule(20);
    std::mt19937_64 rng(4);
    std::normal_distribution<float> normal;
    for (OutputHead head : {OutputHead::epsilon, OutputHead::velocity}) {
        const NoisePredictor net{&p, &s, head};
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<float> y(4), x(3);
            for (float& v : y) v = normal(rng);
            for (float& v : x) v = normal(rng);
            const int t = 1 + trial % 20;
            DenoiserBatch b;
            b.resize(1, c);
            b.y_t = y;
            b.cond = x;
            b.t[0] = static_cast<float>(t);
            b.present[0] = 1;
            const auto cond = net(b);
            const auto guided = guided_epsilon(net, y, t, x, 0.0);
            ASSERT_EQ(guided.size(), cond.size());
            for (std::size_t i = 0; i < cond.size(); ++i) {
                EXPECT_EQ(std::bit_cast<std::uint32_t>(guided[i]), std::bit_cast<std::uint32_t>(cond[i]));
            }
        }
    }
}

TEST(Guidance, MixesConditionalAndUnconditional) {
    const DenoiserConfig c = tiny_net();
    const DenoiserParams p = random_params(c, 2);
    const auto s = default_schedule(20);
    const NoisePredictor net{&p, &s, OutputHead::epsilon};
    const std::vector<float> y{0.1f, -0.5f, 0.9f, 0.0f}, x{1.0f, 0.2f, -0.3f};
    DenoiserBatch b;
    b.resize(2, c);
    for (std::size_t r = 0; r < 2; ++r) {
        std::copy(y.begin(), y.end(), b.y_t.begin() + static_cast<long>(r * 4));
        std::copy(x.begin(), x.end(), b.cond.begin() + static_cast<long>(r * 3));
        b.t[r] = 5;
    }
    b.present = {1, 0};
    const auto both = net(b);
    const auto guided = guided_epsilon(net, y, 5, x, 2.0);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(guided[i], 3.0f * both[i] - 2.0f * both[4 + i], 1e-5);
        EXPECT_NE(both[i], both[4 + i]);
    }
}

TEST(Guidance, VelocityHeadConversion) {
    const DenoiserConfig c = tiny_net();
    const DenoiserParams p = random_params(c, 3);
    const auto s = default_schedule(20);
    DenoiserBatch b;
    b.resize(1, c);
    b.y_t = {0.5f, -0.5f, 1.0f, 2.0f};
    b.cond = {0.0f, 0.0f, 0.0f};
    b.t[0] = 9;
    b.present[0] = 1;
    const auto raw = NoisePredictor{&p, &s, OutputHead::epsilon}(b);
    const auto eps = NoisePredictor{&p, &s, OutputHead::velocity}(b);
    const double a = std::sqrt(s.alpha_bar_at(9)), q = std::sqrt(1 - s.alpha_bar_at(9));
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(eps[i], a * raw[i] + q * b.y_t[i], 1e-5);
}

// ---- training ----

TrainingSet synthetic_set(std::size_t n, std::uint64_t seed) {
    TrainingSet set;
    set.n = n;
    set.cond_dim = 3;
    set.target_dim = 4;
    set.l_count = 2;
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> normal;
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < 3; ++k) set.cond.push_back(normal(rng));
        for (int k = 0; k < 4; ++k) set.y0.push_back((rng() & 1) ? 1.0f : -1.0f);
    }
    return set;
}

TrainConfig tiny_train() {
    TrainConfig tc;
    tc.hidden = 16;
    tc.n_blocks = 2;
    tc.time_dim = 8;
    tc.augment = false;
    tc.batch_size = 32;
    tc.lambda_card = 0.0;
    return tc;
}

TEST(Training, ConditionDropoutFraction) {
    const TrainingSet set = synthetic_set(10000, 1);
    for (double p : {0.0, 1.0, 0.1}) {
        TrainConfig tc = tiny_train();
        tc.p_uncond = p;
        tc.batch_size = 500;
        Trainer trainer(tc, tiny_net());
        trainer.train_epoch(set);
        ASSERT_EQ(trainer.items_seen(), 10000u);
        const double frac = static_cast<double>(trainer.items_unconditional()) / 10000.0;
        if (p == 0.1) {
            EXPECT_NEAR(frac, 0.1, 0.01);
        } else {
            EXPECT_EQ(frac, p);
        }
    }
}

TEST(Training, LossHalvesOnTinySet) {
    const TrainingSet set = synthetic_set(8, 2);
    for (OutputHead head : {OutputHead::epsilon, OutputHead::velocity}) {
        TrainConfig tc = tiny_train();
        tc.head = head;
        tc.hidden = 64;
        tc.lr = 1e-3;
        tc.batch_size = 8;
        tc.seed = 5;
        Trainer trainer(tc, DenoiserConfig{4, 3, 64, 2, 8});
        std::vector<double> losses;
        for (int e = 0; e < 200; ++e) losses.push_back(trainer.train_epoch(set));
        double first = 0, last = 0;
        for (int e = 0; e < 10; ++e) {
            first += losses[e];
            last += losses[190 + e];
        }
        EXPECT_LE(last, 0.5 * first) << to_string(head);
    }
}

TEST(Training, Deterministic) {
    const TrainingSet set = synthetic_set(50, 3);
    TrainConfig tc = tiny_train();
    tc.lambda_card = 1e-3;
    Trainer a(tc, tiny_net()), b(tc, tiny_net());
    for (int e = 0; e < 3; ++e) EXPECT_EQ(a.train_epoch(set), b.train_epoch(set));
    EXPECT_EQ(a.params().tensors, b.params().tensors);
    EXPECT_EQ(a.ema_params().tensors, b.ema_params().tensors);
    tc.seed = 1;
    Trainer c(tc, tiny_net());
    c.train_epoch(set);
    EXPECT_NE(c.params().tensors, a.params().tensors);
}

TEST(Training, ShapeAndConfigErrors) {
    TrainConfig tc = tiny_train();
    Trainer trainer(tc, tiny_net());
    EXPECT_THROW(trainer.train_epoch(TrainingSet{}), ArgumentError);
    TrainingSet wrong = synthetic_set(4, 1);
    wrong.target_dim = 5;
    EXPECT_THROW(trainer.train_epoch(wrong), ArgumentError);
    tc.p_uncond = 1.5;
    EXPECT_THROW(Trainer(tc, tiny_net()), ConfigError);
    tc = tiny_train();
    tc.lr = 0.0;
    EXPECT_THROW(Trainer(tc, tiny_net()), ConfigError);
}

TEST(Training, ConfigJsonRoundTrip) {
    TrainConfig tc;
    tc.omega = 3.5;
    tc.epochs = 17;
    tc.head = OutputHead::epsilon;
    tc.augment = false;
    const TrainConfig back = train_config_from_json(to_json(tc));
    EXPECT_EQ(to_json(back), to_json(tc));
    EXPECT_EQ(output_head_from_string("velocity"), OutputHead::velocity);
    EXPECT_THROW(output_head_from_string("x0"), ConfigError);
}

// ---- plane symmetries ----

TEST(Symmetry, SiteMapsAreBijectionsAndPreserveGeometry) {
    ScenarioConfig sc;
    const Scenario base = generate_scenario(sc, 4);
    ASSERT_EQ(plane_symmetry_count(base), 8u);
    const Grid g0 = base.grid();
    for (std::size_t tr = 0; tr < 8; ++tr) {
        const Scenario s = apply_plane_symmetry(base, tr);
        const Grid g1 = s.grid();
        std::set<std::size_t> image;
        for (std::size_t i = 0; i < g0.size(); ++i) {
            const std::size_t j = map_site(base.grid_spec, i, tr);
            image.insert(j);
            EXPECT_NEAR(distance(s.bs, g1.points[j]), distance(base.bs, g0.points[i]), 1e-9);
            for (std::size_t k = 0; k < base.users.size(); ++k) {
                EXPECT_EQ(los_indicator(g1.points[j], s.users[k], s.obstacles), los_indicator(g0.points[i], base.users[k], base.obstacles));
            }
            if (tr == 0) {
                EXPECT_EQ(j, i);
            }
        }
        EXPECT_EQ(image.size(), g0.size());
    }
    sc.grid_spec = {4, 2, 3};
    EXPECT_EQ(plane_symmetry_count(generate_scenario(sc, 0)), 4u);
}

// ---- plan generation ----

class TinyModel : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        data_config = new DatasetConfig();
        data_config->scenario.grid_spec = {2, 2, 2};
        data_config->layout = {3, 3};
        data_config->n_mc = 16;
        const auto samples = generate_dataset(*data_config, 24);
        TrainConfig tc = tiny_train();
        tc.T = 10;
        tc.lr = 1e-3;
        tc.augment = true;
        tc.lambda_card = 1e-3;
        const TrainingSet set = make_training_set(samples, *data_config);
        Trainer trainer(tc, DenoiserConfig{set.target_dim, set.cond_dim, 16, 2, 8});
        for (int e = 0; e < 5; ++e) trainer.train_epoch(set);
        checkpoint = new Checkpoint(trainer.checkpoint(*data_config));
        model = new DiffusionModel(DiffusionModel::from_checkpoint(*checkpoint));
    }
    static void TearDownTestSuite() {
        delete model;
        delete checkpoint;
        delete data_config;
    }
    static ConstraintSet constraints(const Scenario& s) { return data_config->constraints(s.grid()); }

    static DatasetConfig* data_config;
    static Checkpoint* checkpoint;
    static DiffusionModel* model;
};
DatasetConfig* TinyModel::data_config = nullptr;
Checkpoint* TinyModel::checkpoint = nullptr;
DiffusionModel* TinyModel::model = nullptr;

TEST_F(TinyModel, PlansAreFeasible) {
    SampleConfig sc;
    sc.omega = 3.0;
    for (std::uint64_t i = 100; i < 120; ++i) {
        const Scenario s = generate_scenario(data_config->scenario, i);
        for (SamplerKind kind : {SamplerKind::ddim, SamplerKind::ddpm}) {
            sc.sampler = kind;
            sc.eta = kind == SamplerKind::ddpm ? 1.0 : 0.0;
            const DeploymentPlan plan = generate_plan(*model, s, constraints(s), sc, i);
            EXPECT_TRUE(feasible(plan, constraints(s), s.grid()));
            EXPECT_EQ(plan.size(), 2u);
        }
    }
}

TEST_F(TinyModel, BestOfOneEqualsFirst) {
    SampleConfig first, best;
    best.selection = SelectionRule::best_of_n;
    auto scorer = [](const DeploymentPlan& p) { return static_cast<double>(p.indices[0]); };
    for (std::uint64_t i = 0; i < 10; ++i) {
        const Scenario s = generate_scenario(data_config->scenario, 200 + i);
        EXPECT_EQ(generate_plan(*model, s, constraints(s), first, i),
                  generate_plan(*model, s, constraints(s), best, i, scorer));
    }
}

TEST_F(TinyModel, BestOfNMaximizesScore) {
    SampleConfig first, best;
    first.n_samples = best.n_samples = 6;
    first.eta = best.eta = 1.0;
    best.selection = SelectionRule::best_of_n;
    const Scenario s = generate_scenario(data_config->scenario, 300);
    const ProblemInstance inst = make_instance(s, *data_config, 1);
    const AmplitudeTable table = inst.amplitude_table();
    auto scorer = [&](const DeploymentPlan& p) { return objective_value(table, Objective::sum_snr, p.indices); };
    double best_score = scorer(generate_plan(*model, s, inst.constraints, best, 0, scorer));
    EXPECT_GE(best_score, scorer(generate_plan(*model, s, inst.constraints, first, 0)));
    EXPECT_THROW(generate_plan(*model, s, inst.constraints, best, 0), ArgumentError);
}

TEST_F(TinyModel, DeterministicAndWorkerInvariant) {
    std::vector<Scenario> scenarios;
    for (std::uint64_t i = 0; i < 12; ++i) scenarios.push_back(generate_scenario(data_config->scenario, 400 + i));
    std::vector<PlanRequest> requests;
    for (std::size_t i = 0; i < scenarios.size(); ++i) requests.push_back({&scenarios[i], i, {}});
    SampleConfig sc;
    sc.eta = 0.5;
    const ConstraintSet cs = constraints(scenarios[0]);
    const auto one = generate_plans(*model, requests, cs, sc, 1);
    EXPECT_EQ(one, generate_plans(*model, requests, cs, sc, 1));
    EXPECT_EQ(one, generate_plans(*model, requests, cs, sc, 3));
    std::vector<PlanRequest> reversed(requests.rbegin(), requests.rend());
    auto rev = generate_plans(*model, reversed, cs, sc, 2);
    std::reverse(rev.begin(), rev.end());
    EXPECT_EQ(one, rev);
}

TEST_F(TinyModel, CheckpointMetadataErrors) {
    Checkpoint bad = *checkpoint;
    bad.metadata.erase("schedule");
    EXPECT_THROW(DiffusionModel::from_checkpoint(bad), FormatError);
    bad = *checkpoint;
    bad.metadata["schedule"]["T"] = 11;
    EXPECT_THROW(DiffusionModel::from_checkpoint(bad), FormatError);
    bad = *checkpoint;
    bad.metadata["layout"]["max_users"] = 4;
    EXPECT_THROW(DiffusionModel::from_checkpoint(bad), FormatError);
    EXPECT_EQ(model->schedule.T, 10);
    EXPECT_EQ(model->mode, TargetMode::multihot);
}

TEST(SampleConfigCheck, Validation) {
    SampleConfig sc;
    EXPECT_NO_THROW(sc.validate(20));
    sc.tau = {20, 10, 10};
    EXPECT_THROW(sc.validate(20), ConfigError);
    sc.tau = {21, 1};
    EXPECT_THROW(sc.validate(20), ConfigError);
    sc = SampleConfig{};
    sc.n_samples = 0;
    EXPECT_THROW(sc.validate(20), ConfigError);
    sc = SampleConfig{};
    sc.eta = 1.5;
    EXPECT_THROW(sc.validate(20), ConfigError);
    EXPECT_THROW(sampler_from_string("euler"), ConfigError);
    EXPECT_THROW(selection_from_string("worst"), ConfigError);
}

}  // namespace
}  // namespace risdiff
