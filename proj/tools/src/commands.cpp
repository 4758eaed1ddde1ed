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

#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "risdiff/dataset.hpp"
#include "risdiff/diffusion.hpp"
#include "risdiff/error.hpp"
#include "risdiff/eval.hpp"
#include "run_config.hpp"

namespace risdiff::cli {

namespace {

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    int workers = 0;  // 0: keep the config value

    void attach(CLI::App* app) {
        app->add_option("-c,--config", config_path, "TOML-style run configuration")
            ->check(CLI::ExistingFile);
        app->add_option("--set", overrides, "Override one key, e.g. train.epochs=50")
            ->take_all();
        app->add_option("-j,--workers", workers, "Worker threads (results do not depend on it)")
            ->check(CLI::PositiveNumber);
    }

    RunConfig load() const {
        RunConfig c = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        for (const auto& o : overrides) {
            apply_override(c, o);
        }
        if (workers > 0) {
            c.workers = workers;
        }
        c.validate();
        return c;
    }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw ResourceError("cannot write '" + path + "'");
    }
}

EvalOptions eval_options(const RunConfig& c) {
    EvalOptions o;
    o.sample = c.sample;
    o.random_seed = c.random_seed;
    o.workers = c.workers;
    return o;
}

TrainConfig train_config(const RunConfig& c) {
    TrainConfig t = c.train;
    t.omega = c.sample.omega;
    return t;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string part; std::getline(ss, part, ',');) {
        if (!part.empty()) {
            out.push_back(part);
        }
    }
    return out;
}

int command_gen(const RunConfig& c, std::size_t count, std::uint64_t first, const std::string& out_path,
                std::string name, std::ostream& out) {
    if (name.empty()) {
        name = dataset_name(c.data.scenario.n_obstacles, c.data.scenario.n_users);
    }
    const auto samples = generate_dataset(c.data, count, first, c.workers);
    const auto manifest = save_dataset(out_path, name, c.data, samples);
    out << "wrote " << manifest.sample_count << " samples to " << out_path << " (" << manifest.digest
        << ")\n";
    return 0;
}

int command_train(const RunConfig& c, const std::string& data_path, const std::string& out_path,
                  std::string log_path, const std::string& val_path, std::ostream& out,
                  std::ostream& err) {
    const Dataset data = load_dataset(data_path);
    std::optional<Dataset> val;
    if (!val_path.empty()) {
        val = load_dataset(val_path);
    }
    if (log_path.empty()) {
        log_path = out_path + ".log.csv";
    }
    DatasetConfig data_config = data.manifest.config;
    data_config.target_mode = c.data.target_mode;
    const TrainingSet set = make_training_set(data.samples, data_config);
    const TrainConfig tc = train_config(c);
    DenoiserConfig net;
    net.target_dim = set.target_dim;
    net.cond_dim = set.cond_dim;
    net.hidden = tc.hidden;
    net.n_blocks = tc.n_blocks;
    net.time_dim = tc.time_dim;
    Trainer trainer(tc, net);

    std::ostringstream log;
    log << "epoch,loss,exceed_ratio\n";
    auto save = [&] {
        Checkpoint ckpt = trainer.checkpoint(data_config);
        ckpt.metadata["dataset_name"] = data.manifest.name;
        ckpt.metadata["dataset_digest"] = data.manifest.digest;
        ckpt.metadata["sample"] = {{"omega", c.sample.omega}};
        save_checkpoint(out_path, ckpt);
        write_text(log_path, log.str());
    };
    try {
        for (std::size_t e = 1; e <= tc.epochs; ++e) {
            const double loss = trainer.train_epoch(set);
            log << e << ',' << format_number(loss) << ',';
            const bool due = c.eval_every > 0 && (e % c.eval_every == 0 || e == tc.epochs);
            if (val && due) {
                Checkpoint ckpt = trainer.checkpoint(data_config);
                const auto model = DiffusionModel::from_checkpoint(ckpt);
                const auto report = evaluate_method(Method::diffusion, *val, &model, eval_options(c));
                log << format_number(report.median);
            }
            log << '\n';
        }
    } catch (const NumericError& e) {
        save();
        err << "error: " << e.what() << "; saved the last good state to " << out_path << '\n';
        return 1;
    }
    save();
    out << "trained " << tc.epochs << " epochs; checkpoint " << out_path << ", log " << log_path << '\n';
    return 0;
}

int command_eval(const RunConfig& c, const std::string& data_path, const std::string& method_name,
                 const std::string& ckpt_path, const std::string& prefix, std::ostream& out) {
    const Method method = method_from_string(method_name);
    if (method == Method::diffusion && ckpt_path.empty()) {
        throw ConfigError("method diffusion needs --checkpoint");
    }
    const Dataset data = load_dataset(data_path);
    std::optional<DiffusionModel> model;
    if (method == Method::diffusion) {
        model = DiffusionModel::from_checkpoint(load_checkpoint(ckpt_path));
    }
    const auto report = evaluate_method(method, data, model ? &*model : nullptr, eval_options(c));
    write_report(prefix, report);
    out << report.method << " on " << report.dataset << ": median " << format_number(report.median)
        << ", mean " << format_number(report.mean) << ", evaluated " << report.evaluated
        << ", undefined " << report.undefined << ", failures " << report.failures << '\n';
    return 0;
}

int command_sweep(const RunConfig& c, const std::string& param, const std::string& values_text,
                  const std::string& train_path, const std::string& test_path,
                  const std::string& ckpt_path, const std::string& prefix, std::ostream& out) {
    const SweepParameter parameter = sweep_parameter_from_string(param);
    std::vector<double> values;
    for (const auto& v : split_list(values_text)) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(v, &used));
            if (used != v.size()) {
                throw std::invalid_argument(v);
            }
        } catch (const std::logic_error&) {
            throw ConfigError("sweep value '" + v + "' is not a number");
        }
    }
    values = validate_sweep_values(parameter, values);
    const Dataset test = load_dataset(test_path);
    std::optional<Dataset> train;
    std::optional<DiffusionModel> model;
    if (parameter == SweepParameter::omega) {
        if (ckpt_path.empty()) {
            throw ConfigError("an omega sweep needs --checkpoint");
        }
        model = DiffusionModel::from_checkpoint(load_checkpoint(ckpt_path));
    } else {
        if (train_path.empty()) {
            throw ConfigError("a " + param + " sweep needs --train-data");
        }
        train = load_dataset(train_path);
    }
    SweepSetup setup;
    setup.train = train ? &*train : nullptr;
    setup.test = &test;
    setup.train_config = train_config(c);
    setup.target_mode = c.data.target_mode;
    setup.eval = eval_options(c);
    setup.model = model ? &*model : nullptr;
    const auto result = sweep(parameter, values, setup);
    write_text(prefix + ".csv", sweep_csv(result));
    nlohmann::json j = {{"parameter", std::string(to_string(parameter))},
                        {"values", result.values},
                        {"reports", nlohmann::json::array()}};
    for (const auto& r : result.reports) {
        j["reports"].push_back(summary_json(r));
    }
    write_text(prefix + ".json", j.dump(2) + "\n");
    out << sweep_csv(result);
    return 0;
}

int command_matrix(const RunConfig& c, const std::string& train_list, const std::string& test_list,
                   const std::string& ckpt_list, const std::string& prefix, std::ostream& out) {
    std::vector<Dataset> tests;
    for (const auto& p : split_list(test_list)) {
        tests.push_back(load_dataset(p));
    }
    std::vector<const Dataset*> test_ptrs;
    for (const auto& d : tests) {
        test_ptrs.push_back(&d);
    }
    GeneralizationMatrix m;
    if (!ckpt_list.empty()) {
        std::vector<std::string> names;
        std::vector<DiffusionModel> models;
        for (const auto& p : split_list(ckpt_list)) {
            const Checkpoint ckpt = load_checkpoint(p);
            names.push_back(ckpt.metadata.value("dataset_name", p));
            models.push_back(DiffusionModel::from_checkpoint(ckpt));
        }
        std::vector<const DiffusionModel*> ptrs;
        for (const auto& model : models) {
            ptrs.push_back(&model);
        }
        m = generalization_matrix(names, ptrs, test_ptrs, eval_options(c));
    } else {
        std::vector<Dataset> trains;
        for (const auto& p : split_list(train_list)) {
            trains.push_back(load_dataset(p));
        }
        std::vector<const Dataset*> train_ptrs;
        for (const auto& d : trains) {
            train_ptrs.push_back(&d);
        }
        m = generalization_matrix(train_ptrs, test_ptrs, train_config(c), c.data.target_mode,
                                  eval_options(c));
    }
    write_text(prefix + ".csv", matrix_csv(m));
    out << matrix_csv(m);
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"risdiff: diffusion-based placement of reconfigurable intelligent surfaces",
                 "risdiff"};
    app.require_subcommand(1);

    Common gen_c, train_c, eval_c, sweep_c, matrix_c, show_c;
    std::size_t count = 0;
    std::uint64_t first = 0;
    std::string gen_out, gen_name;
    auto* gen = app.add_subcommand("gen", "Generate and label scenarios");
    gen_c.attach(gen);
    gen->add_option("-n,--count", count, "Number of scenarios")->required();
    gen->add_option("--first-index", first, "Index of the first scenario");
    gen->add_option("-o,--out", gen_out, "Output JSONL path")->required();
    gen->add_option("--name", gen_name, "Dataset name (default from the scenario counts)");

    std::string train_data, train_out, train_log, train_val;
    auto* train = app.add_subcommand("train", "Train a denoiser on a dataset");
    train_c.attach(train);
    train->add_option("-d,--data", train_data, "Training dataset")->required()->check(CLI::ExistingFile);
    train->add_option("-o,--out", train_out, "Checkpoint manifest path")->required();
    train->add_option("--log", train_log, "Training log CSV (default <out>.log.csv)");
    train->add_option("--val", train_val, "Dataset scored every train.eval_every epochs")
        ->check(CLI::ExistingFile);

    std::string eval_data, eval_method = "diffusion", eval_ckpt, eval_out;
    auto* eval = app.add_subcommand("eval", "Score a method by exceed ratio");
    eval_c.attach(eval);
    eval->add_option("-d,--data", eval_data, "Labeled dataset")->required()->check(CLI::ExistingFile);
    eval->add_option("-m,--method", eval_method, "diffusion, greedy, random or oracle");
    eval->add_option("--checkpoint", eval_ckpt, "Checkpoint for the diffusion method");
    eval->add_option("-o,--out", eval_out, "Report prefix (<out>.csv, <out>.json)")->required();

    std::string sw_param, sw_values, sw_train, sw_test, sw_ckpt, sw_out;
    auto* sw = app.add_subcommand("sweep", "Sensitivity sweep over omega, p_uncond or T");
    sweep_c.attach(sw);
    sw->add_option("-p,--param", sw_param, "omega, p_uncond or T")->required();
    sw->add_option("-v,--values", sw_values, "Comma-separated values (at least three)")->required();
    sw->add_option("--train-data", sw_train, "Training dataset (p_uncond, T)");
    sw->add_option("--test-data", sw_test, "Evaluation dataset")->required();
    sw->add_option("--checkpoint", sw_ckpt, "Trained checkpoint (omega)");
    sw->add_option("-o,--out", sw_out, "Output prefix")->required();

    std::string mx_train, mx_test, mx_ckpt, mx_out;
    auto* mx = app.add_subcommand("matrix", "Cross-dataset generalization matrix");
    matrix_c.attach(mx);
    mx->add_option("--train", mx_train, "Comma-separated training datasets");
    mx->add_option("--checkpoints", mx_ckpt, "Comma-separated trained checkpoints instead of --train");
    mx->add_option("--test", mx_test, "Comma-separated test datasets")->required();
    mx->add_option("-o,--out", mx_out, "Output prefix")->required();

    auto* show = app.add_subcommand("show-config", "Print the effective configuration");
    show_c.attach(show);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            out << app.help(e.get_name() == "CallForAllHelp" ? "" : "", CLI::AppFormatMode::All);
            return 0;
        }
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (gen->parsed()) {
            return command_gen(gen_c.load(), count, first, gen_out, gen_name, out);
        }
        if (train->parsed()) {
            return command_train(train_c.load(), train_data, train_out, train_log, train_val, out, err);
        }
        if (eval->parsed()) {
            return command_eval(eval_c.load(), eval_data, eval_method, eval_ckpt, eval_out, out);
        }
        if (sw->parsed()) {
            return command_sweep(sweep_c.load(), sw_param, sw_values, sw_train, sw_test, sw_ckpt,
                                 sw_out, out);
        }
        if (mx->parsed()) {
            if (mx_train.empty() == mx_ckpt.empty()) {
                throw ConfigError("matrix needs exactly one of --train or --checkpoints");
            }
            return command_matrix(matrix_c.load(), mx_train, mx_test, mx_ckpt, mx_out, out);
        }
        if (show->parsed()) {
            out << to_toml(show_c.load());
            return 0;
        }
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace risdiff::cli
