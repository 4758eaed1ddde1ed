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

#include "run_config.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "risdiff/error.hpp"
#include "risdiff/eval.hpp"

namespace risdiff::cli {

namespace {

using Values = std::vector<std::string>;

std::string single(const std::string& key, const Values& v) {
    if (v.size() != 1) {
        throw ConfigError("key '" + key + "' expects a single value");
    }
    return v.front();
}

double to_double(const std::string& key, const Values& v) {
    const std::string s = single(key, v);
    double out = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(out)) {
        throw ConfigError("key '" + key + "': '" + s + "' is not a finite number");
    }
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& s) {
    std::uint64_t out = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError("key '" + key + "': '" + s + "' is not a non-negative integer");
    }
    return out;
}

std::uint64_t to_u64(const std::string& key, const Values& v) { return to_u64(key, single(key, v)); }

bool to_bool(const std::string& key, const Values& v) {
    const std::string s = single(key, v);
    if (s == "true") return true;
    if (s == "false") return false;
    throw ConfigError("key '" + key + "': expected true or false, got '" + s + "'");
}

std::string quoted(std::string_view s) { return "\"" + std::string(s) + "\""; }

struct Field {
    std::string section;
    std::string name;
    std::function<void(RunConfig&, const std::string& key, const Values&)> set;
    std::function<std::string(const RunConfig&)> get;
    std::string comment;
};

#define RISDIFF_DOUBLE(sec, key, member, note)                                                \
    Field {                                                                                   \
        sec, key, [](RunConfig& c, const std::string& k, const Values& v) { c.member = to_double(k, v); }, \
            [](const RunConfig& c) { return format_number(c.member); }, note                  \
    }
#define RISDIFF_SIZE(sec, key, member, note)                                                  \
    Field {                                                                                   \
        sec, key,                                                                             \
            [](RunConfig& c, const std::string& k, const Values& v) {                         \
                c.member = static_cast<decltype(c.member)>(to_u64(k, v));                     \
            },                                                                                \
            [](const RunConfig& c) { return std::to_string(c.member); }, note                 \
    }
#define RISDIFF_BOOL(sec, key, member, note)                                                  \
    Field {                                                                                   \
        sec, key, [](RunConfig& c, const std::string& k, const Values& v) { c.member = to_bool(k, v); }, \
            [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }, note \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        RISDIFF_SIZE("scenario", "n_obstacles", data.scenario.n_obstacles, ""),
        RISDIFF_SIZE("scenario", "n_users", data.scenario.n_users, ""),
        RISDIFF_DOUBLE("scenario", "x_min", data.scenario.region.x_min, "RIS region [m]"),
        RISDIFF_DOUBLE("scenario", "x_max", data.scenario.region.x_max, ""),
        RISDIFF_DOUBLE("scenario", "y_min", data.scenario.region.y_min, ""),
        RISDIFF_DOUBLE("scenario", "y_max", data.scenario.region.y_max, ""),
        RISDIFF_DOUBLE("scenario", "z_min", data.scenario.region.z_min, ""),
        RISDIFF_DOUBLE("scenario", "z_max", data.scenario.region.z_max, ""),
        RISDIFF_SIZE("scenario", "grid_nx", data.scenario.grid_spec.n_x, "candidate grid"),
        RISDIFF_SIZE("scenario", "grid_ny", data.scenario.grid_spec.n_y, ""),
        RISDIFF_SIZE("scenario", "grid_nz", data.scenario.grid_spec.n_z, ""),
        Field{"scenario", "bs",
              [](RunConfig& c, const std::string& k, const Values& v) {
                  if (v.size() == 1 && v[0] == "random") {
                      c.data.scenario.bs_fixed.reset();
                      return;
                  }
                  if (v.size() != 3) {
                      throw ConfigError("key '" + k + "' expects \"random\" or [x, y, z]");
                  }
                  Point3 p{to_double(k, {v[0]}), to_double(k, {v[1]}), to_double(k, {v[2]})};
                  c.data.scenario.bs_fixed = p;
              },
              [](const RunConfig& c) {
                  if (!c.data.scenario.bs_fixed) {
                      return quoted("random");
                  }
                  const auto& p = *c.data.scenario.bs_fixed;
                  return "[" + format_number(p.x) + ", " + format_number(p.y) + ", " +
                         format_number(p.z) + "]";
              },
              "\"random\" or a fixed [x, y, z]"},
        RISDIFF_DOUBLE("scenario", "obstacle_size_min", data.scenario.obstacle_size_min, "footprint side [m]"),
        RISDIFF_DOUBLE("scenario", "obstacle_size_max", data.scenario.obstacle_size_max, ""),
        RISDIFF_DOUBLE("scenario", "obstacle_height_min", data.scenario.obstacle_height_min, ""),
        RISDIFF_DOUBLE("scenario", "obstacle_height_max", data.scenario.obstacle_height_max, ""),
        RISDIFF_DOUBLE("scenario", "user_height", data.scenario.user_height, ""),
        RISDIFF_SIZE("scenario", "seed", data.scenario.seed, ""),

        RISDIFF_DOUBLE("radio", "wavelength", data.radio.lambda, "[m]"),
        RISDIFF_DOUBLE("radio", "gain_tx", data.radio.g_t, "linear"),
        RISDIFF_DOUBLE("radio", "gain_rx", data.radio.g_r, "linear"),
        RISDIFF_DOUBLE("radio", "path_loss_exponent", data.radio.alpha, ""),
        RISDIFF_DOUBLE("radio", "tx_power", data.radio.p_tx, "[W]"),
        RISDIFF_DOUBLE("radio", "noise_power", data.radio.noise_power, "[W]"),
        RISDIFF_DOUBLE("radio", "gamma_th", data.radio.gamma_th, "coverage threshold, linear"),
        RISDIFF_SIZE("radio", "n_elements", data.radio.n_elements, ""),
        RISDIFF_BOOL("radio", "gate_cascade", data.radio.gate_cascade, ""),

        RISDIFF_SIZE("constraints", "l_count", data.l_count, "number of RIS"),
        Field{"constraints", "d_min",
              [](RunConfig& c, const std::string& k, const Values& v) {
                  if (v.size() == 1 && v[0] == "auto") {
                      c.data.d_min.reset();
                  } else {
                      c.data.d_min = to_double(k, v);
                  }
              },
              [](const RunConfig& c) {
                  return c.data.d_min ? format_number(*c.data.d_min) : quoted("auto");
              },
              "\"auto\" = one grid-cell diagonal"},

        Field{"dataset", "objective",
              [](RunConfig& c, const std::string& k, const Values& v) {
                  c.data.objective = objective_from_string(single(k, v));
              },
              [](const RunConfig& c) { return quoted(to_string(c.data.objective)); },
              "sum_snr or coverage"},
        RISDIFF_SIZE("dataset", "n_mc", data.n_mc, "fading draws per scenario"),
        RISDIFF_SIZE("dataset", "max_users", data.layout.max_users, "condition slots"),
        RISDIFF_SIZE("dataset", "max_obstacles", data.layout.max_obstacles, ""),
        Field{"dataset", "target_mode",
              [](RunConfig& c, const std::string& k, const Values& v) {
                  c.data.target_mode = target_mode_from_string(single(k, v));
              },
              [](const RunConfig& c) { return quoted(to_string(c.data.target_mode)); },
              "multihot or coords"},

        Field{"train", "T", [](RunConfig& c, const std::string& k, const Values& v) {
                  c.train.T = static_cast<int>(to_u64(k, v));
              },
              [](const RunConfig& c) { return std::to_string(c.train.T); }, "diffusion steps"},
        RISDIFF_DOUBLE("train", "p_uncond", train.p_uncond, ""),
        RISDIFF_DOUBLE("train", "lr", train.lr, ""),
        RISDIFF_SIZE("train", "batch_size", train.batch_size, ""),
        RISDIFF_SIZE("train", "epochs", train.epochs, ""),
        RISDIFF_DOUBLE("train", "lambda_card", train.lambda_card, "multihot cardinality penalty"),
        RISDIFF_DOUBLE("train", "ema_decay", train.ema_decay, ""),
        RISDIFF_SIZE("train", "seed", train.seed, ""),
        RISDIFF_SIZE("train", "hidden", train.hidden, ""),
        RISDIFF_SIZE("train", "n_blocks", train.n_blocks, ""),
        RISDIFF_SIZE("train", "time_dim", train.time_dim, ""),
        RISDIFF_BOOL("train", "augment", train.augment, "plane symmetries and entity order"),
        Field{"train", "head",
              [](RunConfig& c, const std::string& k, const Values& v) {
                  c.train.head = output_head_from_string(single(k, v));
              },
              [](const RunConfig& c) { return quoted(to_string(c.train.head)); },
              "epsilon or velocity"},
        RISDIFF_SIZE("train", "eval_every", eval_every, "log evaluation period, 0 = off"),

        RISDIFF_DOUBLE("sample", "omega", sample.omega, "guidance weight"),
        Field{"sample", "tau",
              [](RunConfig& c, const std::string& k, const Values& v) {
                  c.sample.tau.clear();
                  for (const auto& s : v) {
                      if (!s.empty()) {
                          c.sample.tau.push_back(static_cast<int>(to_u64(k, s)));
                      }
                  }
              },
              [](const RunConfig& c) {
                  std::string out = "[";
                  for (std::size_t i = 0; i < c.sample.tau.size(); ++i) {
                      out += (i ? ", " : "") + std::to_string(c.sample.tau[i]);
                  }
                  return out + "]";
              },
              "DDIM steps, [] = T..1"},
        RISDIFF_DOUBLE("sample", "eta", sample.eta, ""),
        RISDIFF_SIZE("sample", "n_samples", sample.n_samples, ""),
        Field{"sample", "selection",
              [](RunConfig& c, const std::string& k, const Values& v) {
                  c.sample.selection = selection_from_string(single(k, v));
              },
              [](const RunConfig& c) { return quoted(to_string(c.sample.selection)); },
              "first or best_of_n"},
        Field{"sample", "sampler",
              [](RunConfig& c, const std::string& k, const Values& v) {
                  c.sample.sampler = sampler_from_string(single(k, v));
              },
              [](const RunConfig& c) { return quoted(to_string(c.sample.sampler)); },
              "ddim or ddpm"},
        RISDIFF_BOOL("sample", "clip_denoised", sample.clip_denoised, ""),
        RISDIFF_SIZE("sample", "seed", sample.seed, ""),

        RISDIFF_SIZE("eval", "random_seed", random_seed, "random baseline"),
        Field{"run", "workers", [](RunConfig& c, const std::string& k, const Values& v) {
                  c.workers = static_cast<int>(to_u64(k, v));
              },
              [](const RunConfig& c) { return std::to_string(c.workers); }, ""},
    };
    return table;
}

#undef RISDIFF_DOUBLE
#undef RISDIFF_SIZE
#undef RISDIFF_BOOL

void assign(RunConfig& config, const std::string& section, const std::string& name,
            const Values& values) {
    for (const auto& f : fields()) {
        if (f.section == section && f.name == name) {
            f.set(config, section + "." + name, values);
            return;
        }
    }
    throw ConfigError("unknown configuration key '" + (section.empty() ? name : section + "." + name) + "'");
}

}  // namespace

void RunConfig::validate() const {
    data.validate();
    train.validate();
    sample.validate(train.T);
    if (workers < 1) {
        throw ConfigError("run.workers must be at least 1");
    }
}

RunConfig parse_run_config(std::istream& in) {
    RunConfig config;
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigTOML().from_config(in);
    } catch (const CLI::Error& e) {
        throw ConfigError(std::string("config syntax: ") + e.what());
    }
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--") {
            continue;
        }
        std::string section;
        for (const auto& p : item.parents) {
            section += (section.empty() ? "" : ".") + p;
        }
        if (section == "default") {
            section.clear();
        }
        assign(config, section, item.name, item.inputs);
    }
    config.validate();
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    return parse_run_config(in);
}

void apply_override(RunConfig& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq) {
        throw ConfigError("override '" + std::string(assignment) + "' is not section.key=value");
    }
    const std::string section(assignment.substr(0, dot));
    const std::string name(assignment.substr(dot + 1, eq - dot - 1));
    std::string value(assignment.substr(eq + 1));
    Values values;
    if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
        std::stringstream ss(value.substr(1, value.size() - 2));
        for (std::string part; std::getline(ss, part, ',');) {
            const auto b = part.find_first_not_of(" \t");
            const auto e = part.find_last_not_of(" \t");
            if (b != std::string::npos) {
                values.push_back(part.substr(b, e - b + 1));
            }
        }
    } else {
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        values.push_back(value);
    }
    assign(config, section, name, values);
    config.validate();
}

std::string to_toml(const RunConfig& config) {
    std::ostringstream out;
    std::string section;
    for (const auto& f : fields()) {
        if (f.section != section) {
            out << (section.empty() ? "" : "\n") << '[' << f.section << "]\n";
            section = f.section;
        }
        out << f.name << " = " << f.get(config);
        if (!f.comment.empty()) {
            out << "  # " << f.comment;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace risdiff::cli
