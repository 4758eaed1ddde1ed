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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "risdiff/dataset.hpp"
#include "risdiff/diffusion.hpp"

namespace risdiff::cli {

/// Every tunable of a pipeline run. Loaded from a TOML-style file of
/// `[section]` tables and `key = value` lines; unknown keys are rejected.
struct RunConfig {
    DatasetConfig data;
    TrainConfig train;
    SampleConfig sample;
    std::uint64_t random_seed = 0;  // random baseline
    std::size_t eval_every = 0;     // training-log evaluation period in epochs (0 = never)
    int workers = 1;

    void validate() const;
};

/// Throws ConfigError on a syntax error, unknown key or bad value.
RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::string& path);

/// Applies one `section.key=value` override.
void apply_override(RunConfig& config, std::string_view assignment);

/// The full effective configuration in the same TOML-style format.
std::string to_toml(const RunConfig& config);

}  // namespace risdiff::cli
