// Copyright 2026-present the rqkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace rqkit {

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ExperimentResult {
    std::string experiment;
    nlohmann::json config;  // fully resolved, re-runnable
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    nlohmann::json extra = nlohmann::json::object();
    std::vector<Check> checks;

    bool
    all_passed() const;

    nlohmann::json
    to_json() const;

    std::string
    to_csv() const;
};

std::vector<std::string>
experiment_names();

/// Default configuration document for an experiment.
nlohmann::json
default_config(const std::string& experiment);

/// Merges `overrides` onto the defaults; unknown keys are rejected.
nlohmann::json
resolve_config(const std::string& experiment, const nlohmann::json& overrides);

/// Runs an experiment. Numeric outputs other than timings do not depend on `threads`.
ExperimentResult
run_experiment(const std::string& experiment, const nlohmann::json& overrides, unsigned threads);

/// Shortest round-trip decimal representation.
std::string
format_double(double v);

const char*
git_describe();

}  // namespace rqkit
