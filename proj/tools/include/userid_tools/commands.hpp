// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The userid Authors
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

#ifndef USERID_TOOLS_COMMANDS_HPP
#define USERID_TOOLS_COMMANDS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace userid::tools {

// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,   // bad flags or configuration
    kExitData = 2,    // unreadable, malformed or incompatible data
    kExitNumeric = 3, // non-finite training loss or parameters
};

// Runs `body`, mapping exceptions to exit codes and messages on `err`.
int run_guarded(const std::function<int()>& body, std::ostream& err);

// Unset optionals fall back to the config file, then to built-in defaults.
struct GenDataOptions {
    std::string config_path; // optional generation config (JSON)
    std::string out;
    std::optional<std::int64_t> frames;
    std::optional<std::uint64_t> seed;
    std::optional<double> p_miss;
    std::optional<double> noise_variance;
    std::optional<std::string> tag;
    std::vector<std::string> argv;
};

struct TrainOptions {
    std::string dataset;
    std::string config_path; // optional training config (JSON)
    std::string out;
    double train_fraction = 1.0;
    double split_fraction = 0.7;
    std::uint64_t split_seed = 0;
    int window_alignment = 5; // positions are ends of windows this long
    std::optional<int> epochs;
    std::optional<double> lr;
    std::optional<int> batch_size;
    std::optional<std::uint64_t> seed;
    std::optional<int> grid_cols;
    std::optional<int> grid_rows;
    std::optional<std::string> head;
    std::vector<std::string> argv;
};

struct EvalOptionsCli {
    std::vector<std::string> datasets;
    std::string checkpoint;
    std::vector<int> r_values{1, 3, 5};
    std::string out;
    std::vector<std::string> strata; // subset of {"objects", "speed"}
    std::optional<std::string> train_scenario;
    std::optional<std::string> test_scenario;
    std::optional<double> gate;
    std::vector<std::string> argv;
};

struct SweepOptions {
    std::string config_path;
    std::string out;
    bool resume = false;
    int jobs = 1;
    std::vector<std::string> argv;
};

struct LintOptions {
    std::string dataset;
};

int cmd_gen_data(const GenDataOptions& opt, std::ostream& out);
int cmd_train(const TrainOptions& opt, std::ostream& out);
int cmd_eval(const EvalOptionsCli& opt, std::ostream& out);
int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err);
int cmd_lint_dataset(const LintOptions& opt, std::ostream& out);

} // namespace userid::tools

#endif
