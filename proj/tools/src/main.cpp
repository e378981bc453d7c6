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

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "userid_tools/commands.hpp"

namespace ut = userid::tools;

int main(int argc, char** argv) {
    CLI::App app{"Camera-assisted mmWave user identification tools"};
    app.require_subcommand(1);
    const std::vector<std::string> args(argv, argv + argc);

    ut::GenDataOptions gen;
    gen.argv = args;
    auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic episode dataset (JSON Lines)");
    gen_cmd->add_option("--config", gen.config_path, "Generation config (JSON)")->check(CLI::ExistingFile);
    gen_cmd->add_option("--out", gen.out, "Output dataset path")->required();
    gen_cmd->add_option("--frames", gen.frames, "Number of frames (default 5000)");
    gen_cmd->add_option("--seed", gen.seed, "Master seed (overrides the config)");
    gen_cmd->add_option("--p-miss", gen.p_miss, "Detector miss probability");
    gen_cmd->add_option("--noise-variance", gen.noise_variance, "Receiver noise variance");
    gen_cmd->add_option("--tag", gen.tag, "Scenario tag");

    ut::TrainOptions train;
    train.argv = args;
    auto* train_cmd = app.add_subcommand("train", "Train the power-to-center predictor");
    train_cmd->add_option("--dataset", train.dataset, "Dataset path")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--config", train.config_path, "Training config (JSON)")->check(CLI::ExistingFile);
    train_cmd->add_option("--out", train.out, "Checkpoint path")->required();
    train_cmd->add_option("--train-fraction", train.train_fraction, "Fraction of training windows used (nested)");
    train_cmd->add_option("--split-fraction", train.split_fraction, "Train share of the train/test split");
    train_cmd->add_option("--split-seed", train.split_seed, "Seed of the train/test split");
    train_cmd->add_option("--window-alignment", train.window_alignment, "Longest evaluated sequence length");
    train_cmd->add_option("--epochs", train.epochs);
    train_cmd->add_option("--lr", train.lr);
    train_cmd->add_option("--batch-size", train.batch_size);
    train_cmd->add_option("--seed", train.seed, "Training seed (init, shuffle, dropout)");
    train_cmd->add_option("--grid-cols", train.grid_cols);
    train_cmd->add_option("--grid-rows", train.grid_rows);
    train_cmd->add_option("--head", train.head, "classification or regression");

    ut::EvalOptionsCli ev;
    ev.argv = args;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on held-out windows");
    eval_cmd->add_option("--dataset", ev.datasets, "Dataset path (repeatable)")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--checkpoint", ev.checkpoint)->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--r", ev.r_values, "Sequence lengths, e.g. 1,3,5")->delimiter(',');
    eval_cmd->add_option("--out", ev.out, "Report directory")->required();
    eval_cmd->add_option("--strata", ev.strata, "objects,speed")->delimiter(',');
    eval_cmd->add_option("--train-scenario", ev.train_scenario, "Label of the training scenario");
    eval_cmd->add_option("--test-scenario", ev.test_scenario, "Evaluate only datasets with this tag");
    eval_cmd->add_option("--gate", ev.gate, "Association gate radius");

    ut::SweepOptions sweep;
    sweep.argv = args;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment grid");
    sweep_cmd->add_option("--config", sweep.config_path, "Grid config (JSON)")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--out", sweep.out, "Output directory")->required();
    sweep_cmd->add_flag("--resume", sweep.resume, "Skip cells whose outputs already match");
    sweep_cmd->add_option("--jobs", sweep.jobs, "Concurrent cell groups");

    ut::LintOptions lint;
    auto* lint_cmd = app.add_subcommand("lint-dataset", "Check a dataset file against the schema");
    lint_cmd->add_option("dataset", lint.dataset, "Dataset path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ut::kExitOk : ut::kExitUsage;
    }

    return ut::run_guarded(
        [&]() -> int {
            if (*gen_cmd)
                return ut::cmd_gen_data(gen, std::cout);
            if (*train_cmd)
                return ut::cmd_train(train, std::cout);
            if (*eval_cmd)
                return ut::cmd_eval(ev, std::cout);
            if (*sweep_cmd)
                return ut::cmd_sweep(sweep, std::cout, std::cerr);
            return ut::cmd_lint_dataset(lint, std::cout);
        },
        std::cerr);
}
