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

#include "userid_tools/commands.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "userid/checkpoint.hpp"
#include "userid/config_io.hpp"
#include "userid/dataset_io.hpp"
#include "userid/errors.hpp"
#include "userid/eval.hpp"
#include "userid/report.hpp"
#include "userid_tools/manifest.hpp"

namespace userid::tools {

namespace fs = std::filesystem;
using nlohmann::json;

int run_guarded(const std::function<int()>& body, std::ostream& err) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const json::exception& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        err << "i/o error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
}

namespace {

fs::path sibling_manifest(const fs::path& artifact) {
    fs::path m = artifact;
    m += ".manifest.json";
    return m;
}

GenerationConfig load_generation_config(const std::string& path) {
    return GenerationConfig::from_json(path.empty() ? json::object() : read_json_file(path));
}

// Split provenance stored in checkpoints so evaluation reuses the held-out side.
struct SplitProvenance {
    SplitSpec split;
    int window_alignment = 5;
};

SplitProvenance provenance_from(const json& meta) {
    SplitProvenance p;
    if (meta.contains("split")) {
        p.split.train_fraction = meta.at("split").value("train_fraction", p.split.train_fraction);
        p.split.seed = meta.at("split").value("seed", p.split.seed);
    }
    p.window_alignment = meta.value("window_alignment", p.window_alignment);
    return p;
}

std::string fixed(double v, int digits = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

} // namespace

int cmd_gen_data(const GenDataOptions& opt, std::ostream& out) {
    GenerationConfig cfg = load_generation_config(opt.config_path);
    if (opt.p_miss)
        cfg.detector.p_miss = *opt.p_miss;
    if (opt.noise_variance)
        cfg.noise.noise_variance = *opt.noise_variance;
    if (opt.tag)
        cfg.scenario.scenario_tag = *opt.tag;
    if (opt.seed)
        cfg.scenario.seed = *opt.seed;
    const std::int64_t frames = opt.frames.value_or(5000);
    if (frames < 1)
        throw ConfigError("--frames must be >= 1");
    if (opt.out.empty())
        throw ConfigError("--out is required");
    cfg.validate();

    const RunManifest base{"gen-data", opt.argv, cfg.to_json(), {{"master", cfg.scenario.seed}}, utc_timestamp(), {}, {}};
    const EpisodeDataset ep = generate_episode(cfg, frames, cfg.scenario.seed);

    const fs::path path = resolve_output(opt.out);
    write_file_atomic(path, serialize_dataset(ep));
    std::vector<fs::path> inputs;
    if (!opt.config_path.empty())
        inputs.emplace_back(opt.config_path);
    write_manifest(sibling_manifest(path), base, inputs, {path});

    std::size_t objects = 0, true_dets = 0, false_pos = 0;
    for (const auto& f : ep.frames) {
        objects += f.labels.objects.size();
        for (const auto& d : f.detections)
            (d.gt_id ? true_dets : false_pos) += 1;
    }
    const double n = static_cast<double>(ep.frames.size());
    out << "wrote " << path.string() << '\n'
        << "frames: " << ep.frames.size() << " (segments: " << ep.frames.back().segment + 1 << ")\n"
        << "mean objects/frame: " << fixed(static_cast<double>(objects) / n) << '\n'
        << "detection rate: " << fixed(objects ? static_cast<double>(true_dets) / static_cast<double>(objects) : 0.0)
        << '\n'
        << "false positives/frame: " << fixed(static_cast<double>(false_pos) / n) << '\n';
    return kExitOk;
}

int cmd_train(const TrainOptions& opt, std::ostream& out) {
    if (opt.dataset.empty() || opt.out.empty())
        throw ConfigError("--dataset and --out are required");
    TrainConfig tc = opt.config_path.empty() ? TrainConfig{} : train_config_from_json(read_json_file(opt.config_path));
    if (opt.epochs)
        tc.epochs = *opt.epochs;
    if (opt.lr)
        tc.lr = *opt.lr;
    if (opt.batch_size)
        tc.batch_size = *opt.batch_size;
    if (opt.seed)
        tc.seed = *opt.seed;
    if (opt.head)
        tc.head = head_from_string(*opt.head);
    GridSpec grid;
    if (opt.grid_cols)
        grid.gx = *opt.grid_cols;
    if (opt.grid_rows)
        grid.gy = *opt.grid_rows;
    tc.validate();
    grid.validate();
    if (opt.train_fraction <= 0.0 || opt.train_fraction > 1.0)
        throw ConfigError("--train-fraction must be in (0, 1]");
    if (opt.window_alignment < 1)
        throw ConfigError("--window-alignment must be >= 1");

    const SplitSpec split{opt.split_fraction, opt.split_seed};
    json resolved = {{"train", to_json(tc)},
                     {"grid", to_json(grid)},
                     {"train_fraction", opt.train_fraction},
                     {"split", {{"train_fraction", split.train_fraction}, {"seed", split.seed}}},
                     {"window_alignment", opt.window_alignment}};
    out << "training config: " << resolved.dump() << '\n';
    const RunManifest base{"train", opt.argv, resolved, {{"train", tc.seed}, {"split", split.seed}}, utc_timestamp(),
                           {}, {}};

    EpisodeDataset ds = read_dataset(opt.dataset);
    const std::string tag = ds.scenario_tag;
    const std::string fp = ds.config_fingerprint;
    const std::uint64_t ds_seed = ds.seed;
    const PreparedScenario prepared = prepare_scenario(std::move(ds), opt.window_alignment, split);
    const TrainedModel model = train_on(prepared, opt.train_fraction, tc, grid);
    const auto test_pos = prepared.split.test_positions();
    if (test_pos.empty())
        throw DataError("empty held-out split");
    const double heldout = cell_accuracy(*prepared.episode, test_pos, model.predictor);

    Checkpoint ck;
    ck.predictor = model.predictor;
    ck.train_config = tc;
    ck.history = model.history;
    ck.metadata = {{"scenario_tag", tag},
                   {"dataset_fingerprint", fp},
                   {"dataset_seed", ds_seed},
                   {"split", {{"train_fraction", split.train_fraction}, {"seed", split.seed}}},
                   {"window_alignment", opt.window_alignment},
                   {"train_fraction", opt.train_fraction},
                   {"train_windows", model.info.at("train_windows")},
                   {"heldout_cell_accuracy", heldout}};

    const fs::path path = resolve_output(opt.out);
    write_file_atomic(path, serialize_checkpoint(ck));
    std::vector<fs::path> inputs{opt.dataset};
    if (!opt.config_path.empty())
        inputs.emplace_back(opt.config_path);
    write_manifest(sibling_manifest(path), base, inputs, {path});

    out << "train windows: " << model.info.at("train_windows").get<std::size_t>() << '\n'
        << "final train loss: " << format_double(model.history.back().mean_loss) << '\n'
        << "held-out cell accuracy: " << fixed(heldout) << " (" << test_pos.size() << " windows)\n"
        << "wrote " << path.string() << '\n';
    return kExitOk;
}

int cmd_eval(const EvalOptionsCli& opt, std::ostream& out) {
    if (opt.datasets.empty() || opt.checkpoint.empty() || opt.out.empty())
        throw ConfigError("--dataset, --checkpoint and --out are required");
    if (opt.r_values.empty())
        throw ConfigError("--r needs at least one value");
    EvalOptions options;
    options.strata_objects = false;
    options.strata_speed = false;
    for (const auto& s : opt.strata) {
        if (s == "objects")
            options.strata_objects = true;
        else if (s == "speed")
            options.strata_speed = true;
        else
            throw ConfigError("unknown stratum '" + s + "' (expected objects or speed)");
    }
    if (opt.gate)
        options.gate = *opt.gate;

    const Checkpoint ck = load_checkpoint(opt.checkpoint);
    const SplitProvenance prov = provenance_from(ck.metadata);
    for (int r : opt.r_values)
        if (r < 1 || r > prov.window_alignment)
            throw ConfigError("r = " + std::to_string(r) + " outside [1, " + std::to_string(prov.window_alignment) +
                              "] supported by the checkpoint's window alignment");

    TrainedModel model;
    model.predictor = ck.predictor;
    model.history = ck.history;
    model.info = ck.metadata;
    const std::string train_tag = opt.train_scenario.value_or(ck.metadata.value("scenario_tag", std::string("train")));

    const fs::path dir = resolve_output(opt.out);
    std::vector<MetricsReport> reports;
    std::vector<fs::path> outputs;
    bool matched = false;
    for (const auto& path : opt.datasets) {
        EpisodeDataset ds = read_dataset(path);
        if (opt.test_scenario && ds.scenario_tag != *opt.test_scenario)
            continue;
        matched = true;
        if (ds.config.codebook_size != ck.num_beams())
            throw DataError("checkpoint " + opt.checkpoint + " expects Q = " + std::to_string(ck.num_beams()) +
                            " beams but dataset " + path + " has Q = " + std::to_string(ds.config.codebook_size));
        const PreparedScenario prepared = prepare_scenario(std::move(ds), prov.window_alignment, prov.split);
        const CellKey cell{train_tag, prepared.episode->scenario_tag, 1, ck.metadata.value("train_fraction", 1.0)};
        for (auto& rep : evaluate_model(model, prepared, opt.r_values, options, cell, prov.window_alignment)) {
            const fs::path dump = dir / ("samples_" + cell_slug(rep.cell) + ".jsonl");
            write_file_atomic(dump, samples_to_jsonl(rep));
            outputs.push_back(dump);
            out << rep.cell.scenario_train << " -> " << rep.cell.scenario_test << "  r=" << rep.cell.r
                << "  top1=" << fixed(rep.top1) << "  n=" << rep.count << '\n';
            reports.push_back(std::move(rep));
        }
    }
    if (!matched)
        throw ConfigError("no dataset has scenario tag '" + opt.test_scenario.value_or("") + "'");

    json all = json::array();
    for (const auto& r : reports)
        all.push_back(report_to_json(r));
    write_file_atomic(dir / "report.json", all.dump(2) + "\n");
    write_file_atomic(dir / "report.csv", reports_to_csv(reports));
    outputs.insert(outputs.begin(), {dir / "report.json", dir / "report.csv"});

    std::vector<fs::path> inputs{opt.checkpoint};
    inputs.insert(inputs.end(), opt.datasets.begin(), opt.datasets.end());
    const json resolved = {{"r_values", opt.r_values},
                           {"strata", opt.strata},
                           {"gate", options.gate},
                           {"split", {{"train_fraction", prov.split.train_fraction}, {"seed", prov.split.seed}}},
                           {"window_alignment", prov.window_alignment}};
    write_manifest(dir / "manifest.json",
                   {"eval", opt.argv, resolved, {{"split", prov.split.seed}}, utc_timestamp(), {}, {}}, inputs,
                   outputs);
    out << "wrote " << (dir / "report.json").string() << '\n';
    return kExitOk;
}

namespace {

json scenario_identity(const ScenarioSpec& s) {
    json j{{"tag", s.tag}, {"frames", s.frames}, {"seed", s.seed}, {"config", s.generation.to_json()}};
    if (!s.dataset_path.empty())
        j["dataset_sha256"] = sha256_file(s.dataset_path);
    return j;
}

struct CellFile {
    fs::path path;
    std::string hash;
};

} // namespace

int cmd_sweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
    if (opt.config_path.empty() || opt.out.empty())
        throw ConfigError("--config and --out are required");
    if (opt.jobs < 1)
        throw ConfigError("--jobs must be >= 1");
    const ExperimentConfig cfg = ExperimentConfig::from_json(read_json_file(opt.config_path));
    const int align = cfg.align_r();
    const fs::path dir = resolve_output(opt.out);
    const fs::path cells_dir = dir / "cells";

    std::map<std::string, const ScenarioSpec*> by_tag;
    std::map<std::string, json> identity;
    for (const auto& s : cfg.scenarios) {
        by_tag[s.tag] = &s;
        identity[s.tag] = scenario_identity(s);
    }
    const json shared = {{"train", to_json(cfg.train)},
                         {"grid", to_json(cfg.grid)},
                         {"split", {{"train_fraction", cfg.split.train_fraction}, {"seed", cfg.split.seed}}},
                         {"eval",
                          {{"gate", cfg.eval.gate},
                           {"objects", cfg.eval.strata_objects},
                           {"speed", cfg.eval.strata_speed},
                           {"speed_window", cfg.eval.speed_window}}},
                         {"align_r", align}};

    const auto groups = cell_groups(cfg);
    // cells[g][k] describes r_values[k] of group g.
    std::vector<std::vector<CellFile>> cells(groups.size());
    std::vector<bool> cached(groups.size(), false);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        bool all_cached = true;
        for (int r : cfg.r_values) {
            const CellKey key{groups[g].pair.train, groups[g].pair.test, r, groups[g].fraction};
            const json id = {{"shared", shared},
                             {"train_scenario", identity.at(key.scenario_train)},
                             {"test_scenario", identity.at(key.scenario_test)},
                             {"r", r},
                             {"train_fraction", key.train_fraction}};
            CellFile cf{cells_dir / (cell_slug(key) + ".json"), sha256_hex(id.dump())};
            if (opt.resume && fs::exists(cf.path)) {
                try {
                    all_cached = all_cached && json::parse(read_file(cf.path)).value("cell_hash", "") == cf.hash;
                } catch (const json::exception&) {
                    all_cached = false;
                }
            } else {
                all_cached = false;
            }
            cells[g].push_back(std::move(cf));
        }
        cached[g] = all_cached;
    }

    std::vector<std::string> errors;
    std::map<std::string, PreparedScenario> prepared;
    std::set<std::string> unavailable;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (cached[g])
            continue;
        for (const std::string& tag : {groups[g].pair.train, groups[g].pair.test}) {
            if (prepared.count(tag) || unavailable.count(tag))
                continue;
            try {
                prepared.emplace(tag, prepare_scenario(*by_tag.at(tag), align, cfg.split));
            } catch (const std::exception& e) {
                errors.push_back("scenario " + tag + ": " + e.what());
                unavailable.insert(tag);
            }
        }
    }

    std::vector<std::string> group_error(groups.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t g = next++; g < groups.size(); g = next++) {
            if (cached[g])
                continue;
            try {
                const auto& grp = groups[g];
                if (!prepared.count(grp.pair.train) || !prepared.count(grp.pair.test))
                    throw DataError("scenario data unavailable");
                const auto reports = run_cell_group(cfg, grp, prepared.at(grp.pair.train), prepared.at(grp.pair.test));
                for (std::size_t k = 0; k < reports.size(); ++k) {
                    json j = report_to_json(reports[k]);
                    j["cell_hash"] = cells[g][k].hash;
                    j["csv_rows"] = csv_rows(reports[k]);
                    fs::path dump = cells[g][k].path;
                    dump.replace_extension(".samples.jsonl");
                    write_file_atomic(dump, samples_to_jsonl(reports[k]));
                    write_file_atomic(cells[g][k].path, j.dump(2) + "\n");
                }
            } catch (const std::exception& e) {
                group_error[g] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const int threads = std::min<int>(opt.jobs, static_cast<int>(groups.size()));
    for (int i = 1; i < threads; ++i)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();

    std::string csv = csv_header();
    std::size_t total = 0, failed = 0, skipped = 0;
    std::vector<fs::path> outputs;
    json cell_status = json::array();
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (std::size_t k = 0; k < cells[g].size(); ++k) {
            ++total;
            const std::string slug = cells[g][k].path.stem().string();
            if (!group_error[g].empty()) {
                ++failed;
                errors.push_back(slug + ": " + group_error[g]);
                cell_status.push_back({{"cell", slug}, {"status", "failed"}, {"error", group_error[g]}});
                continue;
            }
            csv += json::parse(read_file(cells[g][k].path)).at("csv_rows").get<std::string>();
            outputs.push_back(cells[g][k].path);
            fs::path dump = cells[g][k].path;
            dump.replace_extension(".samples.jsonl");
            if (fs::exists(dump))
                outputs.push_back(dump);
            skipped += cached[g];
            cell_status.push_back({{"cell", slug}, {"status", cached[g] ? "cached" : "ran"}});
        }
    }
    write_file_atomic(dir / "combined.csv", csv);
    write_file_atomic(dir / "summary.json",
                      json{{"cells", total}, {"failed", failed}, {"cached", skipped}, {"status", cell_status},
                           {"errors", errors}}
                              .dump(2) +
                          "\n");
    outputs.insert(outputs.begin(), {dir / "combined.csv", dir / "summary.json"});
    json seeds = json::object();
    for (const auto& s : cfg.scenarios)
        seeds[s.tag] = s.seed;
    seeds["train"] = cfg.train.seed;
    seeds["split"] = cfg.split.seed;
    write_manifest(dir / "manifest.json", {"sweep", opt.argv, cfg.to_json(), seeds, utc_timestamp(), {}, {}},
                   {opt.config_path}, outputs);

    for (const auto& e : errors)
        err << "cell failure: " << e << '\n';
    out << "cells: " << total << "  ran: " << total - failed - skipped << "  cached: " << skipped
        << "  failed: " << failed << '\n'
        << "wrote " << (dir / "combined.csv").string() << '\n';
    return (total > 0 && failed == total) ? kExitData : kExitOk;
}

int cmd_lint_dataset(const LintOptions& opt, std::ostream& out) {
    std::ifstream in(opt.dataset);
    if (!in)
        throw DataError("cannot open dataset " + opt.dataset);
    const LintResult res = lint_dataset(in);
    for (const auto& p : res.problems)
        out << opt.dataset << ": " << p << '\n';
    if (!res.ok())
        return kExitData;
    out << opt.dataset << ": ok (" << res.frames << " frames)\n";
    return kExitOk;
}

} // namespace userid::tools
