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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "userid/checkpoint.hpp"
#include "userid/dataset_io.hpp"
#include "userid_tools/commands.hpp"
#include "userid_tools/manifest.hpp"

namespace userid::tools {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("userid_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string gen(const std::string& name, std::int64_t frames, std::uint64_t seed = 3) {
        GenDataOptions o;
        o.out = path(name);
        o.frames = frames;
        o.seed = seed;
        std::ostringstream out;
        EXPECT_EQ(cmd_gen_data(o, out), kExitOk);
        return o.out;
    }

    std::string train(const std::string& dataset, const std::string& name, double fraction = 1.0,
                      std::string* log = nullptr) {
        TrainOptions o;
        o.dataset = dataset;
        o.out = path(name);
        o.epochs = 2;
        o.train_fraction = fraction;
        std::ostringstream out;
        EXPECT_EQ(cmd_train(o, out), kExitOk);
        if (log)
            *log = out.str();
        return o.out;
    }

    fs::path dir_;
};

std::size_t line_count(const std::string& file) {
    std::ifstream in(file);
    std::size_t n = 0;
    for (std::string l; std::getline(in, l);)
        ++n;
    return n;
}

TEST_F(CliTest, GenDataWritesHeaderPlusFrames) {
    const std::string ds = gen("a.jsonl", 100);
    EXPECT_EQ(line_count(ds), 101u);
    EXPECT_TRUE(fs::exists(ds + ".manifest.json"));
    EXPECT_TRUE(verify_manifest(ds + ".manifest.json").empty());
    std::ifstream in(ds);
    EXPECT_TRUE(lint_dataset(in).ok());
}

TEST_F(CliTest, GenDataIsDeterministic) {
    const std::string a = gen("a.jsonl", 80, 5);
    const std::string b = gen("b.jsonl", 80, 5);
    EXPECT_EQ(read_file(a), read_file(b));
    const std::string c = gen("c.jsonl", 80, 6);
    EXPECT_NE(read_file(a), read_file(c));
}

TEST_F(CliTest, PerfectDetectorReportsEveryObject) {
    const std::string cfg = path("perfect.json");
    {
        std::ofstream f(cfg);
        f << json{{"detector", {{"p_miss", 0.0}, {"fp_rate", 0.0}, {"occlusion_iou", 1.0}}}}.dump();
    }
    GenDataOptions o;
    o.config_path = cfg;
    o.out = path("p.jsonl");
    o.frames = 60;
    std::ostringstream out;
    ASSERT_EQ(cmd_gen_data(o, out), kExitOk);
    const EpisodeDataset ep = read_dataset(o.out);
    for (const auto& f : ep.frames)
        EXPECT_EQ(f.detections.size(), f.labels.objects.size());
    EXPECT_NE(out.str().find("detection rate: 1.0000"), std::string::npos) << out.str();
}

TEST_F(CliTest, TrainEchoesResolvedConfig) {
    const std::string ds = gen("a.jsonl", 300);
    std::string log;
    const std::string ck = train(ds, "m.json", 1.0, &log);
    const auto line_end = log.find('\n');
    const std::string prefix = "training config: ";
    ASSERT_EQ(log.rfind(prefix, 0), 0u);
    const json echoed = json::parse(log.substr(prefix.size(), line_end - prefix.size()));
    EXPECT_EQ(echoed.at("train").at("batch_size"), 32);
    EXPECT_EQ(echoed.at("train").at("epochs"), 2);
    EXPECT_EQ(echoed.at("train").at("dropout"), 0.3);
    EXPECT_EQ(echoed.at("grid").at("gx"), 32);
    EXPECT_EQ(echoed.at("window_alignment"), 5);
    const Checkpoint c = load_checkpoint(ck);
    EXPECT_EQ(c.metadata.at("split").at("train_fraction"), 0.7);
    EXPECT_TRUE(verify_manifest(ck + ".manifest.json").empty());
}

TEST_F(CliTest, TrainIsBitReproducibleAndFractionsNest) {
    const std::string ds = gen("a.jsonl", 300);
    const std::string a = train(ds, "a.json");
    const std::string b = train(ds, "b.json");
    EXPECT_EQ(sha256_file(a), sha256_file(b));
    const Checkpoint small = load_checkpoint(train(ds, "s.json", 0.3));
    const Checkpoint full = load_checkpoint(a);
    const auto n_small = small.metadata.at("train_windows").get<std::size_t>();
    const auto n_full = full.metadata.at("train_windows").get<std::size_t>();
    EXPECT_LT(n_small, n_full);
    EXPECT_NEAR(static_cast<double>(n_small) / static_cast<double>(n_full), 0.3, 0.01);
}

TEST_F(CliTest, EvalWritesReportsAndStrata) {
    const std::string ds = gen("a.jsonl", 300);
    const std::string ck = train(ds, "m.json");
    EvalOptionsCli o;
    o.datasets = {ds};
    o.checkpoint = ck;
    o.out = path("eval");
    o.strata = {"objects", "speed"};
    std::ostringstream out;
    ASSERT_EQ(cmd_eval(o, out), kExitOk);
    const json rep = json::parse(read_file(dir_ / "eval" / "report.json"));
    ASSERT_EQ(rep.size(), 3u);
    std::set<std::string> kinds;
    for (const auto& s : rep[2].at("strata"))
        kinds.insert(s.at("kind").get<std::string>());
    EXPECT_TRUE(kinds.count("objects"));
    EXPECT_TRUE(kinds.count("speed"));
    EXPECT_TRUE(kinds.count("association_gt"));
    EXPECT_TRUE(fs::exists(dir_ / "eval" / "report.csv"));
    EXPECT_TRUE(verify_manifest(dir_ / "eval" / "manifest.json").empty());
    std::size_t dumps = 0;
    for (const auto& e : fs::directory_iterator(dir_ / "eval"))
        dumps += e.path().filename().string().rfind("samples_", 0) == 0;
    EXPECT_EQ(dumps, 3u);
}

TEST_F(CliTest, EvalRejectsBeamCountMismatch) {
    const std::string ds = gen("a.jsonl", 200);
    const std::string ck = train(ds, "m.json");
    const std::string cfg = path("q32.json");
    {
        std::ofstream f(cfg);
        f << json{{"codebook_size", 32}}.dump();
    }
    GenDataOptions g;
    g.config_path = cfg;
    g.out = path("q32.jsonl");
    g.frames = 100;
    std::ostringstream sink;
    ASSERT_EQ(cmd_gen_data(g, sink), kExitOk);

    EvalOptionsCli o;
    o.datasets = {g.out};
    o.checkpoint = ck;
    o.out = path("eval");
    std::ostringstream err;
    EXPECT_EQ(run_guarded([&] { return cmd_eval(o, sink); }, err), kExitData);
    EXPECT_NE(err.str().find("Q = 64"), std::string::npos) << err.str();
    EXPECT_NE(err.str().find("Q = 32"), std::string::npos) << err.str();

    o.datasets = {ds};
    o.r_values = {7};
    EXPECT_EQ(run_guarded([&] { return cmd_eval(o, sink); }, err), kExitUsage);
}

std::string write_sweep_config(const fs::path& file, const std::vector<std::string>& tags) {
    json scenarios = json::array();
    std::uint64_t seed = 1;
    for (const auto& t : tags)
        scenarios.push_back({{"tag", t}, {"frames", 250}, {"seed", seed++}});
    const json cfg{{"scenarios", scenarios}, {"r_values", {1, 3, 5}}, {"train", {{"epochs", 2}}}};
    std::ofstream(file) << cfg.dump(2);
    return file.string();
}

TEST_F(CliTest, SweepProducesCellsAndResumes) {
    SweepOptions o;
    o.config_path = write_sweep_config(dir_ / "sweep.json", {"alpha", "beta"});
    o.out = path("sweep");
    std::ostringstream out, err;
    ASSERT_EQ(cmd_sweep(o, out, err), kExitOk) << err.str();
    std::size_t cells = 0;
    for (const auto& e : fs::directory_iterator(dir_ / "sweep" / "cells"))
        cells += e.path().extension() == ".json" && e.path().string().find(".samples") == std::string::npos;
    EXPECT_EQ(cells, 6u);
    // One overall row per cell.
    const std::string csv = read_file(dir_ / "sweep" / "combined.csv");
    std::size_t overall = 0;
    for (std::size_t pos = 0; (pos = csv.find(",overall,", pos)) != std::string::npos; ++pos)
        ++overall;
    EXPECT_EQ(overall, 6u);
    EXPECT_TRUE(verify_manifest(dir_ / "sweep" / "manifest.json").empty());

    SweepOptions again = o;
    again.resume = true;
    std::ostringstream out2;
    ASSERT_EQ(cmd_sweep(again, out2, err), kExitOk);
    EXPECT_NE(out2.str().find("cached: 6"), std::string::npos) << out2.str();
    EXPECT_EQ(read_file(dir_ / "sweep" / "combined.csv"), csv);
}

TEST_F(CliTest, LintFlagsCorruptDataset) {
    const std::string ds = gen("a.jsonl", 20);
    std::ostringstream out;
    EXPECT_EQ(cmd_lint_dataset({ds}, out), kExitOk);
    std::string text = read_file(ds);
    text += "{\"t\": 99}\n";
    write_file_atomic(path("bad.jsonl"), text);
    EXPECT_EQ(cmd_lint_dataset({path("bad.jsonl")}, out), kExitData);
}

TEST_F(CliTest, ManifestDetectsTampering) {
    const std::string ds = gen("a.jsonl", 20);
    std::ofstream(ds, std::ios::app) << "\n";
    EXPECT_FALSE(verify_manifest(ds + ".manifest.json").empty());
}

TEST_F(CliTest, OutputDirEnvironmentRedirectsRelativePaths) {
    ::setenv(kOutputDirEnv, dir_.c_str(), 1);
    GenDataOptions o;
    o.out = "relative/d.jsonl";
    o.frames = 20;
    std::ostringstream out;
    const int code = cmd_gen_data(o, out);
    ::unsetenv(kOutputDirEnv);
    ASSERT_EQ(code, kExitOk);
    EXPECT_TRUE(fs::exists(dir_ / "relative" / "d.jsonl"));
}

TEST(Sha256, KnownDigests) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

// Process-level exit codes of the installed binary.
int run_cli(const std::string& args) {
    const int status = std::system((std::string(USERID_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliProcess, ExitCodes) {
    const fs::path dir = fs::temp_directory_path() / "userid_cli_exit";
    fs::remove_all(dir);
    fs::create_directories(dir);
    EXPECT_EQ(run_cli("--help"), kExitOk);
    EXPECT_EQ(run_cli("gen-data"), kExitUsage);
    EXPECT_EQ(run_cli("gen-data --out " + (dir / "x.jsonl").string() + " --frames 0"), kExitUsage);
    std::ofstream(dir / "junk.jsonl") << "not json\n";
    EXPECT_EQ(run_cli("lint-dataset " + (dir / "junk.jsonl").string()), kExitData);
    EXPECT_EQ(run_cli("train --dataset " + (dir / "junk.jsonl").string() + " --out " + (dir / "m.json").string()),
              kExitData);
    EXPECT_EQ(run_cli("gen-data --out " + (dir / "ok.jsonl").string() + " --frames 30"), kExitOk);
    fs::remove_all(dir);
}

} // namespace
} // namespace userid::tools
