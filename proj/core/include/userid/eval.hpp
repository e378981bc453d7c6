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

#ifndef USERID_EVAL_HPP
#define USERID_EVAL_HPP

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "userid/episode.hpp"
#include "userid/identify.hpp"
#include "userid/nn.hpp"

namespace userid {

// An episode together with its model-visible frames. Sequence samples point
// into `observed`, so the view must outlive them.
class EpisodeView {
public:
    explicit EpisodeView(const EpisodeDataset& episode) : episode_(&episode), observed_(observed_frames(episode)) {}

    const EpisodeDataset& episode() const { return *episode_; }
    std::span<const ObservedFrame> observed() const { return observed_; }

    // Window of length r ending at tau.
    SequenceSample window(std::size_t tau, int r) const;

private:
    const EpisodeDataset* episode_;
    std::vector<ObservedFrame> observed_;
};

// Last-frame indices tau whose r-frame window stays within one segment.
std::vector<std::size_t> window_ends(const EpisodeDataset& episode, int r);

// One sample per valid tau, stride 1. Throws DataError when no segment is
// at least r frames long.
std::vector<SequenceSample> sliding_windows(const EpisodeView& view, int r);

// Windows of length r ending at the given positions (paired r-sweeps).
std::vector<SequenceSample> windows_at(const EpisodeView& view, std::span<const std::size_t> ends, int r);

struct SplitSpec {
    double train_fraction = 0.7;
    std::uint64_t seed = 0;
};

struct SplitResult {
    std::vector<std::size_t> train; // sample indices, in a seeded random order
    std::vector<std::size_t> test;  // sample indices, ascending
    std::size_t pruned = 0;         // test windows dropped for sharing frames with train
};

// Segment-level split: segments are shuffled and consumed until
// round(train_fraction * N) windows are in train (the boundary segment is cut
// in time order). Test windows sharing any frame with a train window are
// pruned.
SplitResult split(std::span<const SequenceSample> samples, const SplitSpec& spec);

// Nested subset: prefix of the (already shuffled) train order.
std::vector<std::size_t> training_subset(std::span<const std::size_t> train, double fraction);

// Mean of indicator(prediction == label); an empty prediction counts wrong.
double top1_accuracy(std::span<const std::optional<ObjectId>> predictions, std::span<const ObjectId> labels);

struct AssociationCase {
    std::vector<TrackAssignment> assignments;                // per frame
    std::vector<std::vector<std::optional<ObjectId>>> gt_ids; // per frame, per detection
    ObjectId user = 0;
};

// The user's detections carry one track id across every frame it was seen.
bool user_track_persistent(const AssociationCase& c);
double association_accuracy(std::span<const AssociationCase> cases);

enum class SpeedBucket { slow = 0, average = 1, fast = 2 };
const char* to_string(SpeedBucket b);

// Window speed estimate: displacement between first and last user position
// divided by the window length.
double window_speed(Vec2 first, Vec2 last, int r);

struct SpeedStrata {
    double mean = 0.0;
    double stddev = 0.0; // population
    std::vector<SpeedBucket> buckets;
};

// slow: s <= mean - std/2, fast: s >= mean + std/2, else average. Slow wins
// when both hold (std = 0). Throws DataError for fewer than 2 speeds.
SpeedStrata speed_buckets(std::span<const double> speeds);

inline constexpr int kLowConfidenceObjectCount = 4;

struct StratumMetric {
    std::string kind; // "overall", "objects", "speed", "association_gt", "association_detected"
    std::string key;  // e.g. "3" for objects, "slow" for speed
    double accuracy = 0.0;
    std::size_t count = 0;
    std::size_t correct = 0;
    bool low_confidence = false;

    std::string label() const { return key.empty() ? kind : kind + "=" + key; }
};

struct CellKey {
    std::string scenario_train;
    std::string scenario_test;
    int r = 1;
    double train_fraction = 1.0;
};

struct SampleRecord {
    std::size_t tau = 0;
    std::int64_t t = 0;
    std::vector<std::optional<TrackId>> votes;
    std::vector<std::optional<double>> distances;
    std::optional<TrackId> chosen_track;
    std::optional<ObjectId> chosen_gt_id;
    ObjectId label_gt_id = 0;
    bool correct = false;
    int objects_at_tau = 0;
    std::optional<double> speed;
    std::optional<SpeedBucket> speed_bucket;
    std::optional<bool> association_gt;
    std::optional<bool> association_detected;
};

struct MetricsReport {
    CellKey cell;
    GridSpec grid;
    double top1 = 0.0;
    std::size_t count = 0;
    std::vector<StratumMetric> strata; // starts with "overall"
    std::optional<double> association_gt;
    std::optional<double> association_detected;
    nlohmann::json metadata = nlohmann::json::object();
    std::vector<SampleRecord> samples; // per-sample prediction dump

    const StratumMetric* find(const std::string& kind, const std::string& key) const;
};

struct EvalOptions {
    double gate = kDefaultGateRadius;
    bool strata_objects = true;
    bool strata_speed = true;
    int speed_window = 5; // window length used for the speed estimate
};

// Runs the identification pipeline on windows of length r ending at `ends`
// and scores it against the episode labels.
MetricsReport evaluate(const EpisodeView& view, std::span<const std::size_t> ends, int r,
                       const CenterPredictor& predictor, const EvalOptions& options, const CellKey& cell);

// Per-frame (power, user center) pairs at the given positions.
std::vector<TrainingSample> training_samples(const EpisodeDataset& episode, std::span<const std::size_t> frames);

// Fraction of positions whose predicted cell equals the label cell.
double cell_accuracy(const EpisodeDataset& episode, std::span<const std::size_t> frames,
                     const CenterPredictor& predictor);

// Data preparation shared by training and evaluation: positions are the ends
// of `align_r`-frame windows so every r <= align_r sees the same test set.
struct PreparedSplit {
    std::vector<std::size_t> positions; // window ends, ascending
    SplitResult split;                  // indices into `positions`

    std::vector<std::size_t> train_positions(double fraction = 1.0) const;
    std::vector<std::size_t> test_positions() const;
};

PreparedSplit prepare_split(const EpisodeView& view, int align_r, const SplitSpec& spec);

struct ScenarioSpec {
    std::string tag;
    GenerationConfig generation;
    std::int64_t frames = 5000;
    std::uint64_t seed = 1;
    std::string dataset_path; // non-empty: load this file instead of generating
};

struct CrossPair {
    std::string train;
    std::string test;
};

struct ExperimentConfig {
    std::vector<ScenarioSpec> scenarios;
    std::vector<int> r_values{1, 3, 5};
    std::vector<double> train_fractions{1.0};
    std::vector<CrossPair> pairs; // empty: every scenario against itself
    TrainConfig train;
    GridSpec grid;
    SplitSpec split;
    EvalOptions eval;

    void validate() const;
    int align_r() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// A scenario's episode, its observed view and its split. The episode lives
// on the heap so the view stays valid when this object moves.
struct PreparedScenario {
    std::shared_ptr<const EpisodeDataset> episode;
    std::shared_ptr<const EpisodeView> view;
    PreparedSplit split;
};

PreparedScenario prepare_scenario(EpisodeDataset episode, int align_r, const SplitSpec& spec);
PreparedScenario prepare_scenario(const ScenarioSpec& spec, int align_r, const SplitSpec& split);

// Trained predictor plus the provenance recorded in every report it feeds.
struct TrainedModel {
    CenterPredictor predictor;
    std::vector<EpochStats> history;
    nlohmann::json info = nlohmann::json::object();
};

TrainedModel train_on(const PreparedScenario& scenario, double fraction, const TrainConfig& train,
                      const GridSpec& grid);

// One report per r for a trained model scored on `test`'s held-out windows.
// The model's normalizer is reused as is: nothing is refit on `test`.
std::vector<MetricsReport> evaluate_model(const TrainedModel& model, const PreparedScenario& test,
                                          std::span<const int> r_values, const EvalOptions& options,
                                          const CellKey& cell, int align_r);

struct ExperimentResult {
    std::vector<MetricsReport> reports;
    std::vector<std::string> errors; // per-cell failures, not fatal
};

// Cell groups in grid order: pairs (or each scenario with itself) x fractions.
struct CellGroup {
    CrossPair pair;
    double fraction = 1.0;
};
std::vector<CellGroup> cell_groups(const ExperimentConfig& config);

// Trains once for the group and evaluates every r.
std::vector<MetricsReport> run_cell_group(const ExperimentConfig& config, const CellGroup& group,
                                          const PreparedScenario& train, const PreparedScenario& test);

ExperimentResult run_experiment(const ExperimentConfig& config);

} // namespace userid

#endif
