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

#include "userid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "userid/config_io.hpp"
#include "userid/dataset_io.hpp"
#include "userid/report.hpp"
#include "userid/errors.hpp"

namespace userid {

using nlohmann::json;

SequenceSample EpisodeView::window(std::size_t tau, int r) const {
    if (r < 1 || tau + 1 < static_cast<std::size_t>(r) || tau >= observed_.size())
        throw std::out_of_range("window: tau/r out of range");
    const std::size_t first = tau + 1 - static_cast<std::size_t>(r);
    const auto& frame = episode_->frames[tau];
    if (episode_->frames[first].segment != frame.segment)
        throw DataError("window crosses a segment boundary");

    SequenceSample s;
    s.frames = std::span<const ObservedFrame>(observed_).subspan(first, static_cast<std::size_t>(r));
    s.tau = tau;
    s.segment = frame.segment;
    s.label_user_gt_id = frame.labels.user_gt_id;
    s.label_user_center = frame.labels.user_center;
    return s;
}

std::vector<std::size_t> window_ends(const EpisodeDataset& episode, int r) {
    if (r < 1)
        throw ConfigError("sequence length r must be >= 1");
    std::vector<std::size_t> ends;
    std::size_t run = 0;
    for (std::size_t i = 0; i < episode.frames.size(); ++i) {
        run = (i > 0 && episode.frames[i].segment == episode.frames[i - 1].segment) ? run + 1 : 1;
        if (run >= static_cast<std::size_t>(r))
            ends.push_back(i);
    }
    return ends;
}

std::vector<SequenceSample> windows_at(const EpisodeView& view, std::span<const std::size_t> ends, int r) {
    std::vector<SequenceSample> out;
    out.reserve(ends.size());
    for (std::size_t tau : ends)
        out.push_back(view.window(tau, r));
    return out;
}

std::vector<SequenceSample> sliding_windows(const EpisodeView& view, int r) {
    const auto ends = window_ends(view.episode(), r);
    if (ends.empty())
        throw DataError("episode has no segment of at least r = " + std::to_string(r) + " frames");
    return windows_at(view, ends, r);
}

SplitResult split(std::span<const SequenceSample> samples, const SplitSpec& spec) {
    if (samples.empty())
        throw DataError("cannot split an empty sample set");
    if (spec.train_fraction < 0.0 || spec.train_fraction > 1.0)
        throw ConfigError("train_fraction must be in [0, 1]");

    const std::size_t n = samples.size();
    const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));

    // Segments in first-appearance order, members in time order.
    std::vector<std::int64_t> seg_order;
    std::map<std::int64_t, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < n; ++i) {
        auto [it, inserted] = members.try_emplace(samples[i].segment);
        if (inserted)
            seg_order.push_back(samples[i].segment);
        it->second.push_back(i);
    }
    for (auto& [seg, idx] : members)
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return samples[a].tau < samples[b].tau; });

    const SeedTree seeds(spec.seed);
    Rng seg_rng = seeds.stream("split-segments");
    std::shuffle(seg_order.begin(), seg_order.end(), seg_rng);

    SplitResult res;
    std::vector<std::size_t> test;
    for (std::int64_t seg : seg_order)
        for (std::size_t i : members[seg])
            (res.train.size() < n_train ? res.train : test).push_back(i);

    // Prune test windows that share a frame with any train window.
    std::map<std::int64_t, std::vector<std::pair<std::size_t, std::size_t>>> train_spans;
    for (std::size_t i : res.train)
        train_spans[samples[i].segment].emplace_back(samples[i].tau + 1 - samples[i].length(), samples[i].tau);
    for (std::size_t i : test) {
        const std::size_t lo = samples[i].tau + 1 - samples[i].length();
        const std::size_t hi = samples[i].tau;
        bool overlaps = false;
        if (auto it = train_spans.find(samples[i].segment); it != train_spans.end())
            for (const auto& [a, b] : it->second)
                if (lo <= b && a <= hi) {
                    overlaps = true;
                    break;
                }
        if (overlaps)
            ++res.pruned;
        else
            res.test.push_back(i);
    }
    std::sort(res.test.begin(), res.test.end());

    Rng order_rng = seeds.stream("split-order");
    std::shuffle(res.train.begin(), res.train.end(), order_rng);
    return res;
}

std::vector<std::size_t> training_subset(std::span<const std::size_t> train, double fraction) {
    if (fraction <= 0.0 || fraction > 1.0)
        throw ConfigError("training fraction must be in (0, 1]");
    auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(train.size())));
    k = std::clamp<std::size_t>(k, train.empty() ? 0 : 1, train.size());
    return {train.begin(), train.begin() + static_cast<std::ptrdiff_t>(k)};
}

double top1_accuracy(std::span<const std::optional<ObjectId>> predictions, std::span<const ObjectId> labels) {
    if (predictions.size() != labels.size())
        throw std::invalid_argument("top1_accuracy: " + std::to_string(predictions.size()) + " predictions vs " +
                                    std::to_string(labels.size()) + " labels");
    if (labels.empty())
        throw std::invalid_argument("top1_accuracy: no samples");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        correct += predictions[i].has_value() && *predictions[i] == labels[i];
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

bool user_track_persistent(const AssociationCase& c) {
    std::optional<TrackId> track;
    for (std::size_t f = 0; f < c.gt_ids.size(); ++f) {
        for (std::size_t d = 0; d < c.gt_ids[f].size(); ++d) {
            if (c.gt_ids[f][d] != c.user)
                continue;
            const TrackId id = c.assignments[f].ids[d];
            if (track && *track != id)
                return false;
            track = id;
        }
    }
    return track.has_value();
}

double association_accuracy(std::span<const AssociationCase> cases) {
    if (cases.empty())
        return 0.0;
    std::size_t ok = 0;
    for (const auto& c : cases)
        ok += user_track_persistent(c);
    return static_cast<double>(ok) / static_cast<double>(cases.size());
}

const char* to_string(SpeedBucket b) {
    switch (b) {
    case SpeedBucket::slow:
        return "slow";
    case SpeedBucket::average:
        return "average";
    case SpeedBucket::fast:
        return "fast";
    }
    return "?";
}

double window_speed(Vec2 first, Vec2 last, int r) { return distance(first, last) / static_cast<double>(r); }

SpeedStrata speed_buckets(std::span<const double> speeds) {
    if (speeds.size() < 2)
        throw DataError("speed strata need at least two sequences");
    SpeedStrata s;
    const double n = static_cast<double>(speeds.size());
    s.mean = std::accumulate(speeds.begin(), speeds.end(), 0.0) / n;
    double var = 0.0;
    for (double v : speeds)
        var += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(var / n);
    const double lo = s.mean - s.stddev / 2.0;
    const double hi = s.mean + s.stddev / 2.0;
    s.buckets.reserve(speeds.size());
    for (double v : speeds) {
        if (v <= lo)
            s.buckets.push_back(SpeedBucket::slow);
        else if (v >= hi)
            s.buckets.push_back(SpeedBucket::fast);
        else
            s.buckets.push_back(SpeedBucket::average);
    }
    return s;
}

const StratumMetric* MetricsReport::find(const std::string& kind, const std::string& key) const {
    for (const auto& s : strata)
        if (s.kind == kind && s.key == key)
            return &s;
    return nullptr;
}

namespace {

StratumMetric make_stratum(std::string kind, std::string key, std::size_t correct, std::size_t count) {
    StratumMetric m;
    m.kind = std::move(kind);
    m.key = std::move(key);
    m.count = count;
    m.correct = correct;
    m.accuracy = count ? static_cast<double>(correct) / static_cast<double>(count) : 0.0;
    return m;
}

AssociationCase detection_case(const EpisodeDataset& ep, std::size_t tau, int r, double gate) {
    AssociationCase c;
    c.user = ep.frames[tau].labels.user_gt_id;
    std::vector<std::vector<Vec2>> centers;
    for (std::size_t f = tau + 1 - static_cast<std::size_t>(r); f <= tau; ++f) {
        std::vector<Vec2> cs;
        std::vector<std::optional<ObjectId>> ids;
        for (const auto& d : ep.frames[f].detections) {
            cs.push_back(d.center);
            ids.push_back(d.gt_id);
        }
        centers.push_back(std::move(cs));
        c.gt_ids.push_back(std::move(ids));
    }
    c.assignments = track_sequence(centers, gate);
    return c;
}

// Association on ground-truth boxes of every visible object.
AssociationCase ground_truth_case(const EpisodeDataset& ep, std::size_t tau, int r, double gate) {
    AssociationCase c;
    c.user = ep.frames[tau].labels.user_gt_id;
    std::vector<std::vector<Vec2>> centers;
    for (std::size_t f = tau + 1 - static_cast<std::size_t>(r); f <= tau; ++f) {
        std::vector<Vec2> cs;
        std::vector<std::optional<ObjectId>> ids;
        for (const auto& o : ep.frames[f].labels.objects) {
            cs.push_back(o.center);
            ids.push_back(o.id);
        }
        centers.push_back(std::move(cs));
        c.gt_ids.push_back(std::move(ids));
    }
    c.assignments = track_sequence(centers, gate);
    return c;
}

} // namespace

MetricsReport evaluate(const EpisodeView& view, std::span<const std::size_t> ends, int r,
                       const CenterPredictor& predictor, const EvalOptions& options, const CellKey& cell) {
    if (ends.empty())
        throw DataError("no test windows to evaluate");
    const EpisodeDataset& ep = view.episode();
    const auto samples = windows_at(view, ends, r);
    const CenterEstimator estimator = estimator_for(predictor);

    MetricsReport rep;
    rep.cell = cell;
    rep.cell.r = r;
    rep.grid = predictor.grid;
    rep.count = samples.size();
    rep.samples.resize(samples.size());

    std::vector<std::optional<ObjectId>> chosen(samples.size());
    std::vector<ObjectId> labels(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        SampleRecord& rec = rep.samples[i];
        rec.tau = s.tau;
        rec.t = ep.frames[s.tau].t;
        rec.label_gt_id = s.label_user_gt_id;
        rec.objects_at_tau = static_cast<int>(ep.frames[s.tau].labels.objects.size());
        labels[i] = s.label_user_gt_id;

        std::optional<SequenceResult> res;
        try {
            res = identify_sequence(s, estimator, options.gate);
        } catch (const NoCandidatesError&) {
        }
        if (res) {
            for (const auto& v : res->votes) {
                rec.votes.push_back(v ? std::optional<TrackId>(v->track) : std::nullopt);
                rec.distances.push_back(v ? std::optional<double>(v->distance) : std::nullopt);
            }
            rec.chosen_track = res->track;
            const std::size_t frame_idx = s.tau + 1 - s.length() + res->frame;
            rec.chosen_gt_id = ep.frames[frame_idx].detections[res->detection].gt_id;
        } else {
            rec.votes.assign(s.length(), std::nullopt);
            rec.distances.assign(s.length(), std::nullopt);
        }
        chosen[i] = rec.chosen_gt_id;
        rec.correct = rec.chosen_gt_id.has_value() && *rec.chosen_gt_id == rec.label_gt_id;

        if (r >= 2) {
            rec.association_gt = user_track_persistent(ground_truth_case(ep, s.tau, r, options.gate));
            rec.association_detected = user_track_persistent(detection_case(ep, s.tau, r, options.gate));
        }
    }

    rep.top1 = top1_accuracy(chosen, labels);
    const std::size_t n_correct =
        static_cast<std::size_t>(std::count_if(rep.samples.begin(), rep.samples.end(), [](auto& s) { return s.correct; }));
    rep.strata.push_back(make_stratum("overall", "", n_correct, rep.count));

    if (options.strata_objects) {
        std::map<int, std::pair<std::size_t, std::size_t>> by_count; // objects -> (correct, total)
        for (const auto& rec : rep.samples) {
            auto& e = by_count[rec.objects_at_tau];
            e.first += rec.correct;
            ++e.second;
        }
        for (const auto& [k, e] : by_count) {
            auto m = make_stratum("objects", std::to_string(k), e.first, e.second);
            m.low_confidence = k > kLowConfidenceObjectCount;
            rep.strata.push_back(m);
        }
    }

    if (options.strata_speed) {
        const int sw = options.speed_window;
        std::vector<std::size_t> with_speed;
        std::vector<double> speeds;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const std::size_t tau = samples[i].tau;
            if (tau + 1 < static_cast<std::size_t>(sw))
                continue;
            const std::size_t first = tau + 1 - static_cast<std::size_t>(sw);
            if (ep.frames[first].segment != ep.frames[tau].segment)
                continue;
            const double v = window_speed(ep.frames[first].labels.user_world_position,
                                          ep.frames[tau].labels.user_world_position, sw);
            rep.samples[i].speed = v;
            with_speed.push_back(i);
            speeds.push_back(v);
        }
        if (speeds.size() >= 2) {
            const SpeedStrata strata = speed_buckets(speeds);
            std::array<std::pair<std::size_t, std::size_t>, 3> acc{};
            for (std::size_t k = 0; k < with_speed.size(); ++k) {
                auto& rec = rep.samples[with_speed[k]];
                rec.speed_bucket = strata.buckets[k];
                auto& e = acc[static_cast<std::size_t>(strata.buckets[k])];
                e.first += rec.correct;
                ++e.second;
            }
            for (auto b : {SpeedBucket::slow, SpeedBucket::average, SpeedBucket::fast}) {
                const auto& e = acc[static_cast<std::size_t>(b)];
                auto m = make_stratum("speed", to_string(b), e.first, e.second);
                m.low_confidence = e.second == 0;
                rep.strata.push_back(m);
            }
            rep.metadata["speed_mean"] = strata.mean;
            rep.metadata["speed_std"] = strata.stddev;
            rep.metadata["speed_window"] = sw;
        }
    }

    if (r >= 2) {
        std::size_t gt_ok = 0, det_ok = 0;
        for (const auto& rec : rep.samples) {
            gt_ok += *rec.association_gt;
            det_ok += *rec.association_detected;
        }
        rep.strata.push_back(make_stratum("association_gt", "", gt_ok, rep.count));
        rep.strata.push_back(make_stratum("association_detected", "", det_ok, rep.count));
        rep.association_gt = rep.strata[rep.strata.size() - 2].accuracy;
        rep.association_detected = rep.strata.back().accuracy;
    }

    rep.metadata["object_count_definition"] = "ground-truth in-FOV objects at the last frame";
    rep.metadata["gate_radius"] = options.gate;
    return rep;
}

std::vector<TrainingSample> training_samples(const EpisodeDataset& episode, std::span<const std::size_t> frames) {
    std::vector<TrainingSample> out;
    out.reserve(frames.size());
    for (std::size_t i : frames)
        out.push_back({episode.frames.at(i).power, episode.frames.at(i).labels.user_center});
    return out;
}

double cell_accuracy(const EpisodeDataset& episode, std::span<const std::size_t> frames,
                     const CenterPredictor& predictor) {
    if (frames.empty())
        return 0.0;
    std::size_t ok = 0;
    for (std::size_t i : frames) {
        const auto& f = episode.frames.at(i);
        ok += predictor.grid.cell_of(predictor.predict_center(f.power)) == predictor.grid.cell_of(f.labels.user_center);
    }
    return static_cast<double>(ok) / static_cast<double>(frames.size());
}

std::vector<std::size_t> PreparedSplit::train_positions(double fraction) const {
    std::vector<std::size_t> out;
    for (std::size_t i : training_subset(split.train, fraction))
        out.push_back(positions[i]);
    return out;
}

std::vector<std::size_t> PreparedSplit::test_positions() const {
    std::vector<std::size_t> out;
    out.reserve(split.test.size());
    for (std::size_t i : split.test)
        out.push_back(positions[i]);
    return out;
}

PreparedSplit prepare_split(const EpisodeView& view, int align_r, const SplitSpec& spec) {
    PreparedSplit p;
    p.positions = window_ends(view.episode(), align_r);
    if (p.positions.empty())
        throw DataError("episode has no segment of at least " + std::to_string(align_r) + " frames");
    const auto samples = windows_at(view, p.positions, align_r);
    p.split = split(samples, spec);
    return p;
}

void ExperimentConfig::validate() const {
    if (scenarios.empty())
        throw ConfigError("experiment needs at least one scenario");
    std::set<std::string> tags;
    for (const auto& s : scenarios) {
        if (!tags.insert(s.tag).second)
            throw ConfigError("duplicate scenario tag '" + s.tag + "'");
        s.generation.validate();
        if (s.frames < 1)
            throw ConfigError("scenario '" + s.tag + "' needs at least one frame");
    }
    for (const auto& p : pairs)
        if (!tags.count(p.train) || !tags.count(p.test))
            throw ConfigError("unknown scenario tag in pair (" + p.train + ", " + p.test + ")");
    if (r_values.empty())
        throw ConfigError("r_values must not be empty");
    for (int r : r_values)
        if (r < 1)
            throw ConfigError("r values must be >= 1");
    for (double f : train_fractions)
        if (f <= 0.0 || f > 1.0)
            throw ConfigError("train fractions must be in (0, 1]");
    train.validate();
    grid.validate();
}

int ExperimentConfig::align_r() const {
    return std::max(*std::max_element(r_values.begin(), r_values.end()), eval.strata_speed ? eval.speed_window : 1);
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig c;
    try {
        for (const auto& s : j.at("scenarios")) {
            ScenarioSpec spec;
            spec.tag = s.at("tag").get<std::string>();
            spec.generation = GenerationConfig::from_json(s.value("config", json::object()));
            spec.generation.scenario.scenario_tag = spec.tag;
            spec.frames = s.value("frames", spec.frames);
            spec.seed = s.value("seed", spec.seed);
            spec.dataset_path = s.value("dataset", std::string());
            c.scenarios.push_back(std::move(spec));
        }
        c.r_values = j.value("r_values", c.r_values);
        c.train_fractions = j.value("train_fractions", c.train_fractions);
        for (const auto& p : j.value("pairs", json::array()))
            c.pairs.push_back({p.at("train").get<std::string>(), p.at("test").get<std::string>()});
        if (j.contains("train"))
            c.train = train_config_from_json(j.at("train"));
        if (j.contains("grid"))
            c.grid = grid_from_json(j.at("grid"));
        if (j.contains("split")) {
            c.split.train_fraction = j.at("split").value("train_fraction", c.split.train_fraction);
            c.split.seed = j.at("split").value("seed", c.split.seed);
        }
        if (j.contains("eval")) {
            const auto& e = j.at("eval");
            c.eval.gate = e.value("gate", c.eval.gate);
            c.eval.speed_window = e.value("speed_window", c.eval.speed_window);
            if (e.contains("strata")) {
                const auto strata = e.at("strata").get<std::vector<std::string>>();
                c.eval.strata_objects = std::find(strata.begin(), strata.end(), "objects") != strata.end();
                c.eval.strata_speed = std::find(strata.begin(), strata.end(), "speed") != strata.end();
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("experiment config: ") + e.what());
    }
    c.validate();
    return c;
}

json ExperimentConfig::to_json() const {
    json scen = json::array();
    for (const auto& s : scenarios) {
        json js{{"tag", s.tag}, {"frames", s.frames}, {"seed", s.seed}, {"config", s.generation.to_json()}};
        if (!s.dataset_path.empty())
            js["dataset"] = s.dataset_path;
        scen.push_back(std::move(js));
    }
    json pr = json::array();
    for (const auto& p : pairs)
        pr.push_back({{"train", p.train}, {"test", p.test}});
    std::vector<std::string> strata;
    if (eval.strata_objects)
        strata.push_back("objects");
    if (eval.strata_speed)
        strata.push_back("speed");
    return json{{"scenarios", scen},
                {"r_values", r_values},
                {"train_fractions", train_fractions},
                {"pairs", pr},
                {"train", userid::to_json(train)},
                {"grid", userid::to_json(grid)},
                {"split", {{"train_fraction", split.train_fraction}, {"seed", split.seed}}},
                {"eval", {{"gate", eval.gate}, {"speed_window", eval.speed_window}, {"strata", strata}}}};
}

PreparedScenario prepare_scenario(EpisodeDataset episode, int align_r, const SplitSpec& spec) {
    PreparedScenario p;
    auto ep = std::make_shared<const EpisodeDataset>(std::move(episode));
    p.view = std::make_shared<const EpisodeView>(*ep);
    p.episode = std::move(ep);
    p.split = prepare_split(*p.view, align_r, spec);
    return p;
}

PreparedScenario prepare_scenario(const ScenarioSpec& spec, int align_r, const SplitSpec& split) {
    EpisodeDataset ep = spec.dataset_path.empty() ? generate_episode(spec.generation, spec.frames, spec.seed)
                                                  : read_dataset(spec.dataset_path);
    ep.scenario_tag = spec.tag;
    return prepare_scenario(std::move(ep), align_r, split);
}

TrainedModel train_on(const PreparedScenario& scenario, double fraction, const TrainConfig& train_cfg,
                      const GridSpec& grid) {
    const auto positions = scenario.split.train_positions(fraction);
    if (positions.empty())
        throw DataError("empty training split");
    const auto samples = training_samples(*scenario.episode, positions);
    TrainResult tr = train(samples, train_cfg, grid);
    TrainedModel m;
    m.predictor = {std::move(tr.params), std::move(tr.normalizer), grid, train_cfg.head};
    m.info = {{"scenario", scenario.episode->scenario_tag},
              {"dataset_fingerprint", scenario.episode->config_fingerprint},
              {"train_windows", positions.size()},
              {"train_fraction", fraction},
              {"final_train_loss", tr.history.back().mean_loss},
              {"final_train_cell_accuracy", tr.history.back().train_accuracy}};
    m.history = std::move(tr.history);
    return m;
}

std::vector<MetricsReport> evaluate_model(const TrainedModel& model, const PreparedScenario& test,
                                          std::span<const int> r_values, const EvalOptions& options,
                                          const CellKey& cell, int align_r) {
    const auto test_pos = test.split.test_positions();
    if (test_pos.empty())
        throw DataError("empty test split");
    const json heldout_cell = cell_accuracy(*test.episode, test_pos, model.predictor);
    std::vector<MetricsReport> out;
    for (int r : r_values) {
        if (r > align_r)
            throw ConfigError("r = " + std::to_string(r) + " exceeds the window alignment " + std::to_string(align_r));
        MetricsReport rep = evaluate(*test.view, test_pos, r, model.predictor, options, cell);
        rep.metadata["training"] = model.info;
        rep.metadata["heldout_cell_accuracy"] = heldout_cell;
        rep.metadata["test_windows"] = test_pos.size();
        rep.metadata["pruned_test_windows"] = test.split.split.pruned;
        rep.metadata["align_r"] = align_r;
        rep.metadata["grid"] = to_json(model.predictor.grid);
        out.push_back(std::move(rep));
    }
    return out;
}

std::vector<CellGroup> cell_groups(const ExperimentConfig& config) {
    std::vector<CrossPair> pairs = config.pairs;
    if (pairs.empty())
        for (const auto& s : config.scenarios)
            pairs.push_back({s.tag, s.tag});
    std::vector<CellGroup> out;
    for (const auto& p : pairs)
        for (double f : config.train_fractions)
            out.push_back({p, f});
    return out;
}

std::vector<MetricsReport> run_cell_group(const ExperimentConfig& config, const CellGroup& group,
                                          const PreparedScenario& train_scenario, const PreparedScenario& test) {
    const TrainedModel model = train_on(train_scenario, group.fraction, config.train, config.grid);
    const CellKey cell{group.pair.train, group.pair.test, 1, group.fraction};
    return evaluate_model(model, test, config.r_values, config.eval, cell, config.align_r());
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    const int align = config.align_r();

    ExperimentResult result;
    std::map<std::string, PreparedScenario> prepared;
    for (const auto& s : config.scenarios) {
        try {
            prepared.emplace(s.tag, prepare_scenario(s, align, config.split));
        } catch (const std::exception& e) {
            result.errors.push_back("scenario " + s.tag + ": " + e.what());
        }
    }

    for (const auto& group : cell_groups(config)) {
        try {
            if (!prepared.count(group.pair.train) || !prepared.count(group.pair.test))
                throw DataError("scenario data unavailable");
            auto reports = run_cell_group(config, group, prepared.at(group.pair.train), prepared.at(group.pair.test));
            for (auto& r : reports)
                result.reports.push_back(std::move(r));
        } catch (const std::exception& e) {
            result.errors.push_back(group.pair.train + "->" + group.pair.test + " fraction=" + format_double(group.fraction) +
                                    ": " + e.what());
        }
    }
    return result;
}

} // namespace userid
