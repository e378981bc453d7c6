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

#include "userid/identify.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "userid/errors.hpp"

namespace userid {

RelevantObjectMatrix ObservedFrame::relevant_objects() const {
    RelevantObjectMatrix b;
    b.rows.reserve(detections.size());
    for (const auto& d : detections)
        b.rows.push_back(d.center);
    return b;
}

ObservedFrame observe(std::int64_t t, std::span<const Detection> detections, const PowerVector& power) {
    ObservedFrame f;
    f.t = t;
    f.power = power;
    f.detections.reserve(detections.size());
    for (const auto& d : detections)
        f.detections.push_back({d.center, d.confidence});
    return f;
}

CenterEstimator estimator_for(const CenterPredictor& predictor) {
    return [&predictor](const PowerVector& p) { return predictor.predict_center(p); };
}

std::size_t select_nearest(const RelevantObjectMatrix& b, Vec2 b_hat) {
    if (b.empty())
        throw NoCandidatesError();
    std::size_t best = 0;
    double best_d = distance(b[0], b_hat);
    for (std::size_t i = 1; i < b.size(); ++i) {
        const double d = distance(b[i], b_hat);
        if (d < best_d) {
            best = i;
            best_d = d;
        }
    }
    return best;
}

TrackAssignment initial_assignment(std::size_t detections, TrackId next_fresh_id) {
    TrackAssignment a;
    a.ids.reserve(detections);
    for (std::size_t i = 0; i < detections; ++i)
        a.ids.push_back(next_fresh_id++);
    a.next_fresh_id = next_fresh_id;
    return a;
}

TrackAssignment associate(std::span<const Vec2> prev_centers, std::span<const TrackId> prev_ids,
                          std::span<const Vec2> next_centers, TrackId next_fresh_id, double gate) {
    if (prev_centers.size() != prev_ids.size())
        throw std::invalid_argument("associate: centers and ids differ in length");

    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    pairs.reserve(prev_centers.size() * next_centers.size());
    for (std::size_t i = 0; i < prev_centers.size(); ++i)
        for (std::size_t j = 0; j < next_centers.size(); ++j)
            pairs.emplace_back(distance(prev_centers[i], next_centers[j]), i, j);
    std::sort(pairs.begin(), pairs.end());

    std::vector<bool> prev_used(prev_centers.size(), false);
    std::vector<std::optional<TrackId>> assigned(next_centers.size());
    for (const auto& [d, i, j] : pairs) {
        if (d > gate)
            break;
        if (prev_used[i] || assigned[j])
            continue;
        prev_used[i] = true;
        assigned[j] = prev_ids[i];
    }

    TrackAssignment out;
    out.ids.reserve(next_centers.size());
    for (auto& id : assigned)
        out.ids.push_back(id ? *id : next_fresh_id++);
    out.next_fresh_id = next_fresh_id;
    return out;
}

std::vector<TrackAssignment> track_sequence(std::span<const std::vector<Vec2>> frames, double gate) {
    std::vector<TrackAssignment> out;
    out.reserve(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
        if (f == 0)
            out.push_back(initial_assignment(frames[0].size()));
        else
            out.push_back(associate(frames[f - 1], out.back().ids, frames[f], out.back().next_fresh_id, gate));
    }
    return out;
}

std::optional<FrameVote> identify_frame(const ObservedFrame& frame, const CenterEstimator& predictor,
                                        const TrackAssignment& assignment, std::size_t frame_offset) {
    if (frame.detections.empty())
        return std::nullopt;
    if (assignment.ids.size() != frame.detections.size())
        throw std::invalid_argument("identify_frame: assignment does not cover the frame's detections");
    const RelevantObjectMatrix b = frame.relevant_objects();
    const Vec2 b_hat = predictor(frame.power);
    const std::size_t row = select_nearest(b, b_hat);
    return FrameVote{frame_offset, assignment.ids[row], row, b[row], b_hat, distance(b[row], b_hat)};
}

std::optional<TrackId> majority_vote(std::span<const std::optional<TrackId>> votes) {
    std::map<TrackId, std::pair<int, std::size_t>> tally; // id -> (count, latest frame)
    for (std::size_t f = 0; f < votes.size(); ++f) {
        if (!votes[f])
            continue;
        auto& entry = tally[*votes[f]];
        ++entry.first;
        entry.second = f;
    }
    std::optional<TrackId> best;
    std::pair<int, std::size_t> best_key{0, 0};
    for (const auto& [id, key] : tally) {
        if (!best || key > best_key) {
            best = id;
            best_key = key;
        }
    }
    return best;
}

SequenceResult identify_sequence(const SequenceSample& sample, const CenterEstimator& predictor, double gate) {
    if (sample.frames.empty())
        throw std::invalid_argument("identify_sequence: empty sequence");

    std::vector<std::vector<Vec2>> centers;
    centers.reserve(sample.frames.size());
    for (const auto& f : sample.frames)
        centers.push_back(f.relevant_objects().rows);

    SequenceResult res;
    res.assignments = track_sequence(centers, gate);

    std::vector<std::optional<TrackId>> ids;
    for (std::size_t f = 0; f < sample.frames.size(); ++f) {
        res.votes.push_back(identify_frame(sample.frames[f], predictor, res.assignments[f], f));
        ids.push_back(res.votes.back() ? std::optional<TrackId>(res.votes.back()->track) : std::nullopt);
    }

    const auto winner = majority_vote(ids);
    if (!winner)
        throw NoCandidatesError();
    res.track = *winner;

    for (std::size_t f = sample.frames.size(); f-- > 0;) {
        const auto& a = res.assignments[f].ids;
        auto it = std::find(a.begin(), a.end(), res.track);
        if (it != a.end()) {
            res.frame = f;
            res.detection = static_cast<std::size_t>(it - a.begin());
            res.center = centers[f][res.detection];
            break;
        }
    }
    return res;
}

} // namespace userid
