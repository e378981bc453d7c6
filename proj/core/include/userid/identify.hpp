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

#ifndef USERID_IDENTIFY_HPP
#define USERID_IDENTIFY_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "userid/channel.hpp"
#include "userid/detect.hpp"
#include "userid/nn.hpp"
#include "userid/types.hpp"

namespace userid {

inline constexpr double kDefaultGateRadius = 0.15;

// Model-visible detection: no ground-truth identity can reach the pipeline.
struct ObservedDetection {
    Vec2 center;
    double confidence = 1.0;

    friend bool operator==(const ObservedDetection&, const ObservedDetection&) = default;
};

struct ObservedFrame {
    std::int64_t t = 0;
    std::vector<ObservedDetection> detections;
    PowerVector power;

    RelevantObjectMatrix relevant_objects() const;
};

ObservedFrame observe(std::int64_t t, std::span<const Detection> detections, const PowerVector& power);

// r consecutive frames ending at tau; labels refer to the last frame.
struct SequenceSample {
    std::span<const ObservedFrame> frames;
    std::size_t tau = 0;           // index of the last frame in the episode
    std::int64_t segment = 0;      // drive segment the window lies in
    ObjectId label_user_gt_id = 0; // evaluation-only
    Vec2 label_user_center;        // evaluation-only

    std::size_t length() const { return frames.size(); }
};

struct TrackAssignment {
    std::vector<TrackId> ids; // per detection, unique within the frame
    TrackId next_fresh_id = 0;
};

struct FrameVote {
    std::size_t frame = 0; // offset within the sequence
    TrackId track = 0;
    std::size_t detection = 0; // row in that frame's relevant-object matrix
    Vec2 center;
    Vec2 predicted_center;
    double distance = 0.0;
};

using CenterEstimator = std::function<Vec2(const PowerVector&)>;

CenterEstimator estimator_for(const CenterPredictor& predictor);

// Row of B closest to `b_hat` (Euclidean), ties toward the lowest row.
// Throws NoCandidatesError when B is empty.
std::size_t select_nearest(const RelevantObjectMatrix& b, Vec2 b_hat);

// Greedy global matching: repeatedly take the closest unmatched (prev, next)
// pair while its distance is within `gate`, propagating the previous track
// id. Unmatched next detections get fresh ids; unmatched tracks retire.
TrackAssignment associate(std::span<const Vec2> prev_centers, std::span<const TrackId> prev_ids,
                          std::span<const Vec2> next_centers, TrackId next_fresh_id,
                          double gate = kDefaultGateRadius);

// Fresh ids for every detection of the first frame.
TrackAssignment initial_assignment(std::size_t detections, TrackId next_fresh_id = 0);

// Empty when the frame has no detections (abstention).
std::optional<FrameVote> identify_frame(const ObservedFrame& frame, const CenterEstimator& predictor,
                                        const TrackAssignment& assignment, std::size_t frame_offset = 0);

struct SequenceResult {
    TrackId track = 0;
    Vec2 center;
    // Location of the returned center: the chosen track's detection in the
    // last frame, or its most recent one when absent at the last frame.
    std::size_t frame = 0;
    std::size_t detection = 0;
    std::vector<std::optional<FrameVote>> votes;
    std::vector<TrackAssignment> assignments;
};

// Associate across frames, vote per frame, return the modal track. Vote ties
// go to the track voted in the most recent tied frame. Throws
// NoCandidatesError when every frame abstains.
SequenceResult identify_sequence(const SequenceSample& sample, const CenterEstimator& predictor,
                                 double gate = kDefaultGateRadius);

// Track assignments for a sequence of center sets, first frame included.
std::vector<TrackAssignment> track_sequence(std::span<const std::vector<Vec2>> frames,
                                            double gate = kDefaultGateRadius);

// Modal id with the most-recent tie-break; votes[i] empty = abstained.
std::optional<TrackId> majority_vote(std::span<const std::optional<TrackId>> votes);

} // namespace userid

#endif
