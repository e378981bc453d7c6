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

#ifndef USERID_DETECT_HPP
#define USERID_DETECT_HPP

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "userid/random.hpp"
#include "userid/scene.hpp"
#include "userid/types.hpp"

namespace userid {

// Parametric stand-in for a learned object detector. The knobs control miss
// rate, center jitter, false positives and mutual occlusion.
struct DetectorConfig {
    double p_miss = 0.05;
    double sigma_det = 0.01;
    double fp_rate = 0.1;
    double occlusion_iou = 0.4;
    std::pair<double, double> conf_range{0.5, 1.0};

    void validate() const;
};

struct Detection {
    Vec2 center;
    double confidence = 1.0;
    // Evaluation-only; empty for false positives. The identification stage
    // never reads it (it consumes RelevantObjectMatrix / ObservedDetection).
    std::optional<ObjectId> gt_id;

    friend bool operator==(const Detection&, const Detection&) = default;
};

// N x 2 matrix of normalized detection centers, row order = detection order.
struct RelevantObjectMatrix {
    std::vector<Vec2> rows;

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
    const Vec2& operator[](std::size_t i) const { return rows[i]; }
};

double box_iou(Vec2 center_a, ImageBox a, Vec2 center_b, ImageBox b);

// Greedy suppression in increasing-range order: an object is dropped when its
// box overlaps an already kept (nearer) object with IoU > threshold.
// Surviving objects keep their original order.
GroundTruthFrame occlusion_filter(const GroundTruthFrame& frame, double iou_threshold);

// True detections in object order, then false positives.
std::vector<Detection> synth_detect(const GroundTruthFrame& frame, const DetectorConfig& cfg, Rng& rng);

RelevantObjectMatrix build_relevant_object_matrix(std::span<const Detection> detections);

} // namespace userid

#endif
