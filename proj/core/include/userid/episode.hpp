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

#ifndef USERID_EPISODE_HPP
#define USERID_EPISODE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "userid/channel.hpp"
#include "userid/detect.hpp"
#include "userid/identify.hpp"
#include "userid/scene.hpp"

namespace userid {

// Everything needed to synthesize an episode, apart from length and seed.
struct GenerationConfig {
    ScenarioConfig scenario;
    ArrayConfig array;
    NoiseConfig noise;
    DetectorConfig detector;
    int codebook_size = 64; // Q

    void validate() const;
    nlohmann::json to_json() const;
    static GenerationConfig from_json(const nlohmann::json& j);
    std::string fingerprint() const;
};

struct FrameLabels {
    ObjectId user_gt_id = 0;
    Vec2 user_center;
    std::vector<GroundTruthObject> objects; // every in-FOV object, pre-occlusion
    Vec2 user_world_position;
};

struct EpisodeFrame {
    std::int64_t t = 0;
    // Contiguous drive segment; a new segment starts whenever the world is
    // respawned because the user left the field of view.
    std::int64_t segment = 0;
    PowerVector power;
    std::vector<Detection> detections; // gt_id is evaluation-only
    FrameLabels labels;
};

struct EpisodeDataset {
    std::string scenario_tag;
    std::string config_fingerprint;
    GenerationConfig config;
    std::uint64_t seed = 0;
    std::vector<EpisodeFrame> frames;

    std::size_t size() const { return frames.size(); }
};

// Runs scene -> channel -> detector for `num_frames` frames. Seed streams
// "world", "noise" and "detector" are independent, so changing detector
// settings leaves trajectories and powers untouched.
EpisodeDataset generate_episode(const GenerationConfig& config, std::int64_t num_frames, std::uint64_t seed);

// Model-visible projection of an episode; ground-truth fields stay behind.
std::vector<ObservedFrame> observed_frames(const EpisodeDataset& episode);

} // namespace userid

#endif
