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

#include "userid/episode.hpp"

#include "userid/config_io.hpp"
#include "userid/errors.hpp"

namespace userid {

using nlohmann::json;

void GenerationConfig::validate() const {
    scenario.validate();
    array.validate();
    noise.validate();
    detector.validate();
    if (codebook_size < 1)
        throw ConfigError("codebook_size must be >= 1");
}

json GenerationConfig::to_json() const {
    json j = userid::to_json(scenario);
    j["array"] = userid::to_json(array);
    j["noise"] = userid::to_json(noise);
    j["detector"] = userid::to_json(detector);
    j["codebook_size"] = codebook_size;
    return j;
}

GenerationConfig GenerationConfig::from_json(const json& j) {
    GenerationConfig c;
    c.scenario = scenario_from_json(j);
    if (j.contains("array"))
        c.array = array_from_json(j.at("array"));
    else
        c.array.fov_deg = c.scenario.camera_fov_deg;
    if (j.contains("noise"))
        c.noise = noise_from_json(j.at("noise"));
    else
        c.noise.range_ref = CameraModel::from_scenario(c.scenario).reference_range;
    if (j.contains("detector"))
        c.detector = detector_from_json(j.at("detector"));
    if (j.contains("codebook_size"))
        c.codebook_size = j.at("codebook_size").get<int>();
    c.validate();
    return c;
}

std::string GenerationConfig::fingerprint() const { return userid::fingerprint(to_json()); }

EpisodeDataset generate_episode(const GenerationConfig& config, std::int64_t num_frames, std::uint64_t seed) {
    config.validate();
    if (num_frames < 0)
        throw ConfigError("frame count must be non-negative");

    const SeedTree seeds(seed);
    Rng world_rng = seeds.stream("world");
    Rng noise_rng = seeds.stream("noise");
    Rng detector_rng = seeds.stream("detector");

    const CameraModel camera = CameraModel::from_scenario(config.scenario);
    const BeamCodebook codebook = dft_codebook(config.array, config.codebook_size);

    EpisodeDataset ep;
    ep.scenario_tag = config.scenario.scenario_tag;
    ep.config_fingerprint = config.fingerprint();
    ep.config = config;
    ep.seed = seed;
    ep.frames.reserve(static_cast<std::size_t>(num_frames));

    std::int64_t segment = 0;
    WorldSnapshot world = spawn_world(config.scenario, world_rng, 0);
    ObjectId segment_user = world.user()->id;

    for (std::int64_t t = 0; t < num_frames; ++t) {
        std::optional<GroundTruthFrame> gt;
        for (;;) {
            const VehicleState* user = world.user();
            if (user != nullptr && user->id == segment_user) {
                gt = ground_truth_frame(world, camera, config.scenario.vehicle_size);
                if (gt)
                    break;
            }
            // User left the field of view (or wrapped / retired): respawn.
            world = spawn_world(config.scenario, world_rng, world.next_id);
            segment_user = world.user()->id;
            ++segment;
        }
        gt->t = t;
        const VehicleState* user = world.user();

        EpisodeFrame frame;
        frame.t = t;
        frame.segment = segment;
        const ChannelVector ch = los_channel(user->position, config.array, config.noise, noise_rng);
        frame.power = receive_power(ch, codebook, config.noise, noise_rng);
        frame.power.t = t;

        const GroundTruthFrame visible = occlusion_filter(*gt, config.detector.occlusion_iou);
        frame.detections = synth_detect(visible, config.detector, detector_rng);

        frame.labels.user_gt_id = user->id;
        frame.labels.user_center = gt->user()->center;
        frame.labels.user_world_position = user->position;
        frame.labels.objects = std::move(gt->objects);
        ep.frames.push_back(std::move(frame));

        world = step_world(world, config.scenario);
    }
    return ep;
}

std::vector<ObservedFrame> observed_frames(const EpisodeDataset& episode) {
    std::vector<ObservedFrame> out;
    out.reserve(episode.frames.size());
    for (const auto& f : episode.frames)
        out.push_back(observe(f.t, f.detections, f.power));
    return out;
}

} // namespace userid
