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

#ifndef USERID_SCENE_HPP
#define USERID_SCENE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "userid/random.hpp"
#include "userid/types.hpp"

namespace userid {

enum class ExitPolicy {
    wrap,   // re-enter at the opposite road end with a fresh id
    retire, // removed from the world
};

// Vehicle-to-infrastructure street seen from a basestation at the origin.
// The camera and the phased array share a boresight along +y; lanes run
// parallel to x at the given perpendicular offsets.
struct ScenarioConfig {
    int lane_count = 3;
    std::vector<double> lane_y_offsets{6.0, 10.0, 16.0};
    double road_extent = 80.0; // visible road span, centered on x = 0
    std::pair<int, int> vehicle_count_range{1, 5};
    std::pair<double, double> speed_range{4.0, 12.0};
    std::pair<double, double> vehicle_size{4.5, 1.8}; // (length, width)
    double frame_rate = 10.0;
    double camera_fov_deg = 110.0;
    std::uint64_t seed = 1;

    // Not part of the flat scenario keys proper, but config-exposed.
    ExitPolicy exit_policy = ExitPolicy::wrap;
    std::vector<int> lane_directions; // +1 / -1 per lane; empty means all +1
    double image_aspect = 16.0 / 9.0;
    double mount_height = 4.0;
    double min_gap = 1.0; // bumper-to-bumper clearance at spawn
    std::string scenario_tag = "default";

    // Throws ConfigError on a violated invariant, including lanes that cannot
    // hold vehicle_count_range.second vehicles without overlap.
    void validate() const;

    int lane_direction(int lane) const;
    // Number of non-overlapping vehicles that fit in the in-FOV part of a lane.
    int lane_capacity(int lane) const;
};

struct VehicleState {
    ObjectId id = 0;
    Vec2 position;      // meters, basestation-centered ground frame
    double speed = 0.0; // signed, along x
    int lane = 0;
    bool is_user = false;

    friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct WorldSnapshot {
    std::int64_t t = 0;
    std::vector<VehicleState> vehicles;
    ObjectId next_id = 0; // next fresh id handed out on wrap or respawn

    const VehicleState* user() const;

    friend bool operator==(const WorldSnapshot&, const WorldSnapshot&) = default;
};

struct CameraModel {
    double fov_deg = 110.0;
    double image_aspect = 16.0 / 9.0;
    double mount_height = 4.0;
    // Ground range that maps to v = 0.75 (the nearest lane).
    double reference_range = 6.0;

    static CameraModel from_scenario(const ScenarioConfig& cfg);

    double half_fov() const { return deg_to_rad(fov_deg) / 2.0; }
    // Inverse of the horizontal tan-mapping.
    double azimuth_from_u(double u) const;
};

struct ImageBox {
    double w = 0.0;
    double h = 0.0;
};

struct Projection {
    Vec2 center;
    ImageBox box;
    double range = 0.0;
    double azimuth = 0.0;
};

struct GroundTruthObject {
    ObjectId id = 0;
    Vec2 center;
    ImageBox box;
    double range = 0.0;
    double azimuth = 0.0;
    bool is_user = false;
};

struct GroundTruthFrame {
    std::int64_t t = 0;
    std::vector<GroundTruthObject> objects; // ordered by id

    const GroundTruthObject* user() const;
};

// Fresh world with all vehicles inside the camera field of view. `first_id`
// seeds the world-unique id counter so respawns never reuse ids.
WorldSnapshot spawn_world(const ScenarioConfig& config, Rng& rng, ObjectId first_id = 0);

WorldSnapshot step_world(const WorldSnapshot& world, const ScenarioConfig& config);

// Pinhole projection onto the normalized image plane; empty when the vehicle
// is behind the camera or outside the horizontal field of view.
std::optional<Projection> project(const CameraModel& camera, const VehicleState& vehicle,
                                  std::pair<double, double> vehicle_size = {4.5, 1.8});

// Empty when the user is not visible, in which case the caller regenerates.
std::optional<GroundTruthFrame> ground_truth_frame(const WorldSnapshot& world, const CameraModel& camera,
                                                   std::pair<double, double> vehicle_size = {4.5, 1.8});

} // namespace userid

#endif
