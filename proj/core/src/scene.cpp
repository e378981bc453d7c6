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

#include "userid/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "userid/errors.hpp"

namespace userid {

namespace {

// In-FOV x interval of a lane, intersected with the road extent.
std::pair<double, double> visible_span(const ScenarioConfig& cfg, int lane) {
    const double half_fov = deg_to_rad(cfg.camera_fov_deg) / 2.0;
    // Shrink slightly so spawned centers are strictly inside the FOV.
    const double reach = cfg.lane_y_offsets[lane] * std::tan(half_fov) * (1.0 - 1e-9);
    const double half_road = cfg.road_extent / 2.0;
    return {std::max(-reach, -half_road), std::min(reach, half_road)};
}

} // namespace

void ScenarioConfig::validate() const {
    if (lane_count < 1)
        throw ConfigError("lane_count must be >= 1");
    if (static_cast<int>(lane_y_offsets.size()) != lane_count)
        throw ConfigError("lane_y_offsets must have lane_count entries");
    for (double y : lane_y_offsets)
        if (!(y > 0.0))
            throw ConfigError("lane_y_offsets must be positive (lanes in front of the camera)");
    if (!lane_directions.empty()) {
        if (static_cast<int>(lane_directions.size()) != lane_count)
            throw ConfigError("lane_directions must be empty or have lane_count entries");
        for (int d : lane_directions)
            if (d != 1 && d != -1)
                throw ConfigError("lane_directions entries must be +1 or -1");
    }
    if (!(road_extent > 0.0))
        throw ConfigError("road_extent must be positive");
    if (vehicle_count_range.first < 1 || vehicle_count_range.first > vehicle_count_range.second)
        throw ConfigError("vehicle_count_range must satisfy 1 <= min <= max");
    if (speed_range.first < 0.0 || speed_range.first > speed_range.second)
        throw ConfigError("speed_range must satisfy 0 <= min <= max");
    if (!(vehicle_size.first > 0.0) || !(vehicle_size.second > 0.0))
        throw ConfigError("vehicle_size must be positive");
    if (!(frame_rate > 0.0))
        throw ConfigError("frame_rate must be > 0");
    if (!(camera_fov_deg > 0.0) || !(camera_fov_deg < 180.0))
        throw ConfigError("camera_fov_deg must be in (0, 180)");
    if (!(image_aspect > 0.0) || !(mount_height > 0.0) || min_gap < 0.0)
        throw ConfigError("image_aspect and mount_height must be positive, min_gap non-negative");

    int capacity = 0;
    for (int lane = 0; lane < lane_count; ++lane)
        capacity += lane_capacity(lane);
    if (capacity < vehicle_count_range.second)
        throw ConfigError("lanes cannot fit " + std::to_string(vehicle_count_range.second) +
                          " vehicles without overlap (capacity " + std::to_string(capacity) + ")");
}

int ScenarioConfig::lane_direction(int lane) const {
    return lane_directions.empty() ? 1 : lane_directions[lane];
}

int ScenarioConfig::lane_capacity(int lane) const {
    const auto [lo, hi] = visible_span(*this, lane);
    if (hi < lo)
        return 0;
    const double slot = vehicle_size.first + min_gap;
    return static_cast<int>(std::floor((hi - lo) / slot)) + 1;
}

const VehicleState* WorldSnapshot::user() const {
    for (const auto& v : vehicles)
        if (v.is_user)
            return &v;
    return nullptr;
}

const GroundTruthObject* GroundTruthFrame::user() const {
    for (const auto& o : objects)
        if (o.is_user)
            return &o;
    return nullptr;
}

CameraModel CameraModel::from_scenario(const ScenarioConfig& cfg) {
    CameraModel cam;
    cam.fov_deg = cfg.camera_fov_deg;
    cam.image_aspect = cfg.image_aspect;
    cam.mount_height = cfg.mount_height;
    cam.reference_range = *std::min_element(cfg.lane_y_offsets.begin(), cfg.lane_y_offsets.end());
    return cam;
}

double CameraModel::azimuth_from_u(double u) const {
    return std::atan(std::tan(half_fov()) * (2.0 * u - 1.0));
}

WorldSnapshot spawn_world(const ScenarioConfig& config, Rng& rng, ObjectId first_id) {
    config.validate();

    std::uniform_int_distribution<int> count_dist(config.vehicle_count_range.first, config.vehicle_count_range.second);
    const int count = count_dist(rng);

    // Uniform lane per vehicle among lanes that still have room.
    std::vector<int> per_lane(config.lane_count, 0);
    std::vector<int> lane_of(count);
    for (int i = 0; i < count; ++i) {
        std::vector<int> open;
        for (int lane = 0; lane < config.lane_count; ++lane)
            if (per_lane[lane] < config.lane_capacity(lane))
                open.push_back(lane);
        std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
        lane_of[i] = open[pick(rng)];
        ++per_lane[lane_of[i]];
    }

    std::uniform_real_distribution<double> speed_dist(config.speed_range.first, config.speed_range.second);
    std::vector<double> lane_speed(config.lane_count);
    for (int lane = 0; lane < config.lane_count; ++lane)
        lane_speed[lane] = config.lane_direction(lane) * speed_dist(rng);

    // Non-overlapping uniform placement: draw sorted offsets in the free
    // length, then re-insert one slot per preceding vehicle.
    const double slot = config.vehicle_size.first + config.min_gap;
    std::vector<std::vector<double>> lane_xs(config.lane_count);
    for (int lane = 0; lane < config.lane_count; ++lane) {
        const int n = per_lane[lane];
        if (n == 0)
            continue;
        const auto [lo, hi] = visible_span(config, lane);
        const double free_len = std::max(0.0, (hi - lo) - (n - 1) * slot);
        std::uniform_real_distribution<double> offset(0.0, free_len);
        std::vector<double> xs(n);
        for (auto& x : xs)
            x = offset(rng);
        std::sort(xs.begin(), xs.end());
        for (int k = 0; k < n; ++k)
            xs[k] = lo + xs[k] + k * slot;
        lane_xs[lane] = std::move(xs);
    }

    WorldSnapshot world;
    world.t = 0;
    world.next_id = first_id;
    std::vector<std::size_t> taken(config.lane_count, 0);
    for (int i = 0; i < count; ++i) {
        const int lane = lane_of[i];
        VehicleState v;
        v.id = world.next_id++;
        v.lane = lane;
        v.position = {lane_xs[lane][taken[lane]++], config.lane_y_offsets[lane]};
        v.speed = lane_speed[lane];
        world.vehicles.push_back(v);
    }

    std::uniform_int_distribution<int> user_pick(0, count - 1);
    world.vehicles[user_pick(rng)].is_user = true;
    return world;
}

WorldSnapshot step_world(const WorldSnapshot& world, const ScenarioConfig& config) {
    WorldSnapshot next;
    next.t = world.t + 1;
    next.next_id = world.next_id;
    const double half_road = config.road_extent / 2.0;
    for (const auto& v : world.vehicles) {
        VehicleState moved = v;
        moved.position.x += v.speed / config.frame_rate;
        const bool exited = moved.position.x > half_road || moved.position.x < -half_road;
        if (exited) {
            if (config.exit_policy == ExitPolicy::retire)
                continue;
            moved.position.x += moved.position.x > half_road ? -config.road_extent : config.road_extent;
            moved.id = next.next_id++;
        }
        next.vehicles.push_back(moved);
    }
    return next;
}

std::optional<Projection> project(const CameraModel& camera, const VehicleState& vehicle,
                                  std::pair<double, double> vehicle_size) {
    const Vec2 p = vehicle.position;
    if (!(p.y > 0.0))
        return std::nullopt;
    const double half_fov = camera.half_fov();
    const double azimuth = std::atan2(p.x, p.y);
    if (std::abs(azimuth) > half_fov)
        return std::nullopt;

    const double tan_half = std::tan(half_fov);
    Projection out;
    out.azimuth = azimuth;
    out.range = std::hypot(p.x, p.y);
    // x / y equals tan(azimuth) exactly; avoids the atan2/tan round trip.
    out.center.x = std::clamp(0.5 + (p.x / p.y) / (2.0 * tan_half), 0.0, 1.0);
    out.center.y = std::clamp(0.5 + 0.25 * camera.reference_range / out.range, 0.0, 1.0);
    // Vehicle width doubles as its height for the vertical extent.
    out.box.w = vehicle_size.first / (2.0 * out.range * tan_half);
    out.box.h = vehicle_size.second * camera.image_aspect / (2.0 * out.range * tan_half);
    return out;
}

std::optional<GroundTruthFrame> ground_truth_frame(const WorldSnapshot& world, const CameraModel& camera,
                                                   std::pair<double, double> vehicle_size) {
    GroundTruthFrame frame;
    frame.t = world.t;
    bool user_seen = false;
    for (const auto& v : world.vehicles) {
        auto proj = project(camera, v, vehicle_size);
        if (!proj)
            continue;
        frame.objects.push_back({v.id, proj->center, proj->box, proj->range, proj->azimuth, v.is_user});
        user_seen = user_seen || v.is_user;
    }
    if (!user_seen)
        return std::nullopt;
    std::sort(frame.objects.begin(), frame.objects.end(),
              [](const GroundTruthObject& a, const GroundTruthObject& b) { return a.id < b.id; });
    return frame;
}

} // namespace userid
