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

#include "userid/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>

#include "userid/errors.hpp"

namespace userid {

using nlohmann::json;

namespace {

// Copies present keys into fields and rejects keys nobody asked for.
class Reader {
public:
    Reader(const json& j, std::string what, std::initializer_list<const char*> skipped = {})
        : j_(j), what_(std::move(what)) {
        if (!j_.is_object())
            throw ConfigError(what_ + ": expected a JSON object");
        for (const char* s : skipped)
            seen_.insert(s);
    }

    template <typename T>
    void get(const char* key, T& field) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end())
            return;
        try {
            field = it->template get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(what_ + "." + key + ": " + e.what());
        }
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError(what_ + ": unknown key '" + it.key() + "'");
    }

private:
    const json& j_;
    std::string what_;
    std::set<std::string> seen_;
};

} // namespace

json to_json(const ScenarioConfig& c) {
    return json{{"lane_count", c.lane_count},
                {"lane_y_offsets", c.lane_y_offsets},
                {"road_extent", c.road_extent},
                {"vehicle_count_range", {c.vehicle_count_range.first, c.vehicle_count_range.second}},
                {"speed_range", {c.speed_range.first, c.speed_range.second}},
                {"vehicle_size", {c.vehicle_size.first, c.vehicle_size.second}},
                {"frame_rate", c.frame_rate},
                {"camera_fov_deg", c.camera_fov_deg},
                {"seed", c.seed},
                {"exit_policy", c.exit_policy == ExitPolicy::wrap ? "wrap" : "retire"},
                {"lane_directions", c.lane_directions},
                {"image_aspect", c.image_aspect},
                {"mount_height", c.mount_height},
                {"min_gap", c.min_gap},
                {"scenario_tag", c.scenario_tag}};
}

ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig c;
    Reader r(j, "scenario", {"array", "noise", "detector", "train", "grid", "codebook_size"});
    r.get("lane_count", c.lane_count);
    r.get("lane_y_offsets", c.lane_y_offsets);
    r.get("road_extent", c.road_extent);
    r.get("vehicle_count_range", c.vehicle_count_range);
    r.get("speed_range", c.speed_range);
    r.get("vehicle_size", c.vehicle_size);
    r.get("frame_rate", c.frame_rate);
    r.get("camera_fov_deg", c.camera_fov_deg);
    r.get("seed", c.seed);
    std::string policy = c.exit_policy == ExitPolicy::wrap ? "wrap" : "retire";
    r.get("exit_policy", policy);
    if (policy == "wrap")
        c.exit_policy = ExitPolicy::wrap;
    else if (policy == "retire")
        c.exit_policy = ExitPolicy::retire;
    else
        throw ConfigError("scenario.exit_policy must be 'wrap' or 'retire'");
    r.get("lane_directions", c.lane_directions);
    r.get("image_aspect", c.image_aspect);
    r.get("mount_height", c.mount_height);
    r.get("min_gap", c.min_gap);
    r.get("scenario_tag", c.scenario_tag);
    r.finish();
    // A lane_y_offsets list alone implies its lane count.
    if (!j.contains("lane_count"))
        c.lane_count = static_cast<int>(c.lane_y_offsets.size());
    c.validate();
    return c;
}

json to_json(const ArrayConfig& c) {
    return json{{"num_elements", c.num_elements},
                {"element_spacing", c.element_spacing},
                {"boresight", c.boresight},
                {"fov_deg", c.fov_deg}};
}

ArrayConfig array_from_json(const json& j) {
    ArrayConfig c;
    Reader r(j, "array");
    r.get("num_elements", c.num_elements);
    r.get("element_spacing", c.element_spacing);
    r.get("boresight", c.boresight);
    r.get("fov_deg", c.fov_deg);
    r.finish();
    c.validate();
    return c;
}

json to_json(const NoiseConfig& c) {
    return json{{"symbol_power", c.symbol_power},     {"noise_variance", c.noise_variance},
                {"subcarriers", c.subcarriers},       {"cyclic_prefix", c.cyclic_prefix},
                {"range_ref", c.range_ref},           {"sidelobe_floor", c.sidelobe_floor}};
}

NoiseConfig noise_from_json(const json& j) {
    NoiseConfig c;
    Reader r(j, "noise");
    r.get("symbol_power", c.symbol_power);
    r.get("noise_variance", c.noise_variance);
    r.get("subcarriers", c.subcarriers);
    r.get("cyclic_prefix", c.cyclic_prefix);
    r.get("range_ref", c.range_ref);
    r.get("sidelobe_floor", c.sidelobe_floor);
    r.finish();
    c.validate();
    return c;
}

json to_json(const DetectorConfig& c) {
    return json{{"p_miss", c.p_miss},
                {"sigma_det", c.sigma_det},
                {"fp_rate", c.fp_rate},
                {"occlusion_iou", c.occlusion_iou},
                {"conf_range", {c.conf_range.first, c.conf_range.second}}};
}

DetectorConfig detector_from_json(const json& j) {
    DetectorConfig c;
    Reader r(j, "detector");
    r.get("p_miss", c.p_miss);
    r.get("sigma_det", c.sigma_det);
    r.get("fp_rate", c.fp_rate);
    r.get("occlusion_iou", c.occlusion_iou);
    r.get("conf_range", c.conf_range);
    r.finish();
    c.validate();
    return c;
}

json to_json(const TrainConfig& c) {
    return json{{"batch_size", c.batch_size},
                {"lr", c.lr},
                {"lr_decay_epochs", c.lr_decay_epochs},
                {"lr_factor", c.lr_factor},
                {"dropout", c.dropout},
                {"epochs", c.epochs},
                {"hidden_width", c.hidden_width},
                {"seed", c.seed},
                {"head", to_string(c.head)}};
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig c;
    Reader r(j, "train");
    r.get("batch_size", c.batch_size);
    r.get("lr", c.lr);
    r.get("lr_decay_epochs", c.lr_decay_epochs);
    r.get("lr_factor", c.lr_factor);
    r.get("dropout", c.dropout);
    r.get("epochs", c.epochs);
    r.get("hidden_width", c.hidden_width);
    r.get("seed", c.seed);
    std::string head = to_string(c.head);
    r.get("head", head);
    c.head = head_from_string(head);
    r.finish();
    c.validate();
    return c;
}

json to_json(const GridSpec& g) { return json{{"gx", g.gx}, {"gy", g.gy}}; }

GridSpec grid_from_json(const json& j) {
    GridSpec g;
    Reader r(j, "grid");
    r.get("gx", g.gx);
    r.get("gy", g.gy);
    r.finish();
    g.validate();
    return g;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

std::string fingerprint(const json& j) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace userid
