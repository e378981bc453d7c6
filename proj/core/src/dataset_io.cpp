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

#include "userid/dataset_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "userid/errors.hpp"

namespace userid {

using nlohmann::json;

namespace {

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

Vec2 vec_from(const json& j) {
    if (!j.is_array() || j.size() != 2)
        throw DataError("expected a [x, y] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

const std::set<std::string> kDetectionKeys{"u", "v", "conf"};
const std::set<std::string> kFrameKeys{"t", "segment", "power", "detections", "labels"};
const std::set<std::string> kObservedKeys{"t", "power", "detections"};

std::set<std::string> keys_of(const json& j) {
    std::set<std::string> out;
    for (const auto& [k, _] : j.items())
        out.insert(k);
    return out;
}

struct HeaderInfo {
    GenerationConfig config;
    std::string scenario_tag;
    std::string fingerprint;
    std::uint64_t seed = 0;
    std::size_t num_beams = 0;
    std::size_t frames = 0;
};

HeaderInfo parse_header(const json& h) {
    if (!h.is_object() || h.value("format", "") != kDatasetFormat)
        throw DataError(std::string("first line is not a ") + kDatasetFormat + " header");
    HeaderInfo info;
    info.config = GenerationConfig::from_json(h.at("config"));
    info.scenario_tag = h.at("scenario_tag").get<std::string>();
    info.fingerprint = h.at("config_fingerprint").get<std::string>();
    info.seed = h.at("seed").get<std::uint64_t>();
    info.num_beams = h.at("num_beams").get<std::size_t>();
    info.frames = h.at("frames").get<std::size_t>();
    if (info.fingerprint != info.config.fingerprint())
        throw DataError("config fingerprint " + info.fingerprint + " does not match the embedded config (" +
                        info.config.fingerprint() + ")");
    if (info.num_beams != static_cast<std::size_t>(info.config.codebook_size))
        throw DataError("num_beams " + std::to_string(info.num_beams) + " differs from codebook_size " +
                        std::to_string(info.config.codebook_size));
    return info;
}

EpisodeFrame parse_frame(const json& j, std::size_t num_beams) {
    if (!j.is_object())
        throw DataError("frame record is not an object");
    if (keys_of(j) != kFrameKeys)
        throw DataError("frame keys must be exactly t, segment, power, detections, labels");
    EpisodeFrame f;
    f.t = j.at("t").get<std::int64_t>();
    f.segment = j.at("segment").get<std::int64_t>();
    f.power.p = j.at("power").get<std::vector<double>>();
    f.power.t = f.t;
    if (f.power.p.size() != num_beams)
        throw DataError("power has " + std::to_string(f.power.p.size()) + " entries, header declares " +
                        std::to_string(num_beams));

    const json& labels = j.at("labels");
    if (!labels.is_object())
        throw DataError("labels missing");
    const auto det_ids = labels.at("detection_gt_ids");
    const json& dets = j.at("detections");
    if (!dets.is_array() || !det_ids.is_array() || det_ids.size() != dets.size())
        throw DataError("detection_gt_ids must align with detections");
    for (std::size_t i = 0; i < dets.size(); ++i) {
        const json& d = dets[i];
        if (!d.is_object() || keys_of(d) != kDetectionKeys)
            throw DataError("detection records must have exactly the keys u, v, conf");
        Detection det;
        det.center = {d.at("u").get<double>(), d.at("v").get<double>()};
        det.confidence = d.at("conf").get<double>();
        if (!det_ids[i].is_null())
            det.gt_id = det_ids[i].get<ObjectId>();
        f.detections.push_back(det);
    }

    f.labels.user_gt_id = labels.at("user_gt_id").get<ObjectId>();
    f.labels.user_center = vec_from(labels.at("user_center"));
    f.labels.user_world_position = vec_from(labels.at("user_world_position"));
    for (const auto& o : labels.at("objects")) {
        GroundTruthObject obj;
        obj.id = o.at("gt_id").get<ObjectId>();
        obj.center = {o.at("u").get<double>(), o.at("v").get<double>()};
        obj.box = {o.at("w").get<double>(), o.at("h").get<double>()};
        obj.range = o.at("range").get<double>();
        obj.azimuth = o.at("azimuth").get<double>();
        obj.is_user = o.at("is_user").get<bool>();
        f.labels.objects.push_back(obj);
    }
    return f;
}

} // namespace

json dataset_header(const EpisodeDataset& ds) {
    return {{"format", kDatasetFormat},
            {"scenario_tag", ds.scenario_tag},
            {"config_fingerprint", ds.config_fingerprint},
            {"config", ds.config.to_json()},
            {"seed", ds.seed},
            {"num_beams", ds.config.codebook_size},
            {"frames", ds.frames.size()}};
}

json frame_to_json(const EpisodeFrame& frame) {
    json dets = json::array();
    json det_ids = json::array();
    for (const auto& d : frame.detections) {
        dets.push_back({{"u", d.center.x}, {"v", d.center.y}, {"conf", d.confidence}});
        det_ids.push_back(d.gt_id ? json(*d.gt_id) : json(nullptr));
    }
    json objects = json::array();
    for (const auto& o : frame.labels.objects)
        objects.push_back({{"gt_id", o.id},
                           {"u", o.center.x},
                           {"v", o.center.y},
                           {"w", o.box.w},
                           {"h", o.box.h},
                           {"range", o.range},
                           {"azimuth", o.azimuth},
                           {"is_user", o.is_user}});
    return {{"t", frame.t},
            {"segment", frame.segment},
            {"power", frame.power.p},
            {"detections", dets},
            {"labels",
             {{"user_gt_id", frame.labels.user_gt_id},
              {"user_center", vec_json(frame.labels.user_center)},
              {"user_world_position", vec_json(frame.labels.user_world_position)},
              {"objects", objects},
              {"detection_gt_ids", det_ids}}}};
}

std::string serialize_dataset(const EpisodeDataset& ds) {
    std::string out = dataset_header(ds).dump();
    out += '\n';
    for (const auto& f : ds.frames) {
        out += frame_to_json(f).dump();
        out += '\n';
    }
    return out;
}

EpisodeDataset parse_dataset(std::istream& in) {
    EpisodeDataset ds;
    std::string line;
    std::size_t lineno = 0;
    std::optional<HeaderInfo> header;
    try {
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty())
                continue;
            const json j = json::parse(line);
            if (!header) {
                header = parse_header(j);
                ds.config = header->config;
                ds.scenario_tag = header->scenario_tag;
                ds.config_fingerprint = header->fingerprint;
                ds.seed = header->seed;
                continue;
            }
            EpisodeFrame f = parse_frame(j, header->num_beams);
            if (!ds.frames.empty() && f.t <= ds.frames.back().t)
                throw DataError("frame t=" + std::to_string(f.t) + " does not increase");
            ds.frames.push_back(std::move(f));
        }
    } catch (const DataError& e) {
        throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ConfigError& e) {
        throw DataError("line " + std::to_string(lineno) + ": invalid embedded config: " + e.what());
    } catch (const json::exception& e) {
        throw DataError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!header)
        throw DataError("dataset is empty (no header)");
    if (ds.frames.size() != header->frames)
        throw DataError("header declares " + std::to_string(header->frames) + " frames, found " +
                        std::to_string(ds.frames.size()));
    return ds;
}

EpisodeDataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open dataset " + path.string());
    try {
        return parse_dataset(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

json observed_frame_to_json(const ObservedFrame& frame) {
    json dets = json::array();
    for (const auto& d : frame.detections)
        dets.push_back({{"u", d.center.x}, {"v", d.center.y}, {"conf", d.confidence}});
    return {{"t", frame.t}, {"power", frame.power.p}, {"detections", dets}};
}

LintResult lint_dataset(std::istream& in) {
    LintResult res;
    std::string line;
    std::size_t lineno = 0;
    std::optional<HeaderInfo> header;
    std::optional<std::int64_t> last_t;
    EpisodeDataset ds;
    auto problem = [&](const std::string& msg) { res.problems.push_back("line " + std::to_string(lineno) + ": " + msg); };

    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            problem(std::string("not valid JSON: ") + e.what());
            continue;
        }
        if (!header) {
            try {
                header = parse_header(j);
                ds.config = header->config;
            } catch (const std::exception& e) {
                problem(e.what());
                return res; // without a header nothing else can be checked
            }
            continue;
        }
        if (j.is_object() && j.contains("format")) {
            problem("header record after the first line");
            continue;
        }
        try {
            EpisodeFrame f = parse_frame(j, header->num_beams);
            if (last_t && f.t <= *last_t)
                problem("t=" + std::to_string(f.t) + " is not strictly increasing");
            last_t = f.t;
            ds.frames.push_back(std::move(f));
            ++res.frames;
        } catch (const std::exception& e) {
            problem(e.what());
        }
    }
    if (!header) {
        res.problems.push_back("no header record");
        return res;
    }
    if (res.frames != header->frames)
        res.problems.push_back("header declares " + std::to_string(header->frames) + " frames, found " +
                               std::to_string(res.frames));

    // Firewall: the pipeline's view of each frame exposes observables only.
    for (const auto& obs : observed_frames(ds)) {
        const json view = observed_frame_to_json(obs);
        if (keys_of(view) != kObservedKeys) {
            res.problems.push_back("model-visible view exposes unexpected fields at t=" + std::to_string(obs.t));
            continue;
        }
        for (const auto& d : view.at("detections"))
            if (keys_of(d) != kDetectionKeys)
                res.problems.push_back("model-visible detection exposes label fields at t=" + std::to_string(obs.t));
    }
    return res;
}

} // namespace userid
