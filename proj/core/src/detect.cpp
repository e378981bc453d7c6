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

#include "userid/detect.hpp"

#include <algorithm>
#include <numeric>

#include "userid/errors.hpp"

namespace userid {

void DetectorConfig::validate() const {
    if (p_miss < 0.0 || p_miss > 1.0)
        throw ConfigError("p_miss must be in [0, 1]");
    if (sigma_det < 0.0)
        throw ConfigError("sigma_det must be >= 0");
    if (fp_rate < 0.0)
        throw ConfigError("fp_rate must be >= 0");
    if (occlusion_iou < 0.0 || occlusion_iou > 1.0)
        throw ConfigError("occlusion_iou must be in [0, 1]");
    if (!(conf_range.first > 0.0) || conf_range.second > 1.0 || conf_range.first > conf_range.second)
        throw ConfigError("conf_range must satisfy 0 < min <= max <= 1");
}

double box_iou(Vec2 ca, ImageBox a, Vec2 cb, ImageBox b) {
    const double ix = std::max(0.0, std::min(ca.x + a.w / 2, cb.x + b.w / 2) - std::max(ca.x - a.w / 2, cb.x - b.w / 2));
    const double iy = std::max(0.0, std::min(ca.y + a.h / 2, cb.y + b.h / 2) - std::max(ca.y - a.h / 2, cb.y - b.h / 2));
    const double inter = ix * iy;
    const double uni = a.w * a.h + b.w * b.h - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

GroundTruthFrame occlusion_filter(const GroundTruthFrame& frame, double iou_threshold) {
    const auto& objs = frame.objects;
    std::vector<std::size_t> order(objs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return objs[a].range < objs[b].range; });

    std::vector<bool> keep(objs.size(), false);
    std::vector<std::size_t> kept;
    for (std::size_t i : order) {
        bool occluded = false;
        for (std::size_t k : kept) {
            if (box_iou(objs[i].center, objs[i].box, objs[k].center, objs[k].box) > iou_threshold) {
                occluded = true;
                break;
            }
        }
        if (!occluded) {
            keep[i] = true;
            kept.push_back(i);
        }
    }

    GroundTruthFrame out;
    out.t = frame.t;
    for (std::size_t i = 0; i < objs.size(); ++i)
        if (keep[i])
            out.objects.push_back(objs[i]);
    return out;
}

std::vector<Detection> synth_detect(const GroundTruthFrame& frame, const DetectorConfig& cfg, Rng& rng) {
    std::bernoulli_distribution miss(cfg.p_miss);
    std::normal_distribution<double> jitter(0.0, 1.0);
    std::uniform_real_distribution<double> conf(cfg.conf_range.first, cfg.conf_range.second);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<Detection> out;
    for (const auto& obj : frame.objects) {
        if (miss(rng))
            continue;
        Detection d;
        const double dx = jitter(rng);
        const double dy = jitter(rng);
        d.center.x = std::clamp(obj.center.x + cfg.sigma_det * dx, 0.0, 1.0);
        d.center.y = std::clamp(obj.center.y + cfg.sigma_det * dy, 0.0, 1.0);
        d.confidence = conf(rng);
        d.gt_id = obj.id;
        out.push_back(d);
    }

    if (cfg.fp_rate > 0.0) {
        std::poisson_distribution<int> fp_count(cfg.fp_rate);
        const int n_fp = fp_count(rng);
        for (int i = 0; i < n_fp; ++i) {
            Detection d;
            d.center.x = unit(rng);
            d.center.y = unit(rng);
            d.confidence = conf(rng);
            out.push_back(d);
        }
    }
    return out;
}

RelevantObjectMatrix build_relevant_object_matrix(std::span<const Detection> detections) {
    RelevantObjectMatrix b;
    b.rows.reserve(detections.size());
    for (const auto& d : detections)
        b.rows.push_back(d.center);
    return b;
}

} // namespace userid
