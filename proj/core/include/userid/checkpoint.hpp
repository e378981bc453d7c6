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

#ifndef USERID_CHECKPOINT_HPP
#define USERID_CHECKPOINT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "userid/nn.hpp"

namespace userid {

inline constexpr const char* kCheckpointFormat = "userid-checkpoint/1";

// Self-describing model file: grid, normalizer statistics, layer shapes and
// row-major parameter arrays, plus the training configuration.
struct Checkpoint {
    CenterPredictor predictor;
    TrainConfig train_config;
    std::vector<EpochStats> history;
    nlohmann::json metadata = nlohmann::json::object(); // dataset/split provenance

    int num_beams() const { return predictor.params.inputs(); }
};

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
// Throws DataError on a wrong format tag or inconsistent shapes.
Checkpoint checkpoint_from_json(const nlohmann::json& j);

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace userid

#endif
