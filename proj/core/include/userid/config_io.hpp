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

#ifndef USERID_CONFIG_IO_HPP
#define USERID_CONFIG_IO_HPP

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "userid/channel.hpp"
#include "userid/detect.hpp"
#include "userid/nn.hpp"
#include "userid/scene.hpp"

namespace userid {

// JSON (de)serialization of every configuration record. Readers start from
// the built-in defaults and overwrite only the keys present; unknown keys are
// a ConfigError so typos do not silently fall back to defaults.

nlohmann::json to_json(const ScenarioConfig& cfg);
nlohmann::json to_json(const ArrayConfig& cfg);
nlohmann::json to_json(const NoiseConfig& cfg);
nlohmann::json to_json(const DetectorConfig& cfg);
nlohmann::json to_json(const TrainConfig& cfg);
nlohmann::json to_json(const GridSpec& grid);

// The scenario document is flat; the nested sections "array", "noise",
// "detector", "train", "grid", "codebook_size" may sit next to it and are
// skipped here.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
ArrayConfig array_from_json(const nlohmann::json& j);
NoiseConfig noise_from_json(const nlohmann::json& j);
DetectorConfig detector_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);
GridSpec grid_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);

// Stable content fingerprint (hex FNV-1a 64 of the compact dump).
std::string fingerprint(const nlohmann::json& j);

} // namespace userid

#endif
