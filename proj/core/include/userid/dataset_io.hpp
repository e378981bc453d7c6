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

#ifndef USERID_DATASET_IO_HPP
#define USERID_DATASET_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "userid/episode.hpp"

namespace userid {

inline constexpr const char* kDatasetFormat = "userid-dataset/1";

// JSON Lines layout: one header object, then one object per frame. Ground
// truth lives only under "labels"; detection records carry {u, v, conf}.
nlohmann::json dataset_header(const EpisodeDataset& ds);
nlohmann::json frame_to_json(const EpisodeFrame& frame);
std::string serialize_dataset(const EpisodeDataset& ds);

// Throws DataError naming the offending line.
EpisodeDataset parse_dataset(std::istream& in);
EpisodeDataset read_dataset(const std::filesystem::path& path);

// Model-visible record as the pipeline receives it.
nlohmann::json observed_frame_to_json(const ObservedFrame& frame);

struct LintResult {
    std::size_t frames = 0;
    std::vector<std::string> problems;

    bool ok() const { return problems.empty(); }
};

// Collects every schema violation instead of stopping at the first, then
// checks that the deserialized model-visible view exposes no label field.
LintResult lint_dataset(std::istream& in);

} // namespace userid

#endif
