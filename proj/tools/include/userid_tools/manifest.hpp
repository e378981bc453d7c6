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

#ifndef USERID_TOOLS_MANIFEST_HPP
#define USERID_TOOLS_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace userid::tools {

inline constexpr const char* kManifestFormat = "userid-manifest/1";
inline constexpr const char* kOutputDirEnv = "USERID_OUTPUT_DIR";

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place, so readers
// never observe a partial file. Creates missing parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

// Relative output paths land under $USERID_OUTPUT_DIR when it is set.
std::filesystem::path resolve_output(const std::filesystem::path& path);

struct ArtifactHash {
    std::string path; // relative to the manifest directory when inside it
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    nlohmann::json resolved_config = nlohmann::json::object();
    nlohmann::json seeds = nlohmann::json::object();
    std::string start_time; // UTC, ISO 8601
    std::vector<ArtifactHash> inputs;
    std::vector<ArtifactHash> outputs;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

std::string utc_timestamp();

ArtifactHash hash_artifact(const std::filesystem::path& file, const std::filesystem::path& manifest_dir);

// Hashes `outputs` and `inputs` (as given) and writes the manifest atomically.
void write_manifest(const std::filesystem::path& manifest_path, RunManifest manifest,
                    const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::filesystem::path>& outputs);

// Empty when every listed artifact exists with the recorded hash.
std::vector<std::string> verify_manifest(const std::filesystem::path& manifest_path);

} // namespace userid::tools

#endif
