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

#include "userid_tools/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iterator>
#include <memory>
#include <system_error>

#include "userid/errors.hpp"

namespace userid::tools {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
            throw std::runtime_error("sha256 init failed");
    }
    void update(const void* data, std::size_t n) {
        if (EVP_DigestUpdate(ctx_.get(), data, n) != 1)
            throw std::runtime_error("sha256 update failed");
    }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1)
            throw std::runtime_error("sha256 final failed");
        static constexpr char kHex[] = "0123456789abcdef";
        std::string out;
        for (unsigned int i = 0; i < len; ++i) {
            out += kHex[md[i] >> 4];
            out += kHex[md[i] & 0xf];
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, void (*)(EVP_MD_CTX*)> ctx_;
};

json artifact_json(const ArtifactHash& a) { return {{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}}; }

ArtifactHash artifact_from(const json& j) {
    return {j.at("path").get<std::string>(), j.at("sha256").get<std::string>(), j.at("bytes").get<std::uintmax_t>()};
}

} // namespace

std::string sha256_hex(std::string_view data) {
    Sha256 h;
    h.update(data.data(), data.size());
    return h.hex();
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot read " + path.string());
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path())
        fs::create_directories(path.parent_path(), ec);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw DataError("cannot write " + path.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out)
            throw DataError("short write to " + path.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw DataError("cannot move output into place at " + path.string());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path resolve_output(const fs::path& path) {
    const char* dir = std::getenv(kOutputDirEnv);
    if (dir == nullptr || *dir == '\0' || path.is_absolute())
        return path;
    return fs::path(dir) / path;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json RunManifest::to_json() const {
    json in = json::array();
    for (const auto& a : inputs)
        in.push_back(artifact_json(a));
    json out = json::array();
    for (const auto& a : outputs)
        out.push_back(artifact_json(a));
    return {{"format", kManifestFormat}, {"command", command},   {"argv", argv},   {"resolved_config", resolved_config},
            {"seeds", seeds},            {"start_time", start_time}, {"inputs", in}, {"outputs", out}};
}

RunManifest RunManifest::from_json(const json& j) {
    if (j.value("format", "") != kManifestFormat)
        throw DataError("not a run manifest");
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.resolved_config = j.at("resolved_config");
    m.seeds = j.at("seeds");
    m.start_time = j.at("start_time").get<std::string>();
    for (const auto& a : j.at("inputs"))
        m.inputs.push_back(artifact_from(a));
    for (const auto& a : j.at("outputs"))
        m.outputs.push_back(artifact_from(a));
    return m;
}

ArtifactHash hash_artifact(const fs::path& file, const fs::path& manifest_dir) {
    ArtifactHash a;
    const fs::path abs = fs::absolute(file).lexically_normal();
    const fs::path base = fs::absolute(manifest_dir).lexically_normal();
    const fs::path rel = abs.lexically_relative(base);
    a.path = (!rel.empty() && *rel.begin() != "..") ? rel.generic_string() : abs.generic_string();
    a.sha256 = sha256_file(file);
    a.bytes = fs::file_size(file);
    return a;
}

void write_manifest(const fs::path& manifest_path, RunManifest manifest, const std::vector<fs::path>& inputs,
                    const std::vector<fs::path>& outputs) {
    const fs::path dir = manifest_path.has_parent_path() ? manifest_path.parent_path() : fs::path(".");
    for (const auto& p : inputs)
        manifest.inputs.push_back(hash_artifact(p, dir));
    for (const auto& p : outputs)
        manifest.outputs.push_back(hash_artifact(p, dir));
    write_file_atomic(manifest_path, manifest.to_json().dump(2) + "\n");
}

std::vector<std::string> verify_manifest(const fs::path& manifest_path) {
    const RunManifest m = RunManifest::from_json(json::parse(read_file(manifest_path)));
    const fs::path dir = manifest_path.has_parent_path() ? manifest_path.parent_path() : fs::path(".");
    std::vector<std::string> problems;
    auto check = [&](const ArtifactHash& a) {
        const fs::path p = fs::path(a.path).is_absolute() ? fs::path(a.path) : dir / a.path;
        if (!fs::exists(p)) {
            problems.push_back(a.path + ": missing");
            return;
        }
        if (sha256_file(p) != a.sha256)
            problems.push_back(a.path + ": hash mismatch");
    };
    for (const auto& a : m.outputs)
        check(a);
    for (const auto& a : m.inputs)
        check(a);
    return problems;
}

} // namespace userid::tools
