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

#ifndef USERID_RANDOM_HPP
#define USERID_RANDOM_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace userid {

using Rng = std::mt19937_64;

// Hierarchical seeding: a master seed fans out into independent named
// streams (world, detector, noise, shuffle, dropout, ...). Changing how many
// draws one subsystem makes never perturbs another subsystem's stream.
class SeedTree {
public:
    explicit SeedTree(std::uint64_t master) : master_(master) {}

    std::uint64_t master() const { return master_; }

    std::uint64_t derive(std::string_view tag) const {
        // FNV-1a over the tag, then mixed with the master through seed_seq.
        std::uint64_t h = 1469598103934665603ULL;
        for (unsigned char c : tag) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        std::seed_seq seq{static_cast<std::uint32_t>(master_), static_cast<std::uint32_t>(master_ >> 32),
                          static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
        std::uint32_t out[2];
        seq.generate(out, out + 2);
        return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    }

    Rng stream(std::string_view tag) const { return Rng(derive(tag)); }
    SeedTree child(std::string_view tag) const { return SeedTree(derive(tag)); }

private:
    std::uint64_t master_;
};

} // namespace userid

#endif
