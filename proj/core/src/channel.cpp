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

#include "userid/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "userid/errors.hpp"

namespace userid {

void ArrayConfig::validate() const {
    if (num_elements < 1)
        throw ConfigError("array must have at least one element");
    if (!(element_spacing > 0.0) || element_spacing > 1.0)
        throw ConfigError("element_spacing must be in (0, 1] wavelengths");
    if (!(fov_deg > 0.0) || !(fov_deg < 180.0))
        throw ConfigError("codebook fov_deg must be in (0, 180)");
}

void NoiseConfig::validate() const {
    if (!(symbol_power > 0.0))
        throw ConfigError("symbol power P must be > 0");
    if (noise_variance < 0.0)
        throw ConfigError("noise variance must be >= 0");
    if (subcarriers < 1)
        throw ConfigError("subcarrier count K must be >= 1");
    if (!(range_ref > 0.0))
        throw ConfigError("range_ref must be > 0");
    if (sidelobe_floor < 0.0)
        throw ConfigError("sidelobe_floor must be >= 0");
}

CVector steering_vector(const ArrayConfig& array, double azimuth) {
    CVector a(array.num_elements);
    const double phase_step = 2.0 * kPi * array.element_spacing * std::sin(azimuth);
    for (int m = 0; m < array.num_elements; ++m)
        a[m] = std::polar(1.0, phase_step * m);
    return a;
}

BeamCodebook dft_codebook(const ArrayConfig& array, int num_beams) {
    array.validate();
    if (num_beams < 1)
        throw ConfigError("codebook needs at least one beam");

    BeamCodebook cb;
    cb.beams.reserve(num_beams);
    cb.beam_angles.reserve(num_beams);
    const double span = std::sin(deg_to_rad(array.fov_deg) / 2.0);
    const double norm = 1.0 / std::sqrt(static_cast<double>(array.num_elements));
    for (int q = 0; q < num_beams; ++q) {
        // Cell-centered grid on [-span, span] in sin-space.
        const double s = -span + (2.0 * q + 1.0) * span / num_beams;
        const double angle = std::asin(s);
        CVector f = steering_vector(array, angle);
        for (auto& w : f)
            w = std::conj(w) * norm;
        cb.beams.push_back(std::move(f));
        cb.beam_angles.push_back(array.boresight + angle);
    }
    return cb;
}

ChannelVector los_channel(Vec2 position, const ArrayConfig& array, const NoiseConfig& noise, Rng& rng) {
    if (!(position.y > 0.0))
        throw std::invalid_argument("los_channel: user must be in front of the array");
    const double range = std::hypot(position.x, position.y);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);

    ChannelVector ch;
    ch.user_azimuth = std::atan2(position.x, position.y) - array.boresight;
    ch.alpha = std::polar(noise.range_ref / range, phase(rng));
    CVector a = steering_vector(array, ch.user_azimuth);
    for (auto& e : a)
        e *= ch.alpha;
    ch.h.assign(noise.subcarriers, a);
    return ch;
}

cdouble transpose_product(std::span<const cdouble> h, std::span<const cdouble> f) {
    if (h.size() != f.size())
        throw std::invalid_argument("transpose_product: length mismatch");
    cdouble acc{0.0, 0.0};
    for (std::size_t m = 0; m < h.size(); ++m)
        acc += h[m] * f[m];
    return acc;
}

PowerVector receive_power(const ChannelVector& channel, const BeamCodebook& codebook, const NoiseConfig& noise,
                          Rng& rng) {
    const std::size_t K = channel.h.size();
    if (K == 0)
        throw std::invalid_argument("receive_power: channel has no subcarriers");
    const double x = std::sqrt(noise.symbol_power);
    const double noise_std = std::sqrt(noise.noise_variance / 2.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    PowerVector out;
    out.p.resize(codebook.size());

    // Side-lobe floor: a fixed fraction of the mean noiseless beam power.
    double floor_power = 0.0;
    if (noise.sidelobe_floor > 0.0) {
        double mean = 0.0;
        for (const auto& f : codebook.beams) {
            double acc = 0.0;
            for (const auto& hk : channel.h)
                acc += std::norm(transpose_product(hk, f) * x);
            mean += acc / K;
        }
        floor_power = noise.sidelobe_floor * mean / codebook.size();
    }

    for (std::size_t q = 0; q < codebook.size(); ++q) {
        double acc = 0.0;
        for (const auto& hk : channel.h) {
            cdouble y = transpose_product(hk, codebook.beams[q]) * x;
            if (noise_std > 0.0) {
                const double re = gauss(rng);
                const double im = gauss(rng);
                y += cdouble(noise_std * re, noise_std * im);
            }
            acc += std::norm(y);
        }
        out.p[q] = acc / K + floor_power;
    }
    return out;
}

std::size_t best_beam(const PowerVector& power) {
    if (power.p.empty())
        throw std::invalid_argument("best_beam: empty power vector");
    std::size_t best = 0;
    for (std::size_t q = 1; q < power.p.size(); ++q)
        if (power.p[q] > power.p[best])
            best = q;
    return best;
}

} // namespace userid
