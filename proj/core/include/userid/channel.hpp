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

#ifndef USERID_CHANNEL_HPP
#define USERID_CHANNEL_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "userid/random.hpp"
#include "userid/types.hpp"

namespace userid {

using cdouble = std::complex<double>;
using CVector = std::vector<cdouble>;

// M-element uniform linear array sharing the camera boresight.
struct ArrayConfig {
    int num_elements = 16;        // M
    double element_spacing = 0.5; // in wavelengths
    double boresight = 0.0;       // radians, 0 = camera boresight
    double fov_deg = 110.0;       // angular span covered by the codebook

    void validate() const;
};

struct BeamCodebook {
    std::vector<CVector> beams;      // Q unit-norm weight vectors of length M
    std::vector<double> beam_angles; // radians, strictly increasing

    std::size_t size() const { return beams.size(); }
};

struct NoiseConfig {
    double symbol_power = 1.0;     // P
    double noise_variance = 1e-3;  // sigma^2
    int subcarriers = 1;           // K
    int cyclic_prefix = 0;         // D; carried for completeness, unused
    double range_ref = 6.0;        // range at which |alpha| = 1
    double sidelobe_floor = 0.0;   // epsilon_sl, imperfect-sectoring knob

    void validate() const;
};

struct ChannelVector {
    std::vector<CVector> h; // K per-subcarrier vectors of length M
    cdouble alpha;
    double user_azimuth = 0.0; // radians, relative to the array boresight
};

struct PowerVector {
    std::vector<double> p; // Q nonnegative receive powers, linear units
    std::int64_t t = 0;

    std::size_t size() const { return p.size(); }
    friend bool operator==(const PowerVector&, const PowerVector&) = default;
};

// Element m = exp(j * 2 pi * spacing * m * sin(azimuth)).
CVector steering_vector(const ArrayConfig& array, double azimuth);

// Q beams on a grid uniform in sin-space over the codebook field of view.
// Beam q stores conj(a(theta_q)) / sqrt(M) so that the non-conjugated
// product h^T f_q peaks when the user sits at theta_q.
BeamCodebook dft_codebook(const ArrayConfig& array, int num_beams);

// Single-path, frequency-flat line-of-sight channel to a user at `position`
// (basestation at the origin). Draws a uniform carrier phase from `rng`.
ChannelVector los_channel(Vec2 position, const ArrayConfig& array, const NoiseConfig& noise, Rng& rng);

// h^T f, no conjugation.
cdouble transpose_product(std::span<const cdouble> h, std::span<const cdouble> f);

// Beam sweep: p_q = (1/K) sum_k |h_k^T f_q sqrt(P) + n_k|^2 with fresh
// N_C(0, sigma^2) noise per (q, k).
PowerVector receive_power(const ChannelVector& channel, const BeamCodebook& codebook, const NoiseConfig& noise,
                          Rng& rng);

// Index of the strongest beam, ties toward the lowest index.
std::size_t best_beam(const PowerVector& power);

} // namespace userid

#endif
