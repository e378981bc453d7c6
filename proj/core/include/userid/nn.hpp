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

#ifndef USERID_NN_HPP
#define USERID_NN_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "userid/channel.hpp"
#include "userid/random.hpp"
#include "userid/types.hpp"

namespace userid {

// Quantization of the normalized image plane into gx * gy classes. Cells are
// half-open except the last row/column, which is closed at 1.
struct GridSpec {
    int gx = 32;
    int gy = 16;

    int cells() const { return gx * gy; }
    int cell_of(Vec2 c) const;
    Vec2 centroid(int cell) const;
    void validate() const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class HeadKind {
    classification, // softmax over grid cells, cross-entropy
    regression,     // two linear outputs, squared error
};

std::string to_string(HeadKind head);
HeadKind head_from_string(const std::string& name);

// Two-layer perceptron: logits = W2 * dropout(relu(W1 x + b1)) + b2.
struct MlpParams {
    Eigen::MatrixXd w1; // hidden x inputs
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2; // outputs x hidden
    Eigen::VectorXd b2;

    static MlpParams zeros(int inputs, int hidden, int outputs);
    // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
    static MlpParams init(int inputs, int hidden, int outputs, Rng& rng);

    int inputs() const { return static_cast<int>(w1.cols()); }
    int hidden() const { return static_cast<int>(w1.rows()); }
    int outputs() const { return static_cast<int>(w2.rows()); }
    bool all_finite() const;

    friend bool operator==(const MlpParams& a, const MlpParams& b) {
        return a.w1 == b.w1 && a.b1 == b.b1 && a.w2 == b.w2 && a.b2 == b.b2;
    }
};

struct TrainConfig {
    int batch_size = 32;
    double lr = 1e-3;
    std::vector<int> lr_decay_epochs{80, 120};
    double lr_factor = 0.1;
    double dropout = 0.3;
    int epochs = 150;
    int hidden_width = 128;
    std::uint64_t seed = 0;
    HeadKind head = HeadKind::classification;

    void validate() const;
    // Step schedule over 1-based epochs: every decay epoch <= `epoch` applies
    // one factor.
    double learning_rate_at(int epoch) const;
};

// Log-domain standardization of receive powers, fit on the training split.
struct PowerNormalizer {
    static constexpr double kEpsilon = 1e-12;

    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;

    std::size_t features() const { return static_cast<std::size_t>(mean.size()); }
    Eigen::VectorXd apply(const PowerVector& p) const;
    // Column per sample.
    Eigen::MatrixXd apply(std::span<const PowerVector> powers) const;

    friend bool operator==(const PowerNormalizer& a, const PowerNormalizer& b) {
        return a.mean == b.mean && a.stddev == b.stddev;
    }
};

Eigen::VectorXd log_power_features(const PowerVector& p);

// Throws DataError for an empty set.
PowerNormalizer fit_normalizer(std::span<const PowerVector> train_powers);

enum class Mode { train, eval };

// Inverted dropout mask (entries 0 or 1/(1-rate)), hidden x batch.
Eigen::MatrixXd sample_dropout_mask(int hidden, int batch, double rate, Rng& rng);

// Single-sample forward pass. `rng` is only used in train mode.
Eigen::VectorXd forward(const MlpParams& params, const Eigen::VectorXd& x, Mode mode, double dropout,
                        Rng* rng = nullptr);
// Batched eval-mode forward, column per sample.
Eigen::MatrixXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& x);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

struct Batch {
    Eigen::MatrixXd x;        // inputs x B
    std::vector<int> cells;   // classification targets
    Eigen::MatrixXd centers;  // 2 x B regression targets
};

struct LossAndGrad {
    double loss = 0.0;
    MlpParams grad;
};

// Mean loss over the batch and its gradient. `mask` (hidden x B) applies a
// fixed dropout pattern; nullptr means no dropout.
LossAndGrad loss_and_grad(const MlpParams& params, const Batch& batch, HeadKind head,
                          const Eigen::MatrixXd* mask = nullptr);

struct AdamState {
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsilon = 1e-8;

    MlpParams m;
    MlpParams v;
    std::int64_t step = 0;

    static AdamState zeros_like(const MlpParams& params);
};

void adam_step(AdamState& state, MlpParams& params, const MlpParams& grads, double lr);

struct TrainingSample {
    PowerVector power;
    Vec2 center; // user bounding-box center
};

struct EpochStats {
    int epoch = 0;
    double lr = 0.0;
    double mean_loss = 0.0;
    double train_accuracy = 0.0; // eval-mode cell accuracy after the epoch
};

struct TrainResult {
    MlpParams params;
    PowerNormalizer normalizer;
    std::vector<EpochStats> history;
};

TrainResult train(std::span<const TrainingSample> dataset, const TrainConfig& cfg, const GridSpec& grid);

// Trained predictor bundle: powers -> estimated user center.
struct CenterPredictor {
    MlpParams params;
    PowerNormalizer normalizer;
    GridSpec grid;
    HeadKind head = HeadKind::classification;

    Vec2 predict_center(const PowerVector& p) const;
    std::vector<Vec2> predict_centers(std::span<const PowerVector> powers) const;
};

// Centroid of the most probable cell (ties toward the lowest index), or the
// clamped regression output.
Vec2 predict_center(const MlpParams& params, const PowerNormalizer& normalizer, const GridSpec& grid,
                    const PowerVector& p, HeadKind head = HeadKind::classification);

} // namespace userid

#endif
