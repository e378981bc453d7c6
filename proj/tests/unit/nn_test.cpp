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

#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <numeric>

#include "userid/errors.hpp"
#include "userid/nn.hpp"

namespace userid {
namespace {

MlpParams random_params(int in, int hidden, int out, std::uint64_t seed) {
    Rng rng(seed);
    return MlpParams::init(in, hidden, out, rng);
}

Batch random_batch(int in, int n, int classes, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_int_distribution<int> cls(0, classes - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Batch b;
    b.x.resize(in, n);
    b.centers.resize(2, n);
    for (int c = 0; c < n; ++c) {
        for (int r = 0; r < in; ++r)
            b.x(r, c) = g(rng);
        b.cells.push_back(cls(rng));
        b.centers(0, c) = u(rng);
        b.centers(1, c) = u(rng);
    }
    return b;
}

TEST(Grid, CellsAndCentroids) {
    const GridSpec g{32, 16};
    EXPECT_EQ(g.cells(), 512);
    EXPECT_EQ(g.cell_of({0.0, 0.0}), 0);
    EXPECT_EQ(g.cell_of({1.0, 1.0}), 511);
    EXPECT_EQ(g.cell_of({1.0 / 32.0, 0.0}), 1);
    EXPECT_EQ(g.cell_of({0.0, 1.0 / 16.0}), 32);
    const Vec2 c = g.centroid(0);
    EXPECT_DOUBLE_EQ(c.x, 1.0 / 64.0);
    EXPECT_DOUBLE_EQ(c.y, 1.0 / 32.0);
    for (int cell = 0; cell < g.cells(); ++cell)
        EXPECT_EQ(g.cell_of(g.centroid(cell)), cell);
}

TEST(Grid, TwoByTwoAndOneByOneCentroids) {
    const GridSpec two{2, 2};
    EXPECT_EQ(two.centroid(0), (Vec2{0.25, 0.25}));
    EXPECT_EQ(two.centroid(1), (Vec2{0.75, 0.25}));
    EXPECT_EQ(two.centroid(2), (Vec2{0.25, 0.75}));
    EXPECT_EQ(two.centroid(3), (Vec2{0.75, 0.75}));
    const GridSpec one{1, 1};
    EXPECT_EQ(one.centroid(0), (Vec2{0.5, 0.5}));
    EXPECT_EQ(one.cell_of({0.9, 0.1}), 0);
}

TEST(Normalizer, ConstantFeatureGetsUnitScale) {
    std::vector<PowerVector> powers{{{1.0, 10.0}, 0}, {{1.0, 100.0}, 1}};
    const PowerNormalizer n = fit_normalizer(powers);
    EXPECT_NEAR(n.mean[0], 0.0, 1e-9);
    EXPECT_DOUBLE_EQ(n.stddev[0], 1.0);
    // 10 and 20 dB: mean 15, population std 5.
    EXPECT_NEAR(n.mean[1], 15.0, 1e-9);
    EXPECT_NEAR(n.stddev[1], 5.0, 1e-9);
    const Eigen::VectorXd z = n.apply(powers[1]);
    EXPECT_NEAR(z[1], 1.0, 1e-9);
}

TEST(Normalizer, StandardizesTrainingSet) {
    Rng rng(1);
    std::uniform_real_distribution<double> u(1e-4, 20.0);
    std::vector<PowerVector> powers(200);
    for (auto& p : powers)
        for (int q = 0; q < 8; ++q)
            p.p.push_back(u(rng));
    const PowerNormalizer n = fit_normalizer(powers);
    const Eigen::MatrixXd z = n.apply(powers);
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        const double mean = z.row(r).mean();
        const double var = (z.row(r).array() - mean).square().mean();
        EXPECT_NEAR(mean, 0.0, 1e-9);
        EXPECT_NEAR(var, 1.0, 1e-9);
    }
}

TEST(Normalizer, ZeroPowerIsFiniteAndErrorsAreTyped) {
    std::vector<PowerVector> powers{{{0.0, 1.0}, 0}, {{1.0, 0.0}, 1}};
    const PowerNormalizer n = fit_normalizer(powers);
    EXPECT_TRUE(n.apply(powers[0]).allFinite());
    EXPECT_THROW(fit_normalizer(std::vector<PowerVector>{}), DataError);
    EXPECT_THROW(n.apply(PowerVector{{1.0, 2.0, 3.0}, 0}), DataError);
}

TEST(Forward, ZeroParamsGiveUniformLoss) {
    const MlpParams p = MlpParams::zeros(6, 5, 12);
    const Batch b = random_batch(6, 9, 12, 2);
    EXPECT_NEAR(loss_and_grad(p, b, HeadKind::classification).loss, std::log(12.0), 1e-12);
}

TEST(Forward, NoDropoutTrainEqualsEval) {
    const MlpParams p = random_params(6, 10, 4, 3);
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(6, -1.0, 1.0);
    Rng rng(4);
    EXPECT_EQ(forward(p, x, Mode::train, 0.0, &rng), forward(p, x, Mode::eval, 0.0));
    EXPECT_EQ(forward(p, x, Mode::eval, 0.7), forward(p, x, Mode::eval, 0.7));
}

TEST(Forward, BatchMatchesSingle) {
    const MlpParams p = random_params(5, 7, 3, 5);
    const Batch b = random_batch(5, 6, 3, 6);
    const Eigen::MatrixXd out = forward_batch(p, b.x);
    for (Eigen::Index c = 0; c < b.x.cols(); ++c)
        EXPECT_LT((out.col(c) - forward(p, b.x.col(c), Mode::eval, 0.0)).norm(), 1e-12);
}

TEST(Forward, HandComputedExample) {
    MlpParams p = MlpParams::zeros(2, 2, 1);
    p.w1 << 1.0, -1.0, 2.0, 1.0;
    p.b1 << 0.0, -1.0;
    p.w2 << 3.0, 0.5;
    p.b2 << 0.25;
    // hidden = relu([1-2, 2+2-1]) = [0, 3]; out = 0.5*3 + 0.25.
    EXPECT_NEAR(forward(p, Eigen::Vector2d(1.0, 2.0), Mode::eval, 0.0)[0], 1.75, 1e-15);
    EXPECT_THROW(forward(p, Eigen::Vector3d(1.0, 2.0, 3.0), Mode::eval, 0.0), std::invalid_argument);
}

TEST(Dropout, MaskValuesAndKeepRate) {
    Rng rng(7);
    const Eigen::MatrixXd m = sample_dropout_mask(100, 200, 0.3, rng);
    double kept = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double v = m.data()[i];
        EXPECT_TRUE(v == 0.0 || std::abs(v - 1.0 / 0.7) < 1e-12);
        kept += v != 0.0;
    }
    EXPECT_NEAR(kept / m.size(), 0.7, 0.01);
    EXPECT_EQ(sample_dropout_mask(3, 3, 0.0, rng), Eigen::MatrixXd::Ones(3, 3));
}

TEST(Softmax, SumsToOneAndSurvivesLargeLogits) {
    Rng rng(8);
    std::normal_distribution<double> g(0.0, 30.0);
    for (int i = 0; i < 50; ++i) {
        Eigen::VectorXd z(17);
        for (auto& v : z)
            v = g(rng);
        const Eigen::VectorXd s = softmax(z);
        EXPECT_NEAR(s.sum(), 1.0, 1e-12);
        EXPECT_TRUE((s.array() >= 0.0).all());
    }
    const Eigen::VectorXd s = softmax(Eigen::Vector3d(1000.0, 1000.0, -1000.0));
    EXPECT_NEAR(s[0], 0.5, 1e-12);
}

TEST(Loss, PeakedLogitsApproachZero) {
    MlpParams p = MlpParams::zeros(1, 1, 3);
    p.b2 << 0.0, 50.0, 0.0;
    Batch b;
    b.x = Eigen::MatrixXd::Zero(1, 2);
    b.cells = {1, 1};
    EXPECT_NEAR(loss_and_grad(p, b, HeadKind::classification).loss, 2.0 * std::exp(-50.0), 1e-21);
    b.cells = {0, 0};
    EXPECT_NEAR(loss_and_grad(p, b, HeadKind::classification).loss, 50.0, 1e-9);
}

TEST(Loss, DuplicatedBatchKeepsMeanLossAndGradient) {
    const MlpParams p = random_params(4, 6, 5, 9);
    const Batch b = random_batch(4, 7, 5, 10);
    Batch twice;
    twice.x.resize(4, 14);
    twice.x << b.x, b.x;
    twice.cells = b.cells;
    twice.cells.insert(twice.cells.end(), b.cells.begin(), b.cells.end());
    const LossAndGrad one = loss_and_grad(p, b, HeadKind::classification);
    const LossAndGrad two = loss_and_grad(p, twice, HeadKind::classification);
    EXPECT_NEAR(one.loss, two.loss, 1e-12);
    EXPECT_LT((one.grad.w1 - two.grad.w1).norm(), 1e-12);
    EXPECT_LT((one.grad.b2 - two.grad.b2).norm(), 1e-12);
}

TEST(Loss, InvariantToColumnPermutation) {
    const MlpParams p = random_params(4, 6, 5, 11);
    const Batch b = random_batch(4, 8, 5, 12);
    std::vector<int> perm(8);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    Batch shuffled;
    shuffled.x.resize(4, 8);
    for (int c = 0; c < 8; ++c) {
        shuffled.x.col(c) = b.x.col(perm[c]);
        shuffled.cells.push_back(b.cells[perm[c]]);
    }
    EXPECT_NEAR(loss_and_grad(p, b, HeadKind::classification).loss,
                loss_and_grad(p, shuffled, HeadKind::classification).loss, 1e-12);
}

// Central differences over every parameter block.
void check_gradient(HeadKind head, const Eigen::MatrixXd* mask) {
    const int outputs = head == HeadKind::classification ? 4 : 2;
    MlpParams p = random_params(3, 5, outputs, 13);
    const Batch b = random_batch(3, 6, outputs, 14);
    const LossAndGrad lg = loss_and_grad(p, b, head, mask);
    const double h = 1e-6;
    auto check_block = [&](auto& block, const auto& grad) {
        for (Eigen::Index i = 0; i < block.size(); ++i) {
            const double saved = block.data()[i];
            block.data()[i] = saved + h;
            const double up = loss_and_grad(p, b, head, mask).loss;
            block.data()[i] = saved - h;
            const double down = loss_and_grad(p, b, head, mask).loss;
            block.data()[i] = saved;
            EXPECT_NEAR(grad.data()[i], (up - down) / (2.0 * h), 1e-6);
        }
    };
    check_block(p.w1, lg.grad.w1);
    check_block(p.b1, lg.grad.b1);
    check_block(p.w2, lg.grad.w2);
    check_block(p.b2, lg.grad.b2);
}

TEST(Gradient, ClassificationMatchesFiniteDifferences) { check_gradient(HeadKind::classification, nullptr); }
TEST(Gradient, RegressionMatchesFiniteDifferences) { check_gradient(HeadKind::regression, nullptr); }
TEST(Gradient, FixedDropoutMaskMatchesFiniteDifferences) {
    Rng rng(15);
    const Eigen::MatrixXd mask = sample_dropout_mask(5, 6, 0.3, rng);
    check_gradient(HeadKind::classification, &mask);
}

TEST(Adam, FirstStepMovesEachWeightByLearningRate) {
    MlpParams p = MlpParams::zeros(2, 2, 2);
    MlpParams g = p;
    g.w1 << 0.5, -2.0, 0.0, 1e-3;
    AdamState s = AdamState::zeros_like(p);
    adam_step(s, p, g, 0.01);
    EXPECT_EQ(s.step, 1);
    // Bias-corrected first step: -lr * g / (|g| + eps).
    EXPECT_NEAR(p.w1(0, 0), -0.01, 1e-9);
    EXPECT_NEAR(p.w1(0, 1), 0.01, 1e-9);
    EXPECT_DOUBLE_EQ(p.w1(1, 0), 0.0);
    EXPECT_NEAR(p.w1(1, 1), -0.01 * 1e-3 / (1e-3 + 1e-8), 1e-12);
}

TEST(Adam, ConstantGradientKeepsUnitStep) {
    MlpParams p = MlpParams::zeros(1, 1, 1);
    MlpParams g = p;
    g.b2 << 3.0;
    AdamState s = AdamState::zeros_like(p);
    for (int i = 0; i < 10; ++i)
        adam_step(s, p, g, 0.1);
    EXPECT_NEAR(p.b2[0], -1.0, 1e-6);
}

TEST(Schedule, StepDecay) {
    TrainConfig c;
    EXPECT_DOUBLE_EQ(c.learning_rate_at(1), 1e-3);
    EXPECT_DOUBLE_EQ(c.learning_rate_at(79), 1e-3);
    EXPECT_NEAR(c.learning_rate_at(80), 1e-4, 1e-18);
    EXPECT_NEAR(c.learning_rate_at(119), 1e-4, 1e-18);
    EXPECT_NEAR(c.learning_rate_at(120), 1e-5, 1e-18);
    EXPECT_NEAR(c.learning_rate_at(150), 1e-5, 1e-18);
}

TEST(TrainConfig, Validation) {
    TrainConfig c;
    EXPECT_NO_THROW(c.validate());
    c.dropout = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = TrainConfig{};
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_THROW(head_from_string("softmax"), ConfigError);
    EXPECT_EQ(head_from_string(to_string(HeadKind::regression)), HeadKind::regression);
}

// Ten samples, each with a distinct strongest beam and a distinct cell.
std::vector<TrainingSample> separable_samples(const GridSpec& grid) {
    std::vector<TrainingSample> out;
    for (int i = 0; i < 10; ++i) {
        TrainingSample s;
        s.power.p.assign(10, 1e-3);
        s.power.p[static_cast<std::size_t>(i)] = 10.0;
        s.center = grid.centroid(i * 3);
        out.push_back(s);
    }
    return out;
}

TEST(Train, SeparableSetReachesFullAccuracy) {
    const GridSpec grid{8, 4};
    TrainConfig cfg;
    cfg.hidden_width = 64;
    const auto data = separable_samples(grid);
    const TrainResult r = train(data, cfg, grid);
    ASSERT_EQ(r.history.size(), 150u);
    EXPECT_DOUBLE_EQ(r.history.back().train_accuracy, 1.0);
    EXPECT_LT(r.history.back().mean_loss, r.history.front().mean_loss);
    const CenterPredictor pred{r.params, r.normalizer, grid, HeadKind::classification};
    for (const auto& s : data)
        EXPECT_EQ(pred.predict_center(s.power), s.center);
    // Epoch 80 (index 79) is the first decayed epoch.
    EXPECT_DOUBLE_EQ(r.history[78].lr, 1e-3);
    EXPECT_NEAR(r.history[79].lr, 1e-4, 1e-18);
}

TEST(Train, DeterministicForSeed) {
    const GridSpec grid{8, 4};
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 42;
    const auto data = separable_samples(grid);
    const TrainResult a = train(data, cfg, grid);
    const TrainResult b = train(data, cfg, grid);
    EXPECT_TRUE(a.params == b.params);
    cfg.seed = 43;
    EXPECT_FALSE(train(data, cfg, grid).params == a.params);
}

TEST(Train, RegressionHeadClampsToImage) {
    const GridSpec grid{8, 4};
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.head = HeadKind::regression;
    const auto data = separable_samples(grid);
    const TrainResult r = train(data, cfg, grid);
    EXPECT_EQ(r.params.outputs(), 2);
    const CenterPredictor pred{r.params, r.normalizer, grid, HeadKind::regression};
    for (const Vec2 c : pred.predict_centers(std::vector<PowerVector>{data[0].power, data[5].power})) {
        EXPECT_GE(c.x, 0.0);
        EXPECT_LE(c.x, 1.0);
    }
}

TEST(Train, EmptyDatasetIsDataError) {
    EXPECT_THROW(train({}, TrainConfig{}, GridSpec{}), DataError);
}

TEST(Predictor, BatchAndSingleAgree) {
    const GridSpec grid{8, 4};
    TrainConfig cfg;
    cfg.epochs = 2;
    const auto data = separable_samples(grid);
    const TrainResult r = train(data, cfg, grid);
    const CenterPredictor pred{r.params, r.normalizer, grid, HeadKind::classification};
    std::vector<PowerVector> powers;
    for (const auto& s : data)
        powers.push_back(s.power);
    const auto batch = pred.predict_centers(powers);
    for (std::size_t i = 0; i < powers.size(); ++i)
        EXPECT_EQ(batch[i], pred.predict_center(powers[i]));
}

} // namespace
} // namespace userid
