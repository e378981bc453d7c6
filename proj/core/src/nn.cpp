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

#include "userid/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "userid/errors.hpp"

namespace userid {

namespace {

template <typename Fn>
void for_each_block(MlpParams& a, const MlpParams& b, Fn&& fn) {
    fn(a.w1.array(), b.w1.array());
    fn(a.b1.array(), b.b1.array());
    fn(a.w2.array(), b.w2.array());
    fn(a.b2.array(), b.b2.array());
}

Eigen::Index argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v[i] > v[best])
            best = i;
    return best;
}

Vec2 decode(const Eigen::Ref<const Eigen::VectorXd>& out, const GridSpec& grid, HeadKind head) {
    if (head == HeadKind::regression)
        return {std::clamp(out[0], 0.0, 1.0), std::clamp(out[1], 0.0, 1.0)};
    return grid.centroid(static_cast<int>(argmax_lowest(out)));
}

} // namespace

int GridSpec::cell_of(Vec2 c) const {
    const int ix = std::clamp(static_cast<int>(std::floor(c.x * gx)), 0, gx - 1);
    const int iy = std::clamp(static_cast<int>(std::floor(c.y * gy)), 0, gy - 1);
    return iy * gx + ix;
}

Vec2 GridSpec::centroid(int cell) const {
    const int ix = cell % gx;
    const int iy = cell / gx;
    return {(ix + 0.5) / gx, (iy + 0.5) / gy};
}

void GridSpec::validate() const {
    if (gx < 1 || gy < 1)
        throw ConfigError("grid dimensions must be >= 1");
}

std::string to_string(HeadKind head) {
    return head == HeadKind::classification ? "classification" : "regression";
}

HeadKind head_from_string(const std::string& name) {
    if (name == "classification")
        return HeadKind::classification;
    if (name == "regression")
        return HeadKind::regression;
    throw ConfigError("unknown head kind '" + name + "'");
}

MlpParams MlpParams::zeros(int inputs, int hidden, int outputs) {
    MlpParams p;
    p.w1 = Eigen::MatrixXd::Zero(hidden, inputs);
    p.b1 = Eigen::VectorXd::Zero(hidden);
    p.w2 = Eigen::MatrixXd::Zero(outputs, hidden);
    p.b2 = Eigen::VectorXd::Zero(outputs);
    return p;
}

MlpParams MlpParams::init(int inputs, int hidden, int outputs, Rng& rng) {
    MlpParams p = zeros(inputs, hidden, outputs);
    auto fill = [&rng](auto& m, int fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> u(-bound, bound);
        // Row-major fill order, independent of Eigen's storage order.
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                m(r, c) = u(rng);
    };
    fill(p.w1, inputs);
    fill(p.b1, inputs);
    fill(p.w2, hidden);
    fill(p.b2, hidden);
    return p;
}

bool MlpParams::all_finite() const {
    return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
}

void TrainConfig::validate() const {
    if (batch_size < 1 || epochs < 1 || hidden_width < 1)
        throw ConfigError("batch_size, epochs and hidden_width must be positive");
    if (!(lr > 0.0) || !(lr_factor > 0.0))
        throw ConfigError("lr and lr_factor must be positive");
    if (dropout < 0.0 || dropout >= 1.0)
        throw ConfigError("dropout must be in [0, 1)");
    for (int e : lr_decay_epochs)
        if (e < 1)
            throw ConfigError("lr_decay_epochs must be positive");
}

double TrainConfig::learning_rate_at(int epoch) const {
    double rate = lr;
    for (int e : lr_decay_epochs)
        if (epoch >= e)
            rate *= lr_factor;
    return rate;
}

Eigen::VectorXd log_power_features(const PowerVector& p) {
    Eigen::VectorXd f(static_cast<Eigen::Index>(p.size()));
    for (std::size_t q = 0; q < p.size(); ++q)
        f[static_cast<Eigen::Index>(q)] = 10.0 * std::log10(p.p[q] + PowerNormalizer::kEpsilon);
    return f;
}

Eigen::VectorXd PowerNormalizer::apply(const PowerVector& p) const {
    if (p.size() != features())
        throw DataError("power vector has " + std::to_string(p.size()) + " entries, normalizer expects " +
                        std::to_string(features()));
    return ((log_power_features(p) - mean).array() / stddev.array()).matrix();
}

Eigen::MatrixXd PowerNormalizer::apply(std::span<const PowerVector> powers) const {
    Eigen::MatrixXd x(mean.size(), static_cast<Eigen::Index>(powers.size()));
    for (std::size_t i = 0; i < powers.size(); ++i)
        x.col(static_cast<Eigen::Index>(i)) = apply(powers[i]);
    return x;
}

PowerNormalizer fit_normalizer(std::span<const PowerVector> train_powers) {
    if (train_powers.empty())
        throw DataError("cannot fit a normalizer on an empty training set");
    const Eigen::Index q = static_cast<Eigen::Index>(train_powers.front().size());
    const double n = static_cast<double>(train_powers.size());

    Eigen::MatrixXd feats(q, static_cast<Eigen::Index>(train_powers.size()));
    for (std::size_t i = 0; i < train_powers.size(); ++i) {
        if (static_cast<Eigen::Index>(train_powers[i].size()) != q)
            throw DataError("inconsistent power vector lengths in training set");
        feats.col(static_cast<Eigen::Index>(i)) = log_power_features(train_powers[i]);
    }

    PowerNormalizer norm;
    norm.mean = feats.rowwise().sum() / n;
    norm.stddev.resize(q);
    for (Eigen::Index r = 0; r < q; ++r) {
        const double var = (feats.row(r).array() - norm.mean[r]).square().sum() / n;
        const double sd = std::sqrt(var);
        norm.stddev[r] = sd > 0.0 ? sd : 1.0;
    }
    return norm;
}

Eigen::MatrixXd sample_dropout_mask(int hidden, int batch, double rate, Rng& rng) {
    Eigen::MatrixXd mask(hidden, batch);
    if (rate <= 0.0) {
        mask.setOnes();
        return mask;
    }
    std::bernoulli_distribution keep(1.0 - rate);
    const double scale = 1.0 / (1.0 - rate);
    for (int c = 0; c < batch; ++c)
        for (int r = 0; r < hidden; ++r)
            mask(r, c) = keep(rng) ? scale : 0.0;
    return mask;
}

Eigen::VectorXd forward(const MlpParams& params, const Eigen::VectorXd& x, Mode mode, double dropout, Rng* rng) {
    if (x.size() != params.inputs())
        throw std::invalid_argument("forward: input has " + std::to_string(x.size()) + " features, model expects " +
                                    std::to_string(params.inputs()));
    Eigen::VectorXd h = (params.w1 * x + params.b1).cwiseMax(0.0);
    if (mode == Mode::train && dropout > 0.0) {
        if (rng == nullptr)
            throw std::invalid_argument("forward: train mode with dropout needs a random stream");
        h = h.cwiseProduct(sample_dropout_mask(params.hidden(), 1, dropout, *rng).col(0));
    }
    return params.w2 * h + params.b2;
}

Eigen::MatrixXd forward_batch(const MlpParams& params, const Eigen::MatrixXd& x) {
    if (x.rows() != params.inputs())
        throw std::invalid_argument("forward_batch: input dimension mismatch");
    Eigen::MatrixXd h = ((params.w1 * x).colwise() + params.b1).cwiseMax(0.0);
    return (params.w2 * h).colwise() + params.b2;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    const double top = logits.maxCoeff();
    Eigen::VectorXd e = (logits.array() - top).exp().matrix();
    return e / e.sum();
}

LossAndGrad loss_and_grad(const MlpParams& params, const Batch& batch, HeadKind head, const Eigen::MatrixXd* mask) {
    const Eigen::Index n = batch.x.cols();
    if (n == 0)
        throw std::invalid_argument("loss_and_grad: empty batch");
    if (batch.x.rows() != params.inputs())
        throw std::invalid_argument("loss_and_grad: input dimension mismatch");

    const Eigen::MatrixXd pre = (params.w1 * batch.x).colwise() + params.b1;
    const Eigen::MatrixXd act = pre.cwiseMax(0.0);
    const Eigen::MatrixXd dropped = mask ? act.cwiseProduct(*mask) : act;
    const Eigen::MatrixXd out = (params.w2 * dropped).colwise() + params.b2;

    LossAndGrad res;
    Eigen::MatrixXd d_out(out.rows(), n);
    const double inv_n = 1.0 / static_cast<double>(n);
    if (head == HeadKind::classification) {
        if (static_cast<Eigen::Index>(batch.cells.size()) != n)
            throw std::invalid_argument("loss_and_grad: target count mismatch");
        double total = 0.0;
        for (Eigen::Index c = 0; c < n; ++c) {
            const double top = out.col(c).maxCoeff();
            Eigen::VectorXd e = (out.col(c).array() - top).exp().matrix();
            const double sum = e.sum();
            const int target = batch.cells[static_cast<std::size_t>(c)];
            total += std::log(sum) + top - out(target, c);
            d_out.col(c) = e / sum;
            d_out(target, c) -= 1.0;
        }
        res.loss = total * inv_n;
        d_out *= inv_n;
    } else {
        if (batch.centers.cols() != n || out.rows() != 2)
            throw std::invalid_argument("loss_and_grad: regression head needs 2 outputs and 2 x B targets");
        const Eigen::MatrixXd diff = out - batch.centers;
        res.loss = diff.squaredNorm() * inv_n;
        d_out = 2.0 * inv_n * diff;
    }

    res.grad.w2 = d_out * dropped.transpose();
    res.grad.b2 = d_out.rowwise().sum();
    Eigen::MatrixXd d_hidden = params.w2.transpose() * d_out;
    if (mask)
        d_hidden = d_hidden.cwiseProduct(*mask);
    d_hidden = d_hidden.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
    res.grad.w1 = d_hidden * batch.x.transpose();
    res.grad.b1 = d_hidden.rowwise().sum();
    return res;
}

AdamState AdamState::zeros_like(const MlpParams& params) {
    AdamState s;
    s.m = MlpParams::zeros(params.inputs(), params.hidden(), params.outputs());
    s.v = s.m;
    return s;
}

void adam_step(AdamState& state, MlpParams& params, const MlpParams& grads, double lr) {
    if (state.m.w1.rows() != params.w1.rows() || state.m.w1.cols() != params.w1.cols() ||
        state.m.w2.rows() != params.w2.rows() || state.m.w2.cols() != params.w2.cols())
        throw std::invalid_argument("adam_step: optimizer state does not match parameters");

    ++state.step;
    const double bc1 = 1.0 - std::pow(AdamState::kBeta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(AdamState::kBeta2, static_cast<double>(state.step));

    for_each_block(state.m, grads, [](auto m, auto g) { m = AdamState::kBeta1 * m + (1.0 - AdamState::kBeta1) * g; });
    for_each_block(state.v, grads,
                   [](auto v, auto g) { v = AdamState::kBeta2 * v + (1.0 - AdamState::kBeta2) * g.square(); });

    auto update = [&](auto p, const auto& m, const auto& v) {
        p -= lr * (m / bc1) / ((v / bc2).sqrt() + AdamState::kEpsilon);
    };
    update(params.w1.array(), state.m.w1.array(), state.v.w1.array());
    update(params.b1.array(), state.m.b1.array(), state.v.b1.array());
    update(params.w2.array(), state.m.w2.array(), state.v.w2.array());
    update(params.b2.array(), state.m.b2.array(), state.v.b2.array());
}

TrainResult train(std::span<const TrainingSample> dataset, const TrainConfig& cfg, const GridSpec& grid) {
    cfg.validate();
    grid.validate();
    if (dataset.empty())
        throw DataError("cannot train on an empty dataset");

    std::vector<PowerVector> powers;
    powers.reserve(dataset.size());
    for (const auto& s : dataset)
        powers.push_back(s.power);

    TrainResult result;
    result.normalizer = fit_normalizer(powers);
    const Eigen::MatrixXd x_all = result.normalizer.apply(powers);

    const Eigen::Index n = x_all.cols();
    std::vector<int> cells(static_cast<std::size_t>(n));
    Eigen::MatrixXd centers(2, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec2 c = dataset[static_cast<std::size_t>(i)].center;
        cells[static_cast<std::size_t>(i)] = grid.cell_of(c);
        centers(0, i) = c.x;
        centers(1, i) = c.y;
    }

    const int outputs = cfg.head == HeadKind::classification ? grid.cells() : 2;
    const SeedTree seeds(cfg.seed);
    Rng init_rng = seeds.stream("init");
    Rng shuffle_rng = seeds.stream("shuffle");
    Rng dropout_rng = seeds.stream("dropout");

    result.params = MlpParams::init(static_cast<int>(x_all.rows()), cfg.hidden_width, outputs, init_rng);
    AdamState opt = AdamState::zeros_like(result.params);

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Batch batch;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const double lr = cfg.learning_rate_at(epoch);
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double loss_sum = 0.0;
        for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
            const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, n - start);
            batch.x.resize(x_all.rows(), len);
            batch.cells.resize(static_cast<std::size_t>(len));
            batch.centers.resize(2, len);
            for (Eigen::Index j = 0; j < len; ++j) {
                const Eigen::Index src = order[static_cast<std::size_t>(start + j)];
                batch.x.col(j) = x_all.col(src);
                batch.cells[static_cast<std::size_t>(j)] = cells[static_cast<std::size_t>(src)];
                batch.centers.col(j) = centers.col(src);
            }
            const Eigen::MatrixXd mask =
                sample_dropout_mask(cfg.hidden_width, static_cast<int>(len), cfg.dropout, dropout_rng);
            LossAndGrad lg = loss_and_grad(result.params, batch, cfg.head, &mask);
            if (!std::isfinite(lg.loss))
                throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
            adam_step(opt, result.params, lg.grad, lr);
            loss_sum += lg.loss * static_cast<double>(len);
        }

        int correct = 0;
        constexpr Eigen::Index kChunk = 1024;
        for (Eigen::Index start = 0; start < n; start += kChunk) {
            const Eigen::Index len = std::min(kChunk, n - start);
            const Eigen::MatrixXd out = forward_batch(result.params, x_all.middleCols(start, len));
            for (Eigen::Index j = 0; j < len; ++j) {
                const Vec2 pred = decode(out.col(j), grid, cfg.head);
                correct += grid.cell_of(pred) == cells[static_cast<std::size_t>(start + j)];
            }
        }

        result.history.push_back(
            {epoch, lr, loss_sum / static_cast<double>(n), static_cast<double>(correct) / static_cast<double>(n)});
    }
    if (!result.params.all_finite())
        throw NumericError("training produced non-finite parameters");
    return result;
}

Vec2 predict_center(const MlpParams& params, const PowerNormalizer& normalizer, const GridSpec& grid,
                    const PowerVector& p, HeadKind head) {
    const Eigen::VectorXd out = forward(params, normalizer.apply(p), Mode::eval, 0.0);
    return decode(out, grid, head);
}

Vec2 CenterPredictor::predict_center(const PowerVector& p) const {
    return userid::predict_center(params, normalizer, grid, p, head);
}

std::vector<Vec2> CenterPredictor::predict_centers(std::span<const PowerVector> powers) const {
    std::vector<Vec2> out;
    out.reserve(powers.size());
    if (powers.empty())
        return out;
    const Eigen::MatrixXd logits = forward_batch(params, normalizer.apply(powers));
    for (Eigen::Index j = 0; j < logits.cols(); ++j)
        out.push_back(decode(logits.col(j), grid, head));
    return out;
}

} // namespace userid
