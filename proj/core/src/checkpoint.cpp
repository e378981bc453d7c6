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

#include "userid/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "userid/config_io.hpp"
#include "userid/errors.hpp"

namespace userid {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            flat.push_back(m(r, c));
    return json{{"shape", {m.rows(), m.cols()}}, {"data", flat}};
}

Eigen::MatrixXd matrix_from_json(const json& j, const char* name) {
    const auto shape = j.at("shape").get<std::vector<Eigen::Index>>();
    const auto flat = j.at("data").get<std::vector<double>>();
    if (shape.size() != 2 || static_cast<Eigen::Index>(flat.size()) != shape[0] * shape[1])
        throw DataError(std::string("checkpoint: tensor '") + name + "' has inconsistent shape");
    Eigen::MatrixXd m(shape[0], shape[1]);
    for (Eigen::Index r = 0; r < shape[0]; ++r)
        for (Eigen::Index c = 0; c < shape[1]; ++c)
            m(r, c) = flat[static_cast<std::size_t>(r * shape[1] + c)];
    return m;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

json checkpoint_to_json(const Checkpoint& ckpt) {
    const auto& p = ckpt.predictor.params;
    json history = json::array();
    for (const auto& h : ckpt.history)
        history.push_back({{"epoch", h.epoch}, {"lr", h.lr}, {"loss", h.mean_loss}, {"train_accuracy", h.train_accuracy}});

    return json{
        {"format", kCheckpointFormat},
        {"head", to_string(ckpt.predictor.head)},
        {"grid", to_json(ckpt.predictor.grid)},
        {"normalizer",
         {{"log_epsilon", PowerNormalizer::kEpsilon},
          {"mean", to_vector(ckpt.predictor.normalizer.mean)},
          {"std", to_vector(ckpt.predictor.normalizer.stddev)}}},
        {"layers", {{"inputs", p.inputs()}, {"hidden", p.hidden()}, {"outputs", p.outputs()}, {"activation", "relu"}}},
        {"params",
         {{"w1", matrix_to_json(p.w1)},
          {"b1", to_vector(p.b1)},
          {"w2", matrix_to_json(p.w2)},
          {"b2", to_vector(p.b2)}}},
        {"train_config", to_json(ckpt.train_config)},
        {"history", history},
        {"metadata", ckpt.metadata},
    };
}

Checkpoint checkpoint_from_json(const json& j) {
    try {
        if (j.value("format", "") != kCheckpointFormat)
            throw DataError("checkpoint: unsupported format tag '" + j.value("format", "") + "'");
        Checkpoint ckpt;
        ckpt.predictor.head = head_from_string(j.at("head").get<std::string>());
        ckpt.predictor.grid = grid_from_json(j.at("grid"));
        ckpt.predictor.normalizer.mean = from_vector(j.at("normalizer").at("mean").get<std::vector<double>>());
        ckpt.predictor.normalizer.stddev = from_vector(j.at("normalizer").at("std").get<std::vector<double>>());

        auto& p = ckpt.predictor.params;
        const auto& params = j.at("params");
        p.w1 = matrix_from_json(params.at("w1"), "w1");
        p.b1 = from_vector(params.at("b1").get<std::vector<double>>());
        p.w2 = matrix_from_json(params.at("w2"), "w2");
        p.b2 = from_vector(params.at("b2").get<std::vector<double>>());

        const auto& layers = j.at("layers");
        const bool shapes_ok = layers.at("inputs").get<int>() == p.inputs() &&
                               layers.at("hidden").get<int>() == p.hidden() &&
                               layers.at("outputs").get<int>() == p.outputs() && p.b1.size() == p.hidden() &&
                               p.w2.cols() == p.hidden() && p.b2.size() == p.outputs() &&
                               static_cast<int>(ckpt.predictor.normalizer.features()) == p.inputs() &&
                               ckpt.predictor.normalizer.stddev.size() == p.inputs();
        if (!shapes_ok)
            throw DataError("checkpoint: layer shapes are inconsistent");
        const int expected_out = ckpt.predictor.head == HeadKind::classification ? ckpt.predictor.grid.cells() : 2;
        if (p.outputs() != expected_out)
            throw DataError("checkpoint: output layer does not match grid/head");

        ckpt.train_config = train_config_from_json(j.at("train_config"));
        for (const auto& h : j.at("history"))
            ckpt.history.push_back({h.at("epoch").get<int>(), h.at("lr").get<double>(), h.at("loss").get<double>(),
                                    h.at("train_accuracy").get<double>()});
        ckpt.metadata = j.value("metadata", json::object());
        return ckpt;
    } catch (const json::exception& e) {
        throw DataError(std::string("checkpoint: ") + e.what());
    }
}

std::string serialize_checkpoint(const Checkpoint& ckpt) { return checkpoint_to_json(ckpt).dump() + "\n"; }

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open checkpoint '" + path.string() + "'");
    try {
        return checkpoint_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw DataError("checkpoint '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

} // namespace userid
