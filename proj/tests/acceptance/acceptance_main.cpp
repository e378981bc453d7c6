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

// Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "userid/channel.hpp"
#include "userid/config_io.hpp"
#include "userid/episode.hpp"
#include "userid/eval.hpp"
#include "userid/identify.hpp"
#include "userid/nn.hpp"
#include "userid/report.hpp"

namespace userid {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o, double secs) {
    std::printf("%s [%d] %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string pct(double v) { return fmt("%.2f%%", 100.0 * v); }

GenerationConfig load_config(const std::string& name) {
    return GenerationConfig::from_json(read_json_file(std::string(USERID_CONFIG_DIR) + "/" + name));
}

// Criterion 1: noiseless beam sweep picks the sin-space-nearest beam.
Outcome beam_sweep_oracle() {
    ArrayConfig array; // M = 16
    const BeamCodebook cb = dft_codebook(array, 64);
    NoiseConfig noise;
    noise.noise_variance = 0.0;
    Rng rng(101);
    const double half = deg_to_rad(array.fov_deg) / 2.0;
    std::uniform_real_distribution<double> az(-half, half);
    int agree = 0;
    for (int i = 0; i < 100; ++i) {
        const double theta = az(rng);
        const Vec2 position{10.0 * std::sin(theta), 10.0 * std::cos(theta)};
        const ChannelVector ch = los_channel(position, array, noise, rng);
        const PowerVector p = receive_power(ch, cb, noise, rng);
        agree += best_beam(p) == oracle::nearest_in_sin_space(cb.beam_angles, ch.user_azimuth);
    }
    return {agree == 100, std::to_string(agree) + "/100 agree"};
}

// Criterion 2: analytic gradients vs central differences (step 1e-5).
Outcome gradient_check() {
    Rng rng(202);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    const double h = 1e-5;
    for (int net = 0; net < 20; ++net) {
        const HeadKind head = net % 2 ? HeadKind::regression : HeadKind::classification;
        const int outputs = head == HeadKind::classification ? 6 : 2;
        MlpParams p = MlpParams::init(5, 8, outputs, rng);
        Batch b;
        b.x.resize(5, 4);
        b.centers.resize(2, 4);
        for (Eigen::Index i = 0; i < b.x.size(); ++i)
            b.x.data()[i] = g(rng);
        for (int c = 0; c < 4; ++c) {
            b.cells.push_back(static_cast<int>(rng() % static_cast<unsigned>(outputs)));
            b.centers(0, c) = 0.5 + 0.2 * g(rng);
            b.centers(1, c) = 0.5 + 0.2 * g(rng);
        }
        const LossAndGrad lg = loss_and_grad(p, b, head);
        auto probe = [&](auto& block, const auto& grad) {
            for (Eigen::Index i = 0; i < block.size(); ++i) {
                const double saved = block.data()[i];
                block.data()[i] = saved + h;
                const double up = loss_and_grad(p, b, head).loss;
                block.data()[i] = saved - h;
                const double down = loss_and_grad(p, b, head).loss;
                block.data()[i] = saved;
                const double numeric = (up - down) / (2.0 * h);
                const double analytic = grad.data()[i];
                // Relative error with a floor so exactly-zero gradients do not divide by zero.
                const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
                worst = std::max(worst, std::abs(analytic - numeric) / denom);
            }
        };
        probe(p.w1, lg.grad.w1);
        probe(p.b1, lg.grad.b1);
        probe(p.w2, lg.grad.w2);
        probe(p.b2, lg.grad.b2);
    }
    return {worst < 1e-4, "max relative error " + fmt("%.3e", worst)};
}

// Criterion 3: greedy association vs brute-force optimal assignment.
Outcome association_oracle() {
    Rng rng(303);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> count(1, 5);
    int agree = 0;
    const int instances = 1000;
    for (int k = 0; k < instances; ++k) {
        const int n = count(rng);
        std::vector<Vec2> prev;
        while (static_cast<int>(prev.size()) < n) {
            const Vec2 c{u(rng), u(rng)};
            bool far = true;
            for (const Vec2 q : prev)
                far = far && distance(c, q) > 0.02;
            if (far)
                prev.push_back(c);
        }
        double min_sep = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < prev.size(); ++i)
            for (std::size_t j = i + 1; j < prev.size(); ++j)
                min_sep = std::min(min_sep, distance(prev[i], prev[j]));
        const double max_step = std::isinf(min_sep) ? 0.1 : 0.5 * min_sep;

        // Shuffle the next-frame order so identity is not positional.
        std::vector<std::size_t> order(prev.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<Vec2> next;
        for (std::size_t i : order) {
            const double r = max_step * u(rng) * 0.999;
            const double a = 2.0 * kPi * u(rng);
            next.push_back({prev[i].x + r * std::cos(a), prev[i].y + r * std::sin(a)});
        }
        std::vector<TrackId> ids(prev.size());
        for (std::size_t i = 0; i < ids.size(); ++i)
            ids[i] = static_cast<TrackId>(i);
        // Gate wide enough to admit every pair: this criterion checks matching.
        const TrackAssignment a = associate(prev, ids, next, static_cast<TrackId>(n), 2.0);
        const auto best = oracle::optimal_assignment(prev, next);
        bool ok = true;
        for (std::size_t i = 0; i < prev.size(); ++i)
            ok = ok && a.ids[best[i]] == ids[i];
        agree += ok;
    }
    return {agree == instances, std::to_string(agree) + "/" + std::to_string(instances) + " agree"};
}

// Criterion 4: select_nearest vs exhaustive argmin.
Outcome nearest_equivalence() {
    Rng rng(404);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> rows(1, 12);
    int agree = 0;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        RelevantObjectMatrix b;
        const int n = rows(rng);
        for (int k = 0; k < n; ++k)
            b.rows.push_back({u(rng), u(rng)});
        const Vec2 target{u(rng), u(rng)};
        agree += select_nearest(b, target) == oracle::argmin_distance(b.rows, target);
    }
    return {agree == trials, std::to_string(agree) + "/" + std::to_string(trials) + " agree"};
}

const StratumMetric& overall(const MetricsReport& r) { return r.strata.front(); }

struct BenchmarkRun {
    PreparedScenario scenario;
    std::vector<MetricsReport> reports; // r = 1, 3, 5
};

const std::vector<int> kR{1, 3, 5};

BenchmarkRun run_benchmark(const GenerationConfig& gen, double fraction, const std::string& tag) {
    BenchmarkRun b;
    b.scenario = prepare_scenario(generate_episode(gen, 5000, gen.scenario.seed), 5, SplitSpec{});
    const TrainedModel m = train_on(b.scenario, fraction, TrainConfig{}, GridSpec{});
    b.reports = evaluate_model(m, b.scenario, kR, EvalOptions{}, {tag, tag, 1, fraction}, 5);
    return b;
}

std::string fingerprint_reports(const std::vector<MetricsReport>& reports) {
    std::string all;
    for (const auto& r : reports)
        all += report_to_json(r).dump() + "\n" + samples_to_jsonl(r);
    return all;
}

double objects_gap(const MetricsReport& r1, const MetricsReport& r5, const std::string& k) {
    const StratumMetric* a = r1.find("objects", k);
    const StratumMetric* b = r5.find("objects", k);
    if (!a || !b)
        return std::numeric_limits<double>::quiet_NaN();
    return b->accuracy - a->accuracy;
}

} // namespace
} // namespace userid

int main() {
    using namespace userid;

    auto timed = [](const std::function<Outcome()>& fn) {
        const auto start = Clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        return std::pair<Outcome, double>{o, seconds_since(start)};
    };

    {
        auto [o, s] = timed(beam_sweep_oracle);
        o.pass = o.pass && s < 5.0;
        report(1, "beam-sweep oracle", o, s);
    }
    {
        auto [o, s] = timed(gradient_check);
        o.pass = o.pass && s < 10.0;
        report(2, "gradient check", o, s);
    }
    {
        auto [o, s] = timed(association_oracle);
        o.pass = o.pass && s < 10.0;
        report(3, "association oracle", o, s);
    }
    {
        auto [o, s] = timed(nearest_equivalence);
        report(4, "nearest-neighbor equivalence", o, s);
    }

    const GenerationConfig clean_cfg = load_config("default.json");
    GenerationConfig miss_cfg = clean_cfg;
    miss_cfg.detector.p_miss = 0.15;

    BenchmarkRun clean;
    BenchmarkRun miss;
    std::vector<MetricsReport> clean_30;

    {
        auto [o, s] = timed([&] {
            clean = run_benchmark(clean_cfg, 1.0, "default");
            const double r1 = clean.reports[0].top1;
            return Outcome{r1 >= 0.90, "top-1 r=1 " + pct(r1) + " on " + std::to_string(clean.reports[0].count) +
                                           " held-out windows (threshold 90%)"};
        });
        o.pass = o.pass && s < 15.0 * 60.0;
        report(5, "clean benchmark", o, s);
    }
    {
        auto [o, s] = timed([&] {
            if (clean.reports.empty())
                return Outcome{false, "clean benchmark unavailable"};
            miss = run_benchmark(miss_cfg, 1.0, "default_pmiss015");
            const double gain = miss.reports[2].top1 - miss.reports[0].top1;
            const double clean_delta = clean.reports[2].top1 - clean.reports[0].top1;
            return Outcome{gain >= 0.02 && clean_delta >= -0.005,
                           "p_miss=0.15: r5-r1 = " + fmt("%+.2f pts", 100.0 * gain) + " (r1 " + pct(miss.reports[0].top1) +
                               ", r5 " + pct(miss.reports[2].top1) + "); clean r5-r1 = " +
                               fmt("%+.2f pts", 100.0 * clean_delta)};
        });
        report(6, "sequence benefit", o, s);
    }
    {
        auto [o, s] = timed([&] {
            if (miss.reports.empty())
                return Outcome{false, "p_miss=0.15 benchmark unavailable"};
            const double g1 = objects_gap(miss.reports[0], miss.reports[2], "1");
            const double g3 = objects_gap(miss.reports[0], miss.reports[2], "3");
            const auto n1 = miss.reports[0].find("objects", "1");
            const auto n3 = miss.reports[0].find("objects", "3");
            return Outcome{std::isfinite(g1) && std::isfinite(g3) && g3 >= g1,
                           "gap(1 object) = " + fmt("%+.2f pts", 100.0 * g1) + " (n=" +
                               std::to_string(n1 ? n1->count : 0) + "), gap(3 objects) = " +
                               fmt("%+.2f pts", 100.0 * g3) + " (n=" + std::to_string(n3 ? n3->count : 0) + ")"};
        });
        report(7, "object-count trend", o, s);
    }
    {
        auto [o, s] = timed([&] {
            if (clean.reports.empty())
                return Outcome{false, "clean benchmark unavailable"};
            const TrainedModel m = train_on(clean.scenario, 0.3, TrainConfig{}, GridSpec{});
            clean_30 = evaluate_model(m, clean.scenario, kR, EvalOptions{}, {"default", "default", 1, 0.3}, 5);
            const double a30 = clean_30[0].top1;
            const double a100 = clean.reports[0].top1;
            return Outcome{std::abs(a100 - a30) <= 0.03,
                           "r=1: 30% " + pct(a30) + " vs 100% " + pct(a100) + " (|diff| " +
                               fmt("%.2f pts", 100.0 * std::abs(a100 - a30)) + ", limit 3)"};
        });
        report(8, "training-fraction plateau", o, s);
    }
    {
        auto [o, s] = timed([&] {
            if (clean.reports.empty())
                return Outcome{false, "clean benchmark unavailable"};
            const double a3 = clean.reports[1].association_gt.value_or(-1.0);
            const double a5 = clean.reports[2].association_gt.value_or(-1.0);
            return Outcome{a3 == 1.0 && a5 >= 0.99, "r=3 " + pct(a3) + ", r=5 " + pct(a5) +
                                                        " (detection-based: r=3 " +
                                                        pct(clean.reports[1].association_detected.value_or(-1.0)) +
                                                        ", r=5 " +
                                                        pct(clean.reports[2].association_detected.value_or(-1.0)) + ")"};
        });
        report(9, "association accuracy", o, s);
    }
    {
        auto [o, s] = timed([&] {
            if (clean.reports.empty())
                return Outcome{false, "clean benchmark unavailable"};
            const BenchmarkRun again = run_benchmark(clean_cfg, 1.0, "default");
            const bool same = fingerprint_reports(again.reports) == fingerprint_reports(clean.reports);
            return Outcome{same, same ? "rerun reproduced every metric and per-sample record bit-identically"
                                      : "rerun differs from the first run"};
        });
        report(10, "determinism", o, s);
    }
    {
        auto [o, s] = timed([&] {
            const GenerationConfig six = load_config("six_lane.json");
            const GenerationConfig two = load_config("two_lane.json");
            const PreparedScenario six_p = prepare_scenario(generate_episode(six, 5000, six.scenario.seed), 5, SplitSpec{});
            const PreparedScenario two_p = prepare_scenario(generate_episode(two, 5000, two.scenario.seed), 5, SplitSpec{});
            const std::vector<int> r1{1};
            const TrainedModel six_m = train_on(six_p, 1.0, TrainConfig{}, GridSpec{});
            const TrainedModel two_m = train_on(two_p, 1.0, TrainConfig{}, GridSpec{});
            const double transferred =
                evaluate_model(six_m, two_p, r1, EvalOptions{}, {"six_lane", "two_lane", 1, 1.0}, 5)[0].top1;
            const double baseline =
                evaluate_model(two_m, two_p, r1, EvalOptions{}, {"two_lane", "two_lane", 1, 1.0}, 5)[0].top1;
            return Outcome{std::isfinite(transferred) && baseline > transferred,
                           "r=1: two_lane baseline " + pct(baseline) + " vs six_lane->two_lane " + pct(transferred)};
        });
        report(11, "cross-scenario harness", o, s);
    }

    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
