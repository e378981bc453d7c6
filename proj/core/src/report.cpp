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

#include "userid/report.hpp"

#include <cctype>
#include <sstream>

namespace userid {

using nlohmann::json;

std::string format_double(double v) { return json(v).dump(); }

namespace {

json stratum_json(const StratumMetric& s) {
    return {{"kind", s.kind},       {"key", s.key},         {"accuracy", s.accuracy},
            {"count", s.count},     {"correct", s.correct}, {"low_confidence", s.low_confidence}};
}

template <typename T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

json report_to_json(const MetricsReport& report) {
    json strata = json::array();
    for (const auto& s : report.strata)
        strata.push_back(stratum_json(s));
    return {{"scenario_train", report.cell.scenario_train},
            {"scenario_test", report.cell.scenario_test},
            {"r", report.cell.r},
            {"train_fraction", report.cell.train_fraction},
            {"top1", report.top1},
            {"count", report.count},
            {"association_gt", optional_json(report.association_gt)},
            {"association_detected", optional_json(report.association_detected)},
            {"strata", strata},
            {"metadata", report.metadata}};
}

std::string csv_header() {
    return "scenario_train,scenario_test,r,train_fraction,stratum,accuracy,count,correct,low_confidence\n";
}

std::string csv_rows(const MetricsReport& report) {
    std::ostringstream os;
    for (const auto& s : report.strata) {
        os << csv_field(report.cell.scenario_train) << ',' << csv_field(report.cell.scenario_test) << ','
           << report.cell.r << ',' << format_double(report.cell.train_fraction) << ',' << csv_field(s.label()) << ','
           << format_double(s.accuracy) << ',' << s.count << ',' << s.correct << ','
           << (s.low_confidence ? "true" : "false") << '\n';
    }
    return os.str();
}

std::string reports_to_csv(std::span<const MetricsReport> reports) {
    std::string out = csv_header();
    for (const auto& r : reports)
        out += csv_rows(r);
    return out;
}

std::string samples_to_jsonl(const MetricsReport& report) {
    std::string out;
    for (const auto& s : report.samples) {
        json votes = json::array();
        for (const auto& v : s.votes)
            votes.push_back(optional_json(v));
        json dists = json::array();
        for (const auto& d : s.distances)
            dists.push_back(optional_json(d));
        json j = {{"tau", s.tau},
                  {"t", s.t},
                  {"votes", votes},
                  {"distances", dists},
                  {"chosen_track", optional_json(s.chosen_track)},
                  {"chosen_gt_id", optional_json(s.chosen_gt_id)},
                  {"label_gt_id", s.label_gt_id},
                  {"correct", s.correct},
                  {"objects_at_tau", s.objects_at_tau},
                  {"speed", optional_json(s.speed)},
                  {"speed_bucket", s.speed_bucket ? json(to_string(*s.speed_bucket)) : json(nullptr)},
                  {"association_gt", optional_json(s.association_gt)},
                  {"association_detected", optional_json(s.association_detected)}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::string cell_slug(const CellKey& cell) {
    auto clean = [](std::string s) {
        for (char& c : s)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_')
                c = '_';
        return s;
    };
    return clean(cell.scenario_train) + "__" + clean(cell.scenario_test) + "__r" + std::to_string(cell.r) + "__f" +
           format_double(cell.train_fraction);
}

} // namespace userid
