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

#ifndef USERID_REPORT_HPP
#define USERID_REPORT_HPP

#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "userid/eval.hpp"

namespace userid {

// Report JSON without the per-sample dump.
nlohmann::json report_to_json(const MetricsReport& report);

// Flat CSV: one row per (cell, stratum).
std::string csv_header();
std::string csv_rows(const MetricsReport& report);
std::string reports_to_csv(std::span<const MetricsReport> reports);

// One JSON object per evaluated window.
std::string samples_to_jsonl(const MetricsReport& report);

// Filesystem-safe cell name, e.g. "a__b__r3__f0.3".
std::string cell_slug(const CellKey& cell);

// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

} // namespace userid

#endif
