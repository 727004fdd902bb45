/*
 * Copyright 2026 The sbrsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "sbrsim/experiment.hpp"

namespace sbrsim {

/// Fixed-point decimal with six digits; "inf" for infinities.
std::string format_ratio(double value);

void write_results_csv(std::ostream& out, const ExperimentResult& result);
void write_passes_csv(std::ostream& out, const ExperimentResult& result);
void write_transfers_csv(std::ostream& out, const ExperimentResult& result);
nlohmann::json summary_json(const ExperimentResult& result);

/// Writes results.csv, passes.csv, transfers.csv and summary.json.
void write_reports(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace sbrsim
