// SPDX-License-Identifier: Apache-2.0
//
// tdlforge: tapped-delay-line extraction and channel reconstruction toolkit
// Copyright (C) 2026 The tdlforge authors
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

#include "tdlforge/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "tdlforge/dataset_io.hpp"

namespace tdlforge {

std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::vector<PredictionRecord> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(e.what(), line_no);
    }
    PredictionRecord r;
    try {
      if (!j.is_object()) throw ValidationError("", "record must be a JSON object");
      if (!j.contains("timestamp_s") || !j.at("timestamp_s").is_number())
        throw ValidationError("timestamp_s", "missing or not a number");
      if (!j.contains("tdl")) throw ValidationError("tdl", "missing");
      r.timestamp_s = j.at("timestamp_s").get<double>();
      r.tdl = j.at("tdl").get<TdlParams>();
    } catch (const ValidationError& e) {
      throw ValidationError(e.field(), e.reason(), line_no);
    }
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const PredictionRecord& a, const PredictionRecord& b) { return a.timestamp_s < b.timestamp_s; });
  return out;
}

void save_predictions(const std::filesystem::path& path, std::span<const PredictionRecord> records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : records) out << nlohmann::json{{"timestamp_s", r.timestamp_s}, {"tdl", r.tdl}}.dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

const TdlParams& baseline_nearest_tdl(std::span<const std::pair<double, TdlParams>> train_set,
                                     double query_distance_m) {
  if (train_set.empty()) throw ContractError("baseline_nearest_tdl: empty training set");
  size_t best = 0;
  double best_gap = std::abs(train_set[0].first - query_distance_m);
  for (size_t i = 1; i < train_set.size(); ++i) {
    const double gap = std::abs(train_set[i].first - query_distance_m);
    if (gap < best_gap || (gap == best_gap && train_set[i].first < train_set[best].first)) {
      best = i;
      best_gap = gap;
    }
  }
  return train_set[best].second;
}

NearestDistancePredictor::NearestDistancePredictor(std::vector<std::pair<double, TdlParams>> train_set)
    : train_set_(std::move(train_set)) {
  if (train_set_.empty()) throw ContractError("NearestDistancePredictor: empty training set");
}

TdlParams NearestDistancePredictor::predict(double distance_m) const {
  return baseline_nearest_tdl(train_set_, distance_m);
}

}  // namespace tdlforge
