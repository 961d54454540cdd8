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

#pragma once

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "tdlforge/core_types.hpp"

namespace tdlforge {

struct PredictionRecord {
  double timestamp_s = 0.0;
  TdlParams tdl;
};

/// JSON lines, one {"timestamp_s": t, "tdl": {...}} object per line. Blank
/// lines are skipped. Records come back sorted by timestamp (stable).
/// Throws ValidationError whose message carries the 1-based line number.
std::vector<PredictionRecord> load_predictions(const std::filesystem::path& path);
void save_predictions(const std::filesystem::path& path, std::span<const PredictionRecord> records);

/// Seam for external models: anything that maps a query to TDL parameters.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual TdlParams predict(double distance_m) const = 0;
};

/// Returns the entry whose distance is closest to the query. Ties go to the
/// smaller anchor distance, then to the lower index.
const TdlParams& baseline_nearest_tdl(std::span<const std::pair<double, TdlParams>> train_set,
                                     double query_distance_m);

class NearestDistancePredictor final : public Predictor {
 public:
  explicit NearestDistancePredictor(std::vector<std::pair<double, TdlParams>> train_set);
  TdlParams predict(double distance_m) const override;

 private:
  std::vector<std::pair<double, TdlParams>> train_set_;
};

}  // namespace tdlforge
