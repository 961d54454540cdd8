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

#include <span>
#include <string>
#include <utility>

#include <json.hpp>

#include "tdlforge/core_types.hpp"

namespace tdlforge {

struct EvalReport {
  double rmse_path_loss_db = 0.0;
  double rmse_delay_spread_ns = 0.0;
  double rmse_k_factor_db = 0.0;
  double pdp_avg_cosine_similarity = 1.0;
  int n_samples = 0;
};

void to_json(nlohmann::json& j, const EvalReport& r);
void from_json(const nlohmann::json& j, EvalReport& r);

/// Second central moment of the PDP in delay, with t_n = n * bin_spacing_ns.
/// Throws UndefinedMetricError for an all-sentinel PDP.
double rms_delay_spread(const PdpSnapshot& pdp);

/// Cosine of the linear power vectors (truncated bins count as 0).
/// Throws ShapeError on length or spacing mismatch.
double pdp_cosine_similarity(const PdpSnapshot& truth, const PdpSnapshot& pred);

/// Total received power, 10 log10(sum of linear bins).
double received_power_db(const PdpSnapshot& pdp);

double rmse(const Eigen::Ref<const Eigen::VectorXd>& truth, const Eigen::Ref<const Eigen::VectorXd>& pred);

/// Extends the shorter profile with truncated bins so both share one grid.
std::pair<PdpSnapshot, PdpSnapshot> pad_to_common_length(const PdpSnapshot& a, const PdpSnapshot& b);

/// Route-level metrics: RMSE of received power, delay spread and K across the
/// snapshots, and the mean PDP cosine similarity.
EvalReport evaluate_route(std::span<const PdpSnapshot> truth_pdps, std::span<const PdpSnapshot> pred_pdps,
                          std::span<const TdlParams> truth_tdls, std::span<const TdlParams> pred_tdls);

}  // namespace tdlforge
