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
#include <utility>
#include <vector>

#include "tdlforge/core_types.hpp"

namespace tdlforge {

struct MatchConfig {
  /// Scale applied to delays so that one 33.3 ns bin weighs like 1 dB.
  double delay_weight = 1.0 / kDefaultBinSpacingNs;
  double repulsion_min_sep_ns = kDefaultBinSpacingNs;
  double repulsion_alpha = 1.0;
  double lambda_temporal = 0.1;

  void validate() const;
};

struct TapAssignment {
  /// (pred_index, truth_index), ordered by truth index.
  std::vector<std::pair<Index, Index>> pairs;
  std::vector<Index> unmatched_pred;
  double cost = 0.0;
};

/// Tap sets: one row per tap, column 0 = delay in ns, column 1 = power in dB.
using TapSet = Eigen::MatrixX2d;

/**
 * Mean squared step between adjacent time samples.
 *
 * For a matrix argument the rows are batch entries and the columns are time
 * steps; a compile-time vector is a single sequence. One time step gives 0.
 */
template <typename Derived>
double temporal_consistency(const Eigen::MatrixBase<Derived>& x) {
  if (x.size() == 0) throw ContractError("temporal_consistency: empty input");
  if constexpr (Derived::IsVectorAtCompileTime) {
    const Index t = x.size();
    if (t < 2) return 0.0;
    return (x.tail(t - 1) - x.head(t - 1)).squaredNorm() / static_cast<double>(t - 1);
  } else {
    const Index b = x.rows();
    const Index t = x.cols();
    if (t < 2) return 0.0;
    return (x.rightCols(t - 1) - x.leftCols(t - 1)).squaredNorm() / static_cast<double>(b * (t - 1));
  }
}

/// MSE of the first-tap power plus lambda * temporal_consistency(pred). Rows = batch, cols = time.
double stage1_loss(const Eigen::Ref<const Eigen::MatrixXd>& pred_p, const Eigen::Ref<const Eigen::MatrixXd>& truth_p,
                   const MatchConfig& cfg = {});

/// MSE(K) + MSE(N) + lambda * temporal_consistency(K). N is a real-valued target here.
double stage2_loss(const Eigen::Ref<const Eigen::MatrixXd>& pred_k, const Eigen::Ref<const Eigen::MatrixXd>& truth_k,
                   const Eigen::Ref<const Eigen::MatrixXd>& pred_n, const Eigen::Ref<const Eigen::MatrixXd>& truth_n,
                   const MatchConfig& cfg = {});

/// Minimum-cost assignment of every column (truth) to a distinct row (prediction).
/// Requires rows >= cols. Throws DomainError on non-finite costs.
TapAssignment hungarian_assign(const Eigen::Ref<const Eigen::MatrixXd>& cost);

/// Squared distance between scaled tap vectors [w_d * delay, power].
Eigen::MatrixXd match_cost_matrix(const TapSet& pred, const TapSet& truth, const MatchConfig& cfg = {});

/// Mean matched cost over the truth taps. Empty truth gives 0.
std::pair<double, TapAssignment> match_loss(const TapSet& pred, const TapSet& truth, const MatchConfig& cfg = {});

/// Mean over ordered pairs i != j of max(0, d_min - |tau_i - tau_j|). Fewer than two delays gives 0.
double repulsion_loss(const Eigen::Ref<const Eigen::VectorXd>& pred_delays_ns, const MatchConfig& cfg = {});

/// mean match_loss + alpha * mean repulsion_loss over aligned frames.
double stage3_loss(std::span<const TapSet> pred_sets, std::span<const TapSet> truth_sets, const MatchConfig& cfg = {});

}  // namespace tdlforge
