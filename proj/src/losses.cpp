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

#include "tdlforge/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tdlforge {

void MatchConfig::validate() const {
  if (!(delay_weight > 0.0)) throw ConfigError("delay_weight must be positive");
  if (!(repulsion_min_sep_ns >= 0.0)) throw ConfigError("repulsion_min_sep_ns must be >= 0");
  if (!(repulsion_alpha >= 0.0)) throw ConfigError("repulsion_alpha must be >= 0");
  if (!(lambda_temporal >= 0.0)) throw ConfigError("lambda_temporal must be >= 0");
}

namespace {

double mse(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::MatrixXd>& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError(std::string(what) + ": shape mismatch");
  if (a.size() == 0) throw ShapeError(std::string(what) + ": empty input");
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

}  // namespace

double stage1_loss(const Eigen::Ref<const Eigen::MatrixXd>& pred_p, const Eigen::Ref<const Eigen::MatrixXd>& truth_p,
                   const MatchConfig& cfg) {
  cfg.validate();
  return mse(pred_p, truth_p, "stage1_loss") + cfg.lambda_temporal * temporal_consistency(pred_p);
}

double stage2_loss(const Eigen::Ref<const Eigen::MatrixXd>& pred_k, const Eigen::Ref<const Eigen::MatrixXd>& truth_k,
                   const Eigen::Ref<const Eigen::MatrixXd>& pred_n, const Eigen::Ref<const Eigen::MatrixXd>& truth_n,
                   const MatchConfig& cfg) {
  cfg.validate();
  if (pred_k.rows() != pred_n.rows() || pred_k.cols() != pred_n.cols())
    throw ShapeError("stage2_loss: K and N shapes differ");
  return mse(pred_k, truth_k, "stage2_loss") + mse(pred_n, truth_n, "stage2_loss") +
         cfg.lambda_temporal * temporal_consistency(pred_k);
}

TapAssignment hungarian_assign(const Eigen::Ref<const Eigen::MatrixXd>& cost) {
  const Index m = cost.rows();  // predictions
  const Index n = cost.cols();  // truth
  if (m < n) throw ContractError("hungarian_assign: fewer predictions than truth taps");
  if (!cost.allFinite()) throw DomainError("hungarian_assign: non-finite cost");

  TapAssignment out;
  if (n == 0) {
    for (Index i = 0; i < m; ++i) out.unmatched_pred.push_back(i);
    return out;
  }

  // Shortest augmenting path with row/column potentials over the transposed
  // problem: each truth column (1..n) is a "worker" placed on one prediction
  // row (1..m). Index 0 is the virtual start of every augmentation.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<size_t>(n + 1), 0.0), v(static_cast<size_t>(m + 1), 0.0);
  std::vector<Index> owner(static_cast<size_t>(m + 1), 0), way(static_cast<size_t>(m + 1), 0);
  std::vector<double> min_slack(static_cast<size_t>(m + 1));
  std::vector<char> used(static_cast<size_t>(m + 1));

  for (Index j = 1; j <= n; ++j) {
    owner[0] = j;
    Index row0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[static_cast<size_t>(row0)] = 1;
      const Index col = owner[static_cast<size_t>(row0)];
      double delta = kInf;
      Index row1 = 0;
      for (Index r = 1; r <= m; ++r) {
        const auto ri = static_cast<size_t>(r);
        if (used[ri]) continue;
        const double cur = cost(r - 1, col - 1) - u[static_cast<size_t>(col)] - v[ri];
        if (cur < min_slack[ri]) {
          min_slack[ri] = cur;
          way[ri] = row0;
        }
        if (min_slack[ri] < delta) {
          delta = min_slack[ri];
          row1 = r;
        }
      }
      for (Index r = 0; r <= m; ++r) {
        const auto ri = static_cast<size_t>(r);
        if (used[ri]) {
          u[static_cast<size_t>(owner[ri])] += delta;
          v[ri] -= delta;
        } else {
          min_slack[ri] -= delta;
        }
      }
      row0 = row1;
    } while (owner[static_cast<size_t>(row0)] != 0);
    do {
      const Index prev = way[static_cast<size_t>(row0)];
      owner[static_cast<size_t>(row0)] = owner[static_cast<size_t>(prev)];
      row0 = prev;
    } while (row0 != 0);
  }

  std::vector<Index> row_of_truth(static_cast<size_t>(n), -1);
  for (Index r = 1; r <= m; ++r) {
    const Index col = owner[static_cast<size_t>(r)];
    if (col > 0) row_of_truth[static_cast<size_t>(col - 1)] = r - 1;
    else out.unmatched_pred.push_back(r - 1);
  }
  for (Index j = 0; j < n; ++j) {
    const Index r = row_of_truth[static_cast<size_t>(j)];
    out.pairs.emplace_back(r, j);
    out.cost += cost(r, j);
  }
  return out;
}

Eigen::MatrixXd match_cost_matrix(const TapSet& pred, const TapSet& truth, const MatchConfig& cfg) {
  Eigen::MatrixXd c(pred.rows(), truth.rows());
  for (Index i = 0; i < pred.rows(); ++i) {
    for (Index j = 0; j < truth.rows(); ++j) {
      const double dd = cfg.delay_weight * pred(i, 0) - cfg.delay_weight * truth(j, 0);
      const double dp = pred(i, 1) - truth(j, 1);
      c(i, j) = dd * dd + dp * dp;
    }
  }
  return c;
}

std::pair<double, TapAssignment> match_loss(const TapSet& pred, const TapSet& truth, const MatchConfig& cfg) {
  cfg.validate();
  if (truth.rows() == 0) {
    TapAssignment empty;
    for (Index i = 0; i < pred.rows(); ++i) empty.unmatched_pred.push_back(i);
    return {0.0, std::move(empty)};
  }
  if (pred.rows() < truth.rows())
    throw ContractError("match_loss: fewer predicted taps than valid truth taps");
  TapAssignment a = hungarian_assign(match_cost_matrix(pred, truth, cfg));
  const double loss = a.cost / static_cast<double>(truth.rows());
  return {loss, std::move(a)};
}

double repulsion_loss(const Eigen::Ref<const Eigen::VectorXd>& d, const MatchConfig& cfg) {
  cfg.validate();
  const Index n = d.size();
  if (n < 2) return 0.0;
  double acc = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j) acc += std::max(0.0, cfg.repulsion_min_sep_ns - std::abs(d[i] - d[j]));
  return acc / static_cast<double>(n * (n - 1));
}

double stage3_loss(std::span<const TapSet> pred_sets, std::span<const TapSet> truth_sets, const MatchConfig& cfg) {
  if (pred_sets.size() != truth_sets.size()) throw ShapeError("stage3_loss: frame counts differ");
  if (pred_sets.empty()) throw ShapeError("stage3_loss: no frames");
  double match = 0.0;
  double rep = 0.0;
  for (size_t f = 0; f < pred_sets.size(); ++f) {
    match += match_loss(pred_sets[f], truth_sets[f], cfg).first;
    rep += repulsion_loss(pred_sets[f].col(0), cfg);
  }
  const auto frames = static_cast<double>(pred_sets.size());
  return match / frames + cfg.repulsion_alpha * rep / frames;
}

}  // namespace tdlforge
