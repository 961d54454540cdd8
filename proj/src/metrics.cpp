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

#include "tdlforge/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace tdlforge {

void to_json(nlohmann::json& j, const EvalReport& r) {
  j = nlohmann::json{{"rmse_path_loss_db", r.rmse_path_loss_db},
                     {"rmse_delay_spread_ns", r.rmse_delay_spread_ns},
                     {"rmse_k_factor_db", r.rmse_k_factor_db},
                     {"pdp_avg_cosine_similarity", r.pdp_avg_cosine_similarity},
                     {"n_samples", r.n_samples}};
}

void from_json(const nlohmann::json& j, EvalReport& r) {
  j.at("rmse_path_loss_db").get_to(r.rmse_path_loss_db);
  j.at("rmse_delay_spread_ns").get_to(r.rmse_delay_spread_ns);
  j.at("rmse_k_factor_db").get_to(r.rmse_k_factor_db);
  j.at("pdp_avg_cosine_similarity").get_to(r.pdp_avg_cosine_similarity);
  j.at("n_samples").get_to(r.n_samples);
}

double rms_delay_spread(const PdpSnapshot& pdp) {
  const Eigen::ArrayXd p = power_or_zero(pdp.powers_db.array());
  const double total = p.sum();
  if (!(total > 0.0)) throw UndefinedMetricError("rms_delay_spread: all-sentinel PDP");
  const Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(p.size(), 0.0, static_cast<double>(p.size() - 1)) *
                           pdp.bin_spacing_ns;
  // Central form of E[t^2] - E[t]^2; identical in exact arithmetic, no cancellation.
  const double mean = (p * t).sum() / total;
  const double var = (p * (t - mean).square()).sum() / total;
  return std::sqrt(std::max(var, 0.0));
}

double pdp_cosine_similarity(const PdpSnapshot& truth, const PdpSnapshot& pred) {
  if (truth.size() != pred.size()) throw ShapeError("pdp_cosine_similarity: lengths differ");
  if (truth.bin_spacing_ns != pred.bin_spacing_ns)
    throw ShapeError("pdp_cosine_similarity: bin spacings differ");
  const Eigen::VectorXd a = power_or_zero(truth.powers_db.array()).matrix();
  const Eigen::VectorXd b = power_or_zero(pred.powers_db.array()).matrix();
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw UndefinedMetricError("pdp_cosine_similarity: all-zero PDP");
  // Normalise first so tiny absolute powers (1e-12 W) do not underflow the dot product.
  return std::clamp((a / na).dot(b / nb), 0.0, 1.0);
}

double received_power_db(const PdpSnapshot& pdp) {
  const double total = power_or_zero(pdp.powers_db.array()).sum();
  if (!(total > 0.0)) throw UndefinedMetricError("received_power_db: all-sentinel PDP");
  return linear_to_db(total);
}

double rmse(const Eigen::Ref<const Eigen::VectorXd>& truth, const Eigen::Ref<const Eigen::VectorXd>& pred) {
  if (truth.size() != pred.size()) throw ShapeError("rmse: lengths differ");
  if (truth.size() == 0) throw ShapeError("rmse: empty input");
  return std::sqrt((truth - pred).squaredNorm() / static_cast<double>(truth.size()));
}

std::pair<PdpSnapshot, PdpSnapshot> pad_to_common_length(const PdpSnapshot& a, const PdpSnapshot& b) {
  if (a.bin_spacing_ns != b.bin_spacing_ns) throw ShapeError("pad_to_common_length: bin spacings differ");
  const Index n = std::max(a.size(), b.size());
  auto pad = [n](const PdpSnapshot& s) {
    PdpSnapshot out = s;
    out.powers_db.conservativeResize(n);
    out.powers_db.tail(n - s.size()).setConstant(kTruncatedDb);
    return out;
  };
  return {pad(a), pad(b)};
}

EvalReport evaluate_route(std::span<const PdpSnapshot> truth_pdps, std::span<const PdpSnapshot> pred_pdps,
                          std::span<const TdlParams> truth_tdls, std::span<const TdlParams> pred_tdls) {
  const size_t n = truth_pdps.size();
  if (n == 0) throw ContractError("evaluate_route: empty route");
  if (pred_pdps.size() != n || truth_tdls.size() != n || pred_tdls.size() != n)
    throw ContractError("evaluate_route: sequences are not paired");

  Eigen::VectorXd pl_t(n), pl_p(n), ds_t(n), ds_p(n), k_t(n), k_p(n);
  double cos_sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const auto idx = static_cast<Index>(i);
    const auto [t, p] = pad_to_common_length(truth_pdps[i], pred_pdps[i]);
    pl_t[idx] = received_power_db(t);
    pl_p[idx] = received_power_db(p);
    ds_t[idx] = rms_delay_spread(t);
    ds_p[idx] = rms_delay_spread(p);
    k_t[idx] = truth_tdls[i].k_factor_db;
    k_p[idx] = pred_tdls[i].k_factor_db;
    cos_sum += pdp_cosine_similarity(t, p);
  }

  EvalReport r;
  r.rmse_path_loss_db = rmse(pl_t, pl_p);
  r.rmse_delay_spread_ns = rmse(ds_t, ds_p);
  r.rmse_k_factor_db = rmse(k_t, k_p);
  r.pdp_avg_cosine_similarity = cos_sum / static_cast<double>(n);
  r.n_samples = static_cast<int>(n);
  return r;
}

}  // namespace tdlforge
