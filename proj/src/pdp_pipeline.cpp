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

#include "tdlforge/pdp_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tdlforge {

void DenoiseConfig::validate() const {
  if (!(truncate_db < abs_floor_db)) throw ConfigError("truncate_db must be below abs_floor_db");
  if (!(bottom_fraction > 0.0 && bottom_fraction <= 1.0))
    throw ConfigError("bottom_fraction must lie in (0, 1]");
  if (!std::isfinite(margin_db)) throw ConfigError("margin_db must be finite");
}

void ExtractConfig::validate() const {
  if (max_taps < 1) throw ConfigError("max_taps must be positive");
  if (!(dynamic_range_db > 0.0)) throw ConfigError("dynamic_range_db must be positive");
  if (min_separation_bins < 1) throw ConfigError("min_separation_bins must be positive");
}

std::vector<Apdp> sliding_average(std::span<const PdpSnapshot> snapshots, int window) {
  if (window < 1) throw ConfigError("sliding_average: window must be >= 1");
  if (snapshots.empty()) throw ShapeError("sliding_average: no snapshots");
  if (static_cast<size_t>(window) > snapshots.size())
    throw ConfigError("sliding_average: window exceeds snapshot count");

  const Index n_bins = snapshots.front().size();
  const double spacing = snapshots.front().bin_spacing_ns;
  for (const auto& s : snapshots) {
    if (s.size() != n_bins) throw ShapeError("sliding_average: snapshot lengths differ");
    if (s.bin_spacing_ns != spacing) throw ShapeError("sliding_average: bin spacings differ");
  }

  // Each output re-sums its own window so rounding does not drift along the route.
  const size_t n_out = snapshots.size() - static_cast<size_t>(window) + 1;
  std::vector<Apdp> out;
  out.reserve(n_out);
  Eigen::ArrayXd acc(n_bins);
  for (size_t i = 0; i < n_out; ++i) {
    acc.setZero();
    for (int k = 0; k < window; ++k) acc += db_to_linear(snapshots[i + k].powers_db.array());
    Apdp a;
    a.powers_db = linear_to_db((acc / window).eval()).matrix();
    a.bin_spacing_ns = spacing;
    a.timestamp_s = snapshots[i + (window - 1) / 2].timestamp_s;
    a.window_len = window;
    out.push_back(std::move(a));
  }
  return out;
}

double estimate_noise_floor(const Apdp& apdp, const DenoiseConfig& cfg) {
  cfg.validate();
  std::vector<double> valid;
  valid.reserve(static_cast<size_t>(apdp.size()));
  for (Index i = 0; i < apdp.size(); ++i)
    if (apdp.powers_db[i] > cfg.abs_floor_db) valid.push_back(apdp.powers_db[i]);
  if (valid.empty()) throw AllNoiseError("all-noise snapshot: no bin above the absolute floor");

  std::sort(valid.begin(), valid.end());
  const double wanted = cfg.bottom_fraction * static_cast<double>(valid.size());
  const size_t count =
      std::clamp<size_t>(static_cast<size_t>(std::ceil(wanted - 1e-9)), 1, valid.size());

  double acc = 0.0;
  if (cfg.domain == NoiseFloorDomain::kLinear) {
    for (size_t i = 0; i < count; ++i) acc += db_to_linear(valid[i]);
    return linear_to_db(acc / static_cast<double>(count));
  }
  for (size_t i = 0; i < count; ++i) acc += valid[i];
  return acc / static_cast<double>(count);
}

Apdp denoise(const Apdp& apdp, const DenoiseConfig& cfg) {
  const double threshold = apdp.denoise_threshold_db
                               ? *apdp.denoise_threshold_db
                               : estimate_noise_floor(apdp, cfg) + cfg.margin_db;
  Apdp out = apdp;
  out.powers_db = (apdp.powers_db.array() < threshold).select(cfg.truncate_db, apdp.powers_db.array());
  out.denoise_threshold_db = threshold;
  return out;
}

Mask local_peak_mask(const Eigen::Ref<const Eigen::VectorXd>& p) {
  const Index n = p.size();
  if (n < 3) throw ShapeError("local_peak_mask: need at least 3 bins");
  Mask mask = Mask::Constant(n, false);
  const auto mid = p.segment(1, n - 2).array();
  mask.segment(1, n - 2) = (mid > p.head(n - 2).array()) && (mid > p.tail(n - 2).array());
  return mask;
}

std::vector<Tap> extract_taps(const Apdp& apdp, const ExtractConfig& cfg) {
  cfg.validate();
  const Index n = apdp.size();
  if (n == 0) throw ShapeError("extract_taps: empty APDP");
  if (n < 3) return {};

  Eigen::VectorXd residual = apdp.powers_db;
  Mask mask = local_peak_mask(residual);
  const double limit = residual.maxCoeff() - cfg.dynamic_range_db;
  const Index sep = cfg.min_separation_bins;

  std::vector<Tap> taps;
  for (int k = 0; k < cfg.max_taps; ++k) {
    Index best = -1;
    for (Index i = 0; i < n; ++i)
      if (mask[i] && (best < 0 || residual[i] > residual[best])) best = i;
    if (best < 0) break;
    const double power = residual[best];
    if (power < limit || is_truncated(power)) break;

    taps.push_back(Tap{best, static_cast<double>(best) * apdp.bin_spacing_ns, power});

    const Index lo = std::max<Index>(0, best - sep);
    const Index hi = std::min<Index>(n - 1, best + sep);
    residual.segment(lo, hi - lo + 1).setConstant(kTruncatedDb);
    mask.segment(lo, hi - lo + 1).setConstant(false);
  }

  std::sort(taps.begin(), taps.end(),
            [](const Tap& a, const Tap& b) { return a.delay_bin < b.delay_bin; });
  return taps;
}

Eigen::VectorXd integrate_tap_powers(const Apdp& apdp, std::span<const Tap> taps) {
  if (taps.empty()) throw ContractError("integrate_tap_powers: no taps");
  const Index n = apdp.size();
  for (size_t i = 0; i < taps.size(); ++i) {
    if (taps[i].delay_bin < 0 || taps[i].delay_bin >= n)
      throw ContractError("integrate_tap_powers: tap outside the profile");
    if (i > 0 && taps[i].delay_bin <= taps[i - 1].delay_bin)
      throw ContractError("integrate_tap_powers: taps not sorted by delay");
  }

  Eigen::VectorXd out(static_cast<Index>(taps.size()));
  for (size_t i = 0; i < taps.size(); ++i) {
    const Index begin = taps[i].delay_bin;
    const Index end = i + 1 < taps.size() ? taps[i + 1].delay_bin : n;
    const double energy = power_or_zero(apdp.powers_db.segment(begin, end - begin).array()).sum();
    out[static_cast<Index>(i)] = linear_to_db(energy);
  }
  return out;
}

double compute_k_factor(const Apdp& apdp, const Tap& first_tap, double first_tap_window_power_db) {
  if (first_tap.delay_bin < 0 || first_tap.delay_bin >= apdp.size())
    throw ContractError("compute_k_factor: tap outside the profile");
  const double los = db_to_linear(first_tap.power_db);
  const double total = db_to_linear(first_tap_window_power_db);
  constexpr double kRelEps = 1e-9;
  if (total < los * (1.0 - kRelEps))
    throw ContractError("compute_k_factor: window power below peak power");
  double nlos = total - los;
  if (nlos <= los * kRelEps) nlos = kTruncatedLinear;
  nlos = std::max(nlos, kTruncatedLinear);
  return first_tap.power_db - linear_to_db(nlos);
}

TdlExtraction extract_tdl(const Apdp& apdp, const DenoiseConfig& dcfg, const ExtractConfig& ecfg) {
  apdp.validate();
  TdlExtraction ex;
  ex.denoised = denoise(apdp, dcfg);
  ex.noise_floor_db = *ex.denoised.denoise_threshold_db - dcfg.margin_db;
  ex.taps = extract_taps(ex.denoised, ecfg);
  if (ex.taps.empty()) throw NoMultipathError("no multipath detected");
  ex.tap_powers_db = integrate_tap_powers(ex.denoised, ex.taps);

  const Tap& first = ex.taps.front();
  const double first_power = ex.tap_powers_db[0];
  const auto n = static_cast<Index>(ex.taps.size());

  TdlParams& p = ex.params;
  p.first_tap_power_db = first_power;
  p.k_factor_db = compute_k_factor(ex.denoised, first, first_power);
  p.num_taps = static_cast<int>(n);
  p.delays_ns.resize(n);
  p.powers_db.resize(n);
  for (Index i = 0; i < n; ++i) {
    p.delays_ns[i] = static_cast<double>(ex.taps[static_cast<size_t>(i)].delay_bin - first.delay_bin) *
                     apdp.bin_spacing_ns;
    p.powers_db[i] = ex.tap_powers_db[i] - first_power;
  }
  return ex;
}

TdlParams pdp_to_tdl(const Apdp& apdp, const DenoiseConfig& dcfg, const ExtractConfig& ecfg) {
  return extract_tdl(apdp, dcfg, ecfg).params;
}

}  // namespace tdlforge
