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
#include <vector>

#include "tdlforge/core_types.hpp"

namespace tdlforge {

/// Domain in which the bottom-fraction noise-floor mean is taken.
enum class NoiseFloorDomain { kLinear, kDb };

struct DenoiseConfig {
  double abs_floor_db = -160.0;
  double bottom_fraction = 0.20;
  double margin_db = 11.0;
  double truncate_db = kTruncatedDb;
  NoiseFloorDomain domain = NoiseFloorDomain::kLinear;

  void validate() const;
};

struct ExtractConfig {
  int max_taps = 40;
  double dynamic_range_db = 50.0;
  int min_separation_bins = 3;

  void validate() const;
};

/// Default number of raw snapshots per APDP (about 0.2 s at 45 snapshots/s).
inline constexpr int kDefaultAverageWindow = 9;

using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// Bin-wise linear-domain moving average. Output i covers snapshots
/// [i, i + window) and carries the timestamp of snapshot i + (window - 1) / 2.
std::vector<Apdp> sliding_average(std::span<const PdpSnapshot> snapshots, int window);

/// Mean of the lowest bottom_fraction of bins above abs_floor_db.
/// Throws AllNoiseError when no bin lies above the floor.
double estimate_noise_floor(const Apdp& apdp, const DenoiseConfig& cfg = {});

/// Truncates every bin below noise floor + margin to cfg.truncate_db.
Apdp denoise(const Apdp& apdp, const DenoiseConfig& cfg = {});

/// mask[i] is true iff bin i is strictly greater than both neighbours.
/// The first and last bins are never peaks. Throws ShapeError below 3 bins.
Mask local_peak_mask(const Eigen::Ref<const Eigen::VectorXd>& powers_db);
inline Mask local_peak_mask(const Apdp& apdp) { return local_peak_mask(apdp.powers_db); }

/**
 * Iterative peak search over a denoised APDP.
 *
 * Candidates are the local maxima of the input. Each round takes the strongest
 * remaining candidate, stops once it falls more than dynamic_range_db below the
 * global maximum of the input (or nothing is left), and clears
 * +/- min_separation_bins around it. At most max_taps rounds run.
 *
 * Returned taps are ordered by delay.
 */
std::vector<Tap> extract_taps(const Apdp& apdp, const ExtractConfig& cfg = {});

/// Per-tap energy over [delay_bin_i, delay_bin_{i+1}), the last window running
/// to the end of the profile. Truncated bins contribute nothing.
Eigen::VectorXd integrate_tap_powers(const Apdp& apdp, std::span<const Tap> taps);

/// Rician K in dB: peak bin power of the first tap over the residual energy of
/// its window. A window with no residual energy yields peak - kTruncatedDb.
double compute_k_factor(const Apdp& apdp, const Tap& first_tap, double first_tap_window_power_db);

/// Intermediate products of pdp_to_tdl, useful for diagnostics.
struct TdlExtraction {
  TdlParams params;
  std::vector<Tap> taps;
  Eigen::VectorXd tap_powers_db;
  double noise_floor_db = kTruncatedDb;
  Apdp denoised;
};

TdlExtraction extract_tdl(const Apdp& apdp, const DenoiseConfig& dcfg = {},
                          const ExtractConfig& ecfg = {});

/// denoise -> extract_taps -> integrate_tap_powers -> compute_k_factor.
/// Throws NoMultipathError when no tap survives.
TdlParams pdp_to_tdl(const Apdp& apdp, const DenoiseConfig& dcfg = {},
                     const ExtractConfig& ecfg = {});

}  // namespace tdlforge
