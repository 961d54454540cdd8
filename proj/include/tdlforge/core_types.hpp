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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <optional>
#include <vector>

#include "tdlforge/errors.hpp"

namespace tdlforge {

using Index = Eigen::Index;

/// Marker for truncated or absent power, in dB.
inline constexpr double kTruncatedDb = -200.0;
/// Linear value of kTruncatedDb.
inline constexpr double kTruncatedLinear = 1e-20;

/// Speed of light in m/ns.
inline constexpr double kSpeedOfLightMPerNs = 0.299792458;

/// Delay resolution of a 30 MHz sounder.
inline constexpr double kDefaultBinSpacingNs = 33.3;

// ----- dB <-> linear -------------------------------------------------------

template <std::floating_point Scalar>
Scalar db_to_linear(Scalar x_db) {
  using std::pow;
  return pow(Scalar(10), x_db / Scalar(10));
}

/// 10*log10(x), clamped below at kTruncatedDb. Throws DomainError for x < 0.
template <std::floating_point Scalar>
Scalar linear_to_db(Scalar x) {
  using std::log10;
  if (!(x >= Scalar(0))) throw DomainError("linear_to_db: negative or NaN power");
  if (x <= Scalar(kTruncatedLinear)) return Scalar(kTruncatedDb);
  return Scalar(10) * log10(x);
}

/// True for bins that carry the truncation marker.
template <std::floating_point Scalar>
bool is_truncated(Scalar x_db) {
  return x_db <= Scalar(kTruncatedDb);
}

/// Linear power where truncated bins count as exactly zero.
template <std::floating_point Scalar>
Scalar power_or_zero(Scalar x_db) {
  return is_truncated(x_db) ? Scalar(0) : db_to_linear(x_db);
}

template <typename Derived>
auto db_to_linear(const Eigen::ArrayBase<Derived>& x_db) {
  using Scalar = typename Derived::Scalar;
  return x_db.unaryExpr([](Scalar v) { return db_to_linear(v); });
}

template <typename Derived>
auto linear_to_db(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return linear_to_db(v); });
}

template <typename Derived>
auto power_or_zero(const Eigen::ArrayBase<Derived>& x_db) {
  using Scalar = typename Derived::Scalar;
  return x_db.unaryExpr([](Scalar v) { return power_or_zero(v); });
}

// ----- domain types --------------------------------------------------------

/// One raw power-delay-profile observation.
struct PdpSnapshot {
  Eigen::VectorXd powers_db;
  double bin_spacing_ns = kDefaultBinSpacingNs;
  double timestamp_s = 0.0;

  Index size() const { return powers_db.size(); }
  /// Throws ValidationError when an invariant does not hold.
  void validate() const;
};

/// Sliding-window average of raw snapshots.
struct Apdp : PdpSnapshot {
  int window_len = 1;
  /// Truncation threshold already applied by denoise(), if any.
  std::optional<double> denoise_threshold_db;

  Apdp() = default;
  explicit Apdp(PdpSnapshot snapshot, int window = 1)
      : PdpSnapshot(std::move(snapshot)), window_len(window) {}

  void validate() const;
};

struct Tap {
  Index delay_bin = 0;
  double delay_ns = 0.0;
  double power_db = kTruncatedDb;

  friend bool operator==(const Tap&, const Tap&) = default;
};

/// Structured TDL parameter set. Delays are relative to the first tap and
/// powers are relative to first_tap_power_db, so delays_ns[0] == 0 and
/// powers_db[0] == 0.
struct TdlParams {
  double first_tap_power_db = 0.0;
  double k_factor_db = 0.0;
  int num_taps = 0;
  Eigen::VectorXd delays_ns;
  Eigen::VectorXd powers_db;

  void validate() const;
};

/// Complex baseband impulse response on the grid t_n = n * sample_period_ns.
struct Cir {
  Eigen::VectorXcd samples;
  double sample_period_ns = kDefaultBinSpacingNs;
  double first_tap_power_db = 0.0;

  void validate() const;
};

}  // namespace tdlforge
