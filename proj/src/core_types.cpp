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

#include "tdlforge/core_types.hpp"

#include <string>

namespace tdlforge {

void PdpSnapshot::validate() const {
  if (powers_db.size() == 0) throw ValidationError("powers_db", "empty power vector");
  if (!(bin_spacing_ns > 0.0) || !std::isfinite(bin_spacing_ns))
    throw ValidationError("bin_spacing_ns", "must be positive and finite");
  for (Index i = 0; i < powers_db.size(); ++i) {
    const double v = powers_db[i];
    if (!std::isfinite(v) && v != kTruncatedDb)
      throw ValidationError("powers_db", "non-finite entry at bin " + std::to_string(i));
  }
}

void Apdp::validate() const {
  PdpSnapshot::validate();
  if (window_len < 1) throw ValidationError("window_len", "must be >= 1");
}

void TdlParams::validate() const {
  if (num_taps < 1) throw ValidationError("num_taps", "must be >= 1");
  if (delays_ns.size() != num_taps)
    throw ValidationError("delays_ns", "length differs from num_taps");
  if (powers_db.size() != num_taps)
    throw ValidationError("powers_db", "length differs from num_taps");
  if (!std::isfinite(first_tap_power_db))
    throw ValidationError("first_tap_power_db", "must be finite");
  if (!std::isfinite(k_factor_db)) throw ValidationError("k_factor_db", "must be finite");
  if (delays_ns[0] != 0.0) throw ValidationError("delays_ns", "first delay must be 0");
  if (powers_db[0] != 0.0) throw ValidationError("powers_db", "first power must be 0 dB");
  for (Index i = 0; i < num_taps; ++i) {
    if (!std::isfinite(delays_ns[i]) || delays_ns[i] < 0.0)
      throw ValidationError("delays_ns", "entries must be finite and >= 0");
    if (!std::isfinite(powers_db[i]))
      throw ValidationError("powers_db", "entries must be finite");
    if (i > 0 && !(delays_ns[i] > delays_ns[i - 1]))
      throw ValidationError("delays_ns", "must be strictly increasing");
  }
}

void Cir::validate() const {
  if (samples.size() == 0) throw ValidationError("samples", "empty CIR");
  if (!(sample_period_ns > 0.0)) throw ValidationError("sample_period_ns", "must be positive");
}

}  // namespace tdlforge
