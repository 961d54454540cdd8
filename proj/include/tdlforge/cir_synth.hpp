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

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "tdlforge/core_types.hpp"
#include "tdlforge/rng.hpp"

namespace tdlforge {

struct SamplingSpec {
  double sample_period_ns = kDefaultBinSpacingNs;
  Index grid_len = 64;
  /// Hamming window half-width in sample periods.
  int window_half_support = 4;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Grid length that holds a tap at max_abs_delay_ns plus two window supports.
Index grid_len_for(double max_abs_delay_ns, double sample_period_ns, int window_half_support = 4);

struct PowerSplit {
  double los_db;
  double nlos_db;
};

/// Splits the first-tap power between LOS and NLOS using the linear K.
PowerSplit split_power_by_k(double p_total_db, double k_db);

/// sqrt(p_los) e^{j 2 pi theta} + sqrt(p_nlos / 2) (x + j y). Consumes one
/// uniform and two normals from rng regardless of the powers.
std::complex<double> draw_first_tap_coeff(double p_los_db, double p_nlos_db, Rng& rng);

/// sqrt(p / 2) (x + j y). Consumes two normals.
std::complex<double> draw_rayleigh_coeff(double p_db, Rng& rng);

/// Time of flight plus relative delays. Throws DomainError for distance < 0.
Eigen::VectorXd absolute_delays(double distance_m, const Eigen::Ref<const Eigen::VectorXd>& delays_ns);

/// Normalised sinc, sin(pi x) / (pi x). Exactly zero at non-zero integers.
template <typename Scalar>
Scalar sinc(Scalar x) {
  using std::round;
  using std::sin;
  if (x == round(x)) return x == Scalar(0) ? Scalar(1) : Scalar(0);
  const Scalar px = std::numbers::pi_v<Scalar> * x;
  return sin(px) / px;
}

/// Symmetric Hamming taper over |u| <= half_support (u in sample periods), zero outside.
template <typename Scalar>
Scalar hamming(Scalar u, Scalar half_support) {
  using std::abs;
  using std::cos;
  if (abs(u) > half_support) return Scalar(0);
  return Scalar(0.54) + Scalar(0.46) * cos(std::numbers::pi_v<Scalar> * u / half_support);
}

/// Band-limiting pulse evaluated at an offset of u sample periods.
template <typename Scalar>
Scalar windowed_sinc(Scalar u, Scalar half_support) {
  return sinc(u) * hamming(u, half_support);
}

/// h[n] = sum_i c_i * windowed_sinc((n T_s - tau_i) / T_s).
/// Throws RangeError when a delay plus the window support leaves the grid.
Cir sample_cir(const Eigen::Ref<const Eigen::VectorXcd>& coeffs,
               const Eigen::Ref<const Eigen::VectorXd>& abs_delays_ns, const SamplingSpec& spec,
               double first_tap_power_db = 0.0);

/// |h[n]|^2 scaled by the first-tap power, in dB. Coefficients are expected in
/// units of the first-tap power, so the first-tap window carries
/// first_tap_power_db on average.
PdpSnapshot cir_to_pdp(const Cir& cir);

/// Forward-model knobs beyond the plain fading model.
struct SynthOptions {
  /// Per-bin complex noise power relative to the first-tap power. Unset means noiseless.
  std::optional<double> noise_rel_db;
  /// When > 0, the first tap's NLOS power is carried by this many Rayleigh
  /// micro-scatterers at the following sample periods instead of sharing the
  /// LOS delay.
  int first_tap_scatter_bins = 0;
  /// Timestamp spacing of consecutive draws.
  double draw_interval_s = 1.0;
};

/// One fading realisation of params as a CIR.
Cir synthesize_cir(const TdlParams& params, double distance_m, const SamplingSpec& spec,
                   const SynthOptions& options, Rng& rng);

/// n_draws independent realisations. Draw d uses Rng::substream(spec.rng_seed, d),
/// so the output does not depend on `jobs`.
std::vector<PdpSnapshot> generate_ensemble(const TdlParams& params, double distance_m, int n_draws,
                                           const SamplingSpec& spec, const SynthOptions& options = {},
                                           int jobs = 1);

}  // namespace tdlforge
