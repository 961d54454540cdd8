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

#include "tdlforge/cir_synth.hpp"

#include <string>

#include "tdlforge/parallel.hpp"

namespace tdlforge {

namespace {

// Delays within this many sample periods of a grid point are treated as on-grid,
// absorbing the rounding of ns arithmetic such as 3 * 33.3 / 33.3.
constexpr double kGridSnap = 1e-9;

double delay_in_samples(double delay_ns, double period_ns) {
  const double pos = delay_ns / period_ns;
  const double nearest = std::round(pos);
  return std::abs(pos - nearest) < kGridSnap ? nearest : pos;
}

}  // namespace

void SamplingSpec::validate() const {
  if (!(sample_period_ns > 0.0)) throw ConfigError("sample_period_ns must be positive");
  if (grid_len < 1) throw ConfigError("grid_len must be positive");
  if (window_half_support < 1) throw ConfigError("window_half_support must be positive");
}

Index grid_len_for(double max_abs_delay_ns, double sample_period_ns, int window_half_support) {
  if (!(sample_period_ns > 0.0)) throw ConfigError("sample_period_ns must be positive");
  if (max_abs_delay_ns < 0.0) throw DomainError("negative delay");
  const double last = std::floor(delay_in_samples(max_abs_delay_ns, sample_period_ns));
  return static_cast<Index>(last) + 1 + 2 * static_cast<Index>(window_half_support);
}

PowerSplit split_power_by_k(double p_total_db, double k_db) {
  const double k = db_to_linear(k_db);
  const double total = db_to_linear(p_total_db);
  return {linear_to_db(total * k / (k + 1.0)), linear_to_db(total / (k + 1.0))};
}

std::complex<double> draw_first_tap_coeff(double p_los_db, double p_nlos_db, Rng& rng) {
  const double theta = rng.uniform();
  const double x = rng.normal();
  const double y = rng.normal();
  const double sigma = std::sqrt(power_or_zero(p_nlos_db) / 2.0);
  const std::complex<double> los =
      std::polar(std::sqrt(power_or_zero(p_los_db)), 2.0 * std::numbers::pi * theta);
  return los + sigma * std::complex<double>(x, y);
}

std::complex<double> draw_rayleigh_coeff(double p_db, Rng& rng) {
  const double x = rng.normal();
  const double y = rng.normal();
  return std::sqrt(power_or_zero(p_db) / 2.0) * std::complex<double>(x, y);
}

Eigen::VectorXd absolute_delays(double distance_m, const Eigen::Ref<const Eigen::VectorXd>& delays_ns) {
  if (!(distance_m >= 0.0)) throw DomainError("absolute_delays: negative distance");
  const double tof_ns = distance_m / kSpeedOfLightMPerNs;
  return delays_ns.array() + tof_ns;
}

Cir sample_cir(const Eigen::Ref<const Eigen::VectorXcd>& coeffs,
               const Eigen::Ref<const Eigen::VectorXd>& abs_delays_ns, const SamplingSpec& spec,
               double first_tap_power_db) {
  spec.validate();
  if (coeffs.size() != abs_delays_ns.size())
    throw ShapeError("sample_cir: coefficient and delay counts differ");

  const double half = spec.window_half_support;
  Cir cir;
  cir.sample_period_ns = spec.sample_period_ns;
  cir.first_tap_power_db = first_tap_power_db;
  cir.samples = Eigen::VectorXcd::Zero(spec.grid_len);

  for (Index i = 0; i < coeffs.size(); ++i) {
    const double pos = delay_in_samples(abs_delays_ns[i], spec.sample_period_ns);
    if (!(pos >= 0.0) || pos + half > static_cast<double>(spec.grid_len - 1))
      throw RangeError("sample_cir: delay " + std::to_string(abs_delays_ns[i]) +
                       " ns does not fit the grid");
    const auto lo = static_cast<Index>(std::ceil(pos - half));
    const auto hi = static_cast<Index>(std::floor(pos + half));
    for (Index n = std::max<Index>(lo, 0); n <= hi; ++n)
      cir.samples[n] += coeffs[i] * windowed_sinc(static_cast<double>(n) - pos, half);
  }
  return cir;
}

PdpSnapshot cir_to_pdp(const Cir& cir) {
  cir.validate();
  PdpSnapshot pdp;
  pdp.bin_spacing_ns = cir.sample_period_ns;
  const double scale = db_to_linear(cir.first_tap_power_db);
  pdp.powers_db = linear_to_db((cir.samples.array().abs2() * scale).eval()).matrix();
  return pdp;
}

Cir synthesize_cir(const TdlParams& params, double distance_m, const SamplingSpec& spec,
                   const SynthOptions& options, Rng& rng) {
  const Index n_taps = params.num_taps;
  const int scatter = std::max(0, options.first_tap_scatter_bins);
  const PowerSplit split = split_power_by_k(0.0, params.k_factor_db);

  Eigen::VectorXd rel_delays(n_taps + scatter);
  Eigen::VectorXcd coeffs(n_taps + scatter);
  rel_delays.head(n_taps) = params.delays_ns;

  coeffs[0] = draw_first_tap_coeff(split.los_db, scatter > 0 ? kTruncatedDb : split.nlos_db, rng);
  for (Index i = 1; i < n_taps; ++i) coeffs[i] = draw_rayleigh_coeff(params.powers_db[i], rng);
  if (scatter > 0) {
    const double each_db = split.nlos_db - 10.0 * std::log10(static_cast<double>(scatter));
    for (int s = 1; s <= scatter; ++s) {
      rel_delays[n_taps + s - 1] = params.delays_ns[0] + s * spec.sample_period_ns;
      coeffs[n_taps + s - 1] = draw_rayleigh_coeff(each_db, rng);
    }
  }

  Cir cir = sample_cir(coeffs, absolute_delays(distance_m, rel_delays), spec, params.first_tap_power_db);
  if (options.noise_rel_db) {
    const double sigma = std::sqrt(db_to_linear(*options.noise_rel_db) / 2.0);
    for (Index n = 0; n < cir.samples.size(); ++n) {
      const double x = rng.normal();
      const double y = rng.normal();
      cir.samples[n] += sigma * std::complex<double>(x, y);
    }
  }
  return cir;
}

std::vector<PdpSnapshot> generate_ensemble(const TdlParams& params, double distance_m, int n_draws,
                                           const SamplingSpec& spec, const SynthOptions& options,
                                           int jobs) {
  params.validate();
  spec.validate();
  if (n_draws < 1) throw ConfigError("generate_ensemble: n_draws must be positive");

  std::vector<PdpSnapshot> out(static_cast<size_t>(n_draws));
  parallel_for(out.size(), jobs, [&](size_t d) {
    Rng rng = Rng::substream(spec.rng_seed, d);
    PdpSnapshot pdp = cir_to_pdp(synthesize_cir(params, distance_m, spec, options, rng));
    pdp.timestamp_s = static_cast<double>(d) * options.draw_interval_s;
    out[d] = std::move(pdp);
  });
  return out;
}

}  // namespace tdlforge
