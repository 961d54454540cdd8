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

#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "tdlforge/cir_synth.hpp"
#include "tdlforge/pdp_pipeline.hpp"

using namespace tdlforge;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Apdp make_apdp(std::initializer_list<double> values, double spacing = kDefaultBinSpacingNs) {
  Apdp a;
  a.powers_db = Eigen::Map<const Eigen::VectorXd>(values.begin(), static_cast<Index>(values.size()));
  a.bin_spacing_ns = spacing;
  return a;
}

Apdp flat(Index n, double level) {
  Apdp a;
  a.powers_db = Eigen::VectorXd::Constant(n, level);
  return a;
}

PdpSnapshot snap(std::initializer_list<double> values, double t = 0.0) {
  PdpSnapshot s;
  s.powers_db = Eigen::Map<const Eigen::VectorXd>(values.begin(), static_cast<Index>(values.size()));
  s.timestamp_s = t;
  return s;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

// ----- sliding_average ---------------------------------------------------------

TEST_CASE("sliding_average of identical snapshots is the snapshot", "[pdp][average]") {
  const std::vector<PdpSnapshot> s{snap({-60, -75.5, -200}, 0.0), snap({-60, -75.5, -200}, 0.1)};
  const auto out = sliding_average(s, 2);
  REQUIRE(out.size() == 1);
  CHECK_THAT(out[0].powers_db[0], WithinAbs(-60.0, 1e-12));
  CHECK_THAT(out[0].powers_db[1], WithinAbs(-75.5, 1e-12));
  CHECK(out[0].powers_db[2] == kTruncatedDb);
  CHECK(out[0].window_len == 2);
}

TEST_CASE("sliding_average averages in the linear domain", "[pdp][average]") {
  const std::vector<PdpSnapshot> s{snap({0.0}, 0.0), snap({kTruncatedDb}, 1.0)};
  const auto out = sliding_average(s, 2);
  CHECK_THAT(out[0].powers_db[0], WithinAbs(oracle::db((1.0 + 1e-20) / 2.0), 1e-12));
  CHECK_THAT(out[0].powers_db[0], WithinAbs(-3.0103, 1e-4));
}

TEST_CASE("sliding_average window 1 is the identity", "[pdp][average]") {
  const std::vector<PdpSnapshot> s{snap({-61.25, -200, -97.0}, 0.5), snap({-80, -90, -100}, 0.75)};
  const auto out = sliding_average(s, 1);
  REQUIRE(out.size() == 2);
  for (size_t i = 0; i < 2; ++i) {
    CHECK(out[i].timestamp_s == s[i].timestamp_s);
    for (Index b = 0; b < 3; ++b) CHECK_THAT(out[i].powers_db[b], WithinAbs(s[i].powers_db[b], 1e-12));
  }
}

TEST_CASE("sliding_average length and centre timestamps", "[pdp][average]") {
  std::vector<PdpSnapshot> s;
  for (int i = 0; i < 10; ++i) s.push_back(snap({-100.0 + i, -120.0}, 0.25 * i));
  const auto out = sliding_average(s, 4);
  REQUIRE(out.size() == 7);
  CHECK(out[0].timestamp_s == s[1].timestamp_s);
  CHECK(out[6].timestamp_s == s[7].timestamp_s);
  const auto odd = sliding_average(s, 5);
  CHECK(odd[0].timestamp_s == s[2].timestamp_s);
  // Bin 0 of output 2 averages snapshots 2..6 linearly.
  double acc = 0;
  for (int k = 2; k <= 6; ++k) acc += oracle::lin(-100.0 + k);
  CHECK_THAT(odd[2].powers_db[0], WithinAbs(oracle::db(acc / 5), 1e-10));
}

TEST_CASE("sliding_average errors", "[pdp][average]") {
  std::vector<PdpSnapshot> s{snap({-60, -70}), snap({-60, -70})};
  CHECK_THROWS_AS(sliding_average(s, 0), ConfigError);
  CHECK_THROWS_AS(sliding_average(s, 3), ConfigError);
  s[1] = snap({-60, -70, -80});
  CHECK_THROWS_AS(sliding_average(s, 2), ShapeError);
  s[1] = snap({-60, -70});
  s[1].bin_spacing_ns = 10.0;
  CHECK_THROWS_AS(sliding_average(s, 2), ShapeError);
}

// ----- noise floor and denoise ---------------------------------------------------

TEST_CASE("estimate_noise_floor examples", "[pdp][noise]") {
  CHECK_THAT(estimate_noise_floor(flat(20, -120.0)), WithinAbs(-120.0, 1e-9));

  const Apdp a = make_apdp({-100, -100, -100, -100, -140, -100, -100, -150, -100, -100});
  const double expected = oracle::db((1e-14 + 1e-15) / 2.0);
  CHECK_THAT(estimate_noise_floor(a), WithinAbs(expected, 1e-9));
  CHECK_THAT(estimate_noise_floor(a), WithinAbs(-142.6, 0.05));

  CHECK_THROWS_AS(estimate_noise_floor(flat(8, -160.0)), AllNoiseError);
  CHECK_THROWS_AS(estimate_noise_floor(flat(8, kTruncatedDb)), AllNoiseError);
}

TEST_CASE("estimate_noise_floor ignores bins at or below the absolute floor", "[pdp][noise]") {
  // Five valid bins; ceil(0.2 * 5) = 1 -> the single lowest valid bin.
  const Apdp a = make_apdp({-200, -170, -160, -90, -95, -130, -100, -110});
  CHECK_THAT(estimate_noise_floor(a), WithinAbs(-130.0, 1e-9));
}

TEST_CASE("estimate_noise_floor dB-domain option", "[pdp][noise]") {
  DenoiseConfig cfg;
  cfg.domain = NoiseFloorDomain::kDb;
  const Apdp a = make_apdp({-100, -100, -100, -100, -140, -100, -100, -150, -100, -100});
  CHECK_THAT(estimate_noise_floor(a, cfg), WithinAbs(-145.0, 1e-12));
}

TEST_CASE("DenoiseConfig validation", "[pdp][noise]") {
  DenoiseConfig c;
  CHECK_NOTHROW(c.validate());
  c.bottom_fraction = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.bottom_fraction = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.truncate_db = -150.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("denoise examples", "[pdp][noise]") {
  const Apdp f = denoise(flat(16, -120.0));
  CHECK((f.powers_db.array() == kTruncatedDb).all());

  const Apdp a = make_apdp({-60, -130, -130, -130, -130, -130, -130, -130, -130, -130});
  const Apdp d = denoise(a);
  REQUIRE(d.denoise_threshold_db.has_value());
  CHECK_THAT(*d.denoise_threshold_db, WithinAbs(-119.0, 1e-9));
  CHECK(d.powers_db[0] == -60.0);
  for (Index i = 1; i < 10; ++i) CHECK(d.powers_db[i] == kTruncatedDb);
}

TEST_CASE("denoise keeps bins at the threshold", "[pdp][noise]") {
  // floor = -120 (ceil(0.2*5)=1 lowest), threshold -109.
  const Apdp a = make_apdp({-120, -109, -109.0000001, -50, -80});
  const Apdp d = denoise(a);
  CHECK(d.powers_db[1] == -109.0);
  CHECK(d.powers_db[2] == kTruncatedDb);
  CHECK(d.powers_db[3] == -50.0);
}

TEST_CASE("denoise is idempotent", "[pdp][noise][property]") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> level(-150.0, -40.0);
  for (int trial = 0; trial < 300; ++trial) {
    Apdp a = flat(64, 0.0);
    for (Index i = 0; i < a.size(); ++i) a.powers_db[i] = level(gen);
    const Apdp once = denoise(a);
    const Apdp twice = denoise(once);
    REQUIRE((once.powers_db.array() == twice.powers_db.array()).all());
  }
  // An already truncated vector stays put.
  const Apdp t = denoise(denoise(flat(8, -120.0)));
  CHECK((t.powers_db.array() == kTruncatedDb).all());
}

// ----- local peaks and tap search ------------------------------------------------

TEST_CASE("local_peak_mask examples", "[pdp][peaks]") {
  Mask m = local_peak_mask(make_apdp({-200, -60, -200}));
  CHECK(m.size() == 3);
  CHECK_FALSE(m[0]);
  CHECK(m[1]);
  CHECK_FALSE(m[2]);

  Eigen::VectorXd inc = Eigen::VectorXd::LinSpaced(12, -120.0, -40.0);
  CHECK_FALSE(local_peak_mask(inc).any());

  CHECK_FALSE(local_peak_mask(make_apdp({-60, -60, -200})).any());
  CHECK_FALSE(local_peak_mask(make_apdp({-200, -60, -60, -200})).any());
  // Endpoints are never peaks.
  CHECK_FALSE(local_peak_mask(make_apdp({-10, -60, -70, -5})).any());

  CHECK_THROWS_AS(local_peak_mask(make_apdp({-60, -70})), ShapeError);
}

TEST_CASE("extract_taps examples", "[pdp][peaks]") {
  Apdp a = flat(64, kTruncatedDb);
  a.powers_db[10] = -60.0;
  auto taps = extract_taps(a);
  REQUIRE(taps.size() == 1);
  CHECK(taps[0] == Tap{10, 10 * kDefaultBinSpacingNs, -60.0});

  a.powers_db[50] = -115.0;
  taps = extract_taps(a);
  REQUIRE(taps.size() == 1);
  CHECK(taps[0].delay_bin == 10);

  a.powers_db[50] = -109.0;
  taps = extract_taps(a);
  REQUIRE(taps.size() == 2);
  CHECK(taps[1].delay_bin == 50);

  Apdp b = flat(64, kTruncatedDb);
  b.powers_db[10] = -60.0;
  b.powers_db[12] = -70.0;
  taps = extract_taps(b);
  REQUIRE(taps.size() == 1);
  CHECK(taps[0].delay_bin == 10);

  Apdp empty;
  CHECK_THROWS_AS(extract_taps(empty), ShapeError);
}

TEST_CASE("extract_taps returns taps sorted by delay and honours max_taps", "[pdp][peaks]") {
  Apdp a = flat(80, kTruncatedDb);
  a.powers_db[60] = -50.0;
  a.powers_db[40] = -55.0;
  a.powers_db[20] = -60.0;
  a.powers_db[5] = -65.0;
  const auto all = extract_taps(a);
  REQUIRE(all.size() == 4);
  CHECK(all[0].delay_bin == 5);
  CHECK(all[3].delay_bin == 60);

  ExtractConfig cfg;
  cfg.max_taps = 2;
  const auto two = extract_taps(a, cfg);
  REQUIRE(two.size() == 2);
  CHECK(two[0].delay_bin == 40);  // the two strongest, in delay order
  CHECK(two[1].delay_bin == 60);
}

TEST_CASE("extract_taps matches the rescanning reference", "[pdp][peaks][oracle]") {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> len(1, 128);
  std::uniform_real_distribution<double> level(-140.0, -30.0);
  std::bernoulli_distribution truncated(0.3);
  std::uniform_int_distribution<int> ntaps(1, 12), sep(1, 5);
  std::uniform_real_distribution<double> dr(5.0, 80.0);
  for (int trial = 0; trial < 500; ++trial) {
    Apdp a = flat(len(gen), 0.0);
    for (Index i = 0; i < a.size(); ++i) a.powers_db[i] = truncated(gen) ? kTruncatedDb : level(gen);
    ExtractConfig cfg;
    cfg.max_taps = ntaps(gen);
    cfg.min_separation_bins = sep(gen);
    cfg.dynamic_range_db = dr(gen);
    const auto got = extract_taps(a, cfg);
    const auto want = oracle::peak_search(to_std(a.powers_db), cfg.max_taps, cfg.dynamic_range_db,
                                          cfg.min_separation_bins);
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < got.size(); ++i) {
      REQUIRE(got[i].delay_bin == want[i].bin);
      REQUIRE(got[i].power_db == want[i].power_db);
    }
  }
}

TEST_CASE("extract_taps output properties", "[pdp][peaks][property]") {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> level(-150.0, -20.0);
  for (int trial = 0; trial < 300; ++trial) {
    Apdp a = flat(100, 0.0);
    for (Index i = 0; i < a.size(); ++i) a.powers_db[i] = level(gen);
    ExtractConfig cfg;
    cfg.max_taps = 7;
    const auto taps = extract_taps(a, cfg);
    REQUIRE(taps.size() <= 7);
    double top = -1e300;
    for (const auto& t : taps) top = std::max(top, t.power_db);
    for (size_t i = 0; i < taps.size(); ++i) {
      REQUIRE(taps[i].power_db >= top - cfg.dynamic_range_db);
      REQUIRE(taps[i].delay_ns == taps[i].delay_bin * a.bin_spacing_ns);
      for (size_t j = i + 1; j < taps.size(); ++j)
        REQUIRE(taps[j].delay_bin - taps[i].delay_bin > cfg.min_separation_bins);
    }
  }
}

// ----- tap power integration and K ---------------------------------------------------

TEST_CASE("integrate_tap_powers examples", "[pdp][integrate]") {
  Apdp a = flat(20, kTruncatedDb);
  a.powers_db[4] = -60.0;
  std::vector<Tap> one{{4, 4 * 33.3, -60.0}};
  CHECK_THAT(integrate_tap_powers(a, one)[0], WithinAbs(-60.0, 1e-12));

  a.powers_db[4] = -63.0103;
  a.powers_db[6] = -63.0103;
  CHECK_THAT(integrate_tap_powers(a, one)[0], WithinAbs(oracle::db(2 * oracle::lin(-63.0103)), 1e-12));
  CHECK_THAT(integrate_tap_powers(a, one)[0], WithinAbs(-60.0, 1e-4));
}

TEST_CASE("integrate_tap_powers partitions the energy", "[pdp][integrate][property]") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> level(-130.0, -40.0);
  std::bernoulli_distribution truncated(0.4);
  for (int trial = 0; trial < 200; ++trial) {
    Apdp a = flat(90, 0.0);
    for (Index i = 0; i < a.size(); ++i) a.powers_db[i] = truncated(gen) ? kTruncatedDb : level(gen);
    a.powers_db[30] = -35.0;
    const auto taps = extract_taps(a);
    REQUIRE_FALSE(taps.empty());
    const Eigen::VectorXd p = integrate_tap_powers(a, taps);
    double sum_taps = 0.0;
    for (Index i = 0; i < p.size(); ++i) sum_taps += oracle::lin(p[i]);
    double sum_bins = 0.0;
    for (Index b = taps.front().delay_bin; b < a.size(); ++b)
      if (a.powers_db[b] > kTruncatedDb) sum_bins += oracle::lin(a.powers_db[b]);
    REQUIRE_THAT(sum_taps, WithinRel(sum_bins, 1e-12));
  }
}

TEST_CASE("integrate_tap_powers contract", "[pdp][integrate]") {
  Apdp a = flat(20, -90.0);
  std::vector<Tap> unsorted{{8, 0, -90}, {3, 0, -90}};
  CHECK_THROWS_AS(integrate_tap_powers(a, unsorted), ContractError);
  CHECK_THROWS_AS(integrate_tap_powers(a, std::vector<Tap>{}), ContractError);
  std::vector<Tap> outside{{25, 0, -90}};
  CHECK_THROWS_AS(integrate_tap_powers(a, outside), ContractError);
}

TEST_CASE("compute_k_factor examples", "[pdp][k]") {
  const Apdp a = flat(8, -60.0);
  const Tap peak{2, 66.6, -60.0};
  CHECK_THAT(compute_k_factor(a, peak, -60.0), WithinAbs(-60.0 + 200.0, 1e-9));

  const double k_equal = compute_k_factor(a, peak, -56.9897);
  CHECK_THAT(k_equal, WithinAbs(-60.0 - oracle::db(oracle::lin(-56.9897) - oracle::lin(-60.0)), 1e-9));
  CHECK_THAT(k_equal, WithinAbs(0.0, 1e-4));

  const double k_ten = compute_k_factor(a, peak, -59.5861);
  CHECK_THAT(k_ten, WithinAbs(-60.0 - oracle::db(oracle::lin(-59.5861) - oracle::lin(-60.0)), 1e-9));
  CHECK_THAT(k_ten, WithinAbs(10.0, 0.01));

  CHECK_THROWS_AS(compute_k_factor(a, peak, -61.0), ContractError);
}

// ----- full extraction ---------------------------------------------------------------

TEST_CASE("pdp_to_tdl on a spike over a noise bed", "[pdp][tdl]") {
  Apdp a = flat(64, -130.0);
  a.powers_db[17] = -62.5;
  const TdlParams p = pdp_to_tdl(a);
  CHECK(p.num_taps == 1);
  CHECK(p.delays_ns[0] == 0.0);
  CHECK(p.powers_db[0] == 0.0);
  CHECK_THAT(p.first_tap_power_db, WithinAbs(-62.5, 1e-9));
  CHECK_THAT(p.k_factor_db, WithinAbs(-62.5 + 200.0, 1e-9));
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("pdp_to_tdl failure modes", "[pdp][tdl]") {
  // A lone spike on an all-marker profile is its own noise estimate and gets truncated.
  Apdp bare = flat(32, kTruncatedDb);
  bare.powers_db[10] = -60.0;
  CHECK_THROWS_AS(pdp_to_tdl(bare), NoMultipathError);
  CHECK_THROWS_AS(pdp_to_tdl(flat(32, -120.0)), NoMultipathError);
  CHECK_THROWS_AS(pdp_to_tdl(flat(32, -170.0)), AllNoiseError);
}

TEST_CASE("extract_tdl reports intermediate results", "[pdp][tdl]") {
  Apdp a = flat(60, -125.0);
  a.powers_db[10] = -60.0;
  a.powers_db[11] = -66.0;
  a.powers_db[25] = -75.0;
  const TdlExtraction ex = extract_tdl(a);
  REQUIRE(ex.taps.size() == 2);
  CHECK_THAT(ex.noise_floor_db, WithinAbs(-125.0, 1e-9));
  const double window0 = oracle::db(oracle::lin(-60.0) + oracle::lin(-66.0));
  CHECK_THAT(ex.params.first_tap_power_db, WithinAbs(window0, 1e-9));
  CHECK_THAT(ex.params.k_factor_db, WithinAbs(6.0, 1e-9));
  CHECK(ex.params.delays_ns[1] == 15 * kDefaultBinSpacingNs);
  CHECK_THAT(ex.params.powers_db[1], WithinAbs(-75.0 - window0, 1e-9));
}

TEST_CASE("pdp_to_tdl always yields valid parameters", "[pdp][tdl][property]") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> level(-150.0, -30.0);
  int produced = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Apdp a = flat(96, 0.0);
    for (Index i = 0; i < a.size(); ++i) a.powers_db[i] = level(gen);
    try {
      const TdlParams p = pdp_to_tdl(a);
      REQUIRE_NOTHROW(p.validate());
      ++produced;
    } catch (const NoMultipathError&) {
    }
  }
  CHECK(produced > 250);
}

TEST_CASE("a forward-generated 3-tap profile is recovered", "[pdp][tdl][roundtrip]") {
  TdlParams truth;
  truth.first_tap_power_db = -75.0;
  truth.k_factor_db = 8.0;
  truth.num_taps = 3;
  truth.delays_ns = Eigen::Vector3d(0.0, 6 * 33.3, 15 * 33.3);
  truth.powers_db = Eigen::Vector3d(0.0, -7.0, -18.0);
  SamplingSpec spec;
  spec.grid_len = 48;
  spec.rng_seed = 404;
  SynthOptions opt;
  opt.noise_rel_db = -65.0;
  opt.first_tap_scatter_bins = 2;
  const auto ensemble = generate_ensemble(truth, 20 * 33.3 * kSpeedOfLightMPerNs, 500, spec, opt);
  const Apdp apdp = sliding_average(ensemble, 500).front();
  const TdlParams got = pdp_to_tdl(apdp);
  REQUIRE(got.num_taps == 3);
  for (Index i = 0; i < 3; ++i) CHECK(std::lround(got.delays_ns[i] / 33.3) == std::lround(truth.delays_ns[i] / 33.3));
  CHECK_THAT(got.powers_db[1], WithinAbs(-7.0, 0.5));
  CHECK_THAT(got.powers_db[2], WithinAbs(-18.0, 0.5));
  CHECK_THAT(got.k_factor_db, WithinAbs(8.0, 1.0));
  CHECK_THAT(got.first_tap_power_db, WithinAbs(-75.0, 0.5));
}
