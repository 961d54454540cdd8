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

#include <cmath>
#include <limits>
#include <random>

#include "tdlforge/core_types.hpp"

using namespace tdlforge;
using Catch::Matchers::WithinAbs;

TEST_CASE("db_to_linear scalar values", "[core]") {
  CHECK(db_to_linear(0.0) == 1.0);
  CHECK_THAT(db_to_linear(10.0), WithinAbs(10.0, 1e-12));
  CHECK_THAT(db_to_linear(-3.0103), WithinAbs(0.5, 1e-5));
  CHECK_THAT(db_to_linear(kTruncatedDb), WithinAbs(kTruncatedLinear, 1e-35));
}

TEST_CASE("linear_to_db scalar values", "[core]") {
  CHECK(linear_to_db(1.0) == 0.0);
  CHECK_THAT(linear_to_db(100.0), WithinAbs(20.0, 1e-12));
  CHECK(linear_to_db(0.0) == kTruncatedDb);
  CHECK(linear_to_db(1e-25) == kTruncatedDb);
  CHECK_THROWS_AS(linear_to_db(-1e-3), DomainError);
  CHECK_THROWS_AS(linear_to_db(std::numeric_limits<double>::quiet_NaN()), DomainError);
}

TEST_CASE("dB round trip over [-190, 100]", "[core]") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-190.0, 100.0);
  for (int i = 0; i < 20000; ++i) {
    const double x = u(gen);
    REQUIRE_THAT(linear_to_db(db_to_linear(x)), WithinAbs(x, 1e-9));
  }
  for (double x : {-190.0, 100.0, 0.0}) CHECK_THAT(linear_to_db(db_to_linear(x)), WithinAbs(x, 1e-9));
}

TEST_CASE("array overloads agree with the scalar forms", "[core]") {
  Eigen::ArrayXd x(5);
  x << -200.0, -60.0, 0.0, 3.0, 17.5;
  const Eigen::ArrayXd lin = db_to_linear(x);
  const Eigen::ArrayXd back = linear_to_db(lin);
  const Eigen::ArrayXd pz = power_or_zero(x);
  for (Index i = 0; i < x.size(); ++i) {
    CHECK(lin[i] == db_to_linear(x[i]));
    CHECK(back[i] == linear_to_db(lin[i]));
  }
  CHECK(pz[0] == 0.0);
  CHECK(pz[1] == db_to_linear(-60.0));
  CHECK(is_truncated(kTruncatedDb));
  CHECK_FALSE(is_truncated(-199.9));

  const Eigen::ArrayXf xf = x.cast<float>();
  const Eigen::ArrayXf lf = db_to_linear(xf);
  CHECK_THAT(static_cast<double>(lf[3]), WithinAbs(std::pow(10.0, 0.3), 1e-5));
}

TEST_CASE("PdpSnapshot invariants", "[core]") {
  PdpSnapshot s;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.powers_db = Eigen::VectorXd::Constant(4, -100.0);
  CHECK_NOTHROW(s.validate());
  s.powers_db[2] = kTruncatedDb;
  CHECK_NOTHROW(s.validate());
  s.powers_db[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.powers_db[1] = -100.0;
  s.bin_spacing_ns = 0.0;
  try {
    s.validate();
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "bin_spacing_ns");
  }
}

TEST_CASE("Apdp window length", "[core]") {
  PdpSnapshot s;
  s.powers_db = Eigen::VectorXd::Constant(3, -90.0);
  Apdp a(s, 9);
  CHECK(a.window_len == 9);
  CHECK_NOTHROW(a.validate());
  a.window_len = 0;
  CHECK_THROWS_AS(a.validate(), ValidationError);
}

TEST_CASE("TdlParams invariants", "[core]") {
  TdlParams p;
  p.first_tap_power_db = -70.0;
  p.k_factor_db = 5.0;
  p.num_taps = 3;
  p.delays_ns = Eigen::Vector3d(0.0, 33.3, 99.9);
  p.powers_db = Eigen::Vector3d(0.0, -3.0, 2.0);  // a later tap may exceed the first
  CHECK_NOTHROW(p.validate());

  auto field_of = [](const TdlParams& q) {
    try {
      q.validate();
    } catch (const ValidationError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  TdlParams q = p;
  q.num_taps = 2;
  CHECK(field_of(q) == "delays_ns");
  q = p;
  q.delays_ns[0] = 1.0;
  CHECK(field_of(q) == "delays_ns");
  q = p;
  q.delays_ns[2] = 33.3;
  CHECK(field_of(q) == "delays_ns");
  q = p;
  q.powers_db[0] = -1.0;
  CHECK(field_of(q) == "powers_db");
  q = p;
  q.num_taps = 0;
  CHECK(field_of(q) == "num_taps");
  q = p;
  q.k_factor_db = std::numeric_limits<double>::quiet_NaN();
  CHECK(field_of(q) == "k_factor_db");
}

TEST_CASE("Cir invariants", "[core]") {
  Cir c;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c.samples = Eigen::VectorXcd::Zero(4);
  CHECK_NOTHROW(c.validate());
  c.sample_period_ns = -1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}
