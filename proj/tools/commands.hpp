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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tdlforge/geo_prep.hpp"
#include "tdlforge/losses.hpp"
#include "tdlforge/pdp_pipeline.hpp"

namespace tdlforge::cli {

enum ExitCode : int { kOk = 0, kIoFailure = 1, kInvalid = 2, kToleranceBreach = 3 };

struct Common {
  bool json = false;
  int jobs = 1;
};

struct ExtractArgs {
  std::filesystem::path pdp;
  std::filesystem::path out_dir;
  int window = kDefaultAverageWindow;
  DenoiseConfig denoise;
  ExtractConfig extract;
};

struct SynthArgs {
  std::filesystem::path tdl;
  double distance_m = 0.0;
  int draws = 1;
  std::uint64_t seed = 0;
  std::filesystem::path out;
  /// Defaults to <out stem>_apdp.csv next to out.
  std::filesystem::path apdp_out;
  double sample_period_ns = kDefaultBinSpacingNs;
  /// 0 sizes the grid from the largest delay.
  Index grid_len = 0;
  std::optional<double> noise_rel_db = -65.0;
  int scatter_bins = 2;
};

struct RoundtripArgs {
  SynthArgs synth;
  DenoiseConfig denoise;
  ExtractConfig extract;
  int delay_tol_bins = 0;
  double power_tol_db = 0.5;
  double k_tol_db = 1.0;
};

struct EvalArgs {
  std::filesystem::path truth_dir;
  std::filesystem::path pred;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  int draws = 1;
  double distance_m = 0.0;
  double pair_tolerance_s = 0.5;
  bool independent_fading = false;
  double sample_period_ns = kDefaultBinSpacingNs;
  int scatter_bins = 0;
  MatchConfig match;
};

struct GeoArgs {
  GeoPoint tx;
  GeoPoint rx;
  std::filesystem::path raster;
  std::filesystem::path georef;
  std::filesystem::path out_dir;
  bool annotate = false;
};

int cmd_extract(const ExtractArgs& args, const Common& common, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthArgs& args, const Common& common, std::ostream& out, std::ostream& err);
int cmd_roundtrip(const RoundtripArgs& args, const Common& common, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, const Common& common, std::ostream& out, std::ostream& err);
int cmd_geo(const GeoArgs& args, const Common& common, std::ostream& out, std::ostream& err);

/// Parses argv (without the program name) and dispatches to a command.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tdlforge::cli
