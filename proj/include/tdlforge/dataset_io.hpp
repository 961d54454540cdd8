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

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tdlforge/core_types.hpp"
#include "tdlforge/geo_prep.hpp"

namespace tdlforge {

// ----- PDP CSV -------------------------------------------------------------
//
//   # bin_spacing_ns=33.3
//   <timestamp_s>,<p_0_db>,<p_1_db>,...
//
// Values are written with 17 significant digits so a save/load cycle is exact.

std::vector<PdpSnapshot> read_pdp_csv(std::istream& in);
std::vector<PdpSnapshot> load_pdp_csv(const std::filesystem::path& path);
void write_pdp_csv(std::ostream& out, std::span<const PdpSnapshot> snapshots);
void save_pdp_csv(const std::filesystem::path& path, std::span<const PdpSnapshot> snapshots);

// ----- PDP binary ----------------------------------------------------------
//
// Little-endian. 16-byte header: "TDLF", uint32 n_bins, float64 bin_spacing_ns.
// Then one record per snapshot: float64 timestamp_s, n_bins x float32 power_db.

inline constexpr std::array<char, 4> kPdpBinaryMagic{'T', 'D', 'L', 'F'};

std::vector<PdpSnapshot> load_pdp_binary(const std::filesystem::path& path);
void save_pdp_binary(const std::filesystem::path& path, std::span<const PdpSnapshot> snapshots);

// ----- TDL JSON ------------------------------------------------------------
//
// {first_tap_power_db, k_factor_db, num_taps, delays_ns[], powers_db[]}

void to_json(nlohmann::json& j, const TdlParams& p);
/// Throws ValidationError naming the offending field.
void from_json(const nlohmann::json& j, TdlParams& p);

void save_tdl_json(const std::filesystem::path& path, const TdlParams& params);
TdlParams load_tdl_json(const std::filesystem::path& path);

// ----- pairing and splits --------------------------------------------------

struct Pairing {
  std::vector<std::pair<size_t, size_t>> pairs;
  /// Channel indices with no image within tolerance.
  std::vector<size_t> dropped;
};

/// Greedy nearest-neighbour pairing of two sorted timestamp sequences. Each
/// index is used at most once and both pair indices increase strictly.
/// Equidistant candidates resolve to the earlier image.
Pairing pair_by_timestamp(std::span<const double> channel_ts, std::span<const double> image_ts,
                          double tolerance_s);

enum class Split { kTrain, kVal, kTest };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct SampleRef {
  double timestamp_s = 0.0;
  std::string pdp_path;
  std::string tdl_path;
  std::string global_img_path;
  std::string local_img_path;
  std::string mask_path;
  GeoPoint tx;
  GeoPoint rx;
};

struct RouteManifest {
  std::string route_id;
  std::vector<SampleRef> sample_refs;
  Split split = Split::kTrain;

  void validate() const;
};

void to_json(nlohmann::json& j, const SampleRef& s);
void from_json(const nlohmann::json& j, SampleRef& s);
void to_json(nlohmann::json& j, const RouteManifest& m);
void from_json(const nlohmann::json& j, RouteManifest& m);

std::vector<RouteManifest> load_manifests(const std::filesystem::path& path);
void save_manifests(const std::filesystem::path& path, std::span<const RouteManifest> manifests);

/// Assigns whole routes to train/val/test after a seeded shuffle, tracking the
/// requested fractions by sample count. Every split with a non-zero fraction
/// receives at least one route.
std::vector<RouteManifest> split_routes(std::vector<RouteManifest> manifests, std::array<double, 3> fractions,
                                        std::uint64_t seed);

}  // namespace tdlforge
