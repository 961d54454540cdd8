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
#include <vector>

#include <json.hpp>

#include "tdlforge/core_types.hpp"

namespace tdlforge {

inline constexpr double kEarthRadiusM = 6371000.0;

struct GeoPoint {
  double lat_deg = 0.0;
  double lon_deg = 0.0;

  void validate() const;
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct LinkGeometry {
  double distance_m = 0.0;
  /// Initial bearing from Tx to Rx, clockwise from north, in [0, 360).
  double azimuth_deg = 0.0;
  /// Tx and Rx coincide; azimuth_deg is 0 by convention.
  bool coincident = false;
};

/**
 * Rotated ground rectangle to cut out of a raster.
 *
 * rotation_deg turns the crop frame clockwise from north-up: 0 keeps the
 * source orientation, and the output +x axis points along compass heading
 * 90 + rotation_deg. Link-aligned crops use azimuth - 90 so Tx -> Rx runs
 * left to right.
 */
struct CropSpec {
  double width_m = 0.0;
  double height_m = 0.0;
  int out_width_px = 0;
  int out_height_px = 0;
  GeoPoint center;
  double rotation_deg = 0.0;
};

/// 8-bit row-major raster with 1 (gray) or 3 (RGB) interleaved channels.
struct Raster {
  std::vector<std::uint8_t> pixels;
  int width_px = 0;
  int height_px = 0;
  int channels = 1;
  double meters_per_pixel = 1.0;
  /// Geographic position of the top-left corner.
  GeoPoint origin;

  void validate() const;
  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels[(static_cast<size_t>(y) * width_px + x) * channels + c];
  }
  std::uint8_t& at(int x, int y, int c = 0) { return pixels[(static_cast<size_t>(y) * width_px + x) * channels + c]; }
};

void to_json(nlohmann::json& j, const GeoPoint& p);
void from_json(const nlohmann::json& j, GeoPoint& p);
void to_json(nlohmann::json& j, const LinkGeometry& g);
void to_json(nlohmann::json& j, const CropSpec& c);

/// Haversine distance and initial bearing from tx to rx.
LinkGeometry link_geometry(const GeoPoint& tx, const GeoPoint& rx);

/// Great-circle midpoint of the link.
GeoPoint midpoint(const GeoPoint& a, const GeoPoint& b);

/// Link-wide view: max(1.1 d, 256 m) by 128 m, 512 x 256 px, centred on the midpoint.
CropSpec global_crop_spec(const LinkGeometry& geom, const GeoPoint& link_midpoint);

/// Receiver view: 256 m square, 224 x 224 px, centred on the receiver.
CropSpec local_crop_spec(const GeoPoint& rx, const LinkGeometry& geom);

/// Crop rotation that lays a link of the given azimuth horizontally.
double alignment_rotation_deg(double azimuth_deg);

struct CropResult {
  Raster raster;
  /// Some output pixels fell outside the source and were filled with 0.
  bool clipped = false;
};

/// Bilinear resampling of src along the rotated crop rectangle.
/// Throws RangeError when no output pixel lands inside src.
CropResult rotate_crop_resize(const Raster& src, const CropSpec& spec);

struct MaskIngest {
  Raster mask;
  double building_fraction = 0.0;
};

/// Binarises a single-channel mask at 128 into {0, 255}.
MaskIngest ingest_mask(const Raster& src);

/// Pixel position (continuous, pixel centres at +0.5) of a geographic point.
std::array<double, 2> geo_to_pixel(const Raster& r, const GeoPoint& p);

struct OverlayStyle {
  std::array<std::uint8_t, 3> tx_color{255, 0, 0};
  std::array<std::uint8_t, 3> rx_color{0, 0, 255};
  std::array<std::uint8_t, 3> line_color{255, 255, 0};
  int marker_radius_px = 4;
};

/// Draws Tx/Rx discs and a 1-px LOS line. Pixel coordinates are continuous.
void annotate_link(Raster& img, std::array<double, 2> tx_px, std::array<double, 2> rx_px,
                   const OverlayStyle& style = {});

// ----- files --------------------------------------------------------------

Raster read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Raster& r);

/// Sidecar georeference {origin_lat_deg, origin_lon_deg, meters_per_pixel}.
void read_georef(const std::filesystem::path& path, Raster& r);
void write_georef(const std::filesystem::path& path, const Raster& r);

}  // namespace tdlforge
