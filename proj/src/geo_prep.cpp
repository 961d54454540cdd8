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

#include "tdlforge/geo_prep.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace tdlforge {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

constexpr double kGlobalMinWidthM = 256.0;
constexpr double kGlobalWidthFactor = 1.1;
constexpr double kGlobalHeightM = 128.0;
constexpr int kGlobalOutWidthPx = 512;
constexpr int kGlobalOutHeightPx = 256;
constexpr double kLocalSideM = 256.0;
constexpr int kLocalOutPx = 224;

double wrap_360(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  return r >= 360.0 ? 0.0 : r;
}

double wrap_180(double deg) {
  const double r = wrap_360(deg + 180.0) - 180.0;
  return r;
}

// Meters per degree along a parallel at the raster's reference latitude.
double meters_per_deg_lon(const Raster& r) { return kDegToRad * kEarthRadiusM * std::cos(r.origin.lat_deg * kDegToRad); }
constexpr double kMetersPerDegLat = kDegToRad * kEarthRadiusM;

}  // namespace

void GeoPoint::validate() const {
  if (!(lat_deg >= -90.0 && lat_deg <= 90.0)) throw ValidationError("lat_deg", "must lie in [-90, 90]");
  if (!(lon_deg >= -180.0 && lon_deg <= 180.0)) throw ValidationError("lon_deg", "must lie in [-180, 180]");
}

void Raster::validate() const {
  if (width_px < 1 || height_px < 1) throw ValidationError("width_px", "raster dimensions must be positive");
  if (channels != 1 && channels != 3) throw ValidationError("channels", "must be 1 or 3");
  if (pixels.size() != static_cast<size_t>(width_px) * height_px * channels)
    throw ValidationError("pixels", "pixel count differs from width * height * channels");
  if (!(meters_per_pixel > 0.0)) throw ValidationError("meters_per_pixel", "must be positive");
  origin.validate();
}

void to_json(nlohmann::json& j, const GeoPoint& p) { j = {{"lat_deg", p.lat_deg}, {"lon_deg", p.lon_deg}}; }

void from_json(const nlohmann::json& j, GeoPoint& p) {
  j.at("lat_deg").get_to(p.lat_deg);
  j.at("lon_deg").get_to(p.lon_deg);
}

void to_json(nlohmann::json& j, const LinkGeometry& g) {
  j = {{"distance_m", g.distance_m}, {"azimuth_deg", g.azimuth_deg}, {"coincident", g.coincident}};
}

void to_json(nlohmann::json& j, const CropSpec& c) {
  j = {{"width_m", c.width_m},           {"height_m", c.height_m}, {"out_width_px", c.out_width_px},
       {"out_height_px", c.out_height_px}, {"center", c.center},     {"rotation_deg", c.rotation_deg}};
}

LinkGeometry link_geometry(const GeoPoint& tx, const GeoPoint& rx) {
  tx.validate();
  rx.validate();
  if (tx == rx) return {0.0, 0.0, true};

  const double phi1 = tx.lat_deg * kDegToRad;
  const double phi2 = rx.lat_deg * kDegToRad;
  const double dphi = phi2 - phi1;
  const double dlambda = (rx.lon_deg - tx.lon_deg) * kDegToRad;

  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double a = std::clamp(s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2, 0.0, 1.0);
  const double distance = 2.0 * kEarthRadiusM * std::asin(std::sqrt(a));
  if (distance == 0.0) return {0.0, 0.0, true};

  const double y = std::sin(dlambda) * std::cos(phi2);
  const double x = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
  return {distance, wrap_360(std::atan2(y, x) * kRadToDeg), false};
}

GeoPoint midpoint(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.lat_deg * kDegToRad;
  const double phi2 = b.lat_deg * kDegToRad;
  const double dlambda = (b.lon_deg - a.lon_deg) * kDegToRad;
  const double bx = std::cos(phi2) * std::cos(dlambda);
  const double by = std::cos(phi2) * std::sin(dlambda);
  const double phi = std::atan2(std::sin(phi1) + std::sin(phi2), std::hypot(std::cos(phi1) + bx, by));
  const double lambda = a.lon_deg * kDegToRad + std::atan2(by, std::cos(phi1) + bx);
  return {phi * kRadToDeg, wrap_180(lambda * kRadToDeg)};
}

double alignment_rotation_deg(double azimuth_deg) { return wrap_360(azimuth_deg - 90.0); }

CropSpec global_crop_spec(const LinkGeometry& geom, const GeoPoint& link_midpoint) {
  CropSpec c;
  c.width_m = std::max(kGlobalWidthFactor * geom.distance_m, kGlobalMinWidthM);
  c.height_m = kGlobalHeightM;
  c.out_width_px = kGlobalOutWidthPx;
  c.out_height_px = kGlobalOutHeightPx;
  c.center = link_midpoint;
  c.rotation_deg = alignment_rotation_deg(geom.azimuth_deg);
  return c;
}

CropSpec local_crop_spec(const GeoPoint& rx, const LinkGeometry& geom) {
  CropSpec c;
  c.width_m = kLocalSideM;
  c.height_m = kLocalSideM;
  c.out_width_px = kLocalOutPx;
  c.out_height_px = kLocalOutPx;
  c.center = rx;
  c.rotation_deg = alignment_rotation_deg(geom.azimuth_deg);
  return c;
}

std::array<double, 2> geo_to_pixel(const Raster& r, const GeoPoint& p) {
  const double east_m = (p.lon_deg - r.origin.lon_deg) * meters_per_deg_lon(r);
  const double south_m = (r.origin.lat_deg - p.lat_deg) * kMetersPerDegLat;
  return {east_m / r.meters_per_pixel, south_m / r.meters_per_pixel};
}

CropResult rotate_crop_resize(const Raster& src, const CropSpec& spec) {
  src.validate();
  if (!(spec.width_m > 0.0 && spec.height_m > 0.0) || spec.out_width_px < 1 || spec.out_height_px < 1)
    throw ValidationError("crop", "crop dimensions must be positive");

  const auto [cx, cy] = geo_to_pixel(src, spec.center);
  const double heading = (90.0 + spec.rotation_deg) * kDegToRad;
  // Unit steps (east, south) of the output's +x and +y axes.
  const double ux_e = std::sin(heading), ux_s = -std::cos(heading);
  const double uy_e = std::cos(heading), uy_s = std::sin(heading);
  const double mpp = src.meters_per_pixel;
  constexpr double kEdge = 1e-6;

  CropResult out;
  Raster& dst = out.raster;
  dst.width_px = spec.out_width_px;
  dst.height_px = spec.out_height_px;
  dst.channels = src.channels;
  dst.meters_per_pixel = spec.width_m / spec.out_width_px;
  {
    // Top-left corner of the rotated frame.
    const double a = -spec.width_m / 2.0, b = -spec.height_m / 2.0;
    dst.origin.lat_deg = spec.center.lat_deg - (a * ux_s + b * uy_s) / kMetersPerDegLat;
    dst.origin.lon_deg = spec.center.lon_deg + (a * ux_e + b * uy_e) / meters_per_deg_lon(src);
  }
  dst.pixels.assign(static_cast<size_t>(dst.width_px) * dst.height_px * dst.channels, 0);

  size_t inside = 0;
  for (int v = 0; v < dst.height_px; ++v) {
    const double b = ((v + 0.5) / dst.height_px - 0.5) * spec.height_m;
    for (int u = 0; u < dst.width_px; ++u) {
      const double a = ((u + 0.5) / dst.width_px - 0.5) * spec.width_m;
      // Continuous source coordinates relative to pixel centres.
      const double xs = cx + (a * ux_e + b * uy_e) / mpp - 0.5;
      const double ys = cy + (a * ux_s + b * uy_s) / mpp - 0.5;
      if (xs < -kEdge || ys < -kEdge || xs > src.width_px - 1 + kEdge || ys > src.height_px - 1 + kEdge) {
        out.clipped = true;
        continue;
      }
      ++inside;
      const double xc = std::clamp(xs, 0.0, static_cast<double>(src.width_px - 1));
      const double yc = std::clamp(ys, 0.0, static_cast<double>(src.height_px - 1));
      const int x0 = static_cast<int>(std::floor(xc));
      const int y0 = static_cast<int>(std::floor(yc));
      const int x1 = std::min(x0 + 1, src.width_px - 1);
      const int y1 = std::min(y0 + 1, src.height_px - 1);
      const double fx = xc - x0;
      const double fy = yc - y0;
      for (int c = 0; c < src.channels; ++c) {
        const double top = (1.0 - fx) * src.at(x0, y0, c) + fx * src.at(x1, y0, c);
        const double bottom = (1.0 - fx) * src.at(x0, y1, c) + fx * src.at(x1, y1, c);
        const double value = (1.0 - fy) * top + fy * bottom;
        dst.at(u, v, c) = static_cast<std::uint8_t>(std::lround(std::clamp(value, 0.0, 255.0)));
      }
    }
  }
  if (inside == 0) throw RangeError("rotate_crop_resize: crop lies entirely outside the raster");
  return out;
}

MaskIngest ingest_mask(const Raster& src) {
  src.validate();
  if (src.channels != 1) throw ShapeError("ingest_mask: mask must be single-channel");
  MaskIngest out;
  out.mask = src;
  size_t set = 0;
  for (auto& p : out.mask.pixels) {
    p = p >= 128 ? 255 : 0;
    set += p != 0;
  }
  out.building_fraction = static_cast<double>(set) / static_cast<double>(out.mask.pixels.size());
  return out;
}

void annotate_link(Raster& img, std::array<double, 2> tx_px, std::array<double, 2> rx_px,
                   const OverlayStyle& style) {
  img.validate();
  auto put = [&img](int x, int y, const std::array<std::uint8_t, 3>& color) {
    if (x < 0 || y < 0 || x >= img.width_px || y >= img.height_px) return;
    if (img.channels == 3) {
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = color[static_cast<size_t>(c)];
    } else {
      img.at(x, y) = static_cast<std::uint8_t>((color[0] + color[1] + color[2]) / 3);
    }
  };

  // Bresenham between the two pixel centres.
  int x0 = static_cast<int>(std::floor(tx_px[0])), y0 = static_cast<int>(std::floor(tx_px[1]));
  const int x1 = static_cast<int>(std::floor(rx_px[0])), y1 = static_cast<int>(std::floor(rx_px[1]));
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  for (int err = dx + dy;;) {
    put(x0, y0, style.line_color);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) { err += dy; x0 += sx; }
    if (e2 <= dx) { err += dx; y0 += sy; }
  }

  auto disc = [&](std::array<double, 2> c, const std::array<std::uint8_t, 3>& color) {
    const int r = style.marker_radius_px;
    const int cx = static_cast<int>(std::floor(c[0])), cy = static_cast<int>(std::floor(c[1]));
    for (int y = cy - r; y <= cy + r; ++y)
      for (int x = cx - r; x <= cx + r; ++x)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) put(x, y, color);
  };
  disc(tx_px, style.tx_color);
  disc(rx_px, style.rx_color);
}

Raster read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw IoError("read_png: " + path.string() + ": " + image.message);

  Raster r;
  r.channels = (image.format & PNG_FORMAT_FLAG_COLOR) ? 3 : 1;
  image.format = r.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  r.width_px = static_cast<int>(image.width);
  r.height_px = static_cast<int>(image.height);
  r.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, r.pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("read_png: " + path.string() + ": " + image.message);
  }
  return r;
}

void write_png(const std::filesystem::path& path, const Raster& r) {
  r.validate();
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(r.width_px);
  image.height = static_cast<png_uint_32>(r.height_px);
  image.format = r.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, r.pixels.data(), 0, nullptr))
    throw IoError("write_png: " + path.string() + ": " + image.message);
}

void read_georef(const std::filesystem::path& path, Raster& r) {
  std::ifstream in(path);
  if (!in) throw IoError("read_georef: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    r.origin.lat_deg = j.at("origin_lat_deg").get<double>();
    r.origin.lon_deg = j.at("origin_lon_deg").get<double>();
    r.meters_per_pixel = j.at("meters_per_pixel").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("georeference " + path.string() + ": " + e.what());
  }
  r.origin.validate();
  if (!(r.meters_per_pixel > 0.0)) throw ValidationError("meters_per_pixel", "must be positive");
}

void write_georef(const std::filesystem::path& path, const Raster& r) {
  std::ofstream out(path);
  if (!out) throw IoError("write_georef: cannot open " + path.string());
  const nlohmann::json j = {{"origin_lat_deg", r.origin.lat_deg},
                            {"origin_lon_deg", r.origin.lon_deg},
                            {"meters_per_pixel", r.meters_per_pixel}};
  out << j.dump(2) << '\n';
}

}  // namespace tdlforge
