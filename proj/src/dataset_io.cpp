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

#include "tdlforge/dataset_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <string_view>

namespace tdlforge {

static_assert(std::endian::native == std::endian::little, "binary PDP I/O assumes a little-endian host");

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

double common_spacing(std::span<const PdpSnapshot> snapshots) {
  if (snapshots.empty()) return kDefaultBinSpacingNs;
  const double spacing = snapshots.front().bin_spacing_ns;
  const Index n = snapshots.front().size();
  for (const auto& s : snapshots) {
    if (s.bin_spacing_ns != spacing) throw ShapeError("PDP file: snapshots disagree on bin spacing");
    if (s.size() != n) throw ShapeError("PDP file: snapshots disagree on length");
  }
  return spacing;
}

}  // namespace

// ----- PDP CSV -------------------------------------------------------------

std::vector<PdpSnapshot> read_pdp_csv(std::istream& in) {
  std::vector<PdpSnapshot> out;
  std::string line;
  long line_no = 0;
  double spacing = 0.0;
  bool have_header = false;
  std::vector<double> row;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;

    if (!have_header) {
      constexpr std::string_view kKey = "bin_spacing_ns=";
      if (text.front() != '#') throw ParseError("expected '# bin_spacing_ns=<float>' header", line_no);
      const std::string_view body = trim(text.substr(1));
      if (body.substr(0, kKey.size()) != kKey || !parse_double(body.substr(kKey.size()), spacing) ||
          !(spacing > 0.0))
        throw ParseError("malformed bin_spacing_ns header", line_no);
      have_header = true;
      continue;
    }
    if (text.front() == '#') continue;

    row.clear();
    size_t start = 0;
    while (start <= text.size()) {
      const size_t comma = text.find(',', start);
      const std::string_view cell = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
      double v = 0.0;
      if (!parse_double(cell, v))
        throw ParseError("row " + std::to_string(out.size() + 1) + ": non-numeric cell '" + std::string(trim(cell)) + "'",
                         line_no);
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (row.size() < 2) throw ParseError("row needs a timestamp and at least one bin", line_no);
    if (!out.empty() && static_cast<Index>(row.size() - 1) != out.front().size())
      throw ParseError("row length differs from the first row", line_no);

    PdpSnapshot s;
    s.timestamp_s = row[0];
    s.bin_spacing_ns = spacing;
    s.powers_db = Eigen::Map<const Eigen::VectorXd>(row.data() + 1, static_cast<Index>(row.size() - 1));
    try {
      s.validate();
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!out.empty() && !(s.timestamp_s > out.back().timestamp_s))
      throw ValidationError("timestamp_s", "line " + std::to_string(line_no) + ": timestamps must increase");
    out.push_back(std::move(s));
  }
  if (!have_header) throw ParseError("missing '# bin_spacing_ns=<float>' header");
  return out;
}

std::vector<PdpSnapshot> load_pdp_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_pdp_csv(in);
}

void write_pdp_csv(std::ostream& out, std::span<const PdpSnapshot> snapshots) {
  const double spacing = common_spacing(snapshots);
  out << fmt::format("# bin_spacing_ns={:.17g}\n", spacing);
  std::string line;
  for (const auto& s : snapshots) {
    line = fmt::format("{:.17g}", s.timestamp_s);
    for (Index i = 0; i < s.size(); ++i) fmt::format_to(std::back_inserter(line), ",{:.17g}", s.powers_db[i]);
    line += '\n';
    out << line;
  }
}

void save_pdp_csv(const std::filesystem::path& path, std::span<const PdpSnapshot> snapshots) {
  auto out = open_out(path);
  write_pdp_csv(out, snapshots);
  if (!out) throw IoError("write failed: " + path.string());
}

// ----- PDP binary ----------------------------------------------------------

std::vector<PdpSnapshot> load_pdp_binary(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  std::array<char, 4> magic{};
  std::uint32_t n_bins = 0;
  double spacing = 0.0;
  in.read(magic.data(), 4);
  in.read(reinterpret_cast<char*>(&n_bins), sizeof n_bins);
  in.read(reinterpret_cast<char*>(&spacing), sizeof spacing);
  if (!in) throw ParseError("binary PDP: truncated header");
  if (magic != kPdpBinaryMagic) throw ParseError("binary PDP: bad magic");
  if (n_bins == 0 || !(spacing > 0.0)) throw ParseError("binary PDP: invalid header values");

  std::vector<PdpSnapshot> out;
  std::vector<float> buf(n_bins);
  for (long record = 1;; ++record) {
    double ts = 0.0;
    if (!in.read(reinterpret_cast<char*>(&ts), sizeof ts)) {
      if (in.gcount() == 0) break;
      throw ParseError("binary PDP: truncated record", record);
    }
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n_bins * sizeof(float))))
      throw ParseError("binary PDP: truncated record", record);
    PdpSnapshot s;
    s.timestamp_s = ts;
    s.bin_spacing_ns = spacing;
    s.powers_db = Eigen::Map<const Eigen::VectorXf>(buf.data(), n_bins).cast<double>();
    if (!out.empty() && !(ts > out.back().timestamp_s))
      throw ValidationError("timestamp_s", "record " + std::to_string(record) + ": timestamps must increase");
    out.push_back(std::move(s));
  }
  return out;
}

void save_pdp_binary(const std::filesystem::path& path, std::span<const PdpSnapshot> snapshots) {
  const double spacing = common_spacing(snapshots);
  const auto n_bins = static_cast<std::uint32_t>(snapshots.empty() ? 0 : snapshots.front().size());
  auto out = open_out(path, std::ios::binary);
  out.write(kPdpBinaryMagic.data(), 4);
  out.write(reinterpret_cast<const char*>(&n_bins), sizeof n_bins);
  out.write(reinterpret_cast<const char*>(&spacing), sizeof spacing);
  for (const auto& s : snapshots) {
    const Eigen::VectorXf p = s.powers_db.cast<float>();
    out.write(reinterpret_cast<const char*>(&s.timestamp_s), sizeof s.timestamp_s);
    out.write(reinterpret_cast<const char*>(p.data()), static_cast<std::streamsize>(n_bins * sizeof(float)));
  }
  if (!out) throw IoError("write failed: " + path.string());
}

// ----- TDL JSON ------------------------------------------------------------

void to_json(nlohmann::json& j, const TdlParams& p) {
  j = nlohmann::json{{"first_tap_power_db", p.first_tap_power_db},
                     {"k_factor_db", p.k_factor_db},
                     {"num_taps", p.num_taps},
                     {"delays_ns", std::vector<double>(p.delays_ns.begin(), p.delays_ns.end())},
                     {"powers_db", std::vector<double>(p.powers_db.begin(), p.powers_db.end())}};
}

void from_json(const nlohmann::json& j, TdlParams& p) {
  if (!j.is_object()) throw ValidationError("", "TDL record must be a JSON object");
  auto number = [&j](const char* key) {
    if (!j.contains(key)) throw ValidationError(key, "missing");
    if (!j.at(key).is_number()) throw ValidationError(key, "must be a number");
    return j.at(key).get<double>();
  };
  auto array = [&j](const char* key) {
    if (!j.contains(key)) throw ValidationError(key, "missing");
    const auto& a = j.at(key);
    if (!a.is_array()) throw ValidationError(key, "must be an array");
    Eigen::VectorXd v(static_cast<Index>(a.size()));
    for (size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_number()) throw ValidationError(key, "entries must be numbers");
      v[static_cast<Index>(i)] = a[i].get<double>();
    }
    return v;
  };

  TdlParams out;
  out.first_tap_power_db = number("first_tap_power_db");
  out.k_factor_db = number("k_factor_db");
  if (!j.contains("num_taps")) throw ValidationError("num_taps", "missing");
  if (!j.at("num_taps").is_number_integer()) throw ValidationError("num_taps", "must be an integer");
  out.num_taps = j.at("num_taps").get<int>();
  out.delays_ns = array("delays_ns");
  out.powers_db = array("powers_db");
  out.validate();
  p = std::move(out);
}

void save_tdl_json(const std::filesystem::path& path, const TdlParams& params) {
  params.validate();
  auto out = open_out(path);
  out << nlohmann::json(params).dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

TdlParams load_tdl_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return j.get<TdlParams>();
}

// ----- pairing -------------------------------------------------------------

Pairing pair_by_timestamp(std::span<const double> channel_ts, std::span<const double> image_ts,
                          double tolerance_s) {
  Pairing out;
  size_t next_image = 0;  // first image still available (keeps j strictly increasing)
  for (size_t i = 0; i < channel_ts.size(); ++i) {
    const double t = channel_ts[i];
    const auto first = image_ts.begin() + static_cast<std::ptrdiff_t>(next_image);
    const auto lb = std::lower_bound(first, image_ts.end(), t);
    size_t best = image_ts.size();
    double best_gap = 0.0;
    // Candidates: the last image before t and the first at or after it.
    if (lb != first) {
      best = static_cast<size_t>(lb - image_ts.begin()) - 1;
      best_gap = t - image_ts[best];
    }
    if (lb != image_ts.end()) {
      const auto j = static_cast<size_t>(lb - image_ts.begin());
      const double gap = *lb - t;
      if (best == image_ts.size() || gap < best_gap) {
        best = j;
        best_gap = gap;
      }
    }
    if (best == image_ts.size() || best_gap > tolerance_s) {
      out.dropped.push_back(i);
      continue;
    }
    out.pairs.emplace_back(i, best);
    next_image = best + 1;
  }
  return out;
}

// ----- manifests and splits ------------------------------------------------

std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw ValidationError("split", "unknown split '" + s + "'");
}

void RouteManifest::validate() const {
  if (route_id.empty()) throw ValidationError("route_id", "must not be empty");
  for (size_t i = 1; i < sample_refs.size(); ++i)
    if (!(sample_refs[i].timestamp_s > sample_refs[i - 1].timestamp_s))
      throw ValidationError("sample_refs", "timestamps must increase within route " + route_id);
}

void to_json(nlohmann::json& j, const SampleRef& s) {
  j = {{"timestamp_s", s.timestamp_s},         {"pdp_path", s.pdp_path},
       {"tdl_path", s.tdl_path},               {"global_img_path", s.global_img_path},
       {"local_img_path", s.local_img_path},   {"mask_path", s.mask_path},
       {"tx", s.tx},                           {"rx", s.rx}};
}

void from_json(const nlohmann::json& j, SampleRef& s) {
  j.at("timestamp_s").get_to(s.timestamp_s);
  s.pdp_path = j.value("pdp_path", "");
  s.tdl_path = j.value("tdl_path", "");
  s.global_img_path = j.value("global_img_path", "");
  s.local_img_path = j.value("local_img_path", "");
  s.mask_path = j.value("mask_path", "");
  j.at("tx").get_to(s.tx);
  j.at("rx").get_to(s.rx);
}

void to_json(nlohmann::json& j, const RouteManifest& m) {
  j = {{"route_id", m.route_id}, {"split", to_string(m.split)}, {"sample_refs", m.sample_refs}};
}

void from_json(const nlohmann::json& j, RouteManifest& m) {
  j.at("route_id").get_to(m.route_id);
  m.split = split_from_string(j.value("split", "train"));
  j.at("sample_refs").get_to(m.sample_refs);
  m.validate();
}

std::vector<RouteManifest> load_manifests(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    nlohmann::json j;
    in >> j;
    return j.get<std::vector<RouteManifest>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_manifests(const std::filesystem::path& path, std::span<const RouteManifest> manifests) {
  auto out = open_out(path);
  out << nlohmann::json(std::vector<RouteManifest>(manifests.begin(), manifests.end())).dump(2) << '\n';
}

std::vector<RouteManifest> split_routes(std::vector<RouteManifest> manifests, std::array<double, 3> fractions,
                                        std::uint64_t seed) {
  double sum = 0.0;
  size_t active = 0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw ConfigError("split_routes: fractions must be non-negative");
    sum += f;
    active += f > 0.0;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split_routes: fractions must sum to 1");
  if (manifests.size() < active) throw ConfigError("split_routes: fewer routes than non-empty splits");

  std::mt19937_64 engine(seed);
  std::shuffle(manifests.begin(), manifests.end(), engine);

  double total = 0.0;
  for (const auto& m : manifests) total += static_cast<double>(m.sample_refs.size());
  std::array<double, 3> assigned{0.0, 0.0, 0.0};
  constexpr std::array<Split, 3> kSplits{Split::kTrain, Split::kVal, Split::kTest};

  size_t next = 0;
  for (size_t s = 0; s < 3; ++s) {
    if (fractions[s] <= 0.0) continue;
    manifests[next].split = kSplits[s];
    assigned[s] += static_cast<double>(manifests[next].sample_refs.size());
    ++next;
  }
  for (; next < manifests.size(); ++next) {
    size_t best = 3;
    double best_deficit = 0.0;
    for (size_t s = 0; s < 3; ++s) {
      if (fractions[s] <= 0.0) continue;
      const double deficit = fractions[s] * total - assigned[s];
      if (best == 3 || deficit > best_deficit) {
        best = s;
        best_deficit = deficit;
      }
    }
    manifests[next].split = kSplits[best];
    assigned[best] += static_cast<double>(manifests[next].sample_refs.size());
  }
  return manifests;
}

}  // namespace tdlforge
