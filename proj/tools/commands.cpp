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

#include "commands.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "tdlforge/cir_synth.hpp"
#include "tdlforge/dataset_io.hpp"
#include "tdlforge/metrics.hpp"
#include "tdlforge/parallel.hpp"
#include "tdlforge/predictor.hpp"
#include "tdlforge/rng.hpp"

namespace tdlforge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const IoError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kIoFailure;
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kInvalid;
  } catch (const json::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kInvalid;
  } catch (const fs::filesystem_error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kIoFailure;
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::vector<PdpSnapshot> load_pdps(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("no such file: " + path.string());
  return path.extension() == ".bin" ? load_pdp_binary(path) : load_pdp_csv(path);
}

json to_json_config(const DenoiseConfig& d, const ExtractConfig& e) {
  return {{"abs_floor_db", d.abs_floor_db},
          {"bottom_fraction", d.bottom_fraction},
          {"margin_db", d.margin_db},
          {"truncate_db", d.truncate_db},
          {"noise_floor_domain", d.domain == NoiseFloorDomain::kDb ? "db" : "linear"},
          {"max_taps", e.max_taps},
          {"dynamic_range_db", e.dynamic_range_db},
          {"min_separation_bins", e.min_separation_bins}};
}

// ----- synthesis shared by synth / roundtrip / eval --------------------------

SamplingSpec sampling_for(const TdlParams& tdl, double distance_m, double period_ns, Index grid_len,
                          int scatter_bins, std::uint64_t seed) {
  SamplingSpec spec;
  spec.sample_period_ns = period_ns;
  spec.rng_seed = seed;
  if (grid_len > 0) {
    spec.grid_len = grid_len;
  } else {
    if (distance_m < 0.0) throw DomainError("distance must be non-negative");
    const double last = distance_m / kSpeedOfLightMPerNs + tdl.delays_ns.maxCoeff() +
                        std::max(0, scatter_bins) * period_ns;
    spec.grid_len = grid_len_for(last, period_ns, spec.window_half_support);
  }
  return spec;
}

std::vector<PdpSnapshot> synth_ensemble(const TdlParams& tdl, const SynthArgs& a, int jobs) {
  const SamplingSpec spec = sampling_for(tdl, a.distance_m, a.sample_period_ns, a.grid_len, a.scatter_bins, a.seed);
  SynthOptions opt;
  opt.noise_rel_db = a.noise_rel_db;
  opt.first_tap_scatter_bins = a.scatter_bins;
  return generate_ensemble(tdl, a.distance_m, a.draws, spec, opt, jobs);
}

Apdp average_all(const std::vector<PdpSnapshot>& ensemble) {
  return sliding_average(ensemble, static_cast<int>(ensemble.size())).front();
}

// ----- geo helpers -----------------------------------------------------------

GeoPoint parse_point(const std::string& text, const char* name) {
  const auto comma = text.find(',');
  GeoPoint p;
  try {
    if (comma == std::string::npos) throw std::invalid_argument("");
    size_t used = 0;
    p.lat_deg = std::stod(text.substr(0, comma), &used);
    p.lon_deg = std::stod(text.substr(comma + 1), &used);
  } catch (const std::logic_error&) {
    throw ValidationError(name, "expected <lat>,<lon> but got '" + text + "'");
  }
  p.validate();
  return p;
}

/// Continuous output-pixel position of a point inside a crop (flat earth about the centre).
std::array<double, 2> crop_pixel(const CropSpec& spec, const GeoPoint& p) {
  const double east = (p.lon_deg - spec.center.lon_deg) * kDegToRad * kEarthRadiusM *
                      std::cos(spec.center.lat_deg * kDegToRad);
  const double south = -(p.lat_deg - spec.center.lat_deg) * kDegToRad * kEarthRadiusM;
  const double heading = (90.0 + spec.rotation_deg) * kDegToRad;
  const double a = east * std::sin(heading) - south * std::cos(heading);
  const double b = east * std::cos(heading) + south * std::sin(heading);
  return {(a / spec.width_m + 0.5) * spec.out_width_px, (b / spec.height_m + 0.5) * spec.out_height_px};
}

}  // namespace

// ----- extract -----------------------------------------------------------------

int cmd_extract(const ExtractArgs& args, const Common& common, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    args.denoise.validate();
    args.extract.validate();
    const auto snapshots = load_pdps(args.pdp);
    if (snapshots.empty()) throw ValidationError("pdp", "file holds no snapshots");
    const auto apdps = sliding_average(snapshots, args.window);
    make_dir(args.out_dir);

    const size_t n = apdps.size();
    std::vector<std::optional<TdlParams>> results(n);
    std::vector<std::string> errors(n);
    std::vector<std::string> kinds(n);
    parallel_for(n, common.jobs, [&](size_t i) {
      try {
        results[i] = extract_tdl(apdps[i], args.denoise, args.extract).params;
      } catch (const NoMultipathError& e) {
        kinds[i] = "no_multipath";
        errors[i] = e.what();
      } catch (const AllNoiseError& e) {
        kinds[i] = "all_noise";
        errors[i] = e.what();
      } catch (const Error& e) {
        kinds[i] = "invalid";
        errors[i] = e.what();
      }
    });

    json entries = json::array();
    std::map<int, int> n_hist;
    std::map<std::string, int> failures;
    std::vector<double> ks;
    std::ostringstream jsonl;
    for (size_t i = 0; i < n; ++i) {
      json e{{"index", i}, {"timestamp_s", apdps[i].timestamp_s}};
      if (results[i]) {
        const TdlParams& p = *results[i];
        const std::string name = fmt::format("tdl_{:06d}.json", i);
        save_tdl_json(args.out_dir / name, p);
        e["file"] = name;
        e["num_taps"] = p.num_taps;
        ++n_hist[p.num_taps];
        ks.push_back(p.k_factor_db);
        jsonl << json{{"timestamp_s", apdps[i].timestamp_s}, {"tdl", p}}.dump() << '\n';
      } else {
        e["error"] = kinds[i];
        e["message"] = errors[i];
        ++failures[kinds[i]];
        fmt::print(err, "snapshot {} (t={}): {}\n", i, apdps[i].timestamp_s, errors[i]);
      }
      entries.push_back(std::move(e));
    }
    write_text(args.out_dir / "tdl.jsonl", jsonl.str());

    json hist = json::object();
    for (const auto& [k, c] : n_hist) hist[std::to_string(k)] = c;
    json kstats = nullptr;
    if (!ks.empty()) {
      const Eigen::Map<const Eigen::VectorXd> kv(ks.data(), static_cast<Index>(ks.size()));
      const double mean = kv.mean();
      kstats = {{"mean", mean},
                {"std", std::sqrt((kv.array() - mean).square().mean())},
                {"min", kv.minCoeff()},
                {"max", kv.maxCoeff()}};
    }
    const json summary{{"input", args.pdp.filename().string()},
                       {"window", args.window},
                       {"config", to_json_config(args.denoise, args.extract)},
                       {"n_snapshots", snapshots.size()},
                       {"n_apdp", n},
                       {"n_extracted", ks.size()},
                       {"n_failed", n - ks.size()},
                       {"failures", failures},
                       {"num_taps_histogram", hist},
                       {"k_factor_db", kstats},
                       {"snapshots", entries}};
    write_text(args.out_dir / "summary.json", summary.dump(2) + "\n");

    if (common.json) {
      json brief = summary;
      brief.erase("snapshots");
      out << brief.dump(2) << '\n';
    } else {
      fmt::print(out, "APDPs: {}  extracted: {}  failed: {}\n", n, ks.size(), n - ks.size());
      for (const auto& [kind, c] : failures)
        fmt::print(out, "  {:<14} {}\n", kind == "no_multipath" ? "no multipath detected" : kind, c);
      if (!n_hist.empty()) {
        fmt::print(out, "{:>6} {:>8}\n", "N", "count");
        for (const auto& [k, c] : n_hist) fmt::print(out, "{:>6} {:>8}\n", k, c);
        fmt::print(out, "K [dB]: mean {:.3f}  std {:.3f}  min {:.3f}  max {:.3f}\n", kstats["mean"].get<double>(),
                   kstats["std"].get<double>(), kstats["min"].get<double>(), kstats["max"].get<double>());
      }
    }
    if (ks.empty()) {
      fmt::print(err, "no snapshot produced a TDL ({} with no multipath detected)\n", failures["no_multipath"]);
      return static_cast<int>(kInvalid);
    }
    return static_cast<int>(kOk);
  });
}

// ----- synth -------------------------------------------------------------------

int cmd_synth(const SynthArgs& args, const Common& common, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const TdlParams tdl = load_tdl_json(args.tdl);
    const auto ensemble = synth_ensemble(tdl, args, common.jobs);
    const Apdp apdp = average_all(ensemble);
    fs::path apdp_path = args.apdp_out;
    if (apdp_path.empty())
      apdp_path = args.out.parent_path() / (args.out.stem().string() + "_apdp" + args.out.extension().string());

    save_pdp_csv(args.out, ensemble);
    const PdpSnapshot averaged = apdp;
    save_pdp_csv(apdp_path, std::span(&averaged, 1));

    const json info{{"draws", ensemble.size()},
                    {"grid_len", ensemble.front().size()},
                    {"sample_period_ns", args.sample_period_ns},
                    {"seed", args.seed},
                    {"ensemble", args.out.filename().string()},
                    {"apdp", apdp_path.filename().string()}};
    if (common.json)
      out << info.dump(2) << '\n';
    else
      fmt::print(out, "wrote {} draws x {} bins to {} and the averaged profile to {}\n", ensemble.size(),
                 ensemble.front().size(), args.out.string(), apdp_path.string());
    return static_cast<int>(kOk);
  });
}

// ----- roundtrip ---------------------------------------------------------------

int cmd_roundtrip(const RoundtripArgs& args, const Common& common, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    args.denoise.validate();
    args.extract.validate();
    const TdlParams truth = load_tdl_json(args.synth.tdl);
    const double ts = args.synth.sample_period_ns;
    if (args.synth.distance_m / kSpeedOfLightMPerNs < ts)
      fmt::print(err, "warning: the first tap falls on the boundary bin and cannot be detected as a peak\n");
    const Apdp apdp = average_all(synth_ensemble(truth, args.synth, common.jobs));

    json report{{"truth_num_taps", truth.num_taps}, {"seed", args.synth.seed}, {"draws", args.synth.draws}};
    bool pass = true;
    std::optional<TdlParams> rec;
    try {
      rec = extract_tdl(apdp, args.denoise, args.extract).params;
    } catch (const NoMultipathError& e) {
      report["error"] = e.what();
    } catch (const AllNoiseError& e) {
      report["error"] = e.what();
    }

    json taps = json::array();
    if (!rec) {
      pass = false;
      report["recovered_num_taps"] = 0;
    } else {
      report["recovered_num_taps"] = rec->num_taps;
      pass = rec->num_taps == truth.num_taps;
      const int n = std::max(truth.num_taps, rec->num_taps);
      for (int i = 0; i < n; ++i) {
        json t{{"tap", i}};
        const bool has_t = i < truth.num_taps, has_r = i < rec->num_taps;
        if (has_t) t["truth_delay_ns"] = truth.delays_ns[i], t["truth_power_db"] = truth.powers_db[i];
        if (has_r) t["recovered_delay_ns"] = rec->delays_ns[i], t["recovered_power_db"] = rec->powers_db[i];
        if (has_t && has_r) {
          const double derr = std::abs(rec->delays_ns[i] - truth.delays_ns[i]) / ts;
          const double perr = rec->powers_db[i] - truth.powers_db[i];
          t["delay_error_bins"] = derr;
          t["power_error_db"] = perr;
          const bool ok = derr <= args.delay_tol_bins + 1e-6 && std::abs(perr) <= args.power_tol_db;
          t["ok"] = ok;
          pass = pass && ok;
        } else {
          t["ok"] = false;
        }
        taps.push_back(std::move(t));
      }
      const double kerr = rec->k_factor_db - truth.k_factor_db;
      report["truth_k_factor_db"] = truth.k_factor_db;
      report["recovered_k_factor_db"] = rec->k_factor_db;
      report["k_error_db"] = kerr;
      report["recovered_first_tap_power_db"] = rec->first_tap_power_db;
      pass = pass && std::abs(kerr) <= args.k_tol_db;
    }
    report["taps"] = taps;
    report["tolerances"] = {
        {"delay_bins", args.delay_tol_bins}, {"power_db", args.power_tol_db}, {"k_db", args.k_tol_db}};
    report["pass"] = pass;

    if (common.json) {
      out << report.dump(2) << '\n';
    } else {
      fmt::print(out, "N: truth {}  recovered {}\n", truth.num_taps, report["recovered_num_taps"].get<int>());
      if (report.contains("error")) fmt::print(out, "extraction failed: {}\n", report["error"].get<std::string>());
      if (rec) {
        fmt::print(out, "{:>4} {:>12} {:>12} {:>10} {:>10} {:>10} {:>8} {:>4}\n", "tap", "tau_true", "tau_rec",
                   "p_true", "p_rec", "dp", "dtau", "ok");
        auto cell = [](const json& t, const char* key, int prec) {
          return t.contains(key) ? fmt::format("{:.{}f}", t[key].get<double>(), prec) : std::string("-");
        };
        for (const auto& t : taps)
          fmt::print(out, "{:>4} {:>12} {:>12} {:>10} {:>10} {:>10} {:>8} {:>4}\n", t["tap"].get<int>(),
                     cell(t, "truth_delay_ns", 1), cell(t, "recovered_delay_ns", 1), cell(t, "truth_power_db", 2),
                     cell(t, "recovered_power_db", 2), cell(t, "power_error_db", 3), cell(t, "delay_error_bins", 2),
                     t["ok"].get<bool>() ? "yes" : "NO");
        fmt::print(out, "K [dB]: truth {:.3f}  recovered {:.3f}  error {:+.3f}\n", truth.k_factor_db,
                   rec->k_factor_db, report["k_error_db"].get<double>());
      }
      fmt::print(out, "{}\n", pass ? "PASS" : "FAIL: tolerance breach");
    }
    return static_cast<int>(pass ? kOk : kToleranceBreach);
  });
}

// ----- eval --------------------------------------------------------------------

int cmd_eval(const EvalArgs& args, const Common& common, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    args.match.validate();
    if (args.draws < 1) throw ConfigError("--draws must be positive");
    const fs::path truth_file = fs::is_directory(args.truth_dir) ? args.truth_dir / "tdl.jsonl" : args.truth_dir;
    if (!fs::exists(truth_file)) throw IoError("no such file: " + truth_file.string());
    if (!fs::exists(args.pred)) throw IoError("no such file: " + args.pred.string());
    const auto truth = load_predictions(truth_file);
    const auto pred = load_predictions(args.pred);
    if (truth.empty()) throw ValidationError("truth", "no truth records");

    std::vector<double> tt, pt;
    for (const auto& r : truth) tt.push_back(r.timestamp_s);
    for (const auto& r : pred) pt.push_back(r.timestamp_s);
    const Pairing pairing = pair_by_timestamp(tt, pt, args.pair_tolerance_s);
    const double unpaired = static_cast<double>(pairing.dropped.size()) / static_cast<double>(truth.size());
    for (size_t i : pairing.dropped) fmt::print(err, "unpaired truth record at t={}\n", truth[i].timestamp_s);
    if (unpaired > 0.5 || pairing.pairs.empty()) {
      fmt::print(err, "error: {} of {} truth records have no prediction\n", pairing.dropped.size(), truth.size());
      return static_cast<int>(kInvalid);
    }

    const size_t n = pairing.pairs.size();
    std::vector<PdpSnapshot> tp(n), pp(n);
    std::vector<TdlParams> tt_params(n), pp_params(n);
    parallel_for(n, common.jobs, [&](size_t k) {
      const auto [ti, pi] = pairing.pairs[k];
      const std::uint64_t seed_t = substream_seed(args.seed, k);
      const std::uint64_t seed_p =
          args.independent_fading ? substream_seed(splitmix64(args.seed ^ 0x5DEECE66DULL), k) : seed_t;
      SynthArgs s;
      s.distance_m = args.distance_m;
      s.draws = args.draws;
      s.sample_period_ns = args.sample_period_ns;
      s.noise_rel_db.reset();
      s.scatter_bins = args.scatter_bins;
      s.seed = seed_t;
      tp[k] = average_all(synth_ensemble(truth[ti].tdl, s, 1));
      s.seed = seed_p;
      pp[k] = average_all(synth_ensemble(pred[pi].tdl, s, 1));
      tt_params[k] = truth[ti].tdl;
      pp_params[k] = pred[pi].tdl;
    });
    const EvalReport report = evaluate_route(tp, pp, tt_params, pp_params);
    write_text(args.out, json(report).dump(2) + "\n");

    // Set-matching diagnostics over absolute tap powers.
    auto tap_set = [](const TdlParams& p) {
      TapSet s(p.num_taps, 2);
      s.col(0) = p.delays_ns;
      s.col(1) = p.powers_db.array() + p.first_tap_power_db;
      return s;
    };
    double match_sum = 0.0, rep_sum = 0.0;
    size_t matched = 0;
    for (size_t k = 0; k < n; ++k) {
      rep_sum += repulsion_loss(pp_params[k].delays_ns, args.match);
      if (pp_params[k].num_taps < tt_params[k].num_taps) continue;
      match_sum += match_loss(tap_set(pp_params[k]), tap_set(tt_params[k]), args.match).first;
      ++matched;
    }
    const json extras{{"report", report},
                      {"paired", n},
                      {"unpaired", pairing.dropped.size()},
                      {"match_loss_mean", matched ? json(match_sum / static_cast<double>(matched)) : json(nullptr)},
                      {"match_pairs_evaluated", matched},
                      {"repulsion_loss_mean", rep_sum / static_cast<double>(n)},
                      {"match_config",
                       {{"delay_weight", args.match.delay_weight},
                        {"repulsion_min_sep_ns", args.match.repulsion_min_sep_ns},
                        {"repulsion_alpha", args.match.repulsion_alpha}}},
                      {"shared_fading", !args.independent_fading}};
    if (common.json) {
      out << extras.dump(2) << '\n';
    } else {
      fmt::print(out, "paired {} / unpaired {}\n", n, pairing.dropped.size());
      fmt::print(out, "RMSE path loss      {:10.4f} dB\n", report.rmse_path_loss_db);
      fmt::print(out, "RMSE delay spread   {:10.4f} ns\n", report.rmse_delay_spread_ns);
      fmt::print(out, "RMSE K-factor       {:10.4f} dB\n", report.rmse_k_factor_db);
      fmt::print(out, "PDP cosine sim.     {:10.6f}\n", report.pdp_avg_cosine_similarity);
      if (matched) fmt::print(out, "match loss (mean)   {:10.4f} over {} pairs\n", match_sum / matched, matched);
      fmt::print(out, "repulsion (mean)    {:10.4f}\n", rep_sum / static_cast<double>(n));
    }
    return static_cast<int>(kOk);
  });
}

// ----- geo ---------------------------------------------------------------------

int cmd_geo(const GeoArgs& args, const Common& common, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const LinkGeometry geom = link_geometry(args.tx, args.rx);
    if (geom.coincident) fmt::print(err, "warning: tx and rx coincide; azimuth set to 0\n");
    const GeoPoint mid = midpoint(args.tx, args.rx);
    const CropSpec global = global_crop_spec(geom, mid);
    const CropSpec local = local_crop_spec(args.rx, geom);
    json info{{"tx", args.tx}, {"rx", args.rx}, {"link", geom}, {"midpoint", mid},
              {"global_crop", global}, {"local_crop", local}};

    if (!args.raster.empty()) {
      if (args.out_dir.empty()) throw ConfigError("--out is required with --raster");
      Raster src = read_png(args.raster);
      if (!args.georef.empty()) {
        read_georef(args.georef, src);
      } else {
        const fs::path sidecar = fs::path(args.raster).replace_extension(".json");
        if (!fs::exists(sidecar)) throw ConfigError("--georef is required with --raster");
        read_georef(sidecar, src);
      }
      make_dir(args.out_dir);
      json files = json::object();
      for (const auto& [name, spec] : {std::pair{"global", global}, std::pair{"local", local}}) {
        CropResult crop;
        try {
          crop = rotate_crop_resize(src, spec);
        } catch (const RangeError& e) {
          throw ValidationError(name, std::string("crop outside raster: ") + e.what());
        }
        if (crop.clipped) fmt::print(err, "warning: {} crop extends past the raster; filled with 0\n", name);
        if (args.annotate) {
          if (crop.raster.channels == 1) {
            Raster rgb = crop.raster;
            rgb.channels = 3;
            rgb.pixels.resize(crop.raster.pixels.size() * 3);
            for (size_t i = 0; i < crop.raster.pixels.size(); ++i)
              std::fill_n(rgb.pixels.begin() + static_cast<std::ptrdiff_t>(3 * i), 3, crop.raster.pixels[i]);
            crop.raster = std::move(rgb);
          }
          annotate_link(crop.raster, crop_pixel(spec, args.tx), crop_pixel(spec, args.rx));
        }
        const std::string file = std::string(name) + ".png";
        write_png(args.out_dir / file, crop.raster);
        write_georef(args.out_dir / (std::string(name) + ".json"), crop.raster);
        files[name] = {{"file", file}, {"clipped", crop.clipped}};
      }
      info["images"] = files;
    }

    if (common.json) {
      out << info.dump(2) << '\n';
    } else {
      fmt::print(out, "distance {:.3f} m  azimuth {:.3f} deg\n", geom.distance_m, geom.azimuth_deg);
      out << info.dump(2) << '\n';
    }
    return static_cast<int>(kOk);
  });
}

// ----- argument parsing ----------------------------------------------------------

namespace {

void add_denoise_flags(CLI::App* app, DenoiseConfig& d, std::string& domain) {
  app->add_option("--abs-floor-db", d.abs_floor_db, "Absolute noise floor (dB)")->capture_default_str();
  app->add_option("--bottom-fraction", d.bottom_fraction, "Fraction of lowest bins averaged for the floor")
      ->capture_default_str();
  app->add_option("--margin-db", d.margin_db, "Margin above the noise floor (dB)")->capture_default_str();
  app->add_option("--truncate-db", d.truncate_db, "Value written to bins below threshold")->capture_default_str();
  app->add_option("--noise-floor-domain", domain, "Average the floor in the 'linear' or 'db' domain")
      ->check(CLI::IsMember({"linear", "db"}))
      ->capture_default_str();
}

void add_extract_flags(CLI::App* app, ExtractConfig& e) {
  app->add_option("--max-taps", e.max_taps, "Maximum number of taps")->capture_default_str();
  app->add_option("--dynamic-range-db", e.dynamic_range_db, "Peaks this far below the maximum are ignored")
      ->capture_default_str();
  app->add_option("--min-separation", e.min_separation_bins, "Bins cleared on each side of a peak")
      ->capture_default_str();
}

void add_synth_flags(CLI::App* app, SynthArgs& s, bool& no_noise, double& noise) {
  app->add_option("--tdl", s.tdl, "TDL parameter JSON")->required();
  app->add_option("--distance", s.distance_m, "Tx-Rx distance in metres")
      ->required()
      ->check(CLI::NonNegativeNumber);
  app->add_option("--draws", s.draws, "Number of fading draws")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--seed", s.seed, "Random seed")->envname("TDLFORGE_SEED")->capture_default_str();
  app->add_option("--sample-period-ns", s.sample_period_ns, "CIR sample period")->capture_default_str();
  app->add_option("--grid-len", s.grid_len, "CIR length in samples (0 = automatic)")->capture_default_str();
  app->add_option("--noise-rel-db", noise, "Complex noise power relative to the first tap (dB)")
      ->capture_default_str();
  app->add_flag("--no-noise", no_noise, "Do not add measurement noise");
  app->add_option("--scatter-bins", s.scatter_bins, "Diffuse first-tap energy spread over this many later bins")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

NoiseFloorDomain domain_from(const std::string& s) { return s == "db" ? NoiseFloorDomain::kDb : NoiseFloorDomain::kLinear; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"tdlforge: tapped-delay-line extraction and channel reconstruction", "tdlforge"};
  app.set_config("--config", "", "Read key=value settings from a file");
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_flag("--json", common.json, "Machine-readable JSON on stdout");
  app.add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  ExtractArgs ex;
  std::string ex_domain = "linear";
  auto* c_extract = app.add_subcommand("extract", "Averaged PDPs to per-snapshot TDL parameters");
  c_extract->add_option("--pdp", ex.pdp, "PDP CSV (or .bin)")->required();
  c_extract->add_option("--out", ex.out_dir, "Output directory")->required();
  c_extract->add_option("--window", ex.window, "Sliding-average window")->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_denoise_flags(c_extract, ex.denoise, ex_domain);
  add_extract_flags(c_extract, ex.extract);

  SynthArgs sy;
  bool sy_no_noise = false;
  double sy_noise = *sy.noise_rel_db;
  auto* c_synth = app.add_subcommand("synth", "Fading ensemble and averaged PDP from TDL parameters");
  add_synth_flags(c_synth, sy, sy_no_noise, sy_noise);
  c_synth->add_option("--out", sy.out, "Ensemble CSV")->required();
  c_synth->add_option("--apdp-out", sy.apdp_out, "Averaged PDP CSV");

  RoundtripArgs rt;
  bool rt_no_noise = false;
  double rt_noise = *rt.synth.noise_rel_db;
  std::string rt_domain = "linear";
  rt.synth.draws = 500;
  auto* c_round = app.add_subcommand("roundtrip", "Synthesize, re-extract and compare against the input TDL");
  add_synth_flags(c_round, rt.synth, rt_no_noise, rt_noise);
  add_denoise_flags(c_round, rt.denoise, rt_domain);
  add_extract_flags(c_round, rt.extract);
  c_round->add_option("--delay-tol-bins", rt.delay_tol_bins, "Allowed delay error")->capture_default_str();
  c_round->add_option("--power-tol-db", rt.power_tol_db, "Allowed tap power error")->capture_default_str();
  c_round->add_option("--k-tol-db", rt.k_tol_db, "Allowed K-factor error")->capture_default_str();

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Score predicted TDL parameters against truth");
  c_eval->add_option("--truth", ev.truth_dir, "Directory written by extract (or a TDL JSONL file)")->required();
  c_eval->add_option("--pred", ev.pred, "Predicted TDL JSONL")->required();
  c_eval->add_option("--out", ev.out, "Report JSON")->required();
  c_eval->add_option("--seed", ev.seed, "Reconstruction seed")->envname("TDLFORGE_SEED")->capture_default_str();
  c_eval->add_option("--draws", ev.draws, "Fading draws averaged per reconstruction")->capture_default_str();
  c_eval->add_option("--distance", ev.distance_m, "Tx-Rx distance used for reconstruction")->capture_default_str();
  c_eval->add_option("--pair-tolerance-s", ev.pair_tolerance_s, "Timestamp pairing tolerance")
      ->capture_default_str();
  c_eval->add_flag("--independent-fading", ev.independent_fading, "Use unrelated fading draws for predictions");
  c_eval->add_option("--sample-period-ns", ev.sample_period_ns, "CIR sample period")->capture_default_str();
  c_eval->add_option("--scatter-bins", ev.scatter_bins, "Diffuse first-tap spread used in reconstruction")
      ->capture_default_str();
  c_eval->add_option("--delay-weight", ev.match.delay_weight, "Delay scale in the matching cost")
      ->capture_default_str();
  c_eval->add_option("--repulsion-min-sep-ns", ev.match.repulsion_min_sep_ns, "Repulsion margin")
      ->capture_default_str();

  GeoArgs ge;
  std::string tx_text, rx_text;
  auto* c_geo = app.add_subcommand("geo", "Link geometry, crop rectangles and image crops");
  c_geo->add_option("--tx", tx_text, "Transmitter <lat>,<lon>")->required();
  c_geo->add_option("--rx", rx_text, "Receiver <lat>,<lon>")->required();
  c_geo->add_option("--raster", ge.raster, "Source PNG");
  c_geo->add_option("--georef", ge.georef, "Georeference JSON for the raster");
  c_geo->add_option("--out", ge.out_dir, "Directory for cropped images");
  c_geo->add_flag("--annotate", ge.annotate, "Draw Tx, Rx and the LOS line on the crops");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return static_cast<int>(kOk);
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return static_cast<int>(kOk);
  } catch (const CLI::FileError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return static_cast<int>(kIoFailure);
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return static_cast<int>(kInvalid);
  }

  if (c_extract->parsed()) {
    ex.denoise.domain = domain_from(ex_domain);
    return cmd_extract(ex, common, out, err);
  }
  if (c_synth->parsed()) {
    if (sy_no_noise) sy.noise_rel_db.reset(); else sy.noise_rel_db = sy_noise;
    return cmd_synth(sy, common, out, err);
  }
  if (c_round->parsed()) {
    if (rt_no_noise) rt.synth.noise_rel_db.reset(); else rt.synth.noise_rel_db = rt_noise;
    rt.denoise.domain = domain_from(rt_domain);
    return cmd_roundtrip(rt, common, out, err);
  }
  if (c_eval->parsed()) return cmd_eval(ev, common, out, err);
  return guarded(err, [&] {
    ge.tx = parse_point(tx_text, "tx");
    ge.rx = parse_point(rx_text, "rx");
    return cmd_geo(ge, common, out, err);
  });
}

}  // namespace tdlforge::cli
