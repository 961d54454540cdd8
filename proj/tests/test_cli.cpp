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

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "../tools/commands.hpp"
#include "oracles.hpp"
#include "tdlforge/dataset_io.hpp"
#include "tdlforge/predictor.hpp"

using namespace tdlforge;
using nlohmann::json;
using Catch::Matchers::WithinAbs;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

TdlParams three_taps(double first_db = -80.0) {
  TdlParams p;
  p.first_tap_power_db = first_db;
  p.k_factor_db = 6.0;
  p.num_taps = 3;
  p.delays_ns.resize(3);
  p.delays_ns << 0.0, 166.5, 399.6;
  p.powers_db.resize(3);
  p.powers_db << 0.0, -6.0, -11.0;
  return p;
}

std::string path_str(const oracle::TempDir& d, const std::string& name) { return (d / name).string(); }

}  // namespace

TEST_CASE("cli: usage errors and help", "[cli]") {
  CHECK(run_cli({"--help"}).code == 0);
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"frobnicate"}).code == 2);
  CHECK(run_cli({"synth", "--tdl"}).code == 2);
  CHECK(run_cli({"synth", "--tdl", "t.json", "--out", "x.csv"}).code == 2);  // --distance is required
  CHECK(run_cli({"--jobs", "0", "geo", "--tx", "0,0", "--rx", "0,0.001"}).code == 2);
}

TEST_CASE("cli: synth output files and input errors", "[cli][synth]") {
  oracle::TempDir dir("cli_synth");
  save_tdl_json(dir / "t.json", three_taps());
  const Outcome o = run_cli({"synth", "--distance", "120", "--tdl", path_str(dir, "t.json"), "--draws", "20", "--seed", "3", "--out",
                             path_str(dir, "ens.csv")});
  REQUIRE(o.code == 0);
  CHECK(load_pdp_csv(dir / "ens.csv").size() == 20);
  CHECK(load_pdp_csv(dir / "ens_apdp.csv").size() == 1);

  CHECK(run_cli({"synth", "--distance", "120", "--tdl", path_str(dir, "none.json"), "--out", path_str(dir, "x.csv")}).code == 1);
  {
    std::ofstream f(dir / "bad.json");
    f << R"({"first_tap_power_db": -80, "k_factor_db": 1, "num_taps": 2, "delays_ns": [0], "powers_db": [0, -3]})";
  }
  const Outcome bad = run_cli({"synth", "--distance", "120", "--tdl", path_str(dir, "bad.json"), "--out", path_str(dir, "x.csv")});
  CHECK(bad.code == 2);
  CHECK_THAT(bad.err, Catch::Matchers::ContainsSubstring("delays_ns"));
}

TEST_CASE("cli: seed from config file and environment", "[cli][synth]") {
  oracle::TempDir dir("cli_seed");
  save_tdl_json(dir / "t.json", three_taps());
  const auto synth = [&](const std::string& out, std::vector<std::string> extra) {
    std::vector<std::string> args{"synth", "--distance", "120", "--tdl", path_str(dir, "t.json"), "--draws", "4", "--out", path_str(dir, out)};
    args.insert(args.end(), extra.begin(), extra.end());
    REQUIRE(run_cli(args).code == 0);
    return oracle::read_file(dir / out);
  };
  const std::string explicit_seed = synth("a.csv", {"--seed", "77"});
  CHECK(explicit_seed != synth("b.csv", {"--seed", "78"}));

  {
    std::ofstream f(dir / "cfg.ini");
    f << "[synth]\nseed=77\n";
  }
  std::vector<std::string> args{"--config", path_str(dir, "cfg.ini"), "synth", "--distance", "120", "--tdl", path_str(dir, "t.json"),
                                "--draws", "4", "--out", path_str(dir, "c.csv")};
  REQUIRE(run_cli(args).code == 0);
  CHECK(oracle::read_file(dir / "c.csv") == explicit_seed);

  ::setenv("TDLFORGE_SEED", "77", 1);
  const std::string from_env = synth("d.csv", {});
  ::unsetenv("TDLFORGE_SEED");
  CHECK(from_env == explicit_seed);
}

TEST_CASE("cli: roundtrip passes and detects merged taps", "[cli][roundtrip]") {
  oracle::TempDir dir("cli_rt");
  save_tdl_json(dir / "ok.json", three_taps());
  const Outcome ok = run_cli({"--json", "roundtrip", "--distance", "120", "--tdl", path_str(dir, "ok.json"), "--seed", "1"});
  CHECK(ok.code == 0);
  const json rep = json::parse(ok.out);
  CHECK(rep["pass"] == true);
  CHECK(rep["recovered_num_taps"] == 3);

  TdlParams merged = three_taps();
  merged.delays_ns << 0.0, 33.3, 399.6;  // adjacent bins cannot both be peaks
  save_tdl_json(dir / "merged.json", merged);
  const Outcome bad = run_cli({"roundtrip", "--distance", "120", "--tdl", path_str(dir, "merged.json"), "--seed", "1"});
  CHECK(bad.code == 3);
  CHECK_THAT(bad.out, Catch::Matchers::ContainsSubstring("FAIL"));
}

TEST_CASE("cli: extract writes per-snapshot parameters and a summary", "[cli][extract]") {
  oracle::TempDir dir("cli_ex");
  save_tdl_json(dir / "t.json", three_taps());
  REQUIRE(run_cli({"synth", "--distance", "120", "--tdl", path_str(dir, "t.json"), "--draws", "30", "--seed", "9", "--out",
                   path_str(dir, "ens.csv")})
              .code == 0);
  const Outcome o = run_cli({"extract", "--pdp", path_str(dir, "ens.csv"), "--out", path_str(dir, "ex")});
  REQUIRE(o.code == 0);
  const json summary = json::parse(oracle::read_file(dir / "ex" / "summary.json"));
  CHECK(summary["n_snapshots"] == 30);
  CHECK(summary["window"] == 9);
  CHECK(summary["n_apdp"] == 22);
  CHECK(summary["n_extracted"].get<int>() + summary["n_failed"].get<int>() == 22);
  const auto recs = load_predictions(dir / "ex" / "tdl.jsonl");
  CHECK(recs.size() == summary["n_extracted"].get<size_t>());
  CHECK(std::filesystem::exists(dir / "ex" / "tdl_000000.json"));

  CHECK(run_cli({"extract", "--pdp", path_str(dir, "missing.csv"), "--out", path_str(dir, "ex2")}).code == 1);
  CHECK(run_cli({"extract", "--pdp", path_str(dir, "ens.csv"), "--out", path_str(dir, "ex3"), "--window", "31"})
            .code == 2);
}

TEST_CASE("cli: eval of a uniform power offset", "[cli][eval]") {
  oracle::TempDir dir("cli_eval");
  std::vector<PredictionRecord> truth, pred;
  for (int i = 0; i < 8; ++i) {
    truth.push_back({i * 0.1, three_taps(-80.0 - i)});
    pred.push_back({i * 0.1 + 0.01, three_taps(-77.0 - i)});
  }
  save_predictions(dir / "truth.jsonl", truth);
  save_predictions(dir / "pred.jsonl", pred);
  const Outcome o = run_cli({"--json", "eval", "--truth", path_str(dir, "truth.jsonl"), "--pred",
                             path_str(dir, "pred.jsonl"), "--out", path_str(dir, "report.json")});
  REQUIRE(o.code == 0);
  const json rep = json::parse(oracle::read_file(dir / "report.json"));
  CHECK_THAT(rep["rmse_path_loss_db"].get<double>(), WithinAbs(3.0, 1e-9));
  CHECK_THAT(rep["rmse_delay_spread_ns"].get<double>(), WithinAbs(0.0, 1e-9));
  CHECK_THAT(rep["rmse_k_factor_db"].get<double>(), WithinAbs(0.0, 1e-12));
  CHECK_THAT(rep["pdp_avg_cosine_similarity"].get<double>(), WithinAbs(1.0, 1e-12));
  CHECK(rep["n_samples"] == 8);
  CHECK(json::parse(o.out)["paired"] == 8);

  CHECK(run_cli({"eval", "--truth", path_str(dir, "truth.jsonl"), "--pred", path_str(dir, "nope.jsonl"), "--out",
                 path_str(dir, "r2.json")})
            .code == 1);

  std::vector<PredictionRecord> sparse{pred[0], pred[1]};
  save_predictions(dir / "sparse.jsonl", sparse);
  CHECK(run_cli({"eval", "--truth", path_str(dir, "truth.jsonl"), "--pred", path_str(dir, "sparse.jsonl"), "--out",
                 path_str(dir, "r3.json")})
            .code == 2);
}

TEST_CASE("cli: geo reports crop geometry", "[cli][geo]") {
  // 100 m east along the equator.
  const double dlon = 100.0 / (6371000.0 * 3.14159265358979323846 / 180.0);
  std::ostringstream rx;
  rx.precision(17);
  rx << "0," << dlon;
  const Outcome o = run_cli({"--json", "geo", "--tx", "0,0", "--rx", rx.str()});
  REQUIRE(o.code == 0);
  const json j = json::parse(o.out);
  CHECK_THAT(j["link"]["distance_m"].get<double>(), WithinAbs(100.0, 1e-6));
  CHECK_THAT(j["link"]["azimuth_deg"].get<double>(), WithinAbs(90.0, 1e-9));
  CHECK(j["global_crop"]["width_m"] == 256.0);
  CHECK(j["local_crop"]["out_width_px"] == 224);

  const Outcome same = run_cli({"geo", "--tx", "1,2", "--rx", "1,2"});
  CHECK(same.code == 0);
  CHECK_THAT(same.err, Catch::Matchers::ContainsSubstring("coincide"));
  CHECK(run_cli({"geo", "--tx", "95,0", "--rx", "0,0"}).code == 2);
}
