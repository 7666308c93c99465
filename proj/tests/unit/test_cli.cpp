// Copyright 2026 The DVD Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dvd/batch.hpp"
#include "dvd/cli.hpp"
#include "dvd/image_io.hpp"
#include "dvd/metrics.hpp"
#include "dvd/pipeline.hpp"
#include "../support/fixtures.hpp"

using namespace dvd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

json read_json(const fs::path& p) {
  std::ifstream is(p);
  return json::parse(is);
}

}  // namespace

TEST_CASE("top-level usage") {
  CHECK(cli({"--help"}).code == kExitOk);
  CHECK(cli({"--version"}).out.find(DVD_VERSION) != std::string::npos);
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"schedule", "--bogus"}).code == kExitUsage);
}

TEST_CASE("schedule export") {
  const Run r = cli({"schedule", "--step", "10"});
  CHECK(r.code == kExitOk);
  CHECK(lines(r.out) == 32);
  CHECK(r.out.rfind("age_months,mar,contrast_sensitivity,chromatic_sensitivity\n0,", 0) == 0);
  CHECK(cli({"schedule", "--step", "-1"}).code == kExitUsage);
  CHECK(cli({"schedule", "--step", "0"}).code == kExitUsage);
  CHECK(cli({"schedule", "--format", "xml"}).code == kExitUsage);

  const Run js = cli({"schedule", "--format", "json"});
  CHECK(js.code == kExitOk);
  CHECK(json::parse(js.out)["schema"] == "dvd.schedule");

  testing::TempDir tmp("cli_sched");
  std::ofstream(tmp.path() / "a.json") << json{{"acuity", {{0, 30}, {6, 15}, {12, 3}, {60, 1}}},
                                               {"contrast", {{0, 0.0}, {60, 0.5}, {120, 1.0}}},
                                               {"chroma", {{0, 0.0}, {30, 0.5}, {60, 1.0}}}}
                                              .dump();
  const Run custom = cli({"schedule", "--anchors", (tmp.path() / "a.json").string(), "--step", "50"});
  CHECK(custom.code == kExitOk);
  CHECK(lines(custom.out) == 8);
  std::ofstream(tmp.path() / "bad.json") << R"({"acuity": [[0, 30], [6, 40], [12, 3]]})";
  CHECK(cli({"schedule", "--anchors", (tmp.path() / "bad.json").string()}).code == kExitFailure);
  CHECK(cli({"schedule", "--anchors", (tmp.path() / "missing.json").string()}).code == kExitFailure);
}

TEST_CASE("process: rearing flag, epoch clock, config precedence, fingerprint parity") {
  testing::TempDir tmp("cli_process");
  testing::write_dataset(tmp.path() / "in", 2, 2, 16, 16);
  const std::string in = (tmp.path() / "in").string();
  const fs::path out = tmp.path() / "out";
  const Run r = cli({"process", "--input", in, "--out", out.string(), "--epoch", "10", "--rearing",
                     "contrast_only", "--workers", "2"});
  CHECK(r.code == kExitOk);
  CHECK(r.err.find("effective config") != std::string::npos);
  const json m = read_json(out / "manifest.json");
  CHECK(m["age_months"] == 20.0);
  CHECK(m["complete"] == true);
  CHECK(m["config"]["enable_acuity"] == false);
  CHECK(m["config"]["enable_contrast"] == true);
  CHECK(m["config"]["enable_chroma"] == false);
  CHECK(m["outputs"].size() == 4);

  // Config file sets alpha 4 and beta; the flag wins for alpha.
  json cfg = {{"alpha", 4}, {"beta", 2e-4}, {"lambda", 50}};
  std::ofstream(tmp.path() / "cfg.json") << cfg.dump();
  const fs::path out2 = tmp.path() / "out2";
  CHECK(cli({"process", "--input", in, "--out", out2.string(), "--epoch", "10", "--config",
             (tmp.path() / "cfg.json").string()})
            .code == kExitOk);
  CHECK(read_json(out2 / "manifest.json")["age_months"] == 40.0);
  const fs::path out3 = tmp.path() / "out3";
  CHECK(cli({"process", "--input", in, "--out", out3.string(), "--epoch", "10", "--config",
             (tmp.path() / "cfg.json").string(), "--alpha", "2"})
            .code == kExitOk);
  const json m3 = read_json(out3 / "manifest.json");
  CHECK(m3["age_months"] == 20.0);
  CHECK(m3["config"]["beta"] == 2e-4);

  cfg["alpha"] = 2;
  CHECK(TransformHandle::from_json(cfg).fingerprint() == m3["transform_fingerprint"].get<std::string>());

  CHECK(cli({"process", "--input", in, "--out", out.string(), "--epoch", "1", "--rearing", "nope"}).code ==
        kExitUsage);
  CHECK(cli({"process", "--input", in, "--out", out.string(), "--epoch", "1", "--lambda", "-3"}).code ==
        kExitUsage);
  CHECK(cli({"process", "--input", in, "--out", out.string(), "--epoch", "1", "--resize", "12by4"}).code ==
        kExitUsage);
  CHECK(cli({"process", "--input", in, "--out", out.string()}).code == kExitUsage);
  CHECK(cli({"process", "--input", (tmp.path() / "none").string(), "--out", out.string(), "--epoch", "1"}).code ==
        kExitFailure);
}

TEST_CASE("process: bad files abort unless skipped") {
  testing::TempDir tmp("cli_skip");
  testing::write_dataset(tmp.path() / "in", 1, 2, 8, 8);
  std::ofstream(tmp.path() / "in" / "class_0" / "bad.jpg") << "not a jpeg";
  const std::string in = (tmp.path() / "in").string();
  const Run fail = cli({"process", "--input", in, "--out", (tmp.path() / "o").string(), "--epoch", "1"});
  CHECK(fail.code == kExitFailure);
  CHECK(fail.err.find("bad.jpg") != std::string::npos);
  const Run ok =
      cli({"process", "--input", in, "--out", (tmp.path() / "o").string(), "--epoch", "1", "--skip-bad"});
  CHECK(ok.code == kExitOk);
  CHECK(read_json(tmp.path() / "o" / "manifest.json")["dataset"]["skipped"].size() == 1);
}

TEST_CASE("corrupt command") {
  testing::TempDir tmp("cli_corrupt");
  testing::write_dataset(tmp.path() / "in", 1, 2, 16, 16);
  const std::string in = (tmp.path() / "in").string();
  const fs::path out = tmp.path() / "out";
  const Run r = cli({"corrupt", "--input", in, "--out", out.string(), "--kind", "snow,pixelate", "--severity",
                     "1,5", "--attack", "l2_gaussian", "--amplitude", "10,100", "--seed", "3"});
  CHECK(r.code == kExitOk);
  const json m = read_json(out / "manifest.json");
  CHECK(m["outputs"].size() == 2 * (4 + 2));
  CHECK(fs::exists(out / "pixelate" / "5" / "class_0" / "img_1.png"));
  CHECK(fs::exists(out / "l2_gaussian" / "100" / "class_0" / "img_0.png"));

  const Run all = cli({"corrupt", "--input", in, "--out", (tmp.path() / "all").string(), "--kind", "all",
                       "--severity", "2"});
  CHECK(all.code == kExitOk);
  CHECK(read_json(tmp.path() / "all" / "manifest.json")["outputs"].size() == 32);

  const Run bad = cli({"corrupt", "--input", in, "--out", out.string(), "--kind", "fog"});
  CHECK(bad.code == kExitUsage);
  CHECK(bad.err.find("icy_window") != std::string::npos);
  CHECK(cli({"corrupt", "--input", in, "--out", out.string(), "--kind", "snow", "--severity", "6"}).code ==
        kExitUsage);
  CHECK(cli({"corrupt", "--input", in, "--out", out.string(), "--attack", "l2_uniform", "--amplitude", "7"})
            .code == kExitUsage);
  CHECK(cli({"corrupt", "--input", in, "--out", out.string()}).code == kExitUsage);
}

TEST_CASE("score command") {
  testing::TempDir tmp("cli_score");
  {
    std::ofstream f(tmp.path() / "cue.csv");
    f << kPredictionHeader << '\n';
    for (int i = 0; i < 9; ++i) f << "s" << i << ",cat,cat,dog,,,\n";
    for (int i = 0; i < 3; ++i) f << "t" << i << ",dog,cat,dog,,,\n";
  }
  const Run r = cli({"score", "--predictions", (tmp.path() / "cue.csv").string()});
  CHECK(r.code == kExitOk);
  const json doc = json::parse(r.out);
  CHECK(doc["schema"] == "dvd.metrics");
  CHECK(doc["shape_bias"]["overall_median"] == 0.75);
  CHECK_FALSE(doc.contains("shape_scene_recall"));

  const fs::path out = tmp.path() / "res";
  CHECK(cli({"score", "--predictions", (tmp.path() / "cue.csv").string(), "--out", out.string()}).code ==
        kExitOk);
  CHECK(fs::exists(out / "shape_bias.csv"));
  CHECK(fs::exists(out / "robustness.csv"));
  CHECK(fs::exists(out / "metrics.json"));

  {
    std::ofstream f(tmp.path() / "bad.csv");
    f << kPredictionHeader << "\na,cat,cat,dog,,,\nb,cat\n";
  }
  const Run bad = cli({"score", "--predictions", (tmp.path() / "bad.csv").string()});
  CHECK(bad.code == kExitFailure);
  CHECK(bad.err.find("line 3") != std::string::npos);
  CHECK(cli({"score", "--predictions", (tmp.path() / "none.csv").string()}).code == kExitFailure);
  CHECK(cli({"score", "--predictions", (tmp.path() / "cue.csv").string(), "--metric", "recall"}).code ==
        kExitFailure);
}

TEST_CASE("preview command") {
  testing::TempDir tmp("cli_preview");
  write_png(tmp.path() / "dog.png", testing::synthetic_image(1, 24, 24));
  const Run r = cli({"preview", "--image", (tmp.path() / "dog.png").string(), "--ages", "0,12.5,300", "--out",
                     (tmp.path() / "frames").string()});
  CHECK(r.code == kExitOk);
  CHECK(lines(r.out) == 3);
  CHECK(fs::exists(tmp.path() / "frames" / "dog_age12.5.png"));
  CHECK(cli({"preview", "--image", (tmp.path() / "dog.png").string(), "--ages", "400"}).code == kExitUsage);
}
