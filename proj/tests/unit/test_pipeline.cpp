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

#include <fstream>
#include <sstream>

#include "dvd/image_io.hpp"
#include "dvd/pipeline.hpp"
#include "../support/fixtures.hpp"

using namespace dvd;
namespace fs = std::filesystem;
using testing::TempDir;

namespace {

void write_text(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << s;
}

}  // namespace

TEST_CASE("ingest: empty root warns") {
  TempDir tmp("ingest_empty");
  const DatasetIndex idx = ingest(tmp.path());
  CHECK(idx.entries.empty());
  REQUIRE(idx.warnings.size() == 1);
  CHECK(idx.warnings[0].find("empty") != std::string::npos);
  CHECK_THROWS_AS(ingest(tmp.path() / "nope"), PipelineError);
}

TEST_CASE("ingest: three classes of two, sorted, histogram, index CSV") {
  TempDir tmp("ingest_3x2");
  testing::write_dataset(tmp.path(), 3, 2, 8, 8);
  write_text(tmp.path() / "class_1" / "notes.txt", "x");
  write_text(tmp.path() / "README", "x");
  const DatasetIndex idx = ingest(tmp.path());
  REQUIRE(idx.entries.size() == 6);
  CHECK(idx.class_histogram() == std::map<std::string, std::size_t>{{"class_0", 2}, {"class_1", 2}, {"class_2", 2}});
  CHECK(idx.entries[0].image_id == "class_0/img_0.png");
  CHECK(idx.entries[5].image_id == "class_2/img_1.png");
  CHECK(idx.warnings.size() == 2);
  std::ostringstream os;
  idx.write_csv(os);
  CHECK(os.str().rfind("image_id,path,class_label\nclass_0/img_0.png,", 0) == 0);
}

TEST_CASE("ingest: corrupt file aborts unless skipped") {
  TempDir tmp("ingest_bad");
  testing::write_dataset(tmp.path(), 2, 2, 8, 8);
  write_text(tmp.path() / "class_0" / "broken.png", "this is not a png");
  try {
    ingest(tmp.path());
    FAIL("expected IngestError");
  } catch (const IngestError& e) {
    REQUIRE(e.bad_files().size() == 1);
    CHECK(e.bad_files()[0].path.find("broken.png") != std::string::npos);
  }
  const DatasetIndex idx = ingest(tmp.path(), {true});
  CHECK(idx.entries.size() == 4);
  CHECK(idx.skipped.size() == 1);
}

TEST_CASE("process: outputs, manifest fields and round trip") {
  TempDir tmp("process");
  testing::write_dataset(tmp.path() / "in", 2, 3, 24, 16);
  const DatasetIndex idx = ingest(tmp.path() / "in");
  DvdConfig cfg;
  cfg.seed = 5;
  std::size_t calls = 0;
  RunOptions opts;
  opts.workers = 3;
  opts.progress = [&](std::size_t, std::size_t) { ++calls; };
  const RunManifest m = process_epoch(idx, 10, cfg, ScheduleSet::defaults(), tmp.path() / "out", opts);
  CHECK(m.complete);
  CHECK(calls == 6);
  CHECK(*m.age_months == 20.0);
  CHECK(*m.epoch == 10);
  CHECK(m.records.size() == 6);
  CHECK(m.transform_order == std::vector<std::string>{"acuity", "contrast", "chroma"});
  CHECK(m.transform_fingerprint == transform_fingerprint(cfg, ScheduleSet::defaults()));
  CHECK(fs::exists(tmp.path() / "out" / "index.csv"));
  CHECK(fs::exists(tmp.path() / "out" / "class_1" / "img_2.png"));

  // Output bytes match the recorded checksum and the in-memory transform.
  const auto& r = m.records.front();
  const Image src = read_image(idx.entries.front().path);
  const Image expect = dvd_transform(src, AgeMonths(20), cfg, ScheduleSet::defaults(), Exec::serial);
  CHECK(read_file(tmp.path() / "out" / r.output) == encode_png(expect));

  std::ifstream is(tmp.path() / "out" / "manifest.json");
  const RunManifest back = RunManifest::from_json(nlohmann::json::parse(is));
  CHECK(back.records == m.records);
  CHECK(back.transform_fingerprint == m.transform_fingerprint);
  CHECK(back.config == m.config);
  CHECK(back.checksums() == m.checksums());
}

TEST_CASE("process: resize, seed-independent fingerprint") {
  TempDir tmp("process_resize");
  testing::write_dataset(tmp.path() / "in", 1, 2, 40, 30);
  const DatasetIndex idx = ingest(tmp.path() / "in");
  RunOptions opts;
  opts.resize = std::array<int, 2>{20, 10};
  DvdConfig a, b;
  b.seed = 99;
  const RunManifest ma = process_epoch(idx, 3, a, ScheduleSet::defaults(), tmp.path() / "a", opts);
  const RunManifest mb = process_epoch(idx, 3, b, ScheduleSet::defaults(), tmp.path() / "b", opts);
  CHECK(ma.transform_fingerprint == mb.transform_fingerprint);
  CHECK(ma.checksums() == mb.checksums());
  const Image out = read_image(tmp.path() / "a" / ma.records[0].output);
  CHECK(out.width() == 20);
  CHECK(out.height() == 10);
  DvdConfig c;
  c.beta = 2e-4;
  CHECK(transform_fingerprint(c, ScheduleSet::defaults()) != ma.transform_fingerprint);
}

TEST_CASE("process: a file vanishing mid-run marks the manifest incomplete") {
  TempDir tmp("process_incomplete");
  testing::write_dataset(tmp.path() / "in", 1, 3, 8, 8);
  const DatasetIndex idx = ingest(tmp.path() / "in");
  fs::remove(idx.entries[1].path);
  const RunManifest m = process_epoch(idx, 1, DvdConfig{}, ScheduleSet::defaults(), tmp.path() / "out");
  CHECK_FALSE(m.complete);
  CHECK(m.records.size() == 2);
  REQUIRE(m.errors.size() == 1);
  CHECK(m.errors[0].find("img_1.png") != std::string::npos);
  std::ifstream is(tmp.path() / "out" / "manifest.json");
  CHECK_FALSE(nlohmann::json::parse(is).at("complete").get<bool>());
}

TEST_CASE("corrupt: layout, seeds and per-record metadata") {
  TempDir tmp("corrupt");
  testing::write_dataset(tmp.path() / "in", 2, 2, 16, 16);
  const DatasetIndex idx = ingest(tmp.path() / "in");
  const std::vector<DegradationJob> jobs = {CorruptionSpec{CorruptionKind::snow, 2},
                                            NoiseAttackSpec{AttackKind::l2_uniform, 20, 7}};
  const RunManifest m = corrupt_dataset(idx, jobs, 31, tmp.path() / "out");
  CHECK(m.complete);
  REQUIRE(m.records.size() == 8);
  const auto& c = m.records[0];
  CHECK(c.output == "snow/2/class_0/img_0.png");
  CHECK(c.severity == 2);
  CHECK(c.seed == derive_corruption_seed(31, "class_0/img_0.png", "snow"));
  const auto& a = m.records[1];
  CHECK(a.output == "l2_uniform/20/class_0/img_0.png");
  CHECK(a.amplitude == 20.0);
  CHECK(a.seed == derive_corruption_seed(7, "class_0/img_0.png", "l2_uniform"));
  const Image src = read_image(idx.entries[0].path);
  CHECK(read_file(tmp.path() / "out" / c.output) == encode_png(corrupt(src, {CorruptionKind::snow, 2}, c.seed)));

  CHECK_THROWS_AS(corrupt_dataset(idx, {}, 1, tmp.path() / "x"), PipelineError);
  CHECK_THROWS_AS(corrupt_dataset(idx, {CorruptionSpec{CorruptionKind::rain, 9}}, 1, tmp.path() / "x"),
                  CorruptionError);
}

TEST_CASE("duplicate output stems are rejected") {
  TempDir tmp("dupes");
  testing::write_dataset(tmp.path(), 1, 1, 8, 8);
  fs::copy_file(tmp.path() / "class_0" / "img_0.png", tmp.path() / "class_0" / "img_0.PNG");
  const DatasetIndex idx = ingest(tmp.path());
  CHECK_THROWS_AS(process_epoch(idx, 1, DvdConfig{}, ScheduleSet::defaults(), tmp.path() / "o"), PipelineError);
}

TEST_CASE("preview frames and colorfulness grow with age") {
  TempDir tmp("preview");
  const Image img = testing::synthetic_image(3, 48, 48);
  const std::vector<AgeMonths> ages = {AgeMonths(0), AgeMonths(24), AgeMonths(300)};
  const auto frames = preview(img, ages, DvdConfig{}, ScheduleSet::defaults());
  REQUIRE(frames.size() == 3);
  CHECK(colorfulness(frames[0].image) < 1e-20);
  CHECK(colorfulness(frames[1].image) < colorfulness(frames[2].image));
  const auto paths = write_preview(frames, tmp.path(), "cat");
  CHECK(paths[1].filename() == "cat_age24.png");
  CHECK(fs::exists(paths[2]));
  CHECK_THROWS_AS(preview(img, {}, DvdConfig{}, ScheduleSet::defaults()), PipelineError);
}

TEST_CASE("manifest parser rejects foreign documents") {
  CHECK_THROWS_AS(RunManifest::from_json({{"schema", "other"}}), PipelineError);
  RunManifest m;
  nlohmann::json doc = m.to_json();
  doc["schema_version"] = 2;
  CHECK_THROWS_AS(RunManifest::from_json(doc), PipelineError);
}
