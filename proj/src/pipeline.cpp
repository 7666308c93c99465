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

#include "dvd/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <thread>

#include "dvd/hashing.hpp"
#include "dvd/image_io.hpp"
#include "dvd/spectral.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace dvd {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

// Results land in slot i regardless of which thread ran task i, so the
// output never depends on scheduling.
void run_pool(std::size_t n, int workers, const std::function<void(std::size_t)>& task,
              const std::function<void(std::size_t, std::size_t)>& progress) {
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      task(i);
      const std::size_t d = done.fetch_add(1) + 1;
      if (progress) progress(d, n);
    }
  };
  const int count = std::max(1, std::min<int>(workers, static_cast<int>(std::max<std::size_t>(n, 1))));
  if (count == 1) {
    worker();
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
}

std::string output_stem(const IndexEntry& e) { return fs::path(e.path).stem().string(); }

void check_unique_outputs(const DatasetIndex& idx) {
  std::set<std::string> seen;
  for (const auto& e : idx.entries) {
    const std::string key = e.class_label + "/" + output_stem(e);
    if (!seen.insert(key).second) {
      throw PipelineError("two inputs map to the same output " + key + ".png");
    }
  }
}

Image load_for_run(const IndexEntry& e, const RunOptions& options) {
  Image img = read_image(e.path);
  if (options.resize) img = resize_area(img, (*options.resize)[0], (*options.resize)[1]);
  return img;
}

std::string write_png_checksummed(const fs::path& path, const Image& img) {
  const auto bytes = encode_png(img);
  write_file(path, bytes);
  return sha256_hex(bytes);
}

RunManifest base_manifest(const DatasetIndex& idx, std::string command) {
  RunManifest m;
  m.command = std::move(command);
  m.dft_convention = kDftConvention;
  m.corruption_version = CorruptionTable::builtin().version();
  m.dataset_images = idx.entries.size();
  m.class_histogram = idx.class_histogram();
  m.skipped = idx.skipped;
  return m;
}

void finish_manifest(RunManifest& m, std::vector<ManifestRecord>& records,
                     const std::vector<std::string>& errors, const fs::path& out) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (errors[i].empty()) {
      m.records.push_back(std::move(records[i]));
    } else {
      m.errors.push_back(errors[i]);
    }
  }
  m.complete = m.errors.empty();
  if (m.timings.wall_s > 0.0) m.timings.images_per_second = m.records.size() / m.timings.wall_s;
  m.write(out / "manifest.json");
}

std::string fmt_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------- ingest

std::map<std::string, std::size_t> DatasetIndex::class_histogram() const {
  std::map<std::string, std::size_t> h;
  for (const auto& e : entries) ++h[e.class_label];
  return h;
}

void DatasetIndex::write_csv(std::ostream& os) const {
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  os << "image_id,path,class_label\n";
  for (const auto& e : entries) {
    os << field(e.image_id) << ',' << field(e.path) << ',' << field(e.class_label) << '\n';
  }
}

DatasetIndex ingest(const fs::path& root, const IngestOptions& options) {
  if (!fs::is_directory(root)) throw PipelineError("dataset root is not a directory: " + root.string());
  DatasetIndex idx;
  idx.root = root;
  std::vector<fs::path> classes;
  for (const auto& d : fs::directory_iterator(root)) {
    const std::string name = d.path().filename().string();
    if (name.empty() || name[0] == '.') continue;
    if (d.is_directory()) {
      classes.push_back(d.path());
    } else {
      idx.warnings.push_back("ignoring file outside a class directory: " + d.path().string());
    }
  }
  std::sort(classes.begin(), classes.end());
  std::vector<SkipRecord> bad;
  for (const auto& cls : classes) {
    const std::string label = cls.filename().string();
    for (const auto& f : fs::directory_iterator(cls)) {
      const std::string name = f.path().filename().string();
      if (name.empty() || name[0] == '.' || !f.is_regular_file()) continue;
      if (!is_image_file(f.path())) {
        idx.warnings.push_back("ignoring non-image file: " + f.path().string());
        continue;
      }
      try {
        (void)read_image(f.path());
        idx.entries.push_back({label + "/" + name, f.path().string(), label});
      } catch (const std::exception& e) {
        bad.push_back({f.path().string(), e.what()});
      }
    }
  }
  std::sort(idx.entries.begin(), idx.entries.end(),
            [](const IndexEntry& a, const IndexEntry& b) { return a.image_id < b.image_id; });
  std::sort(bad.begin(), bad.end(), [](const SkipRecord& a, const SkipRecord& b) { return a.path < b.path; });
  if (!bad.empty() && !options.skip_bad) {
    std::string msg = std::to_string(bad.size()) + " unreadable image(s):";
    for (const auto& b : bad) msg += "\n  " + b.path + ": " + b.reason;
    throw IngestError(msg, std::move(bad));
  }
  idx.skipped = std::move(bad);
  if (idx.entries.empty()) idx.warnings.push_back("dataset is empty: " + root.string());
  return idx;
}

// ---------------------------------------------------------------- manifest

json RunManifest::to_json() const {
  json outputs = json::array();
  for (const auto& r : records) {
    json o{{"image_id", r.image_id}, {"class_label", r.class_label}, {"path", r.output}, {"sha256", r.sha256}};
    if (!r.kind.empty()) {
      o["kind"] = r.kind;
      o["seed"] = r.seed;
      if (r.severity > 0) o["severity"] = r.severity;
      if (r.amplitude > 0.0) o["amplitude"] = r.amplitude;
    }
    outputs.push_back(std::move(o));
  }
  json skips = json::array();
  for (const auto& s : skipped) skips.push_back({{"path", s.path}, {"reason", s.reason}});
  json doc{{"schema", "dvd.manifest"},
           {"schema_version", kManifestSchemaVersion},
           {"tool_version", tool_version},
           {"command", command},
           {"complete", complete},
           {"config", config},
           {"schedule_fingerprint", schedule_fingerprint},
           {"transform_fingerprint", transform_fingerprint},
           {"transform_order", transform_order},
           {"dft_convention", dft_convention},
           {"corruption_version", corruption_version},
           {"dataset", {{"images", dataset_images}, {"classes", class_histogram}, {"skipped", skips}}},
           {"outputs", outputs},
           {"errors", errors},
           {"timings",
            {{"decode_s", timings.decode_s},
             {"transform_s", timings.transform_s},
             {"encode_s", timings.encode_s},
             {"wall_s", timings.wall_s},
             {"images_per_second", timings.images_per_second}}}};
  if (epoch) doc["epoch"] = *epoch;
  if (age_months) doc["age_months"] = *age_months;
  return doc;
}

RunManifest RunManifest::from_json(const json& doc) {
  RunManifest m;
  try {
    if (doc.at("schema").get<std::string>() != "dvd.manifest") throw PipelineError("not a dvd manifest");
    const int version = doc.at("schema_version").get<int>();
    if (version != kManifestSchemaVersion) {
      throw PipelineError("unsupported manifest schema_version " + std::to_string(version));
    }
    m.tool_version = doc.at("tool_version").get<std::string>();
    m.command = doc.at("command").get<std::string>();
    m.complete = doc.at("complete").get<bool>();
    m.config = doc.at("config");
    m.schedule_fingerprint = doc.value("schedule_fingerprint", "");
    m.transform_fingerprint = doc.value("transform_fingerprint", "");
    m.transform_order = doc.at("transform_order").get<std::vector<std::string>>();
    m.dft_convention = doc.at("dft_convention").get<std::string>();
    m.corruption_version = doc.at("corruption_version").get<std::string>();
    if (doc.contains("epoch")) m.epoch = doc["epoch"].get<std::int64_t>();
    if (doc.contains("age_months")) m.age_months = doc["age_months"].get<double>();
    const auto& ds = doc.at("dataset");
    m.dataset_images = ds.at("images").get<std::size_t>();
    m.class_histogram = ds.at("classes").get<std::map<std::string, std::size_t>>();
    for (const auto& s : ds.at("skipped")) m.skipped.push_back({s.at("path"), s.at("reason")});
    for (const auto& o : doc.at("outputs")) {
      ManifestRecord r;
      r.image_id = o.at("image_id").get<std::string>();
      r.class_label = o.at("class_label").get<std::string>();
      r.output = o.at("path").get<std::string>();
      r.sha256 = o.at("sha256").get<std::string>();
      r.kind = o.value("kind", "");
      r.severity = o.value("severity", 0);
      r.amplitude = o.value("amplitude", 0.0);
      r.seed = o.value("seed", std::uint64_t{0});
      m.records.push_back(std::move(r));
    }
    m.errors = doc.at("errors").get<std::vector<std::string>>();
    const auto& t = doc.at("timings");
    m.timings = {t.at("decode_s"), t.at("transform_s"), t.at("encode_s"), t.at("wall_s"),
                 t.at("images_per_second")};
  } catch (const json::exception& e) {
    throw PipelineError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void RunManifest::write(const fs::path& path) const {
  std::ofstream os(path);
  if (!os) throw PipelineError("cannot write manifest " + path.string());
  os << to_json().dump(2) << '\n';
  if (!os) throw PipelineError("failed writing manifest " + path.string());
}

std::map<std::string, std::string> RunManifest::checksums() const {
  std::map<std::string, std::string> m;
  for (const auto& r : records) m[r.output] = r.sha256;
  return m;
}

std::string transform_fingerprint(const DvdConfig& cfg, const ScheduleSet& s) {
  json doc = cfg.to_json();
  doc.erase("seed");
  const json key{{"config", doc},
                 {"schedule_fingerprint", s.fingerprint()},
                 {"dft_convention", kDftConvention},
                 {"tool_version", DVD_VERSION}};
  return sha256_hex(key.dump());
}

// ---------------------------------------------------------------- runs

RunManifest process_epoch(const DatasetIndex& idx, std::int64_t epoch, const DvdConfig& cfg,
                          const ScheduleSet& s, const fs::path& out, const RunOptions& options) {
  cfg.validate();
  const AgeMonths age = epoch_to_age(EpochClock{cfg.alpha}, epoch);
  check_unique_outputs(idx);

  RunManifest m = base_manifest(idx, "process");
  m.config = cfg.to_json();
  m.schedule_fingerprint = s.fingerprint();
  m.transform_fingerprint = transform_fingerprint(cfg, s);
  for (Stage st : cfg.order) m.transform_order.emplace_back(to_string(st));
  m.epoch = epoch;
  m.age_months = age.months();

  fs::create_directories(out);
  for (const auto& [label, count] : m.class_histogram) fs::create_directories(out / label);
  {
    std::ofstream os(out / "index.csv");
    idx.write_csv(os);
  }

  const std::size_t n = idx.entries.size();
  std::vector<ManifestRecord> records(n);
  std::vector<std::string> errors(n);
  std::vector<std::array<double, 3>> stage_s(n, {0.0, 0.0, 0.0});
  const auto wall0 = Clock::now();
  run_pool(
      n, options.workers,
      [&](std::size_t i) {
        const IndexEntry& e = idx.entries[i];
        try {
          auto t0 = Clock::now();
          const Image img = load_for_run(e, options);
          stage_s[i][0] = seconds_since(t0);
          t0 = Clock::now();
          const Image result = dvd_transform(img, age, cfg, s, Exec::serial);
          stage_s[i][1] = seconds_since(t0);
          t0 = Clock::now();
          const std::string rel = e.class_label + "/" + output_stem(e) + ".png";
          ManifestRecord& r = records[i];
          r.image_id = e.image_id;
          r.class_label = e.class_label;
          r.output = rel;
          r.sha256 = write_png_checksummed(out / rel, result);
          stage_s[i][2] = seconds_since(t0);
        } catch (const std::exception& ex) {
          errors[i] = e.image_id + ": " + ex.what();
        }
      },
      options.progress);
  m.timings.wall_s = seconds_since(wall0);
  for (const auto& t : stage_s) {
    m.timings.decode_s += t[0];
    m.timings.transform_s += t[1];
    m.timings.encode_s += t[2];
  }
  finish_manifest(m, records, errors, out);
  return m;
}

RunManifest corrupt_dataset(const DatasetIndex& idx, const std::vector<DegradationJob>& jobs,
                            std::uint64_t seed, const fs::path& out, const RunOptions& options) {
  if (jobs.empty()) throw PipelineError("no corruption jobs given");
  const CorruptionTable& table = CorruptionTable::builtin();
  for (const auto& job : jobs) {
    if (const auto* c = std::get_if<CorruptionSpec>(&job)) {
      c->validate();
    } else {
      table.validate(std::get<NoiseAttackSpec>(job));
    }
  }
  check_unique_outputs(idx);

  RunManifest m = base_manifest(idx, "corrupt");
  json job_list = json::array();
  for (const auto& job : jobs) {
    if (const auto* c = std::get_if<CorruptionSpec>(&job)) {
      job_list.push_back({{"kind", to_string(c->kind)}, {"severity", c->severity}});
    } else {
      const auto& a = std::get<NoiseAttackSpec>(job);
      job_list.push_back({{"attack", to_string(a.kind)}, {"amplitude", a.amplitude}, {"seed", a.seed}});
    }
  }
  m.config = {{"seed", seed}, {"jobs", job_list}};
  if (options.resize) m.config["resize"] = *options.resize;

  // Directory names per job.
  std::vector<fs::path> job_dirs;
  for (const auto& job : jobs) {
    if (const auto* c = std::get_if<CorruptionSpec>(&job)) {
      job_dirs.push_back(fs::path(std::string(to_string(c->kind))) / std::to_string(c->severity));
    } else {
      const auto& a = std::get<NoiseAttackSpec>(job);
      job_dirs.push_back(fs::path(std::string(to_string(a.kind))) / fmt_number(a.amplitude));
    }
  }
  fs::create_directories(out);
  for (const auto& dir : job_dirs) {
    for (const auto& [label, count] : m.class_histogram) fs::create_directories(out / dir / label);
  }
  {
    std::ofstream os(out / "index.csv");
    idx.write_csv(os);
  }

  const std::size_t n = idx.entries.size();
  const std::size_t per = jobs.size();
  std::vector<ManifestRecord> records(n * per);
  std::vector<std::string> errors(n * per);
  std::vector<std::array<double, 3>> stage_s(n, {0.0, 0.0, 0.0});
  const auto wall0 = Clock::now();
  run_pool(
      n, options.workers,
      [&](std::size_t i) {
        const IndexEntry& e = idx.entries[i];
        Image img;
        try {
          const auto t0 = Clock::now();
          img = load_for_run(e, options);
          stage_s[i][0] = seconds_since(t0);
        } catch (const std::exception& ex) {
          for (std::size_t j = 0; j < per; ++j) errors[i * per + j] = e.image_id + ": " + ex.what();
          return;
        }
        for (std::size_t j = 0; j < per; ++j) {
          const std::size_t slot = i * per + j;
          try {
            auto t0 = Clock::now();
            ManifestRecord r;
            r.image_id = e.image_id;
            r.class_label = e.class_label;
            Image result;
            if (const auto* c = std::get_if<CorruptionSpec>(&jobs[j])) {
              r.kind = std::string(to_string(c->kind));
              r.severity = c->severity;
              r.seed = derive_corruption_seed(seed, e.image_id, r.kind);
              result = corrupt(img, *c, r.seed, table);
            } else {
              NoiseAttackSpec a = std::get<NoiseAttackSpec>(jobs[j]);
              r.kind = std::string(to_string(a.kind));
              r.amplitude = a.amplitude;
              r.seed = derive_corruption_seed(a.seed, e.image_id, r.kind);
              a.seed = r.seed;
              result = perturb(img, a, table);
            }
            stage_s[i][1] += seconds_since(t0);
            t0 = Clock::now();
            r.output = (job_dirs[j] / e.class_label / (output_stem(e) + ".png")).generic_string();
            r.sha256 = write_png_checksummed(out / r.output, result);
            stage_s[i][2] += seconds_since(t0);
            records[slot] = std::move(r);
          } catch (const std::exception& ex) {
            errors[slot] = e.image_id + " [" + job_dirs[j].generic_string() + "]: " + ex.what();
          }
        }
      },
      options.progress);
  m.timings.wall_s = seconds_since(wall0);
  for (const auto& t : stage_s) {
    m.timings.decode_s += t[0];
    m.timings.transform_s += t[1];
    m.timings.encode_s += t[2];
  }
  finish_manifest(m, records, errors, out);
  return m;
}

// ---------------------------------------------------------------- preview

std::vector<PreviewFrame> preview(const Image& img, const std::vector<AgeMonths>& ages,
                                  const DvdConfig& cfg, const ScheduleSet& s) {
  if (ages.empty()) throw PipelineError("preview needs at least one age");
  std::vector<PreviewFrame> frames;
  frames.reserve(ages.size());
  for (const AgeMonths& a : ages) frames.push_back({a, dvd_transform(img, a, cfg, s)});
  return frames;
}

std::vector<fs::path> write_preview(const std::vector<PreviewFrame>& frames, const fs::path& out,
                                    const std::string& stem) {
  fs::create_directories(out);
  std::vector<fs::path> paths;
  for (const auto& f : frames) {
    paths.push_back(out / (stem + "_age" + fmt_number(f.age.months()) + ".png"));
    write_png(paths.back(), f.image);
  }
  return paths;
}

double colorfulness(const Image& img) {
  require_valid(img, "colorfulness");
  double total = 0.0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double r = img.at(0, y, x), g = img.at(1, y, x), b = img.at(2, y, x);
      const double mean = (r + g + b) / 3.0;
      total += ((r - mean) * (r - mean) + (g - mean) * (g - mean) + (b - mean) * (b - mean)) / 3.0;
    }
  }
  return total / static_cast<double>(img.plane_size());
}

}  // namespace dvd
