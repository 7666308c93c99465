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

// Dataset ingestion, per-epoch materialisation, corruption sweeps and run
// manifests.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dvd/degradations.hpp"
#include "dvd/image.hpp"
#include "dvd/schedules.hpp"
#include "dvd/transforms.hpp"

namespace dvd {

inline constexpr int kManifestSchemaVersion = 1;

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IndexEntry {
  std::string image_id;  ///< "<class>/<file name>"
  std::string path;
  std::string class_label;
};

struct SkipRecord {
  std::string path;
  std::string reason;
};

struct DatasetIndex {
  std::filesystem::path root;
  std::vector<IndexEntry> entries;  ///< sorted by image_id
  std::vector<SkipRecord> skipped;
  std::vector<std::string> warnings;

  std::map<std::string, std::size_t> class_histogram() const;
  /// CSV `image_id,path,class_label`.
  void write_csv(std::ostream& os) const;
};

/// Thrown by ingest when files fail to decode and skip_bad is off.
class IngestError : public PipelineError {
 public:
  IngestError(const std::string& what, std::vector<SkipRecord> bad)
      : PipelineError(what), bad_(std::move(bad)) {}
  const std::vector<SkipRecord>& bad_files() const { return bad_; }

 private:
  std::vector<SkipRecord> bad_;
};

struct IngestOptions {
  bool skip_bad = false;
};

/// Reads a root/<class>/<image> tree. Every .png/.jpg/.jpeg file is fully
/// decoded once to validate it.
DatasetIndex ingest(const std::filesystem::path& root, const IngestOptions& options = {});

struct RunOptions {
  int workers = 1;
  /// Optional (width, height) applied before any transform.
  std::optional<std::array<int, 2>> resize;
  /// Called from worker threads after each image; must be thread-safe.
  std::function<void(std::size_t done, std::size_t total)> progress;
};

struct ManifestRecord {
  std::string image_id;
  std::string class_label;
  std::string output;  ///< relative to the output root
  std::string sha256;
  std::string kind;    ///< corruption or attack name; empty for process
  int severity = 0;    ///< 1..5 for corruptions
  double amplitude = 0.0;
  std::uint64_t seed = 0;  ///< derived per-image seed

  bool operator==(const ManifestRecord&) const = default;
};

struct StageTimings {
  double decode_s = 0.0;
  double transform_s = 0.0;
  double encode_s = 0.0;
  double wall_s = 0.0;
  double images_per_second = 0.0;
};

struct RunManifest {
  std::string command;
  std::string tool_version = DVD_VERSION;
  nlohmann::json config;
  std::string schedule_fingerprint;
  std::string transform_fingerprint;
  std::vector<std::string> transform_order;
  std::string dft_convention;
  std::string corruption_version;
  std::optional<std::int64_t> epoch;
  std::optional<double> age_months;
  std::size_t dataset_images = 0;
  std::map<std::string, std::size_t> class_histogram;
  std::vector<SkipRecord> skipped;
  std::vector<ManifestRecord> records;
  std::vector<std::string> errors;
  bool complete = false;
  StageTimings timings;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& doc);
  void write(const std::filesystem::path& path) const;

  /// Output path -> sha256, for comparing runs.
  std::map<std::string, std::string> checksums() const;
};

/// Identifies everything that determines dvd_transform output: the config
/// (seed excluded, transforms are not random), the schedule fingerprint, the
/// DFT convention and the tool version.
std::string transform_fingerprint(const DvdConfig& cfg, const ScheduleSet& s);

/// Transforms every image at the epoch's age and writes out/<class>/<stem>.png
/// plus out/manifest.json and out/index.csv. Per-image failures are recorded
/// and leave the manifest marked incomplete.
RunManifest process_epoch(const DatasetIndex& idx, std::int64_t epoch, const DvdConfig& cfg,
                          const ScheduleSet& s, const std::filesystem::path& out,
                          const RunOptions& options = {});

using DegradationJob = std::variant<CorruptionSpec, NoiseAttackSpec>;

/// Writes out/<kind>/<severity>/<class>/<stem>.png for corruptions and
/// out/<attack>/<amplitude>/<class>/<stem>.png for attacks. Per-image seeds
/// are derived from (seed, image_id, kind); an attack's own seed field is
/// used in place of `seed`.
RunManifest corrupt_dataset(const DatasetIndex& idx, const std::vector<DegradationJob>& jobs,
                            std::uint64_t seed, const std::filesystem::path& out,
                            const RunOptions& options = {});

struct PreviewFrame {
  AgeMonths age;
  Image image;
};

std::vector<PreviewFrame> preview(const Image& img, const std::vector<AgeMonths>& ages,
                                  const DvdConfig& cfg, const ScheduleSet& s);

/// Writes <out>/<stem>_age<months>.png per frame and returns the paths.
std::vector<std::filesystem::path> write_preview(const std::vector<PreviewFrame>& frames,
                                                 const std::filesystem::path& out,
                                                 const std::string& stem);

/// Mean over pixels of the per-pixel variance across the three channels.
double colorfulness(const Image& img);

}  // namespace dvd
