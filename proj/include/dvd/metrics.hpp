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

// Behavioural metrics over prediction logs: shape bias on cue-conflict
// stimuli, shape/scene recall, and accuracy-vs-severity curves.

#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace dvd {

inline constexpr int kMetricsSchemaVersion = 1;
inline constexpr const char* kPredictionHeader =
    "image_id,predicted_class,shape_label,texture_label,scene_label,severity,condition";

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A malformed prediction log; line() is 1-based and counts the header.
class CsvError : public MetricsError {
 public:
  CsvError(std::size_t line, const std::string& msg)
      : MetricsError("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct PredictionRecord {
  std::string image_id;
  std::string predicted_class;
  std::string shape_label;
  std::string texture_label;  ///< cue-conflict runs
  std::string scene_label;    ///< scene-embedded shape runs
  std::optional<int> severity;
  std::string condition;
};

std::vector<PredictionRecord> parse_predictions(std::istream& is);
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
void write_predictions(std::ostream& os, const std::vector<PredictionRecord>& records);

// ---------------------------------------------------------------- shape bias

struct CategoryBias {
  std::string category;
  std::size_t n_shape = 0;
  std::size_t n_texture = 0;
  std::size_t n_neither = 0;
  std::size_t n_records = 0;
  /// N_shape / (N_shape + N_texture); empty when no prediction matched a cue.
  std::optional<double> bias;
};

struct ShapeBiasResult {
  std::vector<CategoryBias> per_category;  ///< sorted by category
  double median = 0.0;                     ///< the headline aggregate
  double mean = 0.0;                       ///< for comparison only
  std::size_t defined_categories = 0;
  /// Records whose shape and texture labels coincide; not cue-conflict
  /// stimuli, so left out of every count above.
  std::size_t excluded_same_label = 0;
};

/// Groups by shape_label. Throws MetricsError on empty input, records with no
/// texture label, or when no category has a cue-matching prediction.
ShapeBiasResult shape_bias(const std::vector<PredictionRecord>& records);

/// The 16 cue-conflict categories shipped in data/.
std::vector<std::string> cue_conflict_categories();

// ---------------------------------------------------------------- recall

/// Superclass name -> member classifier labels, for the shape and the scene
/// taxonomy.
class SuperclassMap {
 public:
  SuperclassMap(std::map<std::string, std::vector<std::string>> shape,
                std::map<std::string, std::vector<std::string>> scene);

  static const SuperclassMap& builtin();
  static SuperclassMap from_json(const nlohmann::json& doc);

  std::optional<std::string> shape_superclass(const std::string& label) const;
  std::optional<std::string> scene_superclass(const std::string& label) const;
  std::size_t shape_count() const { return shape_.size(); }
  std::size_t scene_count() const { return scene_.size(); }

 private:
  std::map<std::string, std::vector<std::string>> shape_;
  std::map<std::string, std::vector<std::string>> scene_;
  std::map<std::string, std::string> shape_of_;
  std::map<std::string, std::string> scene_of_;
};

struct RecallResult {
  double shape_recall = 0.0;  ///< percent
  double scene_recall = 0.0;  ///< percent
  std::size_t n_records = 0;
  std::size_t n_shape = 0;
  std::size_t n_scene = 0;
  std::size_t n_unmapped = 0;  ///< predicted class in neither taxonomy
};

/// A record is shape-correct when its predicted class belongs to the
/// superclass named by shape_label; scene-correct likewise for scene_label.
RecallResult shape_scene_recall(const std::vector<PredictionRecord>& records, const SuperclassMap& map);

// ---------------------------------------------------------------- robustness

struct RobustnessCell {
  std::string condition;
  std::optional<int> severity;  ///< empty for clean records
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy = 0.0;
};

/// Top-1 accuracy (prediction equals shape_label) per (condition, severity).
/// Cells without records are absent.
std::vector<RobustnessCell> robustness_curve(const std::vector<PredictionRecord>& records);

// ---------------------------------------------------------------- output

void write_shape_bias_csv(std::ostream& os, const ShapeBiasResult& r);
void write_recall_csv(std::ostream& os, const RecallResult& r);
void write_robustness_csv(std::ostream& os, const std::vector<RobustnessCell>& cells);

nlohmann::json to_json(const ShapeBiasResult& r);
nlohmann::json to_json(const RecallResult& r);
nlohmann::json to_json(const std::vector<RobustnessCell>& cells);

}  // namespace dvd
