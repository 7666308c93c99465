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

#include "dvd/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <tuple>

#include "dvd/embedded_data.hpp"

using json = nlohmann::json;

namespace dvd {
namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t lineno) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          fields.back() += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      if (!fields.back().empty()) throw CsvError(lineno, "quote inside an unquoted field");
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw CsvError(lineno, "unterminated quoted field");
  return fields;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

json optional_int(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

// ---------------------------------------------------------------- CSV

std::vector<PredictionRecord> parse_predictions(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(is, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next_line()) throw CsvError(1, "empty prediction log, expected header: " + std::string(kPredictionHeader));
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  if (line != kPredictionHeader) {
    throw CsvError(1, "bad header '" + line + "', expected: " + std::string(kPredictionHeader));
  }
  std::vector<PredictionRecord> records;
  while (next_line()) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line, lineno);
    if (f.size() != 7) {
      throw CsvError(lineno, "expected 7 fields, found " + std::to_string(f.size()));
    }
    PredictionRecord r{f[0], f[1], f[2], f[3], f[4], std::nullopt, f[6]};
    if (r.image_id.empty()) throw CsvError(lineno, "image_id is empty");
    if (r.predicted_class.empty()) throw CsvError(lineno, "predicted_class is empty");
    if (!f[5].empty()) {
      int sev = 0;
      const auto [ptr, ec] = std::from_chars(f[5].data(), f[5].data() + f[5].size(), sev);
      if (ec != std::errc() || ptr != f[5].data() + f[5].size() || sev < 0) {
        throw CsvError(lineno, "severity must be a non-negative integer, got '" + f[5] + "'");
      }
      r.severity = sev;
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw MetricsError("cannot open prediction log " + path.string());
  return parse_predictions(is);
}

void write_predictions(std::ostream& os, const std::vector<PredictionRecord>& records) {
  os << kPredictionHeader << '\n';
  for (const auto& r : records) {
    os << csv_field(r.image_id) << ',' << csv_field(r.predicted_class) << ',' << csv_field(r.shape_label) << ','
       << csv_field(r.texture_label) << ',' << csv_field(r.scene_label) << ','
       << (r.severity ? std::to_string(*r.severity) : "") << ',' << csv_field(r.condition) << '\n';
  }
}

// ---------------------------------------------------------------- shape bias

ShapeBiasResult shape_bias(const std::vector<PredictionRecord>& records) {
  if (records.empty()) throw MetricsError("shape bias needs at least one record");
  ShapeBiasResult result;
  std::map<std::string, CategoryBias> cats;
  for (const auto& r : records) {
    if (r.shape_label.empty() || r.texture_label.empty()) {
      throw MetricsError("record '" + r.image_id + "' lacks a shape or texture label");
    }
    if (r.shape_label == r.texture_label) {
      ++result.excluded_same_label;
      continue;
    }
    CategoryBias& c = cats[r.shape_label];
    c.category = r.shape_label;
    ++c.n_records;
    if (r.predicted_class == r.shape_label) {
      ++c.n_shape;
    } else if (r.predicted_class == r.texture_label) {
      ++c.n_texture;
    } else {
      ++c.n_neither;
    }
  }
  std::vector<double> defined;
  for (auto& [name, c] : cats) {
    const std::size_t cue = c.n_shape + c.n_texture;
    if (cue > 0) {
      c.bias = static_cast<double>(c.n_shape) / static_cast<double>(cue);
      defined.push_back(*c.bias);
    }
    result.per_category.push_back(c);
  }
  if (defined.empty()) throw MetricsError("no category has a prediction matching either cue");
  result.defined_categories = defined.size();
  result.median = median_of(defined);
  double sum = 0.0;
  for (double v : defined) sum += v;
  result.mean = sum / static_cast<double>(defined.size());
  return result;
}

std::vector<std::string> cue_conflict_categories() {
  return json::parse(embedded::cue_conflict_categories_json()).at("categories").get<std::vector<std::string>>();
}

// ---------------------------------------------------------------- recall

SuperclassMap::SuperclassMap(std::map<std::string, std::vector<std::string>> shape,
                             std::map<std::string, std::vector<std::string>> scene)
    : shape_(std::move(shape)), scene_(std::move(scene)) {
  for (const auto& [super, members] : shape_) {
    if (scene_.count(super)) {
      throw MetricsError("superclass '" + super + "' appears in both the shape and the scene taxonomy");
    }
  }
  std::set<std::string> seen;
  auto add = [&](const std::map<std::string, std::vector<std::string>>& src, std::map<std::string, std::string>& inv) {
    for (const auto& [super, members] : src) {
      if (members.empty()) throw MetricsError("superclass '" + super + "' has no member classes");
      for (const auto& m : members) {
        if (!seen.insert(m).second) throw MetricsError("class '" + m + "' is mapped more than once");
        inv[m] = super;
      }
    }
  };
  add(shape_, shape_of_);
  add(scene_, scene_of_);
}

const SuperclassMap& SuperclassMap::builtin() {
  static const SuperclassMap map = from_json(json::parse(embedded::illusionbench_superclasses_json()));
  return map;
}

SuperclassMap SuperclassMap::from_json(const json& doc) {
  try {
    return SuperclassMap(doc.at("shape").get<std::map<std::string, std::vector<std::string>>>(),
                         doc.at("scene").get<std::map<std::string, std::vector<std::string>>>());
  } catch (const json::exception& e) {
    throw MetricsError(std::string("malformed superclass map: ") + e.what());
  }
}

std::optional<std::string> SuperclassMap::shape_superclass(const std::string& label) const {
  const auto it = shape_of_.find(label);
  return it == shape_of_.end() ? std::nullopt : std::optional<std::string>(it->second);
}

std::optional<std::string> SuperclassMap::scene_superclass(const std::string& label) const {
  const auto it = scene_of_.find(label);
  return it == scene_of_.end() ? std::nullopt : std::optional<std::string>(it->second);
}

RecallResult shape_scene_recall(const std::vector<PredictionRecord>& records, const SuperclassMap& map) {
  if (records.empty()) throw MetricsError("recall needs at least one record");
  RecallResult r;
  r.n_records = records.size();
  for (const auto& rec : records) {
    if (rec.shape_label.empty() || rec.scene_label.empty()) {
      throw MetricsError("record '" + rec.image_id + "' lacks a shape or scene label");
    }
    const auto shape = map.shape_superclass(rec.predicted_class);
    const auto scene = map.scene_superclass(rec.predicted_class);
    if (!shape && !scene) {
      ++r.n_unmapped;
    } else if (shape && *shape == rec.shape_label) {
      ++r.n_shape;
    } else if (scene && *scene == rec.scene_label) {
      ++r.n_scene;
    }
  }
  r.shape_recall = 100.0 * static_cast<double>(r.n_shape) / static_cast<double>(r.n_records);
  r.scene_recall = 100.0 * static_cast<double>(r.n_scene) / static_cast<double>(r.n_records);
  return r;
}

// ---------------------------------------------------------------- robustness

std::vector<RobustnessCell> robustness_curve(const std::vector<PredictionRecord>& records) {
  // nullopt sorts before any severity, so clean cells come first.
  std::map<std::tuple<std::string, std::optional<int>>, RobustnessCell> cells;
  for (const auto& r : records) {
    RobustnessCell& c = cells[{r.condition, r.severity}];
    c.condition = r.condition;
    c.severity = r.severity;
    ++c.total;
    if (r.predicted_class == r.shape_label) ++c.correct;
  }
  std::vector<RobustnessCell> out;
  out.reserve(cells.size());
  for (auto& [key, c] : cells) {
    c.accuracy = static_cast<double>(c.correct) / static_cast<double>(c.total);
    out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------- output

void write_shape_bias_csv(std::ostream& os, const ShapeBiasResult& r) {
  os << "category,n_shape,n_texture,n_neither,n_records,shape_bias\n";
  for (const auto& c : r.per_category) {
    os << csv_field(c.category) << ',' << c.n_shape << ',' << c.n_texture << ',' << c.n_neither << ','
       << c.n_records << ',' << (c.bias ? fmt(*c.bias) : "") << '\n';
  }
  os << "overall_median,,,,," << fmt(r.median) << '\n';
  os << "overall_mean,,,,," << fmt(r.mean) << '\n';
}

void write_recall_csv(std::ostream& os, const RecallResult& r) {
  os << "shape_recall,scene_recall,n_records,n_shape,n_scene,n_unmapped\n"
     << fmt(r.shape_recall) << ',' << fmt(r.scene_recall) << ',' << r.n_records << ',' << r.n_shape << ','
     << r.n_scene << ',' << r.n_unmapped << '\n';
}

void write_robustness_csv(std::ostream& os, const std::vector<RobustnessCell>& cells) {
  os << "condition,severity,correct,total,top1_accuracy\n";
  for (const auto& c : cells) {
    os << csv_field(c.condition) << ',' << (c.severity ? std::to_string(*c.severity) : "") << ',' << c.correct
       << ',' << c.total << ',' << fmt(c.accuracy) << '\n';
  }
}

json to_json(const ShapeBiasResult& r) {
  json cats = json::array();
  for (const auto& c : r.per_category) {
    cats.push_back({{"category", c.category},
                    {"n_shape", c.n_shape},
                    {"n_texture", c.n_texture},
                    {"n_neither", c.n_neither},
                    {"n_records", c.n_records},
                    {"shape_bias", c.bias ? json(*c.bias) : json(nullptr)}});
  }
  return {{"per_category", cats},
          {"overall_median", r.median},
          {"overall_mean", r.mean},
          {"defined_categories", r.defined_categories},
          {"excluded_same_label", r.excluded_same_label}};
}

json to_json(const RecallResult& r) {
  return {{"shape_recall_percent", r.shape_recall},
          {"scene_recall_percent", r.scene_recall},
          {"n_records", r.n_records},
          {"n_shape", r.n_shape},
          {"n_scene", r.n_scene},
          {"n_unmapped", r.n_unmapped}};
}

json to_json(const std::vector<RobustnessCell>& cells) {
  json arr = json::array();
  for (const auto& c : cells) {
    arr.push_back({{"condition", c.condition},
                   {"severity", optional_int(c.severity)},
                   {"correct", c.correct},
                   {"total", c.total},
                   {"top1_accuracy", c.accuracy}});
  }
  return arr;
}

}  // namespace dvd
