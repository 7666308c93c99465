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

#include "dvd/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>

#include "dvd/degradations.hpp"
#include "dvd/image_io.hpp"
#include "dvd/metrics.hpp"
#include "dvd/pipeline.hpp"
#include "dvd/schedules.hpp"
#include "dvd/transforms.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace dvd {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flags shared by the commands that run dvd_transform.
struct TransformFlags {
  std::string config_path;
  std::string anchors_path;
  std::string rearing;
  std::string order;
  double alpha = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  CLI::Option* alpha_opt = nullptr;
  CLI::Option* beta_opt = nullptr;
  CLI::Option* lambda_opt = nullptr;
  CLI::Option* seed_opt = nullptr;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file; flags override its fields");
    app->add_option("--anchors", anchors_path, "Anchor table or fitted schedule JSON (default: built-in)");
    app->add_option("--rearing", rearing,
                    "Rearing condition: all, acuity_chromatic, acuity_contrast, contrast_chromatic, "
                    "acuity_only, chromatic_only, contrast_only, baseline");
    app->add_option("--order", order, "Stage order, e.g. acuity,contrast,chroma");
    alpha_opt = app->add_option("--alpha", alpha, "Months per epoch");
    beta_opt = app->add_option("--beta", beta, "Base spectral threshold");
    lambda_opt = app->add_option("--lambda", lambda, "Threshold decay period in months");
    seed_opt = app->add_option("--seed", seed, "Run seed recorded in the manifest");
  }

  // Defaults, then the config file, then flags.
  std::pair<DvdConfig, json> resolve(std::string& schedules_path) const {
    DvdConfig cfg;
    json file_doc = json::object();
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw std::runtime_error("cannot open config " + config_path);
      try {
        file_doc = json::parse(is);
      } catch (const json::parse_error& e) {
        throw ConfigError("config " + config_path + " is not valid JSON: " + e.what());
      }
      cfg.merge_json(file_doc);
      if (file_doc.contains("schedules")) {
        fs::path p = file_doc["schedules"].get<std::string>();
        if (p.is_relative()) p = fs::path(config_path).parent_path() / p;
        schedules_path = p.string();
      }
    }
    if (!anchors_path.empty()) schedules_path = anchors_path;
    if (alpha_opt->count()) cfg.alpha = alpha;
    if (beta_opt->count()) cfg.beta = beta;
    if (lambda_opt->count()) cfg.lambda = lambda;
    if (seed_opt->count()) cfg.seed = seed;
    if (!rearing.empty()) cfg.enabled = rearing_condition(rearing);
    if (!order.empty()) {
      std::vector<std::string> parts;
      std::stringstream ss(order);
      for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
      if (parts.size() != 3) throw ConfigError("--order needs three comma-separated stages");
      for (std::size_t i = 0; i < 3; ++i) cfg.order[i] = parse_stage(parts[i]);
    }
    cfg.validate();
    return {cfg, file_doc};
  }
};

ScheduleSet load_schedules(const std::string& path) {
  return path.empty() ? ScheduleSet::defaults() : ScheduleSet::from_file(path);
}

std::optional<std::array<int, 2>> parse_resize(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const auto x = s.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(s);
    std::size_t used = 0;
    const int w = std::stoi(s.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(s);
    const std::string hs = s.substr(x + 1);
    const int h = std::stoi(hs, &used);
    if (used != hs.size() || w <= 0 || h <= 0) throw std::invalid_argument(s);
    return std::array<int, 2>{w, h};
  } catch (const std::exception&) {
    throw UsageError("--resize expects WIDTHxHEIGHT with positive integers, got '" + s + "'");
  }
}

std::function<void(std::size_t, std::size_t)> progress_printer(std::ostream& err, std::mutex& mu) {
  return [&err, &mu](std::size_t done, std::size_t total) {
    const std::size_t every = std::max<std::size_t>(1, total / 10);
    if (done % every == 0 || done == total) {
      std::lock_guard<std::mutex> lock(mu);
      err << "  " << done << "/" << total << " images\n";
    }
  };
}

void report_ingest(const DatasetIndex& idx, std::ostream& err) {
  for (const auto& w : idx.warnings) err << "warning: " << w << '\n';
  for (const auto& s : idx.skipped) err << "skipped: " << s.path << ": " << s.reason << '\n';
  err << "ingested " << idx.entries.size() << " images in " << idx.class_histogram().size() << " classes";
  for (const auto& [label, n] : idx.class_histogram()) err << (label == idx.class_histogram().begin()->first ? ": " : ", ") << label << "=" << n;
  err << '\n';
}

int finish_run(const RunManifest& m, const fs::path& out, std::ostream& err) {
  err << "wrote " << m.records.size() << " images and " << (out / "manifest.json").string() << " in "
      << m.timings.wall_s << " s\n";
  if (!m.complete) {
    for (const auto& e : m.errors) err << "error: " << e << '\n';
    err << "run incomplete: manifest marked complete=false\n";
    return kExitFailure;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- commands

struct ScheduleCmd {
  double step = 1.0;
  std::string anchors;
  std::string out;
  std::string format = "csv";

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("schedule", "Export the fitted maturation schedules");
    sub->add_option("--step", step, "Age step in months (> 0)")->capture_default_str();
    sub->add_option("--anchors", anchors, "Anchor table or fitted schedule JSON (default: built-in)");
    sub->add_option("--out", out, "Output file (default: stdout)");
    sub->add_option("--format", format, "csv (rows by age) or json (fitted model)")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  }

  int run(std::ostream& os, std::ostream& err) const {
    if (!(step > 0.0) || !std::isfinite(step)) throw UsageError("--step must be a positive number");
    const ScheduleSet s = load_schedules(anchors);
    if (s.any_fallback()) err << "warning: a logistic fit failed; using piecewise-linear interpolation\n";
    std::ofstream file;
    std::ostream* dst = &os;
    if (!out.empty()) {
      file.open(out);
      if (!file) throw std::runtime_error("cannot write " + out);
      dst = &file;
    }
    if (format == "json") {
      *dst << s.to_json().dump(2) << '\n';
    } else {
      write_schedule_csv(*dst, export_schedule(s, step));
    }
    return kExitOk;
  }
};

struct PreviewCmd {
  TransformFlags flags;
  std::string image;
  std::vector<double> ages{0, 60, 120, 300};
  std::string out = ".";

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("preview", "Render one image at several ages");
    sub->add_option("--image", image, "Input image (PNG or JPEG)")->required();
    sub->add_option("--ages", ages, "Comma-separated ages in months")->delimiter(',')->capture_default_str();
    sub->add_option("--out", out, "Output directory")->capture_default_str();
    flags.add_to(sub);
  }

  int run(std::ostream& os, std::ostream& err) const {
    std::string sched_path;
    const auto [cfg, file_doc] = flags.resolve(sched_path);
    const ScheduleSet s = load_schedules(sched_path);
    std::vector<AgeMonths> a;
    for (double v : ages) {
      if (!(v >= 0.0 && v <= kAdultAgeMonths)) throw UsageError("--ages must lie in [0, 300]");
      a.emplace_back(v);
    }
    const Image img = read_image(image);
    const auto frames = preview(img, a, cfg, s);
    err << "effective config: " << cfg.to_json().dump() << '\n';
    for (const auto& p : write_preview(frames, out, fs::path(image).stem().string())) os << p.string() << '\n';
    return kExitOk;
  }
};

struct ProcessCmd {
  TransformFlags flags;
  std::string input;
  std::string out;
  std::int64_t epoch = 0;
  int workers = 1;
  bool skip_bad = false;
  std::string resize;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("process", "Transform a dataset at the age of one epoch");
    sub->add_option("--input", input, "Dataset root laid out as <class>/<image>")->required();
    sub->add_option("--out", out, "Output root")->required();
    sub->add_option("--epoch", epoch, "Training epoch; age = min(alpha * epoch, 300)")->required();
    sub->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_flag("--skip-bad", skip_bad, "Skip undecodable files instead of aborting");
    sub->add_option("--resize", resize, "Resize to WIDTHxHEIGHT before transforming");
    flags.add_to(sub);
  }

  int run(std::ostream& os, std::ostream& err) const {
    std::string sched_path;
    const auto [cfg, file_doc] = flags.resolve(sched_path);
    RunOptions opts;
    opts.workers = workers;
    opts.resize = parse_resize(resize);
    if (epoch < 0) throw UsageError("--epoch must be >= 0");
    const ScheduleSet s = load_schedules(sched_path);
    err << "effective config: " << cfg.to_json().dump() << '\n';
    const DatasetIndex idx = ingest(input, {skip_bad});
    report_ingest(idx, err);
    std::mutex mu;
    opts.progress = progress_printer(err, mu);
    const RunManifest m = process_epoch(idx, epoch, cfg, s, out, opts);
    err << "epoch " << epoch << " -> age " << *m.age_months << " months\n";
    os << (fs::path(out) / "manifest.json").string() << '\n';
    return finish_run(m, out, err);
  }
};

struct CorruptCmd {
  std::string input;
  std::string out;
  std::vector<std::string> kinds;
  std::vector<int> severities;
  std::vector<std::string> attacks;
  std::vector<double> amplitudes;
  std::uint64_t seed = 0;
  int workers = 1;
  bool skip_bad = false;
  std::string resize;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("corrupt", "Write corrupted or perturbed copies of a dataset");
    sub->add_option("--input", input, "Dataset root laid out as <class>/<image>")->required();
    sub->add_option("--out", out, "Output root")->required();
    sub->add_option("--kind", kinds, "Corruption kinds, comma-separated, or 'all'")->delimiter(',');
    sub->add_option("--severity", severities, "Severities 1-5, comma-separated (default: all)")->delimiter(',');
    sub->add_option("--attack", attacks, "l2_gaussian, l2_uniform, salt_and_pepper (comma-separated)")
        ->delimiter(',');
    sub->add_option("--amplitude", amplitudes, "Attack amplitudes on the 255 scale (default: all)")
        ->delimiter(',');
    sub->add_option("--seed", seed, "Run seed")->capture_default_str();
    sub->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_flag("--skip-bad", skip_bad, "Skip undecodable files instead of aborting");
    sub->add_option("--resize", resize, "Resize to WIDTHxHEIGHT before corrupting");
  }

  int run(std::ostream& os, std::ostream& err) const {
    if (kinds.empty() && attacks.empty()) throw UsageError("give at least one --kind or --attack");
    std::vector<DegradationJob> jobs;
    std::vector<CorruptionKind> ks;
    for (const auto& k : kinds) {
      if (k == "all") {
        ks.assign(all_corruption_kinds().begin(), all_corruption_kinds().end());
      } else {
        ks.push_back(parse_corruption_kind(k));
      }
    }
    std::vector<int> sev = severities;
    if (sev.empty()) sev = {1, 2, 3, 4, 5};
    for (CorruptionKind k : ks) {
      for (int s : sev) {
        CorruptionSpec spec{k, s};
        spec.validate();
        jobs.emplace_back(spec);
      }
    }
    std::vector<double> amps = amplitudes;
    if (amps.empty()) amps = CorruptionTable::builtin().attack_amplitudes();
    for (const auto& a : attacks) {
      const AttackKind kind = parse_attack_kind(a);
      for (double amp : amps) {
        NoiseAttackSpec spec{kind, amp, seed};
        CorruptionTable::builtin().validate(spec);
        jobs.emplace_back(spec);
      }
    }
    RunOptions opts;
    opts.workers = workers;
    opts.resize = parse_resize(resize);
    const DatasetIndex idx = ingest(input, {skip_bad});
    report_ingest(idx, err);
    std::mutex mu;
    opts.progress = progress_printer(err, mu);
    const RunManifest m = corrupt_dataset(idx, jobs, seed, out, opts);
    os << (fs::path(out) / "manifest.json").string() << '\n';
    return finish_run(m, out, err);
  }
};

struct ScoreCmd {
  std::string predictions;
  std::string out;
  std::string metric = "all";
  std::string superclasses;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("score", "Compute metrics from a prediction log");
    sub->add_option("--predictions", predictions, std::string("CSV with header ") + kPredictionHeader)
        ->required();
    sub->add_option("--metric", metric, "shape_bias, recall, robustness or all")
        ->check(CLI::IsMember({"all", "shape_bias", "recall", "robustness"}))
        ->capture_default_str();
    sub->add_option("--superclasses", superclasses, "Superclass map JSON (default: built-in)");
    sub->add_option("--out", out, "Directory for CSV and JSON results (default: JSON on stdout)");
  }

  int run(std::ostream& os, std::ostream& err) const {
    const auto records = read_predictions(predictions);
    const bool all = metric == "all";
    const bool has_texture = std::all_of(records.begin(), records.end(),
                                         [](const PredictionRecord& r) { return !r.texture_label.empty(); });
    const bool has_scene = std::all_of(records.begin(), records.end(),
                                       [](const PredictionRecord& r) { return !r.scene_label.empty(); });
    json doc{{"schema", "dvd.metrics"},
             {"schema_version", kMetricsSchemaVersion},
             {"predictions", predictions},
             {"n_records", records.size()}};
    if (!out.empty()) fs::create_directories(out);
    auto open = [&](const char* name) {
      std::ofstream f(fs::path(out) / name);
      if (!f) throw std::runtime_error("cannot write " + (fs::path(out) / name).string());
      return f;
    };
    if (metric == "shape_bias" || (all && has_texture && !records.empty())) {
      const auto r = shape_bias(records);
      doc["shape_bias"] = to_json(r);
      if (!out.empty()) {
        auto f = open("shape_bias.csv");
        write_shape_bias_csv(f, r);
      }
      err << "shape bias (median over " << r.defined_categories << " categories): " << r.median << '\n';
    }
    if (metric == "recall" || (all && has_scene && !records.empty())) {
      const SuperclassMap map = superclasses.empty() ? SuperclassMap::builtin()
                                                     : SuperclassMap::from_json(json::parse(std::ifstream(superclasses)));
      const auto r = shape_scene_recall(records, map);
      doc["shape_scene_recall"] = to_json(r);
      if (!out.empty()) {
        auto f = open("recall.csv");
        write_recall_csv(f, r);
      }
      err << "shape recall " << r.shape_recall << "%, scene recall " << r.scene_recall << "%\n";
    }
    if (metric == "robustness" || all) {
      const auto cells = robustness_curve(records);
      doc["robustness"] = to_json(cells);
      if (!out.empty()) {
        auto f = open("robustness.csv");
        write_robustness_csv(f, cells);
      }
    }
    if (out.empty()) {
      os << doc.dump(2) << '\n';
    } else {
      auto f = open("metrics.json");
      f << doc.dump(2) << '\n';
      os << (fs::path(out) / "metrics.json").string() << '\n';
    }
    return kExitOk;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Developmental visual diet: age-scheduled image transforms, corruptions and metrics", "dvd"};
  app.set_version_flag("--version", std::string(DVD_VERSION));
  app.require_subcommand(1);
  ScheduleCmd schedule;
  PreviewCmd preview_cmd;
  ProcessCmd process;
  CorruptCmd corrupt_cmd;
  ScoreCmd score;
  schedule.add(app);
  preview_cmd.add(app);
  process.add(app);
  corrupt_cmd.add(app);
  score.add(app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    if (name == "schedule") return schedule.run(out, err);
    if (name == "preview") return preview_cmd.run(out, err);
    if (name == "process") return process.run(out, err);
    if (name == "corrupt") return corrupt_cmd.run(out, err);
    if (name == "score") return score.run(out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\nRun 'dvd " << name << " --help' for usage.\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\nRun 'dvd " << name << " --help' for usage.\n";
    return kExitUsage;
  } catch (const CorruptionError& e) {
    err << "error: " << e.what() << "\nRun 'dvd " << name << " --help' for usage.\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace dvd
