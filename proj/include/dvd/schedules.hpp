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

// Developmental trajectories of acuity, contrast sensitivity and chromatic
// sensitivity from birth (0 months) to adulthood (300 months), and the clock
// that maps training epochs onto that axis.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace dvd {

inline constexpr double kAdultAgeMonths = 300.0;

class ScheduleError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Months since birth. Construction rejects negative or non-finite values;
/// lookups clamp to the adult plateau at 300 months.
class AgeMonths {
 public:
  constexpr AgeMonths() = default;
  explicit AgeMonths(double months);

  double months() const { return months_; }
  AgeMonths clamped() const;

  auto operator<=>(const AgeMonths&) const = default;

 private:
  double months_ = 0.0;
};

enum class Dimension { acuity, contrast, chroma };
enum class Direction { increasing, decreasing };

std::string_view to_string(Dimension d);
Dimension parse_dimension(std::string_view name);

/// MAR shrinks with age; sensitivities grow.
Direction maturation_direction(Dimension d);

struct AnchorPoint {
  double age_months;
  double level;
};

struct AnchorTable {
  Dimension dimension = Dimension::contrast;
  std::vector<AnchorPoint> points;

  /// Ages strictly increasing, >= 3 points, levels monotone along the
  /// dimension's maturation direction. Throws ScheduleError with the first
  /// offending index.
  void validate() const;
};

/// floor + amplitude / (1 + exp(-rate * (t - midpoint)))  for increasing,
/// floor + amplitude / (1 + exp( rate * (t - midpoint)))  for decreasing.
struct LogisticCurve {
  double amplitude = 0.0;
  double rate = 1.0;
  double midpoint = 0.0;
  double floor = 0.0;
  Direction direction = Direction::increasing;

  double operator()(double t) const;
};

struct FitOptions {
  int max_iterations = 400;
  /// Pin the floor offset instead of fitting it. Applied automatically for
  /// three-point tables, where four free parameters are underdetermined.
  std::optional<double> fixed_floor;
};

struct FitResult {
  LogisticCurve curve;
  double rms = 0.0;
  int iterations = 0;
};

/// Raised when damped least squares fails to converge within the iteration
/// budget, or converges to a non-monotone curve. Carries the best parameters
/// seen so far.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, LogisticCurve best, double best_rms)
      : std::runtime_error(what), best_(best), best_rms_(best_rms) {}
  const LogisticCurve& best() const { return best_; }
  double best_rms() const { return best_rms_; }

 private:
  LogisticCurve best_;
  double best_rms_;
};

/// Least-squares logistic fit (Levenberg-Marquardt, multi-start).
FitResult fit_logistic(const AnchorTable& anchors, const FitOptions& options = {});

/// Monotone piecewise-linear interpolation of anchors, constant outside the
/// anchored range. Used when the logistic fit fails.
struct PiecewiseLinearCurve {
  std::vector<AnchorPoint> points;
  double operator()(double t) const;
};

/// A fitted dimension: anchors, the curve actually evaluated, and whether the
/// logistic fit fell back to interpolation.
struct ScheduleCurve {
  AnchorTable anchors;
  std::variant<LogisticCurve, PiecewiseLinearCurve> curve;
  double rms = 0.0;

  bool is_fallback() const { return std::holds_alternative<PiecewiseLinearCurve>(curve); }
  double raw(double t) const;

  /// Fits anchors; on FitError falls back to interpolation.
  static ScheduleCurve fit(AnchorTable anchors);
};

struct ScheduleRow {
  double age_months;
  double mar;
  double contrast_sensitivity;
  double chromatic_sensitivity;
};

/// The three fitted trajectories. Sensitivity lookups are min-max normalised
/// over [0, 300] months so the newborn maps to exactly 0 and the adult to
/// exactly 1; MAR is floored at 1 (20/20).
class ScheduleSet {
 public:
  ScheduleSet(ScheduleCurve acuity, ScheduleCurve contrast, ScheduleCurve chroma);

  static ScheduleSet from_anchors(AnchorTable acuity, AnchorTable contrast, AnchorTable chroma);
  /// Anchors digitised from published developmental curves (data/default_anchors.json).
  static const ScheduleSet& defaults();

  /// Accepts an anchor document ({"acuity": [[age, level], ...], ...}) and
  /// fits it, or a fitted document previously produced by to_json().
  static ScheduleSet from_json(const nlohmann::json& doc);
  static ScheduleSet from_file(const std::string& path);
  nlohmann::json to_json() const;

  double acuity_at(AgeMonths t) const;
  double contrast_sensitivity_at(AgeMonths t) const;
  double chromatic_sensitivity_at(AgeMonths t) const;

  const ScheduleCurve& acuity() const { return acuity_; }
  const ScheduleCurve& contrast() const { return contrast_; }
  const ScheduleCurve& chroma() const { return chroma_; }

  bool any_fallback() const;
  /// SHA-256 of the canonical fitted-parameter document.
  const std::string& fingerprint() const { return fingerprint_; }

 private:
  double normalized(const ScheduleCurve& curve, double t) const;

  ScheduleCurve acuity_;
  ScheduleCurve contrast_;
  ScheduleCurve chroma_;
  std::string fingerprint_;
};

/// Months of development per training epoch.
struct EpochClock {
  double months_per_epoch = 2.0;
};

AgeMonths epoch_to_age(const EpochClock& clock, std::int64_t epoch);

/// Rows at 0, step, 2*step, ... and always a final row at 300 months.
std::vector<ScheduleRow> export_schedule(const ScheduleSet& s, double step);
void write_schedule_csv(std::ostream& os, const std::vector<ScheduleRow>& rows);

}  // namespace dvd
