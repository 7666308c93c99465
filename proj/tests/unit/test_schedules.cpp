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

#include <cmath>
#include <sstream>

#include "dvd/schedules.hpp"

using namespace dvd;
using nlohmann::json;

namespace {

AnchorTable sample(Dimension d, const LogisticCurve& c, std::initializer_list<double> ages) {
  AnchorTable t{d, {}};
  for (double a : ages) t.points.push_back({a, c(a)});
  return t;
}

}  // namespace

TEST_CASE("age is non-negative and clamps at adult") {
  CHECK_THROWS_AS(AgeMonths(-1.0), ScheduleError);
  CHECK_THROWS_AS(AgeMonths(std::nan("")), ScheduleError);
  CHECK(AgeMonths(420).clamped().months() == kAdultAgeMonths);
}

TEST_CASE("anchor validation names the offending index") {
  AnchorTable t{Dimension::contrast, {{0, 0.1}, {10, 0.2}}};
  CHECK_THROWS_WITH_AS(t.validate(), doctest::Contains("at least 3"), ScheduleError);
  t.points = {{0, 0.1}, {10, 0.2}, {10, 0.3}};
  CHECK_THROWS_WITH_AS(t.validate(), doctest::Contains("index 2"), ScheduleError);
  t.points = {{0, 0.1}, {10, 0.3}, {20, 0.2}};
  CHECK_THROWS_AS(t.validate(), ScheduleError);
  // Acuity improves by decreasing MAR.
  AnchorTable a{Dimension::acuity, {{0, 30}, {12, 3}, {60, 1}}};
  CHECK_NOTHROW(a.validate());
  a.points[2].level = 5;
  CHECK_THROWS_AS(a.validate(), ScheduleError);
}

TEST_CASE("logistic round trip with free floor") {
  const LogisticCurve truth{0.9, 0.08, 40.0, 0.05, Direction::increasing};
  const auto fit = fit_logistic(sample(Dimension::chroma, truth, {0, 10, 20, 30, 40, 50, 60, 80, 100, 150}));
  CHECK(fit.curve.amplitude == doctest::Approx(truth.amplitude).epsilon(1e-8));
  CHECK(fit.curve.rate == doctest::Approx(truth.rate).epsilon(1e-8));
  CHECK(fit.curve.midpoint == doctest::Approx(truth.midpoint).epsilon(1e-8));
  CHECK(fit.curve.floor == doctest::Approx(truth.floor).epsilon(1e-8));
  CHECK(fit.rms < 1e-10);
}

TEST_CASE("three-point tables pin the floor") {
  const LogisticCurve truth{1.0, 0.05, 60.0, 0.0, Direction::increasing};
  const auto fit = fit_logistic(sample(Dimension::contrast, truth, {20, 60, 100}));
  CHECK(fit.curve.floor == 0.0);
  CHECK(fit.curve.rate == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(fit.curve.midpoint == doctest::Approx(60.0).epsilon(1e-9));
}

TEST_CASE("non-convergence reports the best curve") {
  const LogisticCurve truth{1.0, 0.05, 60.0, 0.0, Direction::increasing};
  FitOptions opts;
  opts.max_iterations = 1;
  try {
    fit_logistic(sample(Dimension::contrast, truth, {0, 20, 40, 60, 80, 100, 200}), opts);
    FAIL("expected FitError");
  } catch (const FitError& e) {
    CHECK(std::isfinite(e.best_rms()));
    CHECK(std::string(e.what()).find("did not converge") != std::string::npos);
  }
}

TEST_CASE("default schedules: fitted, monotone, normalised endpoints") {
  const ScheduleSet& s = ScheduleSet::defaults();
  CHECK_FALSE(s.any_fallback());
  CHECK(s.contrast_sensitivity_at(AgeMonths(0)) == 0.0);
  CHECK(s.chromatic_sensitivity_at(AgeMonths(0)) == 0.0);
  CHECK(s.contrast_sensitivity_at(AgeMonths(300)) == 1.0);
  CHECK(s.chromatic_sensitivity_at(AgeMonths(300)) == 1.0);
  CHECK(s.acuity_at(AgeMonths(0)) > 20.0);
  CHECK(s.acuity_at(AgeMonths(300)) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(s.acuity_at(AgeMonths(900)) == s.acuity_at(AgeMonths(300)));
  for (double t = 0; t < 300; t += 0.25) {
    CHECK(s.acuity_at(AgeMonths(t + 0.25)) <= s.acuity_at(AgeMonths(t)));
    CHECK(s.contrast_sensitivity_at(AgeMonths(t + 0.25)) >= s.contrast_sensitivity_at(AgeMonths(t)));
  }
}

TEST_CASE("fitted document round trip keeps the fingerprint") {
  const ScheduleSet& s = ScheduleSet::defaults();
  const ScheduleSet back = ScheduleSet::from_json(s.to_json());
  CHECK(back.fingerprint() == s.fingerprint());
  CHECK(back.acuity_at(AgeMonths(37)) == s.acuity_at(AgeMonths(37)));
  CHECK(s.fingerprint().size() == 64);
}

TEST_CASE("anchor documents are fitted; piecewise documents load as fallback") {
  const json anchors = {{"acuity", {{0, 30}, {6, 15}, {12, 3}, {60, 1}}},
                        {"contrast", {{0, 0.0}, {60, 0.5}, {120, 1.0}}},
                        {"chroma", {{0, 0.0}, {30, 0.5}, {60, 1.0}}}};
  const ScheduleSet a = ScheduleSet::from_json(anchors);
  CHECK(a.fingerprint() != ScheduleSet::defaults().fingerprint());

  json doc = a.to_json();
  doc["chroma"]["model"] = "piecewise_linear";
  const ScheduleSet pw = ScheduleSet::from_json(doc);
  CHECK(pw.any_fallback());
  CHECK(pw.chroma().is_fallback());
  CHECK(pw.fingerprint() != a.fingerprint());

  doc["chroma"]["model"] = "spline";
  CHECK_THROWS_AS(ScheduleSet::from_json(doc), ScheduleError);
  CHECK_THROWS_AS(ScheduleSet::from_file("/nonexistent/anchors.json"), ScheduleError);
}

TEST_CASE("epoch clock") {
  CHECK(epoch_to_age({2.0}, 10).months() == 20.0);
  CHECK(epoch_to_age({2.0}, 150).months() == 300.0);
  CHECK(epoch_to_age({8.0}, 100).months() == 300.0);
  CHECK(epoch_to_age({1.0}, 0).months() == 0.0);
  CHECK_THROWS_AS(epoch_to_age({0.0}, 1), ScheduleError);
  CHECK_THROWS_AS(epoch_to_age({2.0}, -1), ScheduleError);
}

TEST_CASE("schedule export") {
  const auto rows = export_schedule(ScheduleSet::defaults(), 10);
  REQUIRE(rows.size() == 31);
  CHECK(rows.front().age_months == 0.0);
  CHECK(rows.back().age_months == 300.0);
  CHECK(export_schedule(ScheduleSet::defaults(), 7).back().age_months == 300.0);
  CHECK_THROWS_AS(export_schedule(ScheduleSet::defaults(), 0), ScheduleError);
  std::ostringstream os;
  write_schedule_csv(os, rows);
  CHECK(os.str().rfind("age_months,mar,contrast_sensitivity,chromatic_sensitivity\n", 0) == 0);
}
