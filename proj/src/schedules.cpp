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

#include "dvd/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "dvd/embedded_data.hpp"
#include "dvd/hashing.hpp"

namespace dvd {

using nlohmann::json;

AgeMonths::AgeMonths(double months) : months_(months) {
  if (!std::isfinite(months) || months < 0.0) {
    throw ScheduleError("age must be a finite non-negative number of months");
  }
}

AgeMonths AgeMonths::clamped() const { return AgeMonths(std::min(months_, kAdultAgeMonths)); }

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::acuity: return "acuity";
    case Dimension::contrast: return "contrast";
    case Dimension::chroma: return "chroma";
  }
  return "unknown";
}

Dimension parse_dimension(std::string_view name) {
  if (name == "acuity") return Dimension::acuity;
  if (name == "contrast") return Dimension::contrast;
  if (name == "chroma") return Dimension::chroma;
  throw ScheduleError("unknown schedule dimension '" + std::string(name) + "'");
}

Direction maturation_direction(Dimension d) {
  return d == Dimension::acuity ? Direction::decreasing : Direction::increasing;
}

void AnchorTable::validate() const {
  const std::string dim(to_string(dimension));
  if (points.size() < 3) {
    throw ScheduleError(dim + " anchors: need at least 3 points, got " +
                        std::to_string(points.size()));
  }
  const bool increasing = maturation_direction(dimension) == Direction::increasing;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!std::isfinite(p.age_months) || !std::isfinite(p.level) || p.age_months < 0.0) {
      throw ScheduleError(dim + " anchors: point " + std::to_string(i) + " is not finite/non-negative");
    }
    if (i == 0) continue;
    const auto& q = points[i - 1];
    if (p.age_months <= q.age_months) {
      throw ScheduleError(dim + " anchors: ages not strictly increasing at index " +
                          std::to_string(i));
    }
    const bool ok = increasing ? p.level >= q.level : p.level <= q.level;
    if (!ok) {
      std::ostringstream msg;
      msg << dim << " anchors: level " << p.level << " at " << p.age_months << " months breaks "
          << (increasing ? "non-decreasing" : "non-increasing") << " order (previous " << q.level
          << " at " << q.age_months << " months)";
      throw ScheduleError(msg.str());
    }
  }
}

double LogisticCurve::operator()(double t) const {
  const double z = rate * (t - midpoint);
  const double s = direction == Direction::increasing ? 1.0 / (1.0 + std::exp(-z))
                                                       : 1.0 / (1.0 + std::exp(z));
  return floor + amplitude * s;
}

namespace {

// Parameter vector: amplitude, log(rate), midpoint[, floor].
struct Model {
  Direction direction;
  std::optional<double> fixed_floor;

  int size() const { return fixed_floor ? 3 : 4; }

  LogisticCurve curve(const Eigen::VectorXd& p) const {
    return LogisticCurve{p[0], std::exp(p[1]), p[2], fixed_floor ? *fixed_floor : p[3], direction};
  }

  void residuals(const Eigen::VectorXd& p, const std::vector<AnchorPoint>& pts,
                 Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
    const LogisticCurve c = curve(p);
    const double sign = direction == Direction::increasing ? 1.0 : -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double dt = pts[i].age_months - c.midpoint;
      const double s = 1.0 / (1.0 + std::exp(-sign * c.rate * dt));
      const auto row = static_cast<Eigen::Index>(i);
      r[row] = c.floor + c.amplitude * s - pts[i].level;
      if (jac) {
        const double ds = s * (1.0 - s);
        (*jac)(row, 0) = s;
        (*jac)(row, 1) = c.amplitude * ds * sign * dt * c.rate;
        (*jac)(row, 2) = -c.amplitude * ds * sign * c.rate;
        if (!fixed_floor) (*jac)(row, 3) = 1.0;
      }
    }
  }
};

struct Attempt {
  Eigen::VectorXd params;
  double cost = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// Box on log(rate) and midpoint. Outside it the logistic degenerates into a
// straight line or a step and the problem loses its minimum.
struct Bounds {
  double log_rate_lo, log_rate_hi, mid_lo, mid_hi;
  bool contains(const Eigen::VectorXd& p) const {
    return p[1] >= log_rate_lo && p[1] <= log_rate_hi && p[2] >= mid_lo && p[2] <= mid_hi;
  }
};

Attempt levenberg_marquardt(const Model& model, const std::vector<AnchorPoint>& pts,
                            Eigen::VectorXd p, const Bounds& bounds, int max_iterations) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  const Eigen::Index m = model.size();
  Eigen::VectorXd r(n), r_try(n);
  Eigen::MatrixXd jac(n, m);
  model.residuals(p, pts, r, &jac);
  double cost = 0.5 * r.squaredNorm();
  double damping = 1e-3;

  Attempt out;
  for (int it = 1; it <= max_iterations; ++it) {
    out.iterations = it;
    const Eigen::MatrixXd a = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    if (cost <= 1e-30 || g.lpNorm<Eigen::Infinity>() <= 1e-15) {
      out.converged = true;
      break;
    }
    bool accepted = false;
    while (damping < 1e20) {
      Eigen::MatrixXd lhs = a;
      for (Eigen::Index k = 0; k < m; ++k) lhs(k, k) += damping * std::max(a(k, k), 1e-12);
      const Eigen::VectorXd step = lhs.ldlt().solve(-g);
      const Eigen::VectorXd trial = p + step;
      if (!trial.allFinite() || !bounds.contains(trial)) {
        damping *= 10.0;
        continue;
      }
      model.residuals(trial, pts, r_try, nullptr);
      const double trial_cost = 0.5 * r_try.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        const double gain = cost - trial_cost;
        const double step_norm = step.norm();
        p = trial;
        cost = trial_cost;
        model.residuals(p, pts, r, &jac);
        damping = std::max(damping * 0.3, 1e-15);
        accepted = true;
        if (gain <= 1e-13 * cost || step_norm <= 1e-11 * (p.norm() + 1e-11)) out.converged = true;
        break;
      }
      damping *= 10.0;
    }
    // No damping level yields descent: a stationary point.
    if (!accepted) out.converged = true;
    if (out.converged) break;
  }
  out.params = p;
  out.cost = cost;
  return out;
}

double rms_of(const LogisticCurve& c, const std::vector<AnchorPoint>& pts) {
  double sq = 0.0;
  for (const auto& p : pts) {
    const double d = c(p.age_months) - p.level;
    sq += d * d;
  }
  return std::sqrt(sq / static_cast<double>(pts.size()));
}

double interpolate(const std::vector<AnchorPoint>& pts, double t) {
  if (t <= pts.front().age_months) return pts.front().level;
  if (t >= pts.back().age_months) return pts.back().level;
  const auto hi = std::upper_bound(pts.begin(), pts.end(), t,
                                   [](double v, const AnchorPoint& p) { return v < p.age_months; });
  const auto lo = hi - 1;
  const double w = (t - lo->age_months) / (hi->age_months - lo->age_months);
  return lo->level + w * (hi->level - lo->level);
}

}  // namespace

FitResult fit_logistic(const AnchorTable& anchors, const FitOptions& options) {
  anchors.validate();
  const auto& pts = anchors.points;
  const Direction dir = maturation_direction(anchors.dimension);

  double lo = pts.front().level, hi = pts.front().level;
  for (const auto& p : pts) {
    lo = std::min(lo, p.level);
    hi = std::max(hi, p.level);
  }
  if (hi - lo == 0.0) {
    const double mid = 0.5 * (pts.front().age_months + pts.back().age_months);
    return FitResult{LogisticCurve{0.0, 1.0, mid, lo, dir}, 0.0, 0};
  }

  std::optional<double> floor = options.fixed_floor;
  if (!floor && pts.size() == 3) {
    floor = anchors.dimension == Dimension::acuity ? 1.0 : 0.0;
  }
  const Model model{dir, floor};

  // Age at which the anchors cross their half-way level.
  const double half = 0.5 * (lo + hi);
  double crossing = pts.front().age_months;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double a = pts[i - 1].level, b = pts[i].level;
    if ((a - half) * (b - half) <= 0.0 && a != b) {
      const double w = (half - a) / (b - a);
      crossing = pts[i - 1].age_months + w * (pts[i].age_months - pts[i - 1].age_months);
      break;
    }
  }
  const double span = pts.back().age_months - pts.front().age_months;
  const double base_floor = floor ? *floor : lo;
  const double base_amp = std::max(hi - base_floor, 1e-6);

  const Bounds bounds{std::log(1e-4), std::log(10.0), pts.front().age_months - span,
                      pts.back().age_months + span};
  Attempt best;
  bool best_monotone = false;
  for (double rate : {0.003, 0.01, 0.03, 0.1, 0.3, 1.0}) {
    for (double mid : {crossing, crossing - 0.1 * span, crossing + 0.1 * span}) {
      Eigen::VectorXd p(model.size());
      p[0] = base_amp;
      p[1] = std::log(rate);
      p[2] = mid;
      if (!floor) p[3] = base_floor;
      Attempt a = levenberg_marquardt(model, pts, p, bounds, options.max_iterations);
      const bool monotone = a.params[0] >= 0.0;
      // Prefer converged monotone fits, then lower cost.
      const auto rank = [](bool conv, bool mono) { return (conv ? 2 : 0) + (mono ? 1 : 0); };
      const int ra = rank(a.converged, monotone);
      const int rb = rank(best.converged, best_monotone);
      if (best.params.size() == 0 || ra > rb || (ra == rb && a.cost < best.cost)) {
        best = a;
        best_monotone = monotone;
      }
    }
  }

  const LogisticCurve curve = model.curve(best.params);
  const double rms = rms_of(curve, pts);
  const std::string dim(to_string(anchors.dimension));
  if (!best.converged) {
    throw FitError(dim + " logistic fit did not converge in " +
                       std::to_string(options.max_iterations) + " iterations",
                   curve, rms);
  }
  if (!best_monotone) {
    throw FitError(dim + " logistic fit converged to a non-monotone curve", curve, rms);
  }
  return FitResult{curve, rms, best.iterations};
}

double PiecewiseLinearCurve::operator()(double t) const { return interpolate(points, t); }

double ScheduleCurve::raw(double t) const {
  return std::visit([t](const auto& c) { return c(t); }, curve);
}

ScheduleCurve ScheduleCurve::fit(AnchorTable anchors) {
  anchors.validate();
  try {
    FitResult r = fit_logistic(anchors);
    return ScheduleCurve{std::move(anchors), r.curve, r.rms};
  } catch (const FitError&) {
    PiecewiseLinearCurve pw{anchors.points};
    return ScheduleCurve{std::move(anchors), std::move(pw), 0.0};
  }
}

namespace {

json units_json() {
  return json{{"age", "months"},
              {"acuity", "MAR (Snellen denominator / 20)"},
              {"contrast", "unitless [0,1]"},
              {"chroma", "unitless [0,1]"}};
}

json curve_json(const ScheduleCurve& c) {
  json points = json::array();
  for (const auto& p : c.anchors.points) points.push_back({p.age_months, p.level});
  json out{{"unit", c.anchors.dimension == Dimension::acuity ? "MAR" : "unitless"},
           {"points", std::move(points)},
           {"rms", c.rms}};
  if (const auto* lc = std::get_if<LogisticCurve>(&c.curve)) {
    out["model"] = "logistic";
    out["amplitude"] = lc->amplitude;
    out["rate"] = lc->rate;
    out["midpoint"] = lc->midpoint;
    out["floor"] = lc->floor;
    out["direction"] = lc->direction == Direction::increasing ? "increasing" : "decreasing";
  } else {
    out["model"] = "piecewise_linear";
  }
  return out;
}

AnchorTable anchors_from_json(Dimension d, const json& node) {
  const json& pts = node.is_object() ? node.at("points") : node;
  AnchorTable table{d, {}};
  for (const auto& p : pts) {
    if (!p.is_array() || p.size() != 2) {
      throw ScheduleError(std::string(to_string(d)) + " anchors: each point must be [age, level]");
    }
    table.points.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  table.validate();
  return table;
}

ScheduleCurve curve_from_json(Dimension d, const json& node) {
  AnchorTable anchors = anchors_from_json(d, node);
  if (!node.is_object() || !node.contains("model")) return ScheduleCurve::fit(std::move(anchors));
  const std::string model = node.at("model").get<std::string>();
  const double rms = node.value("rms", 0.0);
  if (model == "piecewise_linear") {
    PiecewiseLinearCurve pw{anchors.points};
    return ScheduleCurve{std::move(anchors), std::move(pw), rms};
  }
  if (model != "logistic") throw ScheduleError("unknown curve model '" + model + "'");
  LogisticCurve lc{node.at("amplitude").get<double>(), node.at("rate").get<double>(),
                   node.at("midpoint").get<double>(), node.at("floor").get<double>(),
                   maturation_direction(d)};
  if (!(lc.rate > 0.0) || lc.amplitude < 0.0) {
    throw ScheduleError(std::string(to_string(d)) + " curve: rate must be > 0 and amplitude >= 0");
  }
  return ScheduleCurve{std::move(anchors), lc, rms};
}

}  // namespace

ScheduleSet::ScheduleSet(ScheduleCurve acuity, ScheduleCurve contrast, ScheduleCurve chroma)
    : acuity_(std::move(acuity)), contrast_(std::move(contrast)), chroma_(std::move(chroma)) {
  if (acuity_.anchors.dimension != Dimension::acuity ||
      contrast_.anchors.dimension != Dimension::contrast ||
      chroma_.anchors.dimension != Dimension::chroma) {
    throw ScheduleError("ScheduleSet: curves passed in the wrong dimension slots");
  }
  fingerprint_ = sha256_hex(to_json().dump());
}

ScheduleSet ScheduleSet::from_anchors(AnchorTable acuity, AnchorTable contrast, AnchorTable chroma) {
  return ScheduleSet(ScheduleCurve::fit(std::move(acuity)), ScheduleCurve::fit(std::move(contrast)),
                     ScheduleCurve::fit(std::move(chroma)));
}

const ScheduleSet& ScheduleSet::defaults() {
  static const ScheduleSet kDefaults = from_json(json::parse(embedded::default_anchors_json()));
  return kDefaults;
}

ScheduleSet ScheduleSet::from_json(const json& doc) {
  try {
    return ScheduleSet(curve_from_json(Dimension::acuity, doc.at("acuity")),
                       curve_from_json(Dimension::contrast, doc.at("contrast")),
                       curve_from_json(Dimension::chroma, doc.at("chroma")));
  } catch (const json::exception& e) {
    throw ScheduleError(std::string("schedule document: ") + e.what());
  }
}

ScheduleSet ScheduleSet::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScheduleError("cannot open schedule file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ScheduleError("schedule file '" + path + "': " + e.what());
  }
  return from_json(doc);
}

json ScheduleSet::to_json() const {
  return json{{"schema", "dvd.schedule"},
              {"version", 1},
              {"units", units_json()},
              {"acuity", curve_json(acuity_)},
              {"contrast", curve_json(contrast_)},
              {"chroma", curve_json(chroma_)}};
}

double ScheduleSet::normalized(const ScheduleCurve& curve, double t) const {
  const double f0 = curve.raw(0.0);
  const double f1 = curve.raw(kAdultAgeMonths);
  if (f1 - f0 > 1e-12) return std::clamp((curve.raw(t) - f0) / (f1 - f0), 0.0, 1.0);
  return std::clamp(curve.raw(t), 0.0, 1.0);
}

double ScheduleSet::acuity_at(AgeMonths t) const {
  return std::max(1.0, acuity_.raw(t.clamped().months()));
}

double ScheduleSet::contrast_sensitivity_at(AgeMonths t) const {
  return normalized(contrast_, t.clamped().months());
}

double ScheduleSet::chromatic_sensitivity_at(AgeMonths t) const {
  return normalized(chroma_, t.clamped().months());
}

bool ScheduleSet::any_fallback() const {
  return acuity_.is_fallback() || contrast_.is_fallback() || chroma_.is_fallback();
}

AgeMonths epoch_to_age(const EpochClock& clock, std::int64_t epoch) {
  if (!(clock.months_per_epoch > 0.0) || !std::isfinite(clock.months_per_epoch)) {
    throw ScheduleError("epoch clock: months per epoch must be positive");
  }
  if (epoch < 0) throw ScheduleError("epoch must be non-negative");
  return AgeMonths(std::min(clock.months_per_epoch * static_cast<double>(epoch), kAdultAgeMonths));
}

std::vector<ScheduleRow> export_schedule(const ScheduleSet& s, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ScheduleError("schedule step must be > 0");
  std::vector<ScheduleRow> rows;
  const auto row_at = [&s](double age) {
    const AgeMonths t(age);
    return ScheduleRow{age, s.acuity_at(t), s.contrast_sensitivity_at(t),
                       s.chromatic_sensitivity_at(t)};
  };
  for (std::int64_t i = 0;; ++i) {
    const double age = static_cast<double>(i) * step;
    if (age > kAdultAgeMonths - 1e-9) break;
    rows.push_back(row_at(age));
  }
  rows.push_back(row_at(kAdultAgeMonths));
  return rows;
}

void write_schedule_csv(std::ostream& os, const std::vector<ScheduleRow>& rows) {
  os << "age_months,mar,contrast_sensitivity,chromatic_sensitivity\n";
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(10);
  for (const auto& r : rows) {
    os << r.age_months << ',' << r.mar << ',' << r.contrast_sensitivity << ','
       << r.chromatic_sensitivity << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace dvd
