#include "vitalnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "vitalnet/error.hpp"
#include "vitalnet/rng.hpp"

namespace vitalnet {

namespace {

constexpr std::array<const char*, 2> kLabelKeys = {"negative", "positive"};

// Physiological clipping bounds, HR / SBP / DBP.
constexpr std::array<double, kChannels> kLower = {30.0, 60.0, 20.0};
constexpr std::array<double, kChannels> kUpper = {200.0, 250.0, 150.0};
constexpr double kMinPulsePressure = 10.0;

constexpr double kCircadianPeakHour = 16.0;
constexpr int kAdmissionSpreadDays = 30;

VitalTargets targets(Interval mean, Interval std, Interval min, Interval max) { return {mean, std, min, max}; }

Json interval_json(const Interval& i) { return Json::array({i.lo, i.hi}); }

Interval interval_from(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("interval must be a [lo, hi] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

// Splits `total` into parts proportional to `weights` (largest remainder).
std::vector<int> allocate(int total, const std::vector<double>& weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<int> parts(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = total * weights[i] / sum;
    parts[i] = static_cast<int>(std::floor(exact));
    assigned += parts[i];
    remainders.emplace_back(exact - parts[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; k < total - assigned; ++k) ++parts[remainders[static_cast<std::size_t>(k)].second];
  return parts;
}

double round_tenth(double v) { return std::round(v * 10.0) / 10.0; }

struct StayPlan {
  int rows = 0;
  int cadence_minutes = 60;
};

// Chooses a cadence so the stay lasts as close to `target_days` as the row
// budget allows, preferring cadences that keep the stay inside the range.
StayPlan plan_stay(int rows, double target_days, const SynthConfig& config) {
  StayPlan best{rows, config.cadence_minutes.front()};
  double best_score = INFINITY;
  for (int cadence : config.cadence_minutes) {
    const double days = rows * cadence / 1440.0;
    const double outside = std::max({0.0, config.duration_days.lo - days, days - config.duration_days.hi});
    const double score = outside * 1e6 + std::fabs(days - target_days);
    if (score < best_score) {
      best_score = score;
      best.cadence_minutes = cadence;
    }
  }
  return best;
}

PatientRecord generate_patient(std::string id, int age, int label, StayPlan plan, const SynthConfig& config,
                               Rng& rng) {
  const auto& profile = config.labels[label];
  PatientRecord record{std::move(id), age, label, {}};
  record.samples.resize(static_cast<std::size_t>(plan.rows));

  const TimePoint admission_from = parse_timestamp(profile.admission_from);
  const auto start = admission_from + std::chrono::days(rng.below(kAdmissionSpreadDays)) +
                     std::chrono::hours(rng.below(24));
  const auto cadence = std::chrono::minutes(plan.cadence_minutes);
  const double lag_hours = plan.cadence_minutes / 60.0;
  const double phi = std::pow(config.ar_coefficient, lag_hours);
  const double innovation = std::sqrt(1.0 - phi * phi);
  const double start_hour = std::chrono::duration<double, std::ratio<3600>>(
                                start - std::chrono::floor<std::chrono::days>(start))
                                .count();

  std::array<double, kChannels> level{}, noise{};
  for (std::size_t c = 0; c < kChannels; ++c) {
    const auto& d = profile.dynamics[c];
    level[c] = rng.normal(d.center, d.latent_sd);
    noise[c] = rng.normal(0.0, d.noise_sd);
  }

  for (std::size_t k = 0; k < record.samples.size(); ++k) {
    auto& s = record.samples[k];
    s.timestamp = start + static_cast<int>(k) * cadence;
    const double hour = start_hour + static_cast<double>(k) * lag_hours;
    const double circadian = std::sin(2.0 * std::numbers::pi * (hour - kCircadianPeakHour + 6.0) / 24.0);
    std::array<double, kChannels> v{};
    for (std::size_t c = 0; c < kChannels; ++c) {
      const auto& d = profile.dynamics[c];
      if (k > 0) noise[c] = phi * noise[c] + innovation * rng.normal(0.0, d.noise_sd);
      v[c] = std::clamp(level[c] + d.circadian_amplitude * circadian + noise[c], kLower[c], kUpper[c]);
      v[c] = round_tenth(v[c]);
    }
    s.hr = v[0];
    s.sbp = v[1];
    s.dbp = std::min(v[2], round_tenth(v[1] - kMinPulsePressure));
  }
  return record;
}

}  // namespace

const Interval& VitalTargets::get(std::size_t feature) const {
  switch (feature) {
    case 0: return mean;
    case 1: return std;
    case 2: return min;
    case 3: return max;
  }
  throw ValidationError("unknown feature index");
}

SynthConfig default_synth_config() {
  SynthConfig c;
  c.age_bins = {
      {21, 40, {5, 3}, {2650, 1913}},
      {41, 60, {10, 11}, {6556, 6528}},
      {61, 80, {20, 14}, {12430, 7518}},
      {81, 100, {3, 4}, {1421, 3490}},
  };

  auto& neg = c.labels[0];
  neg.targets[0] = targets({82.60, 91.36}, {11.71, 15.85}, {50.19, 60.28}, {129.36, 152.74});
  neg.targets[1] = targets({111.04, 122.78}, {17.07, 20.94}, {49.17, 64.19}, {180.86, 215.91});
  // Reference negative-group DBP min interval arrives reversed; stored ordered.
  neg.targets[2] = targets({52.68, 58.90}, {8.07, 10.36}, {23.19, 23.96}, {107.60, 150.02});
  neg.dynamics[0] = {89.8, 1.5, 3.0, 13.2};
  neg.dynamics[1] = {116.91, 2.0, 6.0, 17.5};
  neg.dynamics[2] = {55.79, 1.5, 3.0, 8.7};
  neg.resting_hr = 55.23;
  neg.admission_from = "2020-07-01T00:00:00Z";

  auto& pos = c.labels[1];
  pos.targets[0] = targets({75.78, 86.18}, {13.50, 17.39}, {44.04, 52.07}, {123.17, 144.57});
  pos.targets[1] = targets({113.95, 120.83}, {17.56, 21.47}, {53.59, 69.59}, {180.64, 204.98});
  pos.targets[2] = targets({55.09, 60.47}, {7.83, 9.56}, {29.56, 36.93}, {91.83, 110.78});
  pos.dynamics[0] = {78.5, 1.5, 15.0, 9.0};
  pos.dynamics[1] = {117.39, 2.0, 6.0, 18.0};
  pos.dynamics[2] = {57.78, 1.5, 3.0, 8.2};
  pos.resting_hr = 48.06;
  pos.admission_from = "2020-03-21T00:00:00Z";
  return c;
}

void validate_config(const SynthConfig& config) {
  if (config.age_bins.empty()) throw ValidationError("synth config: no age bins");
  int total = 0;
  for (const auto& bin : config.age_bins) {
    if (bin.age_lo < 21 || bin.age_hi > 100 || bin.age_lo > bin.age_hi) {
      throw ValidationError("synth config: age bin " + std::to_string(bin.age_lo) + "-" +
                            std::to_string(bin.age_hi) + " outside 21-100 or reversed");
    }
    for (int label = 0; label < 2; ++label) {
      if (bin.patients[label] < 0 || bin.samples[label] < 0) {
        throw ValidationError("synth config: negative patient or sample count");
      }
      if (bin.samples[label] > 0 && bin.samples[label] < bin.patients[label]) {
        throw ValidationError("synth config: fewer samples than patients in an age bin");
      }
      total += bin.patients[label];
    }
  }
  if (total == 0) throw ValidationError("synth config: zero patients");
  if (!(config.duration_days.lo > 0.0 && config.duration_days.lo < config.duration_days.hi)) {
    throw ValidationError("synth config: duration range must be positive with lo < hi");
  }
  if (config.cadence_minutes.empty()) throw ValidationError("synth config: empty cadence set");
  for (int cadence : config.cadence_minutes) {
    if (cadence <= 0) throw ValidationError("synth config: cadence must be positive");
  }
  if (!(config.ar_coefficient >= 0.0 && config.ar_coefficient < 1.0)) {
    throw ValidationError("synth config: ar_coefficient must be in [0, 1)");
  }
  for (int label = 0; label < 2; ++label) {
    const auto& p = config.labels[label];
    for (std::size_t c = 0; c < kChannels; ++c) {
      for (std::size_t f = 0; f < kFeatureNames.size(); ++f) {
        const auto& ci = p.targets[c].get(f);
        if (!(ci.lo < ci.hi)) {
          throw ValidationError(std::string("synth config: ") + kLabelKeys[label] + " " +
                                std::string(kChannelNames[c]) + " " + kFeatureNames[f] + " interval has lo >= hi");
        }
      }
      if (!(p.targets[c].min.lo <= p.targets[c].max.hi)) {
        throw ValidationError("synth config: min interval lies above max interval");
      }
      const auto& d = p.dynamics[c];
      if (d.latent_sd < 0.0 || d.noise_sd < 0.0 || d.circadian_amplitude < 0.0) {
        throw ValidationError("synth config: dynamics parameters must be non-negative");
      }
      if (!p.targets[c].mean.contains(d.center)) {
        throw ValidationError(std::string("synth config: ") + kLabelKeys[label] + " " +
                              std::string(kChannelNames[c]) + " center lies outside its mean interval");
      }
    }
    parse_timestamp(p.admission_from);
  }
}

Json to_json(const SynthConfig& config) {
  Json doc;
  doc["seed"] = config.seed;
  doc["duration_days"] = interval_json(config.duration_days);
  doc["cadence_minutes"] = config.cadence_minutes;
  doc["ar_coefficient"] = config.ar_coefficient;
  doc["resting_hr_tolerance"] = config.resting_hr_tolerance;
  doc["age_bins"] = Json::array();
  for (const auto& bin : config.age_bins) {
    doc["age_bins"].push_back({{"age", {bin.age_lo, bin.age_hi}},
                               {"patients", {{"negative", bin.patients[0]}, {"positive", bin.patients[1]}}},
                               {"samples", {{"negative", bin.samples[0]}, {"positive", bin.samples[1]}}}});
  }
  for (int label = 0; label < 2; ++label) {
    const auto& p = config.labels[label];
    Json profile;
    profile["resting_hr"] = p.resting_hr;
    profile["admission_from"] = p.admission_from;
    for (std::size_t c = 0; c < kChannels; ++c) {
      Json vital;
      for (std::size_t f = 0; f < kFeatureNames.size(); ++f) vital["ci"][kFeatureNames[f]] = interval_json(p.targets[c].get(f));
      vital["center"] = p.dynamics[c].center;
      vital["latent_sd"] = p.dynamics[c].latent_sd;
      vital["circadian_amplitude"] = p.dynamics[c].circadian_amplitude;
      vital["noise_sd"] = p.dynamics[c].noise_sd;
      profile["vitals"][std::string(kChannelNames[c])] = vital;
    }
    doc["labels"][kLabelKeys[label]] = profile;
  }
  return doc;
}

SynthConfig synth_config_from_json(const Json& doc) {
  SynthConfig c;
  try {
    c.seed = doc.at("seed").get<std::uint64_t>();
    c.duration_days = interval_from(doc.at("duration_days"));
    c.cadence_minutes = doc.at("cadence_minutes").get<std::vector<int>>();
    c.ar_coefficient = doc.at("ar_coefficient").get<double>();
    c.resting_hr_tolerance = doc.value("resting_hr_tolerance", 5.0);
    for (const auto& bin : doc.at("age_bins")) {
      AgeBin b;
      b.age_lo = bin.at("age").at(0).get<int>();
      b.age_hi = bin.at("age").at(1).get<int>();
      for (int label = 0; label < 2; ++label) {
        b.patients[label] = bin.at("patients").at(kLabelKeys[label]).get<int>();
        b.samples[label] = bin.contains("samples") ? bin.at("samples").at(kLabelKeys[label]).get<int>() : 0;
      }
      c.age_bins.push_back(b);
    }
    for (int label = 0; label < 2; ++label) {
      const auto& profile = doc.at("labels").at(kLabelKeys[label]);
      auto& p = c.labels[label];
      p.resting_hr = profile.at("resting_hr").get<double>();
      p.admission_from = profile.at("admission_from").get<std::string>();
      for (std::size_t ch = 0; ch < kChannels; ++ch) {
        const auto& vital = profile.at("vitals").at(std::string(kChannelNames[ch]));
        const auto& ci = vital.at("ci");
        p.targets[ch] = targets(interval_from(ci.at("mean")), interval_from(ci.at("std")),
                                interval_from(ci.at("min")), interval_from(ci.at("max")));
        p.dynamics[ch] = {vital.at("center").get<double>(), vital.at("latent_sd").get<double>(),
                          vital.at("circadian_amplitude").get<double>(), vital.at("noise_sd").get<double>()};
      }
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("synth config: ") + e.what());
  }
  validate_config(c);
  return c;
}

Cohort generate_cohort(const SynthConfig& config) {
  validate_config(config);
  Rng rng(config.seed);
  Cohort cohort;
  int next_id = 1;
  for (const auto& bin : config.age_bins) {
    for (int label = 0; label < 2; ++label) {
      const int n = bin.patients[label];
      if (n == 0) continue;
      std::vector<double> weights(static_cast<std::size_t>(n));
      for (auto& w : weights) w = rng.uniform(0.6, 1.4);
      const auto rows = bin.samples[label] > 0 ? allocate(bin.samples[label], weights) : std::vector<int>{};

      for (int i = 0; i < n; ++i) {
        const int age = bin.age_lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(bin.age_hi - bin.age_lo + 1)));
        const double target_days = rng.uniform(config.duration_days.lo, config.duration_days.hi);
        StayPlan plan;
        if (rows.empty()) {
          plan.cadence_minutes = config.cadence_minutes[rng.below(config.cadence_minutes.size())];
          plan.rows = std::max(1, static_cast<int>(std::lround(target_days * 1440.0 / plan.cadence_minutes)));
        } else {
          plan = plan_stay(rows[static_cast<std::size_t>(i)], target_days, config);
        }
        char id[16];
        std::snprintf(id, sizeof id, "P%03d", next_id++);
        cohort.patients.push_back(generate_patient(id, age, label, plan, config, rng));
      }
    }
  }
  return cohort;
}

const CalibrationCell& CalibrationReport::cell(std::string_view vital, std::string_view statistic, int label) const {
  for (const auto& c : cells) {
    if (c.vital == vital && c.statistic == statistic && c.label == label) return c;
  }
  throw ValidationError("no calibration cell for " + std::string(vital) + " " + std::string(statistic));
}

bool CalibrationReport::means_overlap() const {
  for (const auto& c : cells) {
    if (c.statistic == "mean" && !c.overlaps) return false;
  }
  return true;
}

bool CalibrationReport::resting_hr_ok() const {
  return resting_hr[0].within && resting_hr[1].within;
}

CalibrationReport check_calibration(const Cohort& cohort, const SynthConfig& reference) {
  if (cohort.patients.empty()) throw ValidationError("calibration needs a non-empty cohort");
  if (cohort.count_label(0) < 2 || cohort.count_label(1) < 2) {
    throw ValidationError("calibration needs at least two patients per label");
  }
  const auto features = patient_features(cohort);
  CalibrationReport report;
  for (std::size_t c = 0; c < kChannels; ++c) {
    for (std::size_t f = 0; f < kFeatureNames.size(); ++f) {
      for (int label = 0; label < 2; ++label) {
        std::vector<double> values;
        for (const auto& pf : features) {
          if (pf.label == label) values.push_back(feature_value(pf.vitals[c], f));
        }
        CalibrationCell cell{std::string(kChannelNames[c]), kFeatureNames[f], label, confidence_interval(values),
                             reference.labels[label].targets[c].get(f), false};
        cell.overlaps = cell.cohort_ci.overlaps(cell.reference_ci);
        report.cells.push_back(cell);
      }
    }
  }
  for (int label = 0; label < 2; ++label) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& pf : features) {
      if (pf.label == label) {
        sum += pf.vitals[0].min;
        ++n;
      }
    }
    auto& check = report.resting_hr[label];
    check.label = label;
    check.cohort_mean = sum / static_cast<double>(n);
    check.reference = reference.labels[label].resting_hr;
    check.tolerance = reference.resting_hr_tolerance;
    check.within = std::fabs(check.cohort_mean - check.reference) <= check.tolerance;
  }
  return report;
}

Json to_json(const CalibrationReport& report) {
  Json doc;
  doc["cells"] = Json::array();
  for (const auto& c : report.cells) {
    doc["cells"].push_back({{"vital", c.vital},
                            {"statistic", c.statistic},
                            {"label", c.label},
                            {"cohort_ci", interval_json(c.cohort_ci)},
                            {"reference_ci", interval_json(c.reference_ci)},
                            {"overlaps", c.overlaps}});
  }
  doc["resting_hr"] = Json::array();
  for (const auto& r : report.resting_hr) {
    doc["resting_hr"].push_back({{"label", r.label},
                                 {"cohort_mean", r.cohort_mean},
                                 {"reference", r.reference},
                                 {"tolerance", r.tolerance},
                                 {"within", r.within}});
  }
  doc["means_overlap"] = report.means_overlap();
  doc["resting_hr_ok"] = report.resting_hr_ok();
  return doc;
}

}  // namespace vitalnet
