#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vitalnet/config.hpp"
#include "vitalnet/data_model.hpp"
#include "vitalnet/stats.hpp"

namespace vitalnet {

// Patient and observation counts for one age range, indexed by label
// (0 = negative, 1 = positive). A zero sample count lets durations and
// cadence alone determine the number of rows.
struct AgeBin {
  int age_lo = 21;
  int age_hi = 100;
  std::array<int, 2> patients{};
  std::array<int, 2> samples{};
};

// Reference 95% intervals of the per-patient summary features.
struct VitalTargets {
  Interval mean, std, min, max;

  const Interval& get(std::size_t feature) const;
};

// Per-patient generative parameters of one vital.
struct VitalDynamics {
  double center = 0.0;     // mean of the per-patient latent level
  double latent_sd = 0.0;  // between-patient sd of that level
  double circadian_amplitude = 0.0;
  double noise_sd = 0.0;   // stationary sd of the AR(1) component
};

struct LabelProfile {
  std::array<VitalTargets, kChannels> targets;    // HR, SBP, DBP
  std::array<VitalDynamics, kChannels> dynamics;  // HR, SBP, DBP
  double resting_hr = 0.0;                        // reference mean of per-patient min HR
  std::string admission_from;                     // ISO-8601, earliest stay start
};

struct SynthConfig {
  std::vector<AgeBin> age_bins;
  std::array<LabelProfile, 2> labels;
  Interval duration_days{3.0, 28.0};
  std::vector<int> cadence_minutes{15, 30, 60};
  double ar_coefficient = 0.9;  // at one-hour lag
  double resting_hr_tolerance = 5.0;
  std::uint64_t seed = 42;
};

SynthConfig default_synth_config();
void validate_config(const SynthConfig& config);
Json to_json(const SynthConfig& config);
SynthConfig synth_config_from_json(const Json& doc);

// Deterministic in the config (including its seed).
Cohort generate_cohort(const SynthConfig& config);

struct CalibrationCell {
  std::string vital;
  std::string statistic;
  int label = 0;
  Interval cohort_ci;
  Interval reference_ci;
  bool overlaps = false;
};

struct RestingHrCheck {
  int label = 0;
  double cohort_mean = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool within = false;
};

struct CalibrationReport {
  std::vector<CalibrationCell> cells;  // 3 vitals x 4 statistics x 2 labels
  std::array<RestingHrCheck, 2> resting_hr;

  const CalibrationCell& cell(std::string_view vital, std::string_view statistic, int label) const;
  // Mean HR, mean SBP and mean DBP overlap for both labels.
  bool means_overlap() const;
  bool resting_hr_ok() const;
};

// Compares the cohort's per-label 95% CIs of per-patient features with the
// reference intervals held in `reference`.
CalibrationReport check_calibration(const Cohort& cohort, const SynthConfig& reference = default_synth_config());
Json to_json(const CalibrationReport& report);

}  // namespace vitalnet
