#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vitalnet/matrix.hpp"

namespace vitalnet {

using TimePoint = std::chrono::sys_seconds;

inline constexpr std::size_t kChannels = 3;  // HR, SBP, DBP
inline constexpr std::array<std::string_view, kChannels> kChannelNames = {"HR", "SBP", "DBP"};
inline constexpr std::chrono::seconds kDefaultStep = std::chrono::hours(1);
inline constexpr std::string_view kCohortHeader = "patient_id,timestamp,hr,sbp,dbp,age,label";

struct VitalSample {
  TimePoint timestamp;
  double hr = 0.0;
  double sbp = 0.0;
  double dbp = 0.0;

  double channel(std::size_t c) const { return c == 0 ? hr : c == 1 ? sbp : dbp; }
};

struct PatientRecord {
  std::string patient_id;
  int age = 0;
  int label = 0;  // 1 = positive test result
  std::vector<VitalSample> samples;
};

struct Cohort {
  std::vector<PatientRecord> patients;

  std::size_t count_label(int label) const;
};

// Vitals on a fixed time grid; values is T x 3 (HR, SBP, DBP).
struct RegularSeries {
  TimePoint start;
  std::chrono::seconds step = kDefaultStep;
  Matrix values;

  std::size_t length() const { return values.rows(); }
};

struct LabeledSeries {
  std::string patient_id;
  RegularSeries series;
  int label = 0;
};

struct ChannelStats {
  std::array<double, kChannels> mean{};
  std::array<double, kChannels> std{};
};

struct Window {
  std::string patient_id;
  Matrix values;  // window_len x 3, normalized
  int label = 0;
  bool padded = false;
};

struct WindowedDataset {
  std::vector<Window> windows;
  std::size_t window_len = 0;
  ChannelStats channel_stats;

  std::size_t size() const { return windows.size(); }
  bool empty() const { return windows.empty(); }
};

// ISO-8601 UTC instants of the form 2020-03-21T14:00:00Z.
TimePoint parse_timestamp(std::string_view text);
std::string format_timestamp(TimePoint t);

// Throws ValidationError describing the first violated invariant.
void validate_sample(const VitalSample& s);
void validate_record(const PatientRecord& record);
void validate_cohort(const Cohort& cohort);

// Cohort CSV. Rows are grouped by patient_id in order of first appearance and
// samples sorted by timestamp.
Cohort read_cohort(std::istream& in);
Cohort load_cohort(const std::filesystem::path& path);
void write_cohort(const Cohort& cohort, std::ostream& out);
void save_cohort(const Cohort& cohort, const std::filesystem::path& path);

// Bins samples into [slot, slot + step) cells anchored at the first sample and
// averages each cell. Empty cells are forward-filled, then back-filled.
RegularSeries resample(const PatientRecord& record, std::chrono::seconds step = kDefaultStep);
std::vector<LabeledSeries> resample_cohort(const Cohort& cohort,
                                           std::chrono::seconds step = kDefaultStep);

// First `slots` grid cells of the series (the whole series if shorter).
RegularSeries truncate_series(const RegularSeries& series, std::size_t slots);

// Pooled per-channel mean and population std over every grid cell.
ChannelStats compute_channel_stats(std::span<const RegularSeries> train);
ChannelStats compute_channel_stats(std::span<const LabeledSeries> train);

// Sliding windows per patient, z-scored with `stats`. A series shorter than
// window_len yields one window, zero-padded at the front.
WindowedDataset make_windows(std::span<const LabeledSeries> series, std::size_t window_len,
                             std::size_t stride, const ChannelStats& stats);

// Stratified, patient-level split. Returns (train, test).
std::pair<Cohort, Cohort> split_by_patient(const Cohort& cohort, double train_fraction,
                                           std::uint64_t seed);

}  // namespace vitalnet
