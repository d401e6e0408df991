#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "vitalnet/data_model.hpp"
#include "vitalnet/rng.hpp"

namespace vitalnet::testing {

inline TimePoint at_hour(int hour, int minute = 0) {
  using namespace std::chrono;
  return TimePoint{sys_days{year{2020} / 3 / 21}} + hours(hour) + minutes(minute);
}

// One sample every `step_minutes`, HR taken from `hr`, SBP/DBP fixed.
inline PatientRecord make_patient(std::string id, int label, const std::vector<double>& hr, int step_minutes = 60,
                                  double sbp = 120.0, double dbp = 70.0, int age = 50) {
  PatientRecord p{std::move(id), age, label, {}};
  for (std::size_t i = 0; i < hr.size(); ++i) {
    p.samples.push_back({at_hour(0, static_cast<int>(i) * step_minutes), hr[i], sbp, dbp});
  }
  return p;
}

// Patients with `hours` hourly samples of noisy vitals; positives run 15 bpm
// faster.
inline Cohort random_cohort(int positives, int negatives, int hours, std::uint64_t seed) {
  Rng rng(seed);
  Cohort cohort;
  int next = 1;
  for (int label : {1, 0}) {
    for (int k = 0; k < (label ? positives : negatives); ++k) {
      PatientRecord p{"Q" + std::to_string(next++), 40 + k, label, {}};
      for (int h = 0; h < hours; ++h) {
        p.samples.push_back({at_hour(h), (label ? 95.0 : 80.0) + rng.normal(0.0, 5.0), 120.0 + rng.normal(0.0, 8.0),
                             65.0 + rng.normal(0.0, 4.0)});
      }
      cohort.patients.push_back(std::move(p));
    }
  }
  return cohort;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("vitalnet_test_" + std::to_string(::getpid()) + "_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Largest |a - n| / max(|a|, |n|, floor) between an analytic gradient and
// central differences of `loss` with respect to `x`.
inline double max_fd_error(std::vector<double>& x, std::span<const double> analytic,
                           const std::function<double()>& loss, double step = 1e-5, double floor = 1e-4) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double up = loss();
    x[i] = saved - step;
    const double down = loss();
    x[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric), floor});
    worst = std::max(worst, std::fabs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace vitalnet::testing
