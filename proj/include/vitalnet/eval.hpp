#pragma once

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "vitalnet/config.hpp"
#include "vitalnet/data_model.hpp"
#include "vitalnet/nn/checkpoint.hpp"
#include "vitalnet/nn/model.hpp"

namespace vitalnet {

// Share of windows where (p >= threshold) matches the label.
double accuracy(std::span<const double> probs, std::span<const int> labels, double threshold = 0.5);

// Trapezoidal ROC area over distinct score thresholds; equal to the
// Mann-Whitney pair statistic with ties counted one half.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

std::vector<double> predict(const nn::ModelParams& params, const WindowedDataset& dataset);

// Dense1 activations, one row of nn::kFeatureUnits per window.
Matrix extract_features(const nn::ModelParams& params, const WindowedDataset& dataset);

struct Metrics {
  double accuracy = 0.0;
  double auc = 0.0;
  std::size_t n_windows = 0;
  double threshold = 0.5;
};

Json to_json(const Metrics& m);

struct EvalOptions {
  double threshold = 0.5;
  // Aggregate windows per patient: mean probability for AUC, majority vote
  // (ties positive) for accuracy.
  bool per_patient = false;
};

Metrics evaluate(const nn::ModelParams& params, const WindowedDataset& dataset, const EvalOptions& options = {});

// Windows a test cohort with the checkpoint's preprocessing.
WindowedDataset window_cohort(const nn::Checkpoint& checkpoint, const Cohort& cohort);

struct MetricsRow {
  int days = 0;
  std::size_t n_windows = 0;
  double accuracy = 0.0;
  double auc = 0.0;
};

std::vector<int> default_sweep_days();  // 2, 4, ..., 28
// "start:end:step", end included when aligned.
std::vector<int> parse_day_range(std::string_view text);

// For each N, truncates every patient to the first N days of grid slots
// (anchored at the patient's first observation), re-windows, and scores.
std::vector<MetricsRow> day_sweep(const nn::Checkpoint& checkpoint, const Cohort& test,
                                  std::span<const int> days = {}, const EvalOptions& options = {});

// CSV: days,n_windows,accuracy,auc
void write_sweep(const std::vector<MetricsRow>& rows, std::ostream& out);

}  // namespace vitalnet
