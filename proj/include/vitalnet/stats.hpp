#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vitalnet/data_model.hpp"

namespace vitalnet {

struct SummaryFeatures {
  double mean = 0.0;
  double std = 0.0;  // population (divisor n)
  double min = 0.0;
  double max = 0.0;
};

struct CorrelationResult {
  double r = 0.0;
  double p = 1.0;  // two-sided
  std::size_t n = 0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool overlaps(const Interval& other) const { return lo <= other.hi && other.lo <= hi; }
  bool contains(double v) const { return lo <= v && v <= hi; }
};

SummaryFeatures summarize(std::span<const double> values);

// Per-channel (HR, SBP, DBP) summary of a grid series.
std::array<SummaryFeatures, kChannels> summary_features(const RegularSeries& series);

// Pearson correlation of x with labels coded {0, 1}, with a two-sided p-value
// from the t distribution on n - 2 degrees of freedom.
CorrelationResult point_biserial(std::span<const double> x, std::span<const int> y);

// Student-t interval for the mean, sample std (divisor n - 1).
Interval confidence_interval(std::span<const double> values, double level = 0.95);

// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);

// Upper tail P(T > t) of Student's t with `df` degrees of freedom.
double t_sf(double t, double df);
double t_cdf(double t, double df);
// Inverse of t_cdf.
double t_quantile(double prob, double df);

// Linear-interpolation quantile of sorted data (q in [0, 1]).
double quantile_sorted(std::span<const double> sorted, double q);

struct BoxPlotStats {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_lo = 0.0;  // most extreme points within 1.5 IQR of the box
  double whisker_hi = 0.0;
};

BoxPlotStats box_plot_stats(std::span<const double> values);

// Per-patient summary features, one row per patient in cohort order.
struct PatientFeatures {
  std::string patient_id;
  int label = 0;
  int age = 0;
  std::array<SummaryFeatures, kChannels> vitals;  // HR, SBP, DBP
};

std::vector<PatientFeatures> patient_features(const Cohort& cohort);

inline constexpr std::array<const char*, 4> kFeatureNames = {"mean", "std", "min", "max"};
double feature_value(const SummaryFeatures& f, std::size_t feature);

// Correlation with the label plus per-group 95% CIs for one feature.
struct FeatureRow {
  std::string vital;    // HR, DBP, SBP or Age
  std::string feature;  // mean/std/min/max, "years" for Age
  CorrelationResult correlation;
  Interval ci_positive;
  Interval ci_negative;
};

// Rows in the order HR, DBP, SBP (each mean/std/min/max) followed by Age.
std::vector<FeatureRow> feature_table(const Cohort& cohort);

// CSV: vital,feature,r,p,ci_lo_pos,ci_hi_pos,ci_lo_neg,ci_hi_neg
void write_feature_table(const std::vector<FeatureRow>& rows, std::ostream& out);

// Resting (minimum) HR per patient, box-plot statistics per label.
// CSV: label,q1,median,q3,whisker_lo,whisker_hi
std::array<BoxPlotStats, 2> resting_hr_box_plots(const Cohort& cohort);
void write_box_plots(const std::array<BoxPlotStats, 2>& boxes, std::ostream& out);

// Fixed-precision number formatting shared by the CSV writers.
std::string format_fixed(double v, int digits = 6);

}  // namespace vitalnet
