#include "vitalnet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "vitalnet/error.hpp"

namespace vitalnet {

namespace {

constexpr int kMaxFractionTerms = 200;
constexpr double kFractionTolerance = 1e-12;
constexpr double kTiny = 1e-300;

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double beta_fraction(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxFractionTerms; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kFractionTolerance) return h;
  }
  throw Error("incomplete beta continued fraction did not converge");
}

// I_x(a, b) given both x and 1 - x, so callers can pass an exact complement.
double incomplete_beta_split(double a, double b, double x, double one_minus_x) {
  if (x <= 0.0) return 0.0;
  if (one_minus_x <= 0.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log(one_minus_x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
  return 1.0 - front * beta_fraction(b, a, one_minus_x) / b;
}

}  // namespace

SummaryFeatures summarize(std::span<const double> values) {
  if (values.empty()) throw ValidationError("summary of an empty series");
  SummaryFeatures f;
  f.min = *std::min_element(values.begin(), values.end());
  f.max = *std::max_element(values.begin(), values.end());
  f.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - f.mean) * (v - f.mean);
  f.std = std::sqrt(sq / static_cast<double>(values.size()));
  // Rounding in the mean can land a hair outside [min, max] for constant data.
  f.mean = std::clamp(f.mean, f.min, f.max);
  return f;
}

std::array<SummaryFeatures, kChannels> summary_features(const RegularSeries& series) {
  std::array<SummaryFeatures, kChannels> out;
  std::vector<double> column(series.length());
  for (std::size_t c = 0; c < kChannels; ++c) {
    for (std::size_t t = 0; t < series.length(); ++t) column[t] = series.values(t, c);
    out[c] = summarize(column);
  }
  return out;
}

CorrelationResult point_biserial(std::span<const double> x, std::span<const int> y) {
  if (x.size() != y.size()) throw ValidationError("point_biserial: x and y differ in length");
  if (x.size() < 3) throw ValidationError("point_biserial: need at least 3 observations");

  const std::size_t n = x.size();
  double sum1 = 0.0, sum0 = 0.0;
  std::size_t n1 = 0, n0 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] == 1) {
      sum1 += x[i];
      ++n1;
    } else if (y[i] == 0) {
      sum0 += x[i];
      ++n0;
    } else {
      throw ValidationError("point_biserial: labels must be 0 or 1");
    }
  }
  if (n1 == 0 || n0 == 0) throw UndefinedStatistic("point_biserial: both label values must be present");

  const double mean = (sum1 + sum0) / static_cast<double>(n);
  double sq = 0.0;
  for (double v : x) sq += (v - mean) * (v - mean);
  const double s_n = std::sqrt(sq / static_cast<double>(n));
  if (!(s_n > 0.0)) throw UndefinedStatistic("point_biserial: x is constant");

  const double m1 = sum1 / static_cast<double>(n1);
  const double m0 = sum0 / static_cast<double>(n0);
  const double dn = static_cast<double>(n);
  double r = (m1 - m0) / s_n * std::sqrt(static_cast<double>(n1) * static_cast<double>(n0) / (dn * dn));
  r = std::clamp(r, -1.0, 1.0);

  CorrelationResult out{r, 0.0, n};
  const double df = dn - 2.0;
  if (std::fabs(r) < 1.0) {
    const double t = r * std::sqrt(df / (1.0 - r * r));
    out.p = std::min(1.0, 2.0 * t_sf(std::fabs(t), df));
  }
  return out;
}

Interval confidence_interval(std::span<const double> values, double level) {
  if (values.size() < 2) throw ValidationError("confidence_interval: need at least 2 values");
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence_interval: level must be in (0, 1)");
  const auto n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  const double s = std::sqrt(sq / (n - 1.0));
  if (s == 0.0) return {mean, mean};
  const double half = t_quantile((1.0 + level) / 2.0, n - 1.0) * s / std::sqrt(n);
  return {mean - half, mean + half};
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw ValidationError("incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("incomplete_beta: x outside [0, 1]");
  return incomplete_beta_split(a, b, x, 1.0 - x);
}

double t_sf(double t, double df) {
  if (!(df > 0.0)) throw ValidationError("t_sf: df must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  if (t == 0.0) return 0.5;
  const double t2 = t * t;
  // P(|T| > |t|) = I_{df/(df+t^2)}(df/2, 1/2)
  const double two_sided = incomplete_beta_split(df / 2.0, 0.5, df / (df + t2), t2 / (df + t2));
  return t > 0.0 ? 0.5 * two_sided : 1.0 - 0.5 * two_sided;
}

double t_cdf(double t, double df) { return t_sf(-t, df); }

double t_quantile(double prob, double df) {
  if (!(prob > 0.0 && prob < 1.0)) throw ValidationError("t_quantile: prob must be in (0, 1)");
  if (prob == 0.5) return 0.0;
  if (prob < 0.5) return -t_quantile(1.0 - prob, df);
  double lo = 0.0, hi = 1.0;
  while (t_cdf(hi, df) < prob) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw Error("t_quantile: bracket overflow");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    (t_cdf(mid, df) < prob ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("quantile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto below = static_cast<std::size_t>(std::floor(pos));
  const std::size_t above = std::min(below + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(below);
  return sorted[below] + frac * (sorted[above] - sorted[below]);
}

BoxPlotStats box_plot_stats(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  BoxPlotStats b;
  b.q1 = quantile_sorted(sorted, 0.25);
  b.median = quantile_sorted(sorted, 0.5);
  b.q3 = quantile_sorted(sorted, 0.75);
  const double iqr = b.q3 - b.q1;
  const double fence_lo = b.q1 - 1.5 * iqr;
  const double fence_hi = b.q3 + 1.5 * iqr;
  b.whisker_lo = *std::find_if(sorted.begin(), sorted.end(), [&](double v) { return v >= fence_lo; });
  b.whisker_hi = *std::find_if(sorted.rbegin(), sorted.rend(), [&](double v) { return v <= fence_hi; });
  return b;
}

std::vector<PatientFeatures> patient_features(const Cohort& cohort) {
  std::vector<PatientFeatures> out;
  out.reserve(cohort.patients.size());
  for (const auto& p : cohort.patients) {
    out.push_back({p.patient_id, p.label, p.age, summary_features(resample(p))});
  }
  return out;
}

double feature_value(const SummaryFeatures& f, std::size_t feature) {
  switch (feature) {
    case 0: return f.mean;
    case 1: return f.std;
    case 2: return f.min;
    case 3: return f.max;
  }
  throw ValidationError("unknown feature index");
}

std::vector<FeatureRow> feature_table(const Cohort& cohort) {
  const auto features = patient_features(cohort);
  std::vector<int> labels;
  for (const auto& f : features) labels.push_back(f.label);

  auto make_row = [&](std::string vital, std::string feature, const std::vector<double>& x) {
    std::vector<double> pos, neg;
    for (std::size_t i = 0; i < x.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(x[i]);
    return FeatureRow{std::move(vital), std::move(feature), point_biserial(x, labels),
                      confidence_interval(pos), confidence_interval(neg)};
  };

  std::vector<FeatureRow> rows;
  // Table order: HR, DBP, SBP.
  for (std::size_t channel : {std::size_t{0}, std::size_t{2}, std::size_t{1}}) {
    for (std::size_t k = 0; k < kFeatureNames.size(); ++k) {
      std::vector<double> x;
      for (const auto& f : features) x.push_back(feature_value(f.vitals[channel], k));
      rows.push_back(make_row(std::string(kChannelNames[channel]), kFeatureNames[k], x));
    }
  }
  std::vector<double> ages;
  for (const auto& f : features) ages.push_back(f.age);
  rows.push_back(make_row("Age", "years", ages));
  return rows;
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos) s = s.substr(s.front() == '-' ? 1 : 0);
  return s;
}

void write_feature_table(const std::vector<FeatureRow>& rows, std::ostream& out) {
  out << "vital,feature,r,p,ci_lo_pos,ci_hi_pos,ci_lo_neg,ci_hi_neg\n";
  for (const auto& row : rows) {
    out << row.vital << ',' << row.feature << ',' << format_fixed(row.correlation.r) << ','
        << format_fixed(row.correlation.p) << ',' << format_fixed(row.ci_positive.lo) << ','
        << format_fixed(row.ci_positive.hi) << ',' << format_fixed(row.ci_negative.lo) << ','
        << format_fixed(row.ci_negative.hi) << '\n';
  }
}

std::array<BoxPlotStats, 2> resting_hr_box_plots(const Cohort& cohort) {
  std::array<std::vector<double>, 2> resting;
  for (const auto& f : patient_features(cohort)) resting[f.label].push_back(f.vitals[0].min);
  std::array<BoxPlotStats, 2> out;
  for (int label = 0; label < 2; ++label) {
    if (resting[label].empty()) throw ValidationError("box plot needs both labels present");
    out[label] = box_plot_stats(resting[label]);
  }
  return out;
}

void write_box_plots(const std::array<BoxPlotStats, 2>& boxes, std::ostream& out) {
  out << "label,q1,median,q3,whisker_lo,whisker_hi\n";
  for (int label = 0; label < 2; ++label) {
    const auto& b = boxes[label];
    out << label << ',' << format_fixed(b.q1) << ',' << format_fixed(b.median) << ',' << format_fixed(b.q3)
        << ',' << format_fixed(b.whisker_lo) << ',' << format_fixed(b.whisker_hi) << '\n';
  }
}

}  // namespace vitalnet
