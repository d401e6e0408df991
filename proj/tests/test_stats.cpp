#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <numeric>
#include <sstream>

#include "test_support.hpp"
#include "vitalnet/error.hpp"
#include "vitalnet/rng.hpp"
#include "vitalnet/stats.hpp"

namespace vitalnet {
namespace {

double pearson(std::span<const double> x, std::span<const int> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

TEST(Summarize, Examples) {
  const std::vector<double> constant = {80, 80, 80};
  const auto c = summarize(constant);
  EXPECT_EQ(c.mean, 80.0);
  EXPECT_EQ(c.std, 0.0);
  EXPECT_EQ(c.min, 80.0);
  EXPECT_EQ(c.max, 80.0);

  const std::vector<double> two = {70, 90};
  const auto t = summarize(two);
  EXPECT_EQ(t.mean, 80.0);
  EXPECT_EQ(t.std, 10.0);
  EXPECT_EQ(t.min, 70.0);
  EXPECT_EQ(t.max, 90.0);

  const std::vector<double> four = {1, 2, 3, 4};
  EXPECT_NEAR(summarize(four).std, 1.118034, 1e-6);
  EXPECT_THROW(summarize(std::vector<double>{}), ValidationError);
}

TEST(SummaryFeatures, PerChannel) {
  const auto s = resample(testing::make_patient("P", 1, {70, 90}, 60, 120, 60));
  const auto f = summary_features(s);
  EXPECT_EQ(f[0].mean, 80.0);
  EXPECT_EQ(f[1].mean, 120.0);
  EXPECT_EQ(f[2].max, 60.0);
}

TEST(PointBiserial, HandExample) {
  const std::vector<double> x = {1, 2, 3, 4};
  const std::vector<int> y = {0, 0, 1, 1};
  const auto r = point_biserial(x, y);
  EXPECT_NEAR(r.r, 0.894427, 1e-6);
  // df = 2 closed form: two-sided p = 1 - t / sqrt(2 + t^2).
  const double t = r.r * std::sqrt(2.0 / (1.0 - r.r * r.r));
  EXPECT_NEAR(r.p, 1.0 - t / std::sqrt(2.0 + t * t), 1e-12);
  EXPECT_NEAR(r.p, 0.105573, 1e-6);
  EXPECT_EQ(r.n, 4u);
}

TEST(PointBiserial, PerfectSeparation) {
  const std::vector<double> x = {1, 1, 2, 2};
  const std::vector<int> y = {0, 0, 1, 1};
  const auto r = point_biserial(x, y);
  EXPECT_EQ(r.r, 1.0);
  EXPECT_EQ(r.p, 0.0);
}

TEST(PointBiserial, UndefinedCases) {
  const std::vector<int> y = {0, 1, 0, 1};
  EXPECT_THROW(point_biserial(std::vector<double>{5, 5, 5, 5}, y), UndefinedStatistic);
  EXPECT_THROW(point_biserial(std::vector<double>{1, 2, 3, 4}, std::vector<int>{1, 1, 1, 1}), UndefinedStatistic);
  EXPECT_THROW(point_biserial(std::vector<double>{1, 2, 3}, y), ValidationError);
}

TEST(PointBiserial, MatchesPearsonOnRandomInputs) {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 3 + rng.below(198);
    std::vector<double> x(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng.below(2));
      x[i] = rng.normal(50.0 + 5.0 * y[i], 10.0);
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_NEAR(point_biserial(x, y).r, pearson(x, y), 1e-12);
  }
}

TEST(PointBiserial, AffineAndLabelSwapProperties) {
  Rng rng(4);
  std::vector<double> x(40);
  std::vector<int> y(40), swapped(40);
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = static_cast<int>(i % 2);
    swapped[i] = 1 - y[i];
    x[i] = rng.normal(y[i] * 2.0, 3.0);
  }
  const auto base = point_biserial(x, y);
  for (double a : {2.5, -0.7}) {
    std::vector<double> ax(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) ax[i] = a * x[i] + 13.0;
    const auto r = point_biserial(ax, y);
    EXPECT_NEAR(r.r, a > 0 ? base.r : -base.r, 1e-12);
    EXPECT_NEAR(r.p, base.p, 1e-12);
  }
  const auto s = point_biserial(x, swapped);
  EXPECT_NEAR(s.r, -base.r, 1e-12);
  EXPECT_NEAR(s.p, base.p, 1e-12);
}

TEST(StudentT, ClosedForms) {
  EXPECT_DOUBLE_EQ(t_sf(0.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(t_sf(0.0, 17.0), 0.5);
  EXPECT_NEAR(t_sf(1.0, 1.0), 0.25, 1e-12);
  EXPECT_NEAR(t_sf(2.828427, 2.0), 0.052786, 1e-6);
  EXPECT_NEAR(t_sf(-1.0, 1.0), 0.75, 1e-12);
  EXPECT_NEAR(t_cdf(1.0, 1.0), 0.75, 1e-12);
}

TEST(StudentT, AgreesWithBoost) {
  for (double df : {1.0, 2.0, 3.5, 10.0, 68.0, 500.0}) {
    const boost::math::students_t dist(df);
    for (double t : {-6.0, -2.0, -0.3, 0.1, 1.0, 2.5, 8.0, 40.0}) {
      const double expected = boost::math::cdf(boost::math::complement(dist, t));
      EXPECT_NEAR(t_sf(t, df), expected, 1e-12 + 1e-10 * expected) << "df=" << df << " t=" << t;
    }
    for (double p : {0.025, 0.5, 0.9, 0.975}) {
      EXPECT_NEAR(t_quantile(p, df), boost::math::quantile(dist, p), 1e-8) << "df=" << df << " p=" << p;
    }
  }
}

TEST(StudentT, QuantileHandValue) { EXPECT_NEAR(t_quantile(0.975, 4.0), 2.7764, 1e-4); }

TEST(IncompleteBeta, Boundaries) {
  EXPECT_EQ(incomplete_beta(2.0, 3.0, 0.0), 0.0);
  EXPECT_EQ(incomplete_beta(2.0, 3.0, 1.0), 1.0);
  // I_x(1, 1) = x.
  EXPECT_NEAR(incomplete_beta(1.0, 1.0, 0.3), 0.3, 1e-14);
  EXPECT_THROW(incomplete_beta(-1.0, 1.0, 0.5), ValidationError);
}

TEST(ConfidenceInterval, Examples) {
  const std::vector<double> fives = {5, 5, 5, 5};
  const auto z = confidence_interval(fives);
  EXPECT_EQ(z.lo, 5.0);
  EXPECT_EQ(z.hi, 5.0);

  const std::vector<double> v = {10, 12, 14, 16, 18};
  const auto ci = confidence_interval(v);
  EXPECT_NEAR(ci.lo, 10.0736, 1e-4);
  EXPECT_NEAR(ci.hi, 17.9264, 1e-4);
  EXPECT_THROW(confidence_interval(std::vector<double>{1.0}), ValidationError);
}

TEST(ConfidenceInterval, WidthShrinksWithRootN) {
  Rng rng(8);
  std::vector<double> v(200);
  for (double& x : v) x = rng.normal(80.0, 10.0);
  std::vector<double> v4;
  for (int k = 0; k < 4; ++k) v4.insert(v4.end(), v.begin(), v.end());
  const auto a = confidence_interval(v);
  const auto b = confidence_interval(v4);
  EXPECT_NEAR((b.hi - b.lo) / (a.hi - a.lo), 0.5, 0.01);
}

TEST(Quantiles, LinearInterpolation) {
  const std::vector<double> s = {1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile_sorted(s, 1.0), 4.0);
}

TEST(BoxPlot, WhiskersStopAtFences) {
  const std::vector<double> v = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto b = box_plot_stats(v);
  EXPECT_EQ(b.q1, 3.0);
  EXPECT_EQ(b.median, 5.0);
  EXPECT_EQ(b.q3, 7.0);
  EXPECT_EQ(b.whisker_lo, 1.0);
  EXPECT_EQ(b.whisker_hi, 9.0);

  const std::vector<double> outlier = {1, 2, 3, 4, 5, 6, 7, 8, 100};
  EXPECT_EQ(box_plot_stats(outlier).whisker_hi, 8.0);
}

TEST(FeatureTable, LayoutAndValues) {
  const Cohort c = testing::random_cohort(5, 6, 12, 2);
  const auto rows = feature_table(c);
  ASSERT_EQ(rows.size(), 13u);
  EXPECT_EQ(rows[0].vital, "HR");
  EXPECT_EQ(rows[4].vital, "DBP");
  EXPECT_EQ(rows[8].vital, "SBP");
  EXPECT_EQ(rows[3].feature, "max");
  EXPECT_EQ(rows[12].vital, "Age");
  EXPECT_EQ(rows[12].feature, "years");
  // Positives run faster, so mean HR correlates positively with the label.
  EXPECT_GT(rows[0].correlation.r, 0.8);
  EXPECT_GT(rows[0].ci_positive.lo, rows[0].ci_negative.hi);

  std::ostringstream out;
  write_feature_table(rows, out);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "vital,feature,r,p,ci_lo_pos,ci_hi_pos,ci_lo_neg,ci_hi_neg");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 14);
}

TEST(BoxPlot, RestingHrPerLabel) {
  const Cohort c = testing::random_cohort(5, 6, 12, 2);
  const auto boxes = resting_hr_box_plots(c);
  EXPECT_GT(boxes[1].median, boxes[0].median);
  std::ostringstream out;
  write_box_plots(boxes, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "label,q1,median,q3,whisker_lo,whisker_hi");
}

TEST(FormatFixed, NormalizesNegativeZero) {
  EXPECT_EQ(format_fixed(-0.0), "0.000000");
  EXPECT_EQ(format_fixed(-1e-9), "0.000000");
  EXPECT_EQ(format_fixed(1.5, 2), "1.50");
}

}  // namespace
}  // namespace vitalnet
