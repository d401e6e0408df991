#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "test_support.hpp"
#include "vitalnet/data_model.hpp"
#include "vitalnet/error.hpp"
#include "vitalnet/synth.hpp"

namespace vitalnet {
namespace {

using testing::at_hour;
using testing::make_patient;

constexpr const char* kTwoRows =
    "patient_id,timestamp,hr,sbp,dbp,age,label\n"
    "P001,2020-03-21T00:00:00Z,80,120,70,55,1\n"
    "P001,2020-03-21T01:00:00Z,82.5,118,68,55,1\n";

TEST(Timestamp, RoundTrip) {
  const TimePoint t = parse_timestamp("2020-07-01T13:45:09Z");
  EXPECT_EQ(format_timestamp(t), "2020-07-01T13:45:09Z");
  EXPECT_EQ(parse_timestamp("2020-03-21T01:00:00Z"), at_hour(1));
}

TEST(Timestamp, RejectsOtherForms) {
  EXPECT_THROW(parse_timestamp("2020-07-01 13:45:09"), ParseError);
  EXPECT_THROW(parse_timestamp("2020-02-30T00:00:00Z"), ParseError);
  EXPECT_THROW(parse_timestamp("2020-07-01T25:00:00Z"), ParseError);
}

TEST(ReadCohort, TwoRowsOnePatient) {
  std::istringstream in(kTwoRows);
  const Cohort c = read_cohort(in);
  ASSERT_EQ(c.patients.size(), 1u);
  EXPECT_EQ(c.patients[0].patient_id, "P001");
  EXPECT_EQ(c.patients[0].age, 55);
  EXPECT_EQ(c.patients[0].label, 1);
  ASSERT_EQ(c.patients[0].samples.size(), 2u);
  EXPECT_DOUBLE_EQ(c.patients[0].samples[1].hr, 82.5);
}

TEST(ReadCohort, DiastolicAboveSystolicCitesRow) {
  std::istringstream in(
      "patient_id,timestamp,hr,sbp,dbp,age,label\n"
      "P001,2020-03-21T00:00:00Z,80,120,70,55,1\n"
      "P001,2020-03-21T01:00:00Z,80,80,90,55,1\n");
  try {
    read_cohort(in);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ReadCohort, MalformedInputs) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_cohort(in);
  };
  const std::string header = "patient_id,timestamp,hr,sbp,dbp,age,label\n";
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("id,time,hr\n"), ParseError);
  EXPECT_THROW(parse(header + "P1,2020-03-21T00:00:00Z,abc,120,70,55,1\n"), ParseError);
  EXPECT_THROW(parse(header + "P1,2020-03-21T00:00:00Z,80,120,70,55\n"), ParseError);
  EXPECT_THROW(parse(header + "P1,2020-03-21T00:00:00Z,80,120,70,55,2\n"), ParseError);
  EXPECT_THROW(parse(header + "P1,2020-03-21T00:00:00Z,-80,120,70,55,1\n"), ValidationError);
  EXPECT_THROW(parse(header + "P1,2020-03-21T00:00:00Z,80,120,70,15,1\n"), ValidationError);
  // Same patient with two different labels.
  EXPECT_THROW(parse(header + "P1,2020-03-21T00:00:00Z,80,120,70,55,1\n"
                              "P1,2020-03-21T01:00:00Z,80,120,70,55,0\n"),
               ValidationError);
  EXPECT_THROW(parse(header + "P1,2020-03-21T00:00:00Z,80,120,70,55,1\n"
                              "P1,2020-03-21T00:00:00Z,81,120,70,55,1\n"),
               ValidationError);
}

TEST(ReadCohort, ParseErrorCarriesLine) {
  std::istringstream in(std::string(kTwoRows) + "P001,not-a-time,80,120,70,55,1\n");
  try {
    read_cohort(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(ReadCohort, SortsSamplesAndAcceptsCrlf) {
  std::istringstream in(
      "patient_id,timestamp,hr,sbp,dbp,age,label\r\n"
      "P1,2020-03-21T02:00:00Z,90,120,70,55,0\r\n"
      "P1,2020-03-21T00:00:00Z,80,120,70,55,0\r\n");
  const Cohort c = read_cohort(in);
  ASSERT_EQ(c.patients[0].samples.size(), 2u);
  EXPECT_EQ(c.patients[0].samples[0].hr, 80.0);
}

TEST(WriteCohort, RoundTripReproducesRows) {
  std::istringstream in(kTwoRows);
  std::ostringstream out;
  write_cohort(read_cohort(in), out);
  EXPECT_EQ(out.str(), kTwoRows);
}

TEST(WriteCohort, SyntheticCohortRoundTrips) {
  const Cohort c = generate_cohort(default_synth_config());
  std::ostringstream first;
  write_cohort(c, first);
  std::istringstream in(first.str());
  const Cohort back = read_cohort(in);
  ASSERT_EQ(back.patients.size(), 70u);
  EXPECT_EQ(back.count_label(1), 32u);
  EXPECT_EQ(back.count_label(0), 38u);
  std::ostringstream second;
  write_cohort(back, second);
  EXPECT_EQ(first.str(), second.str());
}

TEST(ValidateRecord, Invariants) {
  EXPECT_THROW(validate_record(PatientRecord{"P", 50, 1, {}}), ValidationError);
  auto p = make_patient("P", 1, {80, 81});
  p.samples[1].timestamp = p.samples[0].timestamp;
  EXPECT_THROW(validate_record(p), ValidationError);
  Cohort dup{{make_patient("P", 1, {80}), make_patient("P", 0, {80})}};
  EXPECT_THROW(validate_cohort(dup), ValidationError);
}

TEST(Resample, QuarterHourSamplesAverageIntoOneSlot) {
  const auto p = make_patient("P", 1, {80, 82, 84, 86}, 15);
  const RegularSeries s = resample(p);
  ASSERT_EQ(s.length(), 1u);
  EXPECT_DOUBLE_EQ(s.values(0, 0), 83.0);
}

TEST(Resample, SingleSampleIsIdentity) {
  const auto p = make_patient("P", 0, {77}, 60, 130, 80);
  const RegularSeries s = resample(p);
  ASSERT_EQ(s.length(), 1u);
  EXPECT_EQ(s.values(0, 0), 77.0);
  EXPECT_EQ(s.values(0, 1), 130.0);
  EXPECT_EQ(s.values(0, 2), 80.0);
  EXPECT_EQ(s.start, p.samples[0].timestamp);
}

TEST(Resample, GapIsForwardFilled) {
  auto p = make_patient("P", 0, {70, 90}, 120);
  const RegularSeries s = resample(p);
  ASSERT_EQ(s.length(), 3u);
  EXPECT_EQ(s.values(1, 0), 70.0);
  EXPECT_EQ(s.values(2, 0), 90.0);
}

TEST(Resample, LengthAndFinitenessOnSyntheticCohort) {
  const Cohort c = generate_cohort(default_synth_config());
  for (const auto& p : c.patients) {
    const RegularSeries s = resample(p);
    const auto span = p.samples.back().timestamp - p.samples.front().timestamp;
    EXPECT_EQ(s.length(), static_cast<std::size_t>(span / kDefaultStep) + 1);
    for (double v : s.values.data()) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(Truncate, KeepsLeadingSlots) {
  const RegularSeries s = resample(make_patient("P", 0, {1, 2, 3, 4, 5}));
  const RegularSeries t = truncate_series(s, 2);
  ASSERT_EQ(t.length(), 2u);
  EXPECT_EQ(t.values(1, 0), 2.0);
  EXPECT_EQ(truncate_series(s, 99).length(), 5u);
}

std::vector<LabeledSeries> hr_series(const std::vector<double>& hr) {
  auto p = make_patient("P", 1, hr);
  for (std::size_t i = 0; i < hr.size(); ++i) {
    p.samples[i].sbp = 110.0 + static_cast<double>(i);
    p.samples[i].dbp = 60.0 + static_cast<double>(i % 3);
  }
  return {{"P", resample(p), 1}};
}

TEST(ChannelStats, ConstantChannelRejected) {
  const auto series = hr_series({80, 80, 80});
  EXPECT_THROW(compute_channel_stats(std::span<const LabeledSeries>(series)), ValidationError);
}

TEST(ChannelStats, TwoPointPopulationStd) {
  const auto series = hr_series({70, 90});
  const ChannelStats st = compute_channel_stats(std::span<const LabeledSeries>(series));
  EXPECT_DOUBLE_EQ(st.mean[0], 80.0);
  EXPECT_DOUBLE_EQ(st.std[0], 10.0);
}

TEST(ChannelStats, NormalizedTrainSetIsStandard) {
  const Cohort c = generate_cohort(default_synth_config());
  const auto series = resample_cohort(c);
  const ChannelStats st = compute_channel_stats(std::span<const LabeledSeries>(series));
  // Window length 1, stride 1 visits every grid cell exactly once.
  const WindowedDataset ds = make_windows(series, 1, 1, st);
  for (std::size_t ch = 0; ch < kChannels; ++ch) {
    double sum = 0.0, sq = 0.0;
    for (const auto& w : ds.windows) sum += w.values(0, ch);
    const double mean = sum / static_cast<double>(ds.size());
    for (const auto& w : ds.windows) sq += (w.values(0, ch) - mean) * (w.values(0, ch) - mean);
    EXPECT_LT(std::fabs(mean), 1e-9);
    EXPECT_LT(std::fabs(std::sqrt(sq / static_cast<double>(ds.size())) - 1.0), 1e-9);
  }
}

TEST(MakeWindows, CountFollowsStride) {
  std::vector<double> hr(240);
  for (std::size_t i = 0; i < hr.size(); ++i) hr[i] = 70.0 + static_cast<double>(i % 7);
  const auto series = hr_series(hr);
  const ChannelStats st = compute_channel_stats(std::span<const LabeledSeries>(series));
  const WindowedDataset ds = make_windows(series, 48, 24, st);
  EXPECT_EQ(ds.size(), 9u);
  EXPECT_EQ(ds.window_len, 48u);
  for (const auto& w : ds.windows) {
    EXPECT_EQ(w.label, 1);
    EXPECT_FALSE(w.padded);
  }
  // Second window starts 24 slots in.
  EXPECT_DOUBLE_EQ(ds.windows[1].values(0, 0), (hr[24] - st.mean[0]) / st.std[0]);
}

TEST(MakeWindows, ShortSeriesIsFrontPadded) {
  std::vector<double> hr = {70, 72, 74, 76, 78, 80, 82, 84, 86, 88};
  const auto series = hr_series(hr);
  const ChannelStats st = compute_channel_stats(std::span<const LabeledSeries>(series));
  const WindowedDataset ds = make_windows(series, 48, 24, st);
  ASSERT_EQ(ds.size(), 1u);
  const Window& w = ds.windows[0];
  EXPECT_TRUE(w.padded);
  for (std::size_t t = 0; t < 38; ++t) {
    for (std::size_t c = 0; c < kChannels; ++c) EXPECT_EQ(w.values(t, c), 0.0);
  }
  EXPECT_DOUBLE_EQ(w.values(38, 0), (70.0 - st.mean[0]) / st.std[0]);
  EXPECT_DOUBLE_EQ(w.values(47, 0), (88.0 - st.mean[0]) / st.std[0]);
}

TEST(MakeWindows, WindowsInheritLabel) {
  const Cohort c = testing::random_cohort(2, 2, 100, 5);
  const auto series = resample_cohort(c);
  const ChannelStats st = compute_channel_stats(std::span<const LabeledSeries>(series));
  const WindowedDataset ds = make_windows(series, 48, 24, st);
  for (const auto& w : ds.windows) {
    const auto& p = *std::find_if(c.patients.begin(), c.patients.end(),
                                  [&](const PatientRecord& r) { return r.patient_id == w.patient_id; });
    EXPECT_EQ(w.label, p.label);
  }
}

TEST(Split, DefaultCohortSizes) {
  const Cohort c = generate_cohort(default_synth_config());
  const auto [train, test] = split_by_patient(c, 0.8, 42);
  EXPECT_EQ(train.patients.size(), 56u);
  EXPECT_EQ(test.patients.size(), 14u);
  EXPECT_GE(test.count_label(0), 2u);
  EXPECT_GE(test.count_label(1), 2u);
}

TEST(Split, Deterministic) {
  const Cohort c = generate_cohort(default_synth_config());
  const auto a = split_by_patient(c, 0.8, 9);
  const auto b = split_by_patient(c, 0.8, 9);
  std::ostringstream sa, sb;
  write_cohort(a.second, sa);
  write_cohort(b.second, sb);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Split, PartitionsPatientsForAnySeed) {
  const Cohort c = generate_cohort(default_synth_config());
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto [train, test] = split_by_patient(c, 0.8, seed);
    std::set<std::string> seen;
    for (const auto* part : {&train, &test}) {
      for (const auto& p : part->patients) EXPECT_TRUE(seen.insert(p.patient_id).second);
    }
    EXPECT_EQ(seen.size(), c.patients.size());
    EXPECT_GE(test.count_label(0), 2u);
    EXPECT_GE(test.count_label(1), 2u);
  }
}

TEST(Split, RejectsTinyOrBadInput) {
  const Cohort c = testing::random_cohort(1, 5, 3, 1);
  EXPECT_THROW(split_by_patient(c, 0.8, 1), ValidationError);
  const Cohort ok = testing::random_cohort(2, 2, 3, 1);
  EXPECT_THROW(split_by_patient(ok, 1.0, 1), ValidationError);
  const auto [train, test] = split_by_patient(ok, 0.8, 1);
  EXPECT_EQ(train.patients.size(), 2u);
  EXPECT_EQ(test.patients.size(), 2u);
}

}  // namespace
}  // namespace vitalnet
