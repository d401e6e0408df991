#include "vitalnet/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "vitalnet/error.hpp"
#include "vitalnet/rng.hpp"

namespace vitalnet {

namespace {

using namespace std::chrono;

bool parse_digits(std::string_view text, int& out) {
  if (text.empty()) return false;
  for (char ch : text) {
    if (ch < '0' || ch > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::size_t Cohort::count_label(int label) const {
  return static_cast<std::size_t>(std::count_if(
      patients.begin(), patients.end(), [label](const PatientRecord& p) { return p.label == label; }));
}

TimePoint parse_timestamp(std::string_view text) {
  // YYYY-MM-DDTHH:MM:SSZ
  if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
      text[13] != ':' || text[16] != ':' || text[19] != 'Z') {
    throw ParseError(0, "bad timestamp '" + std::string(text) + "'");
  }
  int y, mo, d, h, mi, s;
  if (!parse_digits(text.substr(0, 4), y) || !parse_digits(text.substr(5, 2), mo) ||
      !parse_digits(text.substr(8, 2), d) || !parse_digits(text.substr(11, 2), h) ||
      !parse_digits(text.substr(14, 2), mi) || !parse_digits(text.substr(17, 2), s)) {
    throw ParseError(0, "bad timestamp '" + std::string(text) + "'");
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
    throw ParseError(0, "bad timestamp '" + std::string(text) + "'");
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

std::string format_timestamp(TimePoint t) {
  const auto day_start = floor<days>(t);
  const year_month_day ymd{day_start};
  const hh_mm_ss hms{t - day_start};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

void validate_sample(const VitalSample& s) {
  for (std::size_t c = 0; c < kChannels; ++c) {
    const double v = s.channel(c);
    if (!std::isfinite(v) || v <= 0.0) {
      throw ValidationError(std::string(kChannelNames[c]) + " must be finite and positive at " +
                            format_timestamp(s.timestamp));
    }
  }
  if (!(s.dbp < s.sbp)) {
    throw ValidationError("dbp (" + format_double(s.dbp) + ") must be below sbp (" +
                          format_double(s.sbp) + ") at " + format_timestamp(s.timestamp));
  }
}

void validate_record(const PatientRecord& record) {
  if (record.samples.empty()) {
    throw ValidationError("patient " + record.patient_id + " has no samples");
  }
  if (record.label != 0 && record.label != 1) {
    throw ValidationError("patient " + record.patient_id + " label must be 0 or 1");
  }
  if (record.age < 21 || record.age > 100) {
    throw ValidationError("patient " + record.patient_id + " age outside 21-100");
  }
  for (std::size_t i = 0; i < record.samples.size(); ++i) {
    validate_sample(record.samples[i]);
    if (i > 0 && !(record.samples[i - 1].timestamp < record.samples[i].timestamp)) {
      throw ValidationError("patient " + record.patient_id + " samples not strictly increasing at " +
                            format_timestamp(record.samples[i].timestamp));
    }
  }
}

void validate_cohort(const Cohort& cohort) {
  std::set<std::string> seen;
  for (const auto& p : cohort.patients) {
    if (!seen.insert(p.patient_id).second) {
      throw ValidationError("duplicate patient_id " + p.patient_id);
    }
    validate_record(p);
  }
}

Cohort read_cohort(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "empty cohort file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (line != kCohortHeader) {
    throw ParseError(1, "header must be '" + std::string(kCohortHeader) + "'");
  }

  Cohort cohort;
  std::unordered_map<std::string, std::size_t> index;
  // Source line of each sample, for error messages after sorting.
  std::vector<std::vector<std::size_t>> sample_lines;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 7) {
      throw ParseError(line_no, "expected 7 fields, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw ParseError(line_no, "empty patient_id");

    VitalSample s;
    try {
      s.timestamp = parse_timestamp(fields[1]);
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.what());
    }
    if (!parse_double(fields[2], s.hr)) throw ParseError(line_no, "non-numeric hr");
    if (!parse_double(fields[3], s.sbp)) throw ParseError(line_no, "non-numeric sbp");
    if (!parse_double(fields[4], s.dbp)) throw ParseError(line_no, "non-numeric dbp");
    int age = 0, label = 0;
    if (!parse_digits(fields[5], age)) throw ParseError(line_no, "non-integer age");
    if (!parse_digits(fields[6], label) || label > 1) throw ParseError(line_no, "label must be 0 or 1");

    try {
      validate_sample(s);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }

    const std::string id(fields[0]);
    auto [it, inserted] = index.try_emplace(id, cohort.patients.size());
    if (inserted) {
      cohort.patients.push_back(PatientRecord{id, age, label, {}});
      sample_lines.emplace_back();
    }
    auto& record = cohort.patients[it->second];
    if (record.age != age || record.label != label) {
      throw ValidationError("line " + std::to_string(line_no) + ": age/label differ from earlier rows of " + id);
    }
    record.samples.push_back(s);
    sample_lines[it->second].push_back(line_no);
  }

  for (std::size_t p = 0; p < cohort.patients.size(); ++p) {
    auto& samples = cohort.patients[p].samples;
    auto& lines = sample_lines[p];
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return samples[a].timestamp < samples[b].timestamp; });
    std::vector<VitalSample> sorted;
    sorted.reserve(samples.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (k > 0 && samples[order[k]].timestamp == samples[order[k - 1]].timestamp) {
        throw ValidationError("line " + std::to_string(lines[order[k]]) + ": duplicate timestamp " +
                              format_timestamp(samples[order[k]].timestamp) + " for patient " +
                              cohort.patients[p].patient_id);
      }
      sorted.push_back(samples[order[k]]);
    }
    samples = std::move(sorted);
  }
  validate_cohort(cohort);
  return cohort;
}

Cohort load_cohort(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open cohort file " + path.string());
  return read_cohort(in);
}

void write_cohort(const Cohort& cohort, std::ostream& out) {
  out << kCohortHeader << '\n';
  for (const auto& p : cohort.patients) {
    for (const auto& s : p.samples) {
      out << p.patient_id << ',' << format_timestamp(s.timestamp) << ',' << format_double(s.hr) << ','
          << format_double(s.sbp) << ',' << format_double(s.dbp) << ',' << p.age << ',' << p.label << '\n';
    }
  }
}

void save_cohort(const Cohort& cohort, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  write_cohort(cohort, out);
}

RegularSeries resample(const PatientRecord& record, std::chrono::seconds step) {
  if (record.samples.empty()) throw ValidationError("cannot resample an empty record");
  if (step.count() <= 0) throw ValidationError("resample step must be positive");

  const TimePoint first = record.samples.front().timestamp;
  const TimePoint last = record.samples.back().timestamp;
  const auto slots = static_cast<std::size_t>((last - first) / step) + 1;

  Matrix sums(slots, kChannels);
  std::vector<std::size_t> counts(slots, 0);
  for (const auto& s : record.samples) {
    const auto slot = static_cast<std::size_t>((s.timestamp - first) / step);
    for (std::size_t c = 0; c < kChannels; ++c) sums(slot, c) += s.channel(c);
    ++counts[slot];
  }

  RegularSeries out{first, step, Matrix(slots, kChannels)};
  std::ptrdiff_t last_filled = -1;
  for (std::size_t t = 0; t < slots; ++t) {
    if (counts[t] > 0) {
      for (std::size_t c = 0; c < kChannels; ++c) out.values(t, c) = sums(t, c) / static_cast<double>(counts[t]);
      last_filled = static_cast<std::ptrdiff_t>(t);
    } else if (last_filled >= 0) {
      for (std::size_t c = 0; c < kChannels; ++c) out.values(t, c) = out.values(last_filled, c);
    }
  }
  // Slot 0 always holds the first sample, so the back-fill pass has nothing to do.
  return out;
}

std::vector<LabeledSeries> resample_cohort(const Cohort& cohort, std::chrono::seconds step) {
  std::vector<LabeledSeries> out;
  out.reserve(cohort.patients.size());
  for (const auto& p : cohort.patients) out.push_back({p.patient_id, resample(p, step), p.label});
  return out;
}

RegularSeries truncate_series(const RegularSeries& series, std::size_t slots) {
  if (slots >= series.length()) return series;
  RegularSeries out{series.start, series.step, Matrix(slots, series.values.cols())};
  std::copy_n(series.values.data().begin(), slots * series.values.cols(), out.values.data().begin());
  return out;
}

ChannelStats compute_channel_stats(std::span<const RegularSeries> train) {
  if (train.empty()) throw ValidationError("channel stats need at least one series");
  ChannelStats stats;
  std::size_t cells = 0;
  for (const auto& s : train) {
    for (std::size_t t = 0; t < s.length(); ++t) {
      for (std::size_t c = 0; c < kChannels; ++c) stats.mean[c] += s.values(t, c);
    }
    cells += s.length();
  }
  if (cells == 0) throw ValidationError("channel stats need at least one grid cell");
  for (auto& m : stats.mean) m /= static_cast<double>(cells);

  std::array<double, kChannels> sq{};
  for (const auto& s : train) {
    for (std::size_t t = 0; t < s.length(); ++t) {
      for (std::size_t c = 0; c < kChannels; ++c) {
        const double d = s.values(t, c) - stats.mean[c];
        sq[c] += d * d;
      }
    }
  }
  for (std::size_t c = 0; c < kChannels; ++c) {
    stats.std[c] = std::sqrt(sq[c] / static_cast<double>(cells));
    if (!(stats.std[c] > 0.0)) {
      throw ValidationError(std::string("zero-variance channel ") + std::string(kChannelNames[c]) +
                            " (degenerate cohort)");
    }
  }
  return stats;
}

ChannelStats compute_channel_stats(std::span<const LabeledSeries> train) {
  std::vector<RegularSeries> series;
  series.reserve(train.size());
  for (const auto& s : train) series.push_back(s.series);
  return compute_channel_stats(std::span<const RegularSeries>(series));
}

WindowedDataset make_windows(std::span<const LabeledSeries> series, std::size_t window_len,
                             std::size_t stride, const ChannelStats& stats) {
  if (window_len < 1) throw ValidationError("window_len must be at least 1");
  if (stride < 1) throw ValidationError("stride must be at least 1");

  WindowedDataset ds;
  ds.window_len = window_len;
  ds.channel_stats = stats;

  auto normalized = [&](const RegularSeries& s, std::size_t t, std::size_t c) {
    return (s.values(t, c) - stats.mean[c]) / stats.std[c];
  };

  for (const auto& ls : series) {
    const auto& s = ls.series;
    const std::size_t T = s.length();
    if (T >= window_len) {
      for (std::size_t start = 0; start + window_len <= T; start += stride) {
        Window w{ls.patient_id, Matrix(window_len, kChannels), ls.label, false};
        for (std::size_t t = 0; t < window_len; ++t) {
          for (std::size_t c = 0; c < kChannels; ++c) w.values(t, c) = normalized(s, start + t, c);
        }
        ds.windows.push_back(std::move(w));
      }
    } else {
      Window w{ls.patient_id, Matrix(window_len, kChannels), ls.label, true};
      const std::size_t pad = window_len - T;
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t c = 0; c < kChannels; ++c) w.values(pad + t, c) = normalized(s, t, c);
      }
      ds.windows.push_back(std::move(w));
    }
  }
  return ds;
}

std::pair<Cohort, Cohort> split_by_patient(const Cohort& cohort, double train_fraction,
                                           std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train_fraction must lie strictly between 0 and 1");
  }
  std::array<std::vector<std::string>, 2> ids;
  for (const auto& p : cohort.patients) ids[p.label].push_back(p.patient_id);
  for (int label = 0; label < 2; ++label) {
    if (ids[label].size() < 2) {
      throw ValidationError("cohort too small to stratify: need at least 2 patients with label " +
                            std::to_string(label));
    }
  }

  Rng rng(seed);
  std::set<std::string> train_ids;
  for (auto& group : ids) {
    std::sort(group.begin(), group.end());
    rng.shuffle(std::span<std::string>(group));
    const auto n = static_cast<double>(group.size());
    auto n_train = static_cast<std::size_t>(std::llround(n * train_fraction));
    n_train = std::clamp<std::size_t>(n_train, 1, group.size() - 1);
    train_ids.insert(group.begin(), group.begin() + static_cast<std::ptrdiff_t>(n_train));
  }

  std::pair<Cohort, Cohort> out;
  for (const auto& p : cohort.patients) {
    (train_ids.count(p.patient_id) ? out.first : out.second).patients.push_back(p);
  }
  return out;
}

}  // namespace vitalnet
