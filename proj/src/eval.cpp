#include "vitalnet/eval.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <numeric>
#include <ostream>

#include "vitalnet/error.hpp"
#include "vitalnet/stats.hpp"

namespace vitalnet {

double accuracy(std::span<const double> probs, std::span<const int> labels, double threshold) {
  if (probs.size() != labels.size()) throw ValidationError("accuracy: probabilities and labels differ in length");
  if (probs.empty()) throw ValidationError("accuracy: no predictions");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) correct += static_cast<int>(probs[i] >= threshold) == labels[i];
  return static_cast<double>(correct) / static_cast<double>(probs.size());
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("roc_auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  const auto positives = static_cast<std::uint64_t>(std::count(labels.begin(), labels.end(), 1));
  const auto negatives = static_cast<std::uint64_t>(labels.size()) - positives;
  if (positives == 0 || negatives == 0) throw UndefinedStatistic("roc_auc: both classes must be present");

  // Twice the trapezoid area in units of (1/P)(1/N), kept in integers so the
  // result equals the pair count exactly.
  std::uint64_t tp = 0, area2 = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::uint64_t dtp = 0, dfp = 0;
    std::size_t j = i;
    for (; j < order.size() && scores[order[j]] == scores[order[i]]; ++j) (labels[order[j]] == 1 ? dtp : dfp) += 1;
    area2 += dfp * (2 * tp + dtp);
    tp += dtp;
    i = j;
  }
  return static_cast<double>(area2) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

std::vector<double> predict(const nn::ModelParams& params, const WindowedDataset& dataset) {
  std::vector<double> probs;
  probs.reserve(dataset.size());
  nn::ForwardCache cache;
  for (const auto& w : dataset.windows) probs.push_back(nn::forward(params, w.values, cache).probability);
  return probs;
}

Matrix extract_features(const nn::ModelParams& params, const WindowedDataset& dataset) {
  Matrix out(dataset.size(), nn::kFeatureUnits);
  nn::ForwardCache cache;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto features = nn::forward(params, dataset.windows[i].values, cache).features;
    std::copy(features.begin(), features.end(), out.row(i).begin());
  }
  return out;
}

Json to_json(const Metrics& m) {
  return Json{{"accuracy", m.accuracy}, {"auc", m.auc}, {"n_windows", m.n_windows}, {"threshold", m.threshold}};
}

Metrics evaluate(const nn::ModelParams& params, const WindowedDataset& dataset, const EvalOptions& options) {
  const auto probs = predict(params, dataset);
  std::vector<int> labels;
  for (const auto& w : dataset.windows) labels.push_back(w.label);

  Metrics m{0.0, 0.0, dataset.size(), options.threshold};
  if (!options.per_patient) {
    m.accuracy = accuracy(probs, labels, options.threshold);
    m.auc = roc_auc(probs, labels);
    return m;
  }

  // Patients in order of first window.
  std::vector<std::string> ids;
  std::map<std::string, std::size_t> index;
  std::vector<double> prob_sum;
  std::vector<std::size_t> votes, counts;
  std::vector<int> patient_labels;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& w = dataset.windows[i];
    auto [it, inserted] = index.try_emplace(w.patient_id, ids.size());
    if (inserted) {
      ids.push_back(w.patient_id);
      prob_sum.push_back(0.0);
      votes.push_back(0);
      counts.push_back(0);
      patient_labels.push_back(w.label);
    }
    prob_sum[it->second] += probs[i];
    votes[it->second] += probs[i] >= options.threshold;
    ++counts[it->second];
  }
  std::vector<double> mean_prob(ids.size()), vote_share(ids.size());
  for (std::size_t p = 0; p < ids.size(); ++p) {
    mean_prob[p] = prob_sum[p] / static_cast<double>(counts[p]);
    vote_share[p] = static_cast<double>(votes[p]) / static_cast<double>(counts[p]);
  }
  m.accuracy = accuracy(vote_share, patient_labels, 0.5);
  m.auc = roc_auc(mean_prob, patient_labels);
  return m;
}

WindowedDataset window_cohort(const nn::Checkpoint& checkpoint, const Cohort& cohort) {
  const auto series = resample_cohort(cohort);
  return make_windows(series, checkpoint.params.config.input_len, checkpoint.window_stride, checkpoint.channel_stats);
}

std::vector<int> default_sweep_days() {
  std::vector<int> days;
  for (int d = 2; d <= 28; d += 2) days.push_back(d);
  return days;
}

std::vector<int> parse_day_range(std::string_view text) {
  std::array<int, 3> parts{};
  std::size_t start = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto colon = text.find(':', start);
    if ((k < 2) == (colon == std::string_view::npos)) {
      throw ValidationError("day range must look like start:end:step, got '" + std::string(text) + "'");
    }
    const auto piece = text.substr(start, k < 2 ? colon - start : std::string_view::npos);
    auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), parts[k]);
    if (ec != std::errc() || ptr != piece.data() + piece.size()) {
      throw ValidationError("day range must contain integers, got '" + std::string(text) + "'");
    }
    start = colon + 1;
  }
  const auto [first, last, step] = parts;
  if (first < 1 || step < 1 || last < first) {
    throw ValidationError("day range needs 1 <= start <= end and step >= 1");
  }
  std::vector<int> days;
  for (int d = first; d <= last; d += step) days.push_back(d);
  return days;
}

std::vector<MetricsRow> day_sweep(const nn::Checkpoint& checkpoint, const Cohort& test, std::span<const int> days,
                                  const EvalOptions& options) {
  if (test.patients.empty()) throw ValidationError("day_sweep: empty test cohort");
  const auto defaults = default_sweep_days();
  if (days.empty()) days = defaults;
  std::vector<int> sorted(days.begin(), days.end());
  std::sort(sorted.begin(), sorted.end());

  const auto full = resample_cohort(test);
  std::vector<MetricsRow> rows;
  for (int n : sorted) {
    if (n < 1) throw ValidationError("day_sweep: day counts must be positive");
    std::vector<LabeledSeries> truncated;
    truncated.reserve(full.size());
    for (const auto& ls : full) {
      const auto slots_per_day = static_cast<std::size_t>(std::chrono::days(1) / ls.series.step);
      truncated.push_back({ls.patient_id, truncate_series(ls.series, static_cast<std::size_t>(n) * slots_per_day),
                           ls.label});
    }
    const auto ds = make_windows(truncated, checkpoint.params.config.input_len, checkpoint.window_stride,
                                 checkpoint.channel_stats);
    const auto m = evaluate(checkpoint.params, ds, options);
    rows.push_back({n, m.n_windows, m.accuracy, m.auc});
  }
  return rows;
}

void write_sweep(const std::vector<MetricsRow>& rows, std::ostream& out) {
  out << "days,n_windows,accuracy,auc\n";
  for (const auto& r : rows) {
    out << r.days << ',' << r.n_windows << ',' << format_fixed(r.accuracy) << ',' << format_fixed(r.auc) << '\n';
  }
}

}  // namespace vitalnet
