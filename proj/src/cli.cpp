#include "vitalnet/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <optional>
#include <ostream>

#include "vitalnet/config.hpp"
#include "vitalnet/data_model.hpp"
#include "vitalnet/error.hpp"
#include "vitalnet/eval.hpp"
#include "vitalnet/nn/checkpoint.hpp"
#include "vitalnet/nn/train.hpp"
#include "vitalnet/plot.hpp"
#include "vitalnet/stats.hpp"
#include "vitalnet/synth.hpp"
#include "vitalnet/tsne.hpp"

namespace vitalnet::cli {

namespace {

using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

struct Manifest {
  std::string subcommand;
  Json config = Json::object();
  Json inputs = Json::object();
  Json outputs = Json::object();
  std::optional<std::uint64_t> seed;
};

void write_manifest(const Manifest& m, const fs::path& primary_output, Clock::time_point started) {
  const double seconds = std::chrono::duration<double>(Clock::now() - started).count();
  Json doc{{"subcommand", m.subcommand}, {"config", m.config},   {"inputs", m.inputs},
           {"outputs", m.outputs},       {"version", kVersion}, {"duration_seconds", seconds}};
  doc["seed"] = m.seed ? Json(*m.seed) : Json(nullptr);
  save_json(doc, fs::path(primary_output.string() + ".manifest.json"));
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

// Every subcommand's options live here; CLI11 binds into these fields.
struct Options {
  std::string config, cohort, out, boxplot, train_out, test_out, train, history, model, test, days, input, kind;
  std::string model_config, train_config;
  std::vector<std::string> sets;
  std::uint64_t seed = 42;
  double fraction = 0.8, threshold = 0.5, perplexity = 30.0;
  std::size_t iters = 1000, stride = 24;
  int embed_days = 0;
  bool per_patient = false;
};

Cohort load_existing_cohort(const std::string& path) {
  if (!fs::exists(path)) throw ValidationError("missing input file " + path);
  return load_cohort(path);
}

nn::Checkpoint load_existing_checkpoint(const std::string& path) {
  if (!fs::exists(path)) throw ValidationError("missing input file " + path);
  return nn::load_checkpoint(path);
}

Json load_existing_json(const std::string& path) {
  if (!fs::exists(path)) throw ValidationError("missing input file " + path);
  return load_json(path);
}

int cmd_synth(const Options& o, bool seed_given, std::ostream& out) {
  const auto started = Clock::now();
  Json doc = o.config.empty() ? to_json(default_synth_config()) : load_existing_json(o.config);
  apply_overrides(doc, o.sets);
  if (seed_given) doc["seed"] = o.seed;
  const SynthConfig config = synth_config_from_json(doc);
  const Cohort cohort = generate_cohort(config);
  save_cohort(cohort, o.out);

  Manifest m{"synth", to_json(config), {}, {{"cohort", o.out}}, config.seed};
  if (!o.config.empty()) m.inputs["config"] = o.config;
  write_manifest(m, o.out, started);
  out << "wrote " << cohort.patients.size() << " patients (" << cohort.count_label(1) << " positive, "
      << cohort.count_label(0) << " negative) to " << o.out << '\n';
  return kExitOk;
}

int cmd_stats(const Options& o, std::ostream& out) {
  const auto started = Clock::now();
  const Cohort cohort = load_existing_cohort(o.cohort);
  {
    auto file = open_output(o.out);
    write_feature_table(feature_table(cohort), file);
  }
  Manifest m{"stats", {}, {{"cohort", o.cohort}}, {{"table", o.out}}, std::nullopt};
  if (!o.boxplot.empty()) {
    auto file = open_output(o.boxplot);
    write_box_plots(resting_hr_box_plots(cohort), file);
    m.outputs["boxplot"] = o.boxplot;
  }
  write_manifest(m, o.out, started);
  out << "wrote feature table to " << o.out << '\n';
  return kExitOk;
}

int cmd_split(const Options& o, std::ostream& out) {
  const auto started = Clock::now();
  const Cohort cohort = load_existing_cohort(o.cohort);
  const auto [train, test] = split_by_patient(cohort, o.fraction, o.seed);
  save_cohort(train, o.train_out);
  save_cohort(test, o.test_out);
  Manifest m{"split",
             {{"train_fraction", o.fraction}},
             {{"cohort", o.cohort}},
             {{"train", o.train_out}, {"test", o.test_out}},
             o.seed};
  write_manifest(m, o.train_out, started);
  out << "split " << cohort.patients.size() << " patients into " << train.patients.size() << " train and "
      << test.patients.size() << " test\n";
  return kExitOk;
}

int cmd_train(const Options& o, bool seed_given, std::ostream& out) {
  const auto started = Clock::now();
  Json doc{{"model", o.model_config.empty() ? nn::to_json(nn::ModelConfig{}) : load_existing_json(o.model_config)},
           {"train", o.train_config.empty() ? nn::to_json(nn::TrainConfig{}) : load_existing_json(o.train_config)},
           {"window_stride", o.stride}};
  doc["model"] = nn::to_json(nn::model_config_from_json(doc["model"]));
  doc["train"] = nn::to_json(nn::train_config_from_json(doc["train"]));
  apply_overrides(doc, o.sets);
  if (seed_given) {
    doc["model"]["seed"] = o.seed;
    doc["train"]["seed"] = o.seed;
  }
  const nn::ModelConfig model_config = nn::model_config_from_json(doc["model"]);
  const nn::TrainConfig train_config = nn::train_config_from_json(doc["train"]);
  const auto stride = doc["window_stride"].get<std::size_t>();
  if (stride < 1) throw ValidationError("window_stride must be at least 1");

  const Cohort cohort = load_existing_cohort(o.train);
  const auto series = resample_cohort(cohort);
  nn::Checkpoint checkpoint;
  checkpoint.channel_stats = compute_channel_stats(std::span<const LabeledSeries>(series));
  checkpoint.window_stride = stride;
  const WindowedDataset windows = make_windows(series, model_config.input_len, stride, checkpoint.channel_stats);
  auto result = nn::train(windows, model_config, train_config);
  checkpoint.params = std::move(result.params);
  nn::save_checkpoint(checkpoint, o.out);

  Manifest m{"train", doc, {{"train", o.train}}, {{"model", o.out}}, train_config.seed};
  if (!o.history.empty()) {
    auto file = open_output(o.history);
    nn::write_history(result.history, file);
    m.outputs["history"] = o.history;
  }
  write_manifest(m, o.out, started);
  out << "trained on " << windows.size() << " windows";
  if (!result.history.empty()) {
    out << ", final loss " << format_fixed(result.history.back().loss, 6) << " accuracy "
        << format_fixed(result.history.back().accuracy, 4);
  }
  out << "\nwrote " << o.out << '\n';
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto started = Clock::now();
  const nn::Checkpoint checkpoint = load_existing_checkpoint(o.model);
  const Cohort test = load_existing_cohort(o.test);
  const EvalOptions options{o.threshold, o.per_patient};
  const Metrics metrics = evaluate(checkpoint.params, window_cohort(checkpoint, test), options);
  const Json doc = to_json(metrics);
  save_json(doc, o.out);
  Manifest m{"eval",
             {{"threshold", o.threshold}, {"per_patient", o.per_patient}},
             {{"model", o.model}, {"test", o.test}},
             {{"metrics", o.out}},
             std::nullopt};
  write_manifest(m, o.out, started);
  out << "accuracy " << format_fixed(metrics.accuracy, 4) << " auc " << format_fixed(metrics.auc, 4) << " over "
      << metrics.n_windows << " windows\n";
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const auto started = Clock::now();
  const nn::Checkpoint checkpoint = load_existing_checkpoint(o.model);
  const Cohort test = load_existing_cohort(o.test);
  const std::vector<int> days = o.days.empty() ? default_sweep_days() : parse_day_range(o.days);
  const auto rows = day_sweep(checkpoint, test, days, EvalOptions{o.threshold, o.per_patient});
  {
    auto file = open_output(o.out);
    write_sweep(rows, file);
  }
  Manifest m{"sweep",
             {{"days", days}, {"threshold", o.threshold}, {"per_patient", o.per_patient}},
             {{"model", o.model}, {"test", o.test}},
             {{"sweep", o.out}},
             std::nullopt};
  write_manifest(m, o.out, started);
  out << "wrote " << rows.size() << " sweep rows to " << o.out << '\n';
  return kExitOk;
}

int cmd_embed(const Options& o, bool seed_given, std::ostream& out) {
  const auto started = Clock::now();
  const nn::Checkpoint checkpoint = load_existing_checkpoint(o.model);
  Cohort test = load_existing_cohort(o.test);
  auto series = resample_cohort(test);
  if (o.embed_days > 0) {
    for (auto& s : series) s.series = truncate_series(s.series, static_cast<std::size_t>(o.embed_days) * 24);
  }
  const WindowedDataset windows = make_windows(series, checkpoint.params.config.input_len, checkpoint.window_stride,
                                               checkpoint.channel_stats);
  const Matrix features = extract_features(checkpoint.params, windows);

  tsne::EmbedOptions options;
  options.perplexity = o.perplexity;
  options.iterations = o.iters;
  if (seed_given) options.seed = o.seed;
  const tsne::Embedding embedding = tsne::embed(features, options);

  std::vector<std::string> ids;
  std::vector<int> labels;
  for (const auto& w : windows.windows) {
    ids.push_back(w.patient_id);
    labels.push_back(w.label);
  }
  {
    auto file = open_output(o.out);
    tsne::write_embedding(embedding, ids, labels, file);
  }
  Manifest m{"embed",
             {{"perplexity", o.perplexity}, {"iterations", o.iters}, {"days", o.embed_days}},
             {{"model", o.model}, {"test", o.test}},
             {{"embedding", o.out}},
             options.seed};
  write_manifest(m, o.out, started);
  out << "embedded " << windows.size() << " windows, final KL "
      << format_fixed(embedding.kl_history.empty() ? 0.0 : embedding.kl_history.back(), 6) << '\n';
  return kExitOk;
}

int cmd_plot(const Options& o, std::ostream& out) {
  const auto started = Clock::now();
  const plot::Kind kind = plot::kind_from_string(o.kind);
  if (!fs::exists(o.input)) throw ValidationError("missing input file " + o.input);
  plot::render_file(kind, o.input, o.out);
  Manifest m{"plot", {{"kind", o.kind}}, {{"csv", o.input}}, {{"svg", o.out}}, std::nullopt};
  write_manifest(m, o.out, started);
  out << "wrote " << o.out << '\n';
  return kExitOk;
}

int cmd_validate(const Options& o, bool seed_given, std::ostream& out) {
  const auto started = Clock::now();
  if (o.config.empty() == o.cohort.empty()) throw ValidationError("validate needs exactly one of --config or --cohort");
  Manifest m{"validate", {}, {}, {{"report", o.out}}, std::nullopt};
  CalibrationReport report;
  if (!o.config.empty()) {
    Json doc = load_existing_json(o.config);
    apply_overrides(doc, o.sets);
    if (seed_given) doc["seed"] = o.seed;
    const SynthConfig config = synth_config_from_json(doc);
    report = check_calibration(generate_cohort(config), config);
    m.config = to_json(config);
    m.inputs["config"] = o.config;
    m.seed = config.seed;
  } else {
    report = check_calibration(load_existing_cohort(o.cohort));
    m.inputs["cohort"] = o.cohort;
  }
  save_json(to_json(report), o.out);
  write_manifest(m, o.out, started);
  std::size_t overlapping = 0;
  for (const auto& c : report.cells) overlapping += c.overlaps;
  out << overlapping << " of " << report.cells.size() << " intervals overlap the reference; mean intervals "
      << (report.means_overlap() ? "all overlap" : "do not all overlap") << "; resting HR "
      << (report.resting_hr_ok() ? "within tolerance" : "outside tolerance") << '\n';
  return kExitOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heart-rate and blood-pressure classifier for COVID-positive vs negative ARDS cohorts", "vitalnet"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Options o;
  auto add_seed = [&](CLI::App* sub, const std::string& help) { return sub->add_option("--seed", o.seed, help); };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort CSV");
  synth->add_option("--config", o.config, "Generator config JSON (built-in defaults when omitted)");
  synth->add_option("--set", o.sets, "Override a config key, e.g. --set seed=3");
  auto* synth_seed = add_seed(synth, "Generator seed");
  synth->add_option("--out", o.out, "Cohort CSV to write")->required();

  auto* stats = app.add_subcommand("stats", "Point-biserial correlations and per-label confidence intervals");
  stats->add_option("--cohort", o.cohort, "Cohort CSV")->required();
  stats->add_option("--out", o.out, "Feature table CSV to write")->required();
  stats->add_option("--boxplot", o.boxplot, "Also write resting-HR box-plot statistics CSV");

  auto* split = app.add_subcommand("split", "Stratified patient-level train/test split");
  split->add_option("--cohort", o.cohort, "Cohort CSV")->required();
  split->add_option("--train-out", o.train_out, "Train cohort CSV to write")->required();
  split->add_option("--test-out", o.test_out, "Test cohort CSV to write")->required();
  split->add_option("--fraction", o.fraction, "Share of each label assigned to train")->capture_default_str();
  add_seed(split, "Shuffle seed")->capture_default_str();

  auto* train = app.add_subcommand("train", "Train the CNN-LSTM and write a checkpoint");
  train->add_option("--train", o.train, "Training cohort CSV")->required();
  train->add_option("--model-config", o.model_config, "Model config JSON");
  train->add_option("--train-config", o.train_config, "Optimizer config JSON");
  train->add_option("--set", o.sets, "Override a key, e.g. --set train.epochs=5 or --set model.lstm_hidden=32");
  train->add_option("--stride", o.stride, "Window stride in grid slots")->capture_default_str();
  auto* train_seed = add_seed(train, "Seed for both initialization and shuffling");
  o.out = "model.json";
  train->add_option("--out", o.out, "Checkpoint JSON to write")->capture_default_str();
  train->add_option("--history", o.history, "Per-epoch loss and accuracy CSV to write");

  auto* eval = app.add_subcommand("eval", "Window-level accuracy and ROC AUC on a test cohort");
  eval->add_option("--model", o.model, "Checkpoint JSON")->required();
  eval->add_option("--test", o.test, "Test cohort CSV")->required();
  eval->add_option("--out", o.out, "Metrics JSON to write")->required();
  eval->add_option("--threshold", o.threshold, "Decision threshold")->capture_default_str();
  eval->add_flag("--per-patient", o.per_patient, "Aggregate windows per patient");

  auto* sweep = app.add_subcommand("sweep", "Metrics as a function of days of data per patient");
  sweep->add_option("--model", o.model, "Checkpoint JSON")->required();
  sweep->add_option("--test", o.test, "Test cohort CSV")->required();
  sweep->add_option("--days", o.days, "Day range start:end:step (default 2:28:2)");
  sweep->add_option("--out", o.out, "Sweep CSV to write")->required();
  sweep->add_option("--threshold", o.threshold, "Decision threshold")->capture_default_str();
  sweep->add_flag("--per-patient", o.per_patient, "Aggregate windows per patient");

  auto* embed = app.add_subcommand("embed", "t-SNE of dense-layer features for test windows");
  embed->add_option("--model", o.model, "Checkpoint JSON")->required();
  embed->add_option("--test", o.test, "Test cohort CSV")->required();
  embed->add_option("--out", o.out, "Embedding CSV to write")->required();
  embed->add_option("--perplexity", o.perplexity, "Target perplexity")->capture_default_str();
  embed->add_option("--iters", o.iters, "Gradient-descent iterations")->capture_default_str();
  embed->add_option("--days", o.embed_days, "Use only the first N days per patient (0 = all)")->capture_default_str();
  auto* embed_seed = add_seed(embed, "Initialization seed");

  auto* plot_cmd = app.add_subcommand("plot", "Render a CSV as an 800x600 SVG");
  plot_cmd->add_option("--kind", o.kind, "sweep, history, embedding or boxplot")->required();
  plot_cmd->add_option("--input", o.input, "CSV to render")->required();
  plot_cmd->add_option("--out", o.out, "SVG to write")->required();

  auto* validate = app.add_subcommand("validate", "Calibration report against the reference cohort statistics");
  validate->add_option("--config", o.config, "Generator config JSON; a cohort is generated and checked");
  validate->add_option("--cohort", o.cohort, "Existing cohort CSV to check");
  validate->add_option("--set", o.sets, "Override a config key");
  auto* validate_seed = add_seed(validate, "Generator seed");
  validate->add_option("--out", o.out, "Report JSON to write")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(o, synth_seed->count() > 0, out);
    if (stats->parsed()) return cmd_stats(o, out);
    if (split->parsed()) return cmd_split(o, out);
    if (train->parsed()) return cmd_train(o, train_seed->count() > 0, out);
    if (eval->parsed()) return cmd_eval(o, out);
    if (sweep->parsed()) return cmd_sweep(o, out);
    if (embed->parsed()) return cmd_embed(o, embed_seed->count() > 0, out);
    if (plot_cmd->parsed()) return cmd_plot(o, out);
    if (validate->parsed()) return cmd_validate(o, validate_seed->count() > 0, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace vitalnet::cli
