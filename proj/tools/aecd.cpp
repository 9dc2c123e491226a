// aecd: synthesize, extract features, train, evaluate, sweep and classify
// acoustic-emission events.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aecd/descriptors/feature_file.hpp"
#include "aecd/descriptors/standardize.hpp"
#include "aecd/eval/eval.hpp"
#include "aecd/nn/train.hpp"
#include "aecd/synth/dataset.hpp"

namespace fs = std::filesystem;
using namespace aecd;

namespace {

enum Exit : int { kOk = 0, kFailure = 1, kUsage = 2, kMismatch = 3, kIo = 4 };

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigMismatch: return kMismatch;
    case ErrorCode::Io:
    case ErrorCode::Format: return kIo;
    case ErrorCode::InvalidArgument:
    case ErrorCode::DatasetTooSmall:
    case ErrorCode::EmptyDataset: return kUsage;
    default: return kFailure;
  }
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr std::uint64_t kDefaultSeed = 1;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("AECD_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw UsageError(std::string("AECD_SEED is not an integer: ") + env);
    }
  }
  return kDefaultSeed;
}

std::string ids_path(const fs::path& features) { return features.string() + ".ids"; }

void write_ids(const fs::path& features, const std::vector<std::int64_t>& ids) {
  std::ofstream out(ids_path(features));
  if (!out) fail(ErrorCode::Io, "cannot write " + ids_path(features));
  for (auto id : ids) out << id << '\n';
}

std::vector<std::int64_t> read_ids(const fs::path& features, std::size_t count) {
  std::vector<std::int64_t> ids;
  std::ifstream in(ids_path(features));
  if (in) {
    for (std::int64_t v; in >> v;) ids.push_back(v);
    if (ids.size() != count) fail(ErrorCode::Format, ids_path(features) + " does not match the feature file");
  } else {
    for (std::size_t i = 0; i < count; ++i) ids.push_back(static_cast<std::int64_t>(i));
  }
  return ids;
}

// --config: keys of the file's section for the subcommand (and of "common")
// become flags placed before the user's own flags, which therefore win.
std::vector<std::string> expand_config(int argc, char** argv, const std::vector<std::string>& subcommands) {
  std::vector<std::string> args(argv, argv + argc);
  std::optional<std::string> config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (!config_path) return args;
  std::ifstream in(*config_path);
  if (!in) fail(ErrorCode::Io, "cannot open config " + *config_path);
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Format, "config: " + std::string(e.what()));
  }
  auto sub = std::find_if(args.begin() + 1, args.end(), [&](const std::string& a) {
    return std::find(subcommands.begin(), subcommands.end(), a) != subcommands.end();
  });
  if (sub == args.end()) return args;
  std::vector<std::string> injected;
  auto add_section = [&](const nlohmann::json& section) {
    if (!section.is_object()) return;
    for (const auto& [key, value] : section.items()) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      if (value.is_boolean()) {
        if (value.get<bool>()) injected.push_back(flag);
      } else if (value.is_array()) {
        std::string joined;
        for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
        injected.insert(injected.end(), {flag, joined});
      } else {
        injected.insert(injected.end(), {flag, value.is_string() ? value.get<std::string>() : value.dump()});
      }
    }
  };
  if (cfg.contains("common")) add_section(cfg["common"]);
  if (cfg.contains(*sub)) add_section(cfg[*sub]);
  args.insert(sub + 1, injected.begin(), injected.end());
  return args;
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

// ---------------------------------------------------------------------------

struct CommonOptions {
  std::size_t threads = 1;
  std::optional<std::uint64_t> seed;
  std::string config;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--threads", o.threads, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Master seed (falls back to AECD_SEED, then 1)");
  cmd->add_option("--config", o.config, "JSON config; explicit flags override it");
}

struct SynthOptions {
  CommonOptions common;
  long long per_class = 100;
  std::string out;
  double snr_db = 20.0;
  std::size_t duration = 16384;
  std::size_t channels = 5;
};

synth::SynthConfig synth_config(const SynthOptions& o, std::uint64_t seed) {
  synth::SynthConfig cfg;
  cfg.seed = seed;
  cfg.snr_db = o.snr_db;
  cfg.duration = o.duration;
  cfg.channels = o.channels;
  return cfg;
}

int cmd_synth(const SynthOptions& o) {
  if (o.per_class < 1) throw UsageError("--per-class must be at least 1");
  const auto seed = resolve_seed(o.common.seed);
  const auto cfg = synth_config(o, seed);
  cfg.validate();
  const auto labels = synth::shuffled_labels(static_cast<std::size_t>(o.per_class), seed);
  const fs::path dir = o.out;
  fs::create_directories(dir);
  synth::Manifest manifest;
  manifest.sample_rate = cfg.sample_rate;
  manifest.extra = {{"seed", seed},
                    {"per_class", o.per_class},
                    {"snr_db", cfg.snr_db},
                    {"duration", cfg.duration},
                    {"channels", cfg.channels}};
  parallel_for(labels.size(), o.common.threads, [&](std::size_t i) {
    const auto e = synth::generate_indexed_event(labels, i, cfg);
    synth::write_waveform(dir / synth::waveform_file_name(e.event.event_id), e.event);
  });
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto id = static_cast<std::int64_t>(i);
    manifest.events.push_back({id, labels[i], synth::waveform_file_name(id)});
  }
  synth::write_manifest(dir, manifest);
  preprocess::save_transducer(cfg.transducer(), dir / "transducer.json");
  std::cout << "events=" << labels.size() << " seed=" << seed << " out=" << dir.string() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct FeatureOptions {
  CommonOptions common;
  std::string data;
  int lambda = 5;
  std::size_t n_ed = 256;
  std::string out;
  std::string fit_stats;
  std::string transducer;
};

preprocess::TransducerModel dataset_transducer(const fs::path& dir, const std::string& explicit_path,
                                               std::size_t length, double sample_rate) {
  if (!explicit_path.empty()) return preprocess::load_transducer(explicit_path);
  if (fs::exists(dir / "transducer.json")) return preprocess::load_transducer(dir / "transducer.json");
  synth::SynthConfig cfg;
  cfg.sample_rate = sample_rate;
  cfg.duration = length;
  return cfg.transducer();
}

struct DatasetFeatures {
  eval::FeatureSet set;
  std::vector<std::int64_t> ids;
};

DatasetFeatures dataset_features(const fs::path& dir, const std::string& transducer, const descriptors::DescriptorConfig& dcfg,
                                 std::size_t threads) {
  const auto manifest = synth::read_manifest(dir);
  if (manifest.events.empty()) fail(ErrorCode::EmptyDataset, "dataset has no events");
  std::size_t length = 0;
  for (const auto& e : manifest.events) {
    try {
      length = synth::read_waveform(dir / e.file, manifest.sample_rate).channels.front().size();
      break;
    } catch (const Error&) {
    }
  }
  if (length == 0) fail(ErrorCode::Io, "no readable waveform in " + dir.string());
  const auto model = dataset_transducer(dir, transducer, length, manifest.sample_rate);
  eval::EventSource src;
  src.count = manifest.events.size();
  src.load = [&](std::size_t i) {
    return synth::read_waveform(dir / manifest.events[i].file, manifest.sample_rate, manifest.events[i].id);
  };
  src.label = [&](std::size_t i) { return manifest.events[i].label; };
  DatasetFeatures out;
  out.set = eval::extract_features(src, model, dcfg, {}, threads);
  for (std::size_t i : out.set.source_index) out.ids.push_back(manifest.events[i].id);
  for (const auto& f : out.set.failures) {
    std::cerr << "warning: skipped event " << manifest.events[f.index].id << " (" << manifest.events[f.index].file
              << "): " << f.message << '\n';
  }
  return out;
}

int cmd_features(const FeatureOptions& o) {
  descriptors::DescriptorConfig dcfg;
  dcfg.n_ed = o.n_ed;
  const auto lambda = descriptors::lambda_from_int(o.lambda);
  auto feats = dataset_features(o.data, o.transducer, dcfg, o.common.threads);
  const auto sliced = eval::slice_all(feats.set.features, lambda);
  descriptors::write_features(o.out, sliced, lambda, dcfg.n_ed);
  write_ids(o.out, feats.ids);
  if (!o.fit_stats.empty()) descriptors::save_stats(descriptors::fit_stats(sliced), o.fit_stats);
  std::cout << "events=" << sliced.size() << " skipped=" << feats.set.failures.size() << " lambda=" << o.lambda
            << " rows=" << descriptors::rows_for(lambda).size() << " n_ed=" << dcfg.n_ed << " out=" << o.out << '\n';
  return feats.set.failures.empty() ? kOk : kFailure;
}

// ---------------------------------------------------------------------------

struct TrainOptions {
  CommonOptions common;
  std::string features;
  std::string out;
  std::string history;
  std::string stats;
  std::size_t d_lstm = 64;
  std::size_t minibatch = 64;
  double learning_rate = 0.001;
  double momentum = 0.9;
  std::size_t max_epochs = 220;
  std::size_t patience = 30;
  std::string readout = "last";
};

nn::TrainConfig train_config(const TrainOptions& o, std::uint64_t seed) {
  nn::TrainConfig cfg;
  cfg.minibatch = o.minibatch;
  cfg.learning_rate = o.learning_rate;
  cfg.momentum = o.momentum;
  cfg.max_epochs = o.max_epochs;
  cfg.patience = o.patience;
  cfg.seed = seed;
  cfg.threads = o.common.threads;
  cfg.readout = o.readout == "mean" ? nn::Readout::Mean : nn::Readout::Last;
  return cfg;
}

int cmd_train(const TrainOptions& o) {
  const auto seed = resolve_seed(o.common.seed);
  auto file = descriptors::read_features(o.features);
  const auto stats = o.stats.empty() ? descriptors::fit_stats(file.records) : descriptors::load_stats(o.stats);
  descriptors::apply_stats(file.records, stats);
  const auto cfg = train_config(o, seed);
  const std::size_t n_train = file.records.size() - static_cast<std::size_t>(std::llround(cfg.validation_fraction * static_cast<double>(file.records.size())));
  if (cfg.minibatch > n_train) throw UsageError("--minibatch exceeds the training split");
  auto result = nn::train(file.records, o.d_lstm, cfg);
  result.model.stats = stats;
  result.model.stats_ref = o.stats.empty() ? fs::path(o.features).filename().string() : o.stats;
  nn::save_model(result.model, o.out);
  const auto history = o.history.empty() ? o.out + ".history.csv" : o.history;
  nn::save_history(result.history, history);
  const auto& best = result.history[result.best_epoch - 1];
  std::cout << "seed=" << seed << " epochs=" << result.epochs_used() << " best_epoch=" << result.best_epoch
            << " j_trn=" << fmt(best.j_trn) << " j_val=" << fmt(best.j_val) << " val_acc=" << fmt(best.val_acc)
            << " model=" << o.out << " history=" << history << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct ModelFeatureOptions {
  CommonOptions common;
  std::string model;
  std::string features;
  std::string out;
};

/// Loads features and standardizes them with the model's statistics;
/// reports every disagreeing field.
std::vector<descriptors::DescriptorMatrix> features_for_model(const nn::ModelParams& model, const std::string& path) {
  auto file = descriptors::read_features(path);
  std::vector<std::string> diffs;
  if (file.n_ed != model.n_ed) {
    diffs.push_back("n_ed: model=" + std::to_string(model.n_ed) + " features=" + std::to_string(file.n_ed));
  }
  if (file.lambda != model.lambda) {
    diffs.push_back("lambda: model=" + std::to_string(descriptors::to_int(model.lambda)) +
                    " features=" + std::to_string(descriptors::to_int(file.lambda)));
  }
  if (!diffs.empty()) {
    std::string msg = "config mismatch";
    for (const auto& d : diffs) msg += "; " + d;
    fail(ErrorCode::ConfigMismatch, msg);
  }
  if (model.stats) descriptors::apply_stats(file.records, *model.stats);
  return std::move(file.records);
}

int cmd_eval(const ModelFeatureOptions& o) {
  const auto model = nn::load_model(o.model);
  const auto data = features_for_model(model, o.features);
  const auto ev = eval::evaluate(model, data, o.common.threads);
  const auto table = eval::confusion_text(ev.confusion);
  std::cout << table;
  std::cout << "events=" << ev.confusion.total() << " correct=" << ev.confusion.trace() << " accuracy=" << fmt(ev.accuracy)
            << '\n';
  if (!o.out.empty()) {
    std::ofstream out(o.out);
    if (!out) fail(ErrorCode::Io, "cannot write " + o.out);
    out << table;
  }
  return kOk;
}

int cmd_classify(const ModelFeatureOptions& o) {
  const auto model = nn::load_model(o.model);
  const auto data = features_for_model(model, o.features);
  const auto ids = read_ids(o.features, data.size());
  const auto preds = nn::predict_all(model, data, o.common.threads);
  std::ostringstream csv;
  csv << std::setprecision(17) << "id,label,p_tensile,p_shear,p_mixed\n";
  for (std::size_t i = 0; i < preds.size(); ++i) {
    csv << ids[i] << ',' << to_string(preds[i].label) << ',' << preds[i].probs[0] << ',' << preds[i].probs[1] << ','
        << preds[i].probs[2] << '\n';
  }
  if (o.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(o.out);
    if (!out) fail(ErrorCode::Io, "cannot write " + o.out);
    out << csv.str();
    std::cout << "events=" << preds.size() << " out=" << o.out << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct SweepOptions {
  TrainOptions train;
  std::string data;
  std::string transducer;
  std::size_t n_ed = 256;
  std::vector<int> lambdas{1, 2, 3, 4, 5};
  std::vector<std::size_t> d_lstms{16, 64, 128};
  std::vector<std::uint64_t> seeds;
  std::string out;
  std::string history_dir;
};

int cmd_sweep(const SweepOptions& o) {
  descriptors::DescriptorConfig dcfg;
  dcfg.n_ed = o.n_ed;
  const auto seed = resolve_seed(o.train.common.seed);
  eval::SweepConfig cfg;
  cfg.lambdas.clear();
  for (int l : o.lambdas) cfg.lambdas.push_back(descriptors::lambda_from_int(l));
  cfg.d_lstms = o.d_lstms;
  cfg.seeds = o.seeds.empty() ? std::vector<std::uint64_t>{seed} : o.seeds;
  cfg.train = train_config(o.train, seed);
  const auto feats = dataset_features(o.data, o.transducer, dcfg, o.train.common.threads);
  if (!o.history_dir.empty()) fs::create_directories(o.history_dir);
  const auto result = eval::sweep(feats.set.features, cfg, [&](const eval::SweepCell& c) {
    std::cout << "cell lambda=" << descriptors::to_int(c.lambda) << " d_lstm=" << c.d_lstm << " seed=" << c.seed
              << " ok=" << c.ok << " val_acc=" << fmt(c.val_acc) << " test_acc=" << fmt(c.test_acc)
              << " epochs=" << c.epochs << " wall_time_s=" << fmt(c.wall_time_s) << '\n';
    if (!c.ok) std::cerr << "warning: cell failed: " << c.error << '\n';
    if (!o.history_dir.empty() && c.ok) {
      nn::save_history(c.history, fs::path(o.history_dir) / ("history_l" + std::to_string(descriptors::to_int(c.lambda)) +
                                                             "_d" + std::to_string(c.d_lstm) + "_s" +
                                                             std::to_string(c.seed) + ".csv"));
    }
  });
  std::ofstream out(o.out);
  if (!out) fail(ErrorCode::Io, "cannot write " + o.out);
  out << eval::sweep_csv(result);
  std::size_t failed = 0;
  for (const auto& c : result.cells) failed += !c.ok;
  std::cout << "cells=" << result.cells.size() << " failed=" << failed << " out=" << o.out << '\n';
  return failed ? kFailure : kOk;
}

void add_train_options(CLI::App* cmd, TrainOptions& o) {
  cmd->add_option("--d-lstm", o.d_lstm, "Total memory cells N1 + N2 (multiple of 4)");
  cmd->add_option("--minibatch", o.minibatch, "Mini-batch size")->check(CLI::PositiveNumber);
  cmd->add_option("--lr", o.learning_rate, "Learning rate")->check(CLI::PositiveNumber);
  cmd->add_option("--momentum", o.momentum, "SGDM momentum")->check(CLI::Range(0.0, 0.999999));
  cmd->add_option("--epochs", o.max_epochs, "Maximum epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--patience", o.patience, "Early-stopping patience in epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--readout", o.readout, "Sequence readout")->check(CLI::IsMember({"last", "mean"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acoustic-emission crack classification pipeline", "aecd"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  SynthOptions synth_o;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic dataset");
  add_common(synth_cmd, synth_o.common);
  synth_cmd->add_option("--per-class", synth_o.per_class, "Events per class")->required();
  synth_cmd->add_option("--out", synth_o.out, "Output directory")->required();
  synth_cmd->add_option("--snr-db", synth_o.snr_db, "Noise level");
  synth_cmd->add_option("--duration", synth_o.duration, "Samples per channel");
  synth_cmd->add_option("--channels", synth_o.channels, "Channels per event");

  FeatureOptions feat_o;
  auto* feat_cmd = app.add_subcommand("features", "Preprocess events and write descriptor matrices (GAMQ)");
  add_common(feat_cmd, feat_o.common);
  feat_cmd->add_option("--data", feat_o.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  feat_cmd->add_option("--lambda", feat_o.lambda, "Input combination 1..5")->check(CLI::Range(1, 5));
  feat_cmd->add_option("--ned", feat_o.n_ed, "Resampled descriptor length")->check(CLI::Range(8, 1 << 20));
  feat_cmd->add_option("--out", feat_o.out, "Output GAMQ file")->required();
  feat_cmd->add_option("--fit-stats", feat_o.fit_stats, "Also write standardization statistics here");
  feat_cmd->add_option("--transducer", feat_o.transducer, "Sensor model JSON (default: dataset's own)");

  TrainOptions train_o;
  auto* train_cmd = app.add_subcommand("train", "Train a classifier on a GAMQ file");
  add_common(train_cmd, train_o.common);
  add_train_options(train_cmd, train_o);
  train_cmd->add_option("--features", train_o.features, "GAMQ file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_o.out, "Model JSON")->required();
  train_cmd->add_option("--history", train_o.history, "History CSV (default: <out>.history.csv)");
  train_cmd->add_option("--stats", train_o.stats, "Standardization statistics (default: fit on the file)");

  ModelFeatureOptions eval_o;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy and confusion matrix on a labeled GAMQ file");
  add_common(eval_cmd, eval_o.common);
  eval_cmd->add_option("--model", eval_o.model, "Model JSON")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--features", eval_o.features, "GAMQ file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_o.out, "Confusion matrix CSV");

  SweepOptions sweep_o;
  auto* sweep_cmd = app.add_subcommand("sweep", "Train over a grid of input combinations and network sizes");
  add_common(sweep_cmd, sweep_o.train.common);
  add_train_options(sweep_cmd, sweep_o.train);
  sweep_cmd->add_option("--data", sweep_o.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  sweep_cmd->add_option("--transducer", sweep_o.transducer, "Sensor model JSON");
  sweep_cmd->add_option("--ned", sweep_o.n_ed, "Resampled descriptor length")->check(CLI::Range(8, 1 << 20));
  sweep_cmd->add_option("--lambdas", sweep_o.lambdas, "Input combinations")->delimiter(',')->check(CLI::Range(1, 5));
  sweep_cmd->add_option("--d-lstms", sweep_o.d_lstms, "Network sizes")->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep_o.seeds, "Seeds per cell (default: --seed)")->delimiter(',');
  sweep_cmd->add_option("--out", sweep_o.out, "Sweep CSV")->required();
  sweep_cmd->add_option("--history-dir", sweep_o.history_dir, "Directory for per-cell history CSVs");

  ModelFeatureOptions cls_o;
  auto* cls_cmd = app.add_subcommand("classify", "Label events of a GAMQ file");
  add_common(cls_cmd, cls_o.common);
  cls_cmd->add_option("--model", cls_o.model, "Model JSON")->required()->check(CLI::ExistingFile);
  cls_cmd->add_option("--features", cls_o.features, "GAMQ file")->required()->check(CLI::ExistingFile);
  cls_cmd->add_option("--out", cls_o.out, "Output CSV (default: stdout)");

  try {
    auto args = expand_config(argc, argv, {"synth", "features", "train", "eval", "sweep", "classify"});
    args.erase(args.begin());
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  }

  try {
    if (*synth_cmd) return cmd_synth(synth_o);
    if (*feat_cmd) return cmd_features(feat_o);
    if (*train_cmd) return cmd_train(train_o);
    if (*eval_cmd) return cmd_eval(eval_o);
    if (*sweep_cmd) return cmd_sweep(sweep_o);
    if (*cls_cmd) return cmd_classify(cls_o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
