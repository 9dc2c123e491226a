// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,7,11] [--cache-dir DIR] [--fresh] [--threads N]
//
// Criteria 9, 10 and 12 train full-size models. Extracted features, sweep
// cells and the pipeline comparison are cached in --cache-dir and reused on
// later runs (marked "cached"); --fresh recomputes everything.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "aecd/descriptors/feature_file.hpp"
#include "aecd/eval/eval.hpp"

namespace fs = std::filesystem;
using namespace aecd;
using descriptors::DescriptorMatrix;
using descriptors::Lambda;
using signal::Complex;
using signal::TimeSeries;

namespace {

constexpr double kFs = 5e6;

struct Outcome {
  bool pass = false;
  std::string detail;
  bool cached = false;
};

struct Options {
  std::vector<int> only;
  std::vector<int> known_failures;
  std::string cache_dir = "acceptance_cache";
  bool fresh = false;
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
};

std::string fixed(double v, int digits = 4) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(digits);
  out << v;
  return out.str();
}

std::string sci(double v) {
  std::ostringstream out;
  out.setf(std::ios::scientific);
  out.precision(2);
  out << v;
  return out.str();
}

std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d(0.0, sigma);
  std::vector<double> x(n);
  for (double& v : x) v = d(g);
  return x;
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stderr_of(std::span<const double> v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// ---------------------------------------------------------------------------
// 1-7, 11: numerical properties

Outcome descriptor_identity() {
  std::mt19937_64 g(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 256 + static_cast<std::size_t>(u(g) * 3840);
    auto x = gaussian(n, 1000 + static_cast<std::uint64_t>(trial), 0.1 + u(g));
    const double f = 5e3 + u(g) * 200e3, a = 3.0 * u(g), decay = 1e-5 + u(g) * 1e-4;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / kFs;
      x[i] += a * std::exp(-t / decay) * std::cos(2 * std::numbers::pi * f * t);
    }
    const auto z = signal::analytic_signal(TimeSeries(x, kFs));
    const auto sev = descriptors::spectral_envelope(TimeSeries(x, kFs));
    const double sln = descriptors::l2l1_ratio(sev);
    const double k = descriptors::envelope_kurtosis(std::span<const Complex>(z.values()));
    worst = std::max(worst, std::abs((sln * sln - 2.0) - k) / std::max(std::abs(k), 1e-300));
  }
  return {worst < 1e-9, "max relative deviation " + sci(worst) + " over 100 frames (limit 1e-9)"};
}

Outcome sk_gaussian_null() {
  descriptors::DescriptorConfig cfg;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto grid = signal::stft(TimeSeries(gaussian(1'000'000, 200 + seed), kFs), cfg.stft_window, cfg.stft_hop,
                                   cfg.stft_window_kind);
    const auto kappa = descriptors::spectral_kurtosis(grid);
    worst = std::max(worst, std::abs(descriptors::band_mean(kappa, grid.bin_width(), cfg.band_lo, cfg.band_hi)));
  }
  return {worst < 0.1, "max |band-mean SK| " + fixed(worst) + " over 20 seeds (limit 0.1)"};
}

Outcome sln_gaussian_limit() {
  double worst = 0.0, sum = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 g(300 + seed);
    std::normal_distribution<double> d;
    std::vector<double> sev(100'000);
    for (double& v : sev) v = std::norm(Complex(d(g), d(g)));
    const double sln = descriptors::l2l1_ratio(sev);
    sum += sln;
    worst = std::max(worst, std::abs(sln - std::sqrt(2.0)));
  }
  return {worst < 0.02, "mean SLN " + fixed(sum / 10.0) + ", max |SLN - sqrt 2| " + fixed(worst) +
                            " over 10 draws of 1e5 (limit 0.02)"};
}

Outcome se_extremes() {
  descriptors::DescriptorConfig cfg;
  cfg.se_window = 1 << 15;
  cfg.se_hop = 1 << 14;
  double white = 0.0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    white += mean_of(descriptors::spectral_entropy(TimeSeries(gaussian(1 << 18, 400 + seed), kFs), cfg)) / 4.0;
  }
  const double f0 = 8.0 * kFs / static_cast<double>(cfg.se_window);
  std::vector<double> tone(1 << 18);
  for (std::size_t i = 0; i < tone.size(); ++i) tone[i] = std::cos(2 * std::numbers::pi * f0 * static_cast<double>(i) / kFs);
  const auto se_tone = descriptors::spectral_entropy(TimeSeries(tone, kFs), cfg);
  const double tone_max = *std::max_element(se_tone.begin(), se_tone.end());
  return {white > 0.95 && tone_max < 0.05,
          "white noise mean SE " + fixed(white) + " (> 0.95), tone max SE " + sci(tone_max) + " (< 0.05), " +
              std::to_string(cfg.se_window) + "-sample frames"};
}

Outcome emd_completeness() {
  std::mt19937_64 g(501);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(512, 8192)(g);
    auto x = gaussian(n, 600 + static_cast<std::uint64_t>(trial), std::uniform_real_distribution<double>(0.01, 10.0)(g));
    const double f = std::uniform_real_distribution<double>(2e3, 100e3)(g);
    const double a = std::uniform_real_distribution<double>(0.0, 20.0)(g);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += a * std::sin(2 * std::numbers::pi * f * static_cast<double>(i) / kFs) + 1e-3 * a * static_cast<double>(i);
    }
    const auto set = preprocess::emd_decompose(TimeSeries(x, kFs));
    double err = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double sum = set.residual[i];
      for (const auto& imf : set.imfs) sum += imf[i];
      err = std::max(err, std::abs(x[i] - sum));
      peak = std::max(peak, std::abs(x[i]));
    }
    worst = std::max(worst, err / peak);
  }
  return {worst < 1e-8, "max reconstruction error " + sci(worst) + " x max|x| over 100 signals (limit 1e-8)"};
}

Outcome tfr_round_trip() {
  synth::SynthConfig scfg;
  const auto model = preprocess::resonant_model(scfg.duration, kFs);
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 5; ++k) {
    const auto e = synth::generate_event(class_from_index(k % 3), scfg, 700 + k, 0);
    const std::vector<double> s = synth::render_components(e.draw, scfg).sum();
    const auto r = preprocess::convolve_tfr(TimeSeries(s, kFs), model);
    const auto back = preprocess::deconvolve_tfr(r, model);
    const auto S = signal::fft_real(s);
    const auto B = signal::fft_real(back.samples());
    double err = 0.0, ref = 0.0;
    const double df = kFs / static_cast<double>(S.size());
    for (std::size_t i = 0; i <= S.size() / 2; ++i) {
      const double f = static_cast<double>(i) * df;
      if (f < 5e3 || f > 500e3) continue;
      err += std::norm(S[i] - B[i]);
      ref += std::norm(S[i]);
    }
    worst = std::max(worst, std::sqrt(err / ref));
  }
  return {worst < 1e-3, "max in-band (5-500 kHz) normalized RMS error " + sci(worst) + " over 5 events (limit 1e-3)"};
}

Outcome gradient_exactness() {
  auto m = nn::make_model(Lambda::L5, 16, 8);
  std::mt19937_64 g(801);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (auto t : nn::tensors(m)) {
    for (double& v : t) v = u(g);
  }
  std::normal_distribution<double> d;
  std::vector<DescriptorMatrix> batch;
  for (std::size_t i = 0; i < 4; ++i) {
    DescriptorMatrix gm;
    gm.lambda = Lambda::L5;
    gm.rows = descriptors::rows_for(Lambda::L5);
    gm.n_ed = 16;
    gm.label = class_from_index(i % 3);
    for (std::size_t k = 0; k < 4 * 16; ++k) gm.values.push_back(d(g));
    batch.push_back(std::move(gm));
  }
  const auto labels = nn::labels_of(batch);
  const auto ptrs = nn::pointers_to(batch);
  const auto analytic = nn::bptt_gradients(m, ptrs, labels);
  const auto grads = nn::tensors(analytic.grad);
  auto params = nn::tensors(m);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      const double keep = params[t][i];
      params[t][i] = keep + h;
      const double up = nn::bptt_gradients(m, ptrs, labels).loss;
      params[t][i] = keep - h;
      const double down = nn::bptt_gradients(m, ptrs, labels).loss;
      params[t][i] = keep;
      const double numeric = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(grads[t][i] - numeric) / std::max({std::abs(grads[t][i]), std::abs(numeric), 1e-7}));
    }
  }
  return {worst < 1e-4, "max relative error " + sci(worst) + " over " + std::to_string(nn::parameter_count(m)) +
                            " parameters (limit 1e-4)"};
}

Outcome early_stopping_contract() {
  std::mt19937_64 g(1101);
  std::normal_distribution<double> d;
  std::vector<DescriptorMatrix> data;
  for (std::size_t i = 0; i < 30; ++i) {
    DescriptorMatrix gm;
    gm.lambda = Lambda::L3;
    gm.rows = descriptors::rows_for(Lambda::L3);
    gm.n_ed = 4;
    gm.label = class_from_index(i % 3);
    for (std::size_t k = 0; k < 8; ++k) gm.values.push_back(d(g));
    data.push_back(std::move(gm));
  }
  nn::TrainConfig cfg;
  cfg.minibatch = 8;
  bool ok = true;
  std::string detail;
  for (std::size_t plateau : {5u, 40u, 120u}) {
    const auto r = nn::train(data, 4, cfg, [&](std::size_t epoch, double) {
      return epoch <= plateau ? 2.0 / static_cast<double>(epoch) : 2.0 / static_cast<double>(plateau) + 1e-3 * (1.0 + std::sin(static_cast<double>(epoch)));
    });
    double min_val = std::numeric_limits<double>::infinity();
    for (const auto& rec : r.history) min_val = std::min(min_val, rec.j_val);
    const bool good = r.history.size() == plateau + 30 && r.best_epoch == plateau && r.best_j_val == min_val;
    ok = ok && good;
    detail += (detail.empty() ? "" : "; ") + std::string("plateau ") + std::to_string(plateau) + " -> stop " +
              std::to_string(r.history.size()) + ", best " + std::to_string(r.best_epoch);
  }
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// 8: class-descriptor ordering

Outcome class_ordering(const Options& opt) {
  synth::SynthConfig scfg;
  scfg.seed = 808;
  const auto labels = synth::shuffled_labels(200, scfg.seed);
  const auto model = scfg.transducer();
  descriptors::DescriptorConfig dcfg;
  std::vector<double> sk(labels.size()), se(labels.size());
  parallel_for(labels.size(), opt.threads, [&](std::size_t i) {
    const auto e = synth::generate_indexed_event(labels, i, scfg);
    const auto p = preprocess::select_max_energy_channel(e.event, model);
    const auto grid = signal::stft(p.waveform, dcfg.stft_window, dcfg.stft_hop, dcfg.stft_window_kind);
    sk[i] = descriptors::band_mean(descriptors::spectral_kurtosis(grid), grid.bin_width(), 5e3, 22e3);
    se[i] = mean_of(descriptors::spectral_entropy(p.waveform, dcfg));
  });
  std::array<std::vector<double>, kClassCount> sk_by, se_by;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sk_by[class_index(labels[i])].push_back(sk[i]);
    se_by[class_index(labels[i])].push_back(se[i]);
  }
  // gap of (a - b) in units of its standard error
  auto z = [](const std::vector<double>& a, const std::vector<double>& b) {
    return (mean_of(a) - mean_of(b)) / std::hypot(stderr_of(a), stderr_of(b));
  };
  const double z_ts = z(sk_by[0], sk_by[1]);
  const double z_sm = z(sk_by[1], sk_by[2]);
  const double z_se_t = z(se_by[0], se_by[2]);
  const double z_se_s = z(se_by[1], se_by[2]);
  std::string detail = "band SK T/S/M " + fixed(mean_of(sk_by[0]), 3) + "/" + fixed(mean_of(sk_by[1]), 3) + "/" +
                       fixed(mean_of(sk_by[2]), 3) + " (gaps " + fixed(z_ts, 1) + ", " + fixed(z_sm, 1) +
                       " SE); SE T/S/M " + fixed(mean_of(se_by[0])) + "/" + fixed(mean_of(se_by[1])) + "/" +
                       fixed(mean_of(se_by[2])) + " (gaps " + fixed(z_se_t, 1) + ", " + fixed(z_se_s, 1) + " SE)";
  return {z_ts > 2 && z_sm > 2 && z_se_t > 2 && z_se_s > 2, detail};
}

// ---------------------------------------------------------------------------
// 9, 10: shared 3000-event feature set and training grid

constexpr std::uint64_t kDataSeed = 2024;
constexpr std::size_t kPerClass = 1000;
constexpr std::size_t kNed = 256;
constexpr std::size_t kDLstm = 64;
constexpr std::array<std::uint64_t, 3> kTrainSeeds{1, 2, 3};

nn::TrainConfig grid_train_config(std::size_t threads) {
  nn::TrainConfig cfg;  // m = 64, r_l = 0.001, patience 30, at most 220 epochs
  cfg.readout = nn::Readout::Mean;
  cfg.threads = threads;
  return cfg;
}

class Workspace {
 public:
  explicit Workspace(Options opt) : opt_(std::move(opt)) { fs::create_directories(opt_.cache_dir); }

  const Options& options() const { return opt_; }

  /// All five descriptor rows of the shared synthetic set.
  const std::vector<DescriptorMatrix>& features() {
    if (!features_.empty()) return features_;
    const fs::path dir = opt_.cache_dir;
    const std::string stem = "features_s" + std::to_string(kDataSeed) + "_pc" + std::to_string(kPerClass) + "_ned" +
                             std::to_string(kNed);
    const auto l1 = dir / (stem + "_l1.gamq");
    const auto l5 = dir / (stem + "_l5.gamq");
    synth::SynthConfig scfg;
    scfg.seed = kDataSeed;
    labels_ = synth::shuffled_labels(kPerClass, kDataSeed);
    descriptors::DescriptorConfig dcfg;
    dcfg.n_ed = kNed;
    if (!opt_.fresh && fs::exists(l1) && fs::exists(l5)) {
      const auto a = descriptors::read_features(l1);
      const auto b = descriptors::read_features(l5);
      for (std::size_t i = 0; i < a.records.size(); ++i) {
        auto m = a.records[i];
        m.lambda = Lambda::L5;
        m.rows.insert(m.rows.end(), b.records[i].rows.begin(), b.records[i].rows.end());
        m.values.insert(m.values.end(), b.records[i].values.begin(), b.records[i].values.end());
        features_.push_back(std::move(m));
      }
      // Spot-check the cache against a fresh extraction.
      std::vector<std::size_t> probe{0, 1234, features_.size() - 1};
      for (std::size_t i : probe) {
        const auto e = synth::generate_indexed_event(labels_, i, scfg);
        auto p = preprocess::select_max_energy_channel(e.event, scfg.transducer());
        p.label = labels_[i];
        const auto m = descriptors::build_all_rows(p, dcfg);
        if (features_.size() != labels_.size() || m.values != features_[i].values || m.label != features_[i].label) {
          std::cerr << "feature cache is stale; recomputing\n";
          features_.clear();
          break;
        }
      }
      if (!features_.empty()) {
        features_cached_ = true;
        return features_;
      }
    }
    std::cerr << "extracting descriptors for " << labels_.size() << " events...\n";
    auto set = eval::extract_features(eval::synthetic_source(labels_, scfg), scfg.transducer(), dcfg, {}, opt_.threads);
    if (!set.failures.empty()) throw std::runtime_error(std::to_string(set.failures.size()) + " events failed extraction");
    features_ = std::move(set.features);
    descriptors::write_features(l1, eval::slice_all(features_, Lambda::L1), Lambda::L1, kNed);
    descriptors::write_features(l5, eval::slice_all(features_, Lambda::L5), Lambda::L5, kNed);
    return features_;
  }

  bool features_cached() const { return features_cached_; }

  /// One (lambda, d_LSTM = 64, seed) training run, cached by key.
  const eval::SweepCell& cell(Lambda lambda, std::uint64_t seed, bool& cached) {
    load_cells();
    const std::string key = "l" + std::to_string(descriptors::to_int(lambda)) + "_d" + std::to_string(kDLstm) + "_s" +
                            std::to_string(seed) + "_mean";
    if (auto it = cells_.find(key); it != cells_.end()) {
      cached = true;
      return it->second;
    }
    cached = false;
    const auto& data = features();
    std::cerr << "training lambda " << descriptors::to_int(lambda) << " seed " << seed << "...\n";
    auto c = eval::run_cell(data, lambda, kDLstm, seed, {}, grid_train_config(opt_.threads));
    if (!c.ok) throw std::runtime_error("training failed: " + c.error);
    cells_json_[key] = {{"lambda", descriptors::to_int(lambda)}, {"seed", seed},          {"train_acc", c.train_acc},
                        {"val_acc", c.val_acc},                   {"test_acc", c.test_acc}, {"epochs", c.epochs},
                        {"j_trn", c.j_trn},                       {"j_val", c.j_val},       {"wall_time_s", c.wall_time_s}};
    std::ofstream(fs::path(opt_.cache_dir) / "cells.json") << cells_json_.dump(1) << '\n';
    nn::save_history(c.history, fs::path(opt_.cache_dir) / ("history_" + key + ".csv"));
    return cells_[key] = std::move(c);
  }

 private:
  void load_cells() {
    if (cells_loaded_) return;
    cells_loaded_ = true;
    const auto path = fs::path(opt_.cache_dir) / "cells.json";
    if (opt_.fresh || !fs::exists(path)) return;
    std::ifstream in(path);
    cells_json_ = nlohmann::json::parse(in);
    for (const auto& [key, j] : cells_json_.items()) {
      eval::SweepCell c;
      c.lambda = descriptors::lambda_from_int(j.at("lambda").get<int>());
      c.d_lstm = kDLstm;
      c.seed = j.at("seed").get<std::uint64_t>();
      c.ok = true;
      c.train_acc = j.at("train_acc");
      c.val_acc = j.at("val_acc");
      c.test_acc = j.at("test_acc");
      c.epochs = j.at("epochs");
      c.j_trn = j.at("j_trn");
      c.j_val = j.at("j_val");
      c.wall_time_s = j.at("wall_time_s");
      cells_[key] = c;
    }
  }

  Options opt_;
  std::vector<CrackClass> labels_;
  std::vector<DescriptorMatrix> features_;
  bool features_cached_ = false;
  bool cells_loaded_ = false;
  nlohmann::json cells_json_ = nlohmann::json::object();
  std::map<std::string, eval::SweepCell> cells_;
};

Outcome end_to_end(Workspace& ws) {
  double sum = 0.0;
  bool all_cached = true;
  std::string per_seed;
  for (auto seed : kTrainSeeds) {
    bool cached = false;
    const auto& c = ws.cell(Lambda::L5, seed, cached);
    all_cached = all_cached && cached;
    sum += c.test_acc;
    per_seed += (per_seed.empty() ? "" : ", ") + fixed(c.test_acc, 3) + " (" + std::to_string(c.epochs) + " ep)";
  }
  const double mean = sum / static_cast<double>(kTrainSeeds.size());
  return {mean >= 0.90, "mean test accuracy " + fixed(mean) + " over seeds 1-3 [" + per_seed + "] (limit 0.90)", all_cached};
}

Outcome sweep_trend(Workspace& ws) {
  std::array<double, 5> val{}, epochs{};
  bool all_cached = true;
  for (int l = 1; l <= 5; ++l) {
    for (auto seed : kTrainSeeds) {
      bool cached = false;
      const auto& c = ws.cell(descriptors::lambda_from_int(l), seed, cached);
      all_cached = all_cached && cached;
      val[static_cast<std::size_t>(l - 1)] += c.val_acc / static_cast<double>(kTrainSeeds.size());
      epochs[static_cast<std::size_t>(l - 1)] += static_cast<double>(c.epochs) / static_cast<double>(kTrainSeeds.size());
    }
  }
  bool monotone = true;
  for (std::size_t i = 1; i < val.size(); ++i) monotone = monotone && val[i] >= val[i - 1];
  const bool fewer_epochs = epochs[4] <= epochs[0];
  std::string detail = "val acc l1..l5";
  for (double v : val) detail += " " + fixed(v, 3);
  detail += std::string(monotone ? " (non-decreasing)" : " (NOT non-decreasing)") + "; epochs l1 " + fixed(epochs[0], 1) +
            ", l5 " + fixed(epochs[4], 1) + (fewer_epochs ? "" : " (l5 needs more)");
  return {monotone && fewer_epochs, detail, all_cached};
}

// ---------------------------------------------------------------------------
// 12: determinism of the command-line pipeline

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(AECD_CLI_PATH) + " " + args + " >> " + log.string() + " 2>&1";
  return std::system(cmd.c_str());
}

Outcome pipeline_determinism(const Options& opt) {
  const fs::path root = fs::path(opt.cache_dir) / "pipeline";
  const auto summary = root / "result.json";
  if (!opt.fresh && fs::exists(summary)) {
    std::ifstream in(summary);
    const auto j = nlohmann::json::parse(in);
    return {j.at("pass").get<bool>(), j.at("detail").get<std::string>(), true};
  }
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string seed = std::to_string(kDataSeed);
  std::vector<std::string> failures;
  for (const char* threads : {"1", "8"}) {
    const fs::path dir = root / (std::string("threads") + threads);
    fs::create_directories(dir);
    const auto log = dir / "log.txt";
    const std::string t = std::string(" --threads ") + threads + " --seed " + seed;
    std::cerr << "pipeline with --threads " << threads << "...\n";
    if (run_cli("synth --per-class " + std::to_string(kPerClass) + " --out " + (dir / "data").string() + t, log) != 0 ||
        run_cli("features --data " + (dir / "data").string() + " --lambda 5 --ned " + std::to_string(kNed) + " --out " +
                    (dir / "features.gamq").string() + t,
                log) != 0 ||
        run_cli("train --features " + (dir / "features.gamq").string() + " --d-lstm " + std::to_string(kDLstm) +
                    " --readout mean --out " + (dir / "model.json").string() + t,
                log) != 0) {
      failures.push_back(std::string("command failed with --threads ") + threads + ", see " + log.string());
    }
  }
  std::size_t compared = 0;
  if (failures.empty()) {
    const fs::path a = root / "threads1", b = root / "threads8";
    for (const auto& e : fs::directory_iterator(a / "data")) {
      ++compared;
      if (slurp(e.path()) != slurp(b / "data" / e.path().filename())) failures.push_back("data/" + e.path().filename().string());
    }
    for (const char* f : {"features.gamq", "features.gamq.ids", "model.json", "model.json.history.csv"}) {
      ++compared;
      if (slurp(a / f) != slurp(b / f)) failures.push_back(f);
    }
  }
  Outcome o;
  o.pass = failures.empty();
  o.detail = o.pass ? "synth, features and train with --threads 1 and 8: " + std::to_string(compared) +
                          " output files byte-identical"
                    : "differences: " + failures.front() + (failures.size() > 1 ? " (+" + std::to_string(failures.size() - 1) + " more)" : "");
  std::ofstream(summary) << nlohmann::json{{"pass", o.pass}, {"detail", o.detail}}.dump() << '\n';
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Acceptance criteria"};
  app.add_option("--only", opt.only, "Criteria to run")->delimiter(',')->check(CLI::Range(1, 12));
  app.add_option("--cache-dir", opt.cache_dir, "Directory for cached features and training results");
  app.add_flag("--fresh", opt.fresh, "Ignore cached results");
  app.add_option("--known-failures", opt.known_failures,
                 "Criteria that are reported as FAIL but do not set the exit status")
      ->delimiter(',')
      ->check(CLI::Range(1, 12));
  app.add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  Workspace ws(opt);
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "descriptor identity", 5, descriptor_identity},
      {2, "SK Gaussian null", 30, sk_gaussian_null},
      {3, "SLN Gaussian limit", 10, sln_gaussian_limit},
      {4, "SE extremes", 5, se_extremes},
      {5, "EMD completeness", 60, emd_completeness},
      {6, "TFR round trip", 5, tfr_round_trip},
      {7, "gradient exactness", 60, gradient_exactness},
      {8, "class-descriptor ordering", 120, [&] { return class_ordering(opt); }},
      {9, "end-to-end classification", 1800, [&] { return end_to_end(ws); }},
      {10, "sweep trend", 7200, [&] { return sweep_trend(ws); }},
      {11, "early-stopping contract", 1, early_stopping_contract},
      {12, "pipeline determinism", 3600, [&] { return pipeline_determinism(opt); }},
  };

  std::size_t failed = 0, unexpected = 0;
  std::vector<int> fixed_known;
  const std::set<int> only(opt.only.begin(), opt.only.end());
  const std::set<int> known(opt.known_failures.begin(), opt.known_failures.end());
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    unexpected += !o.pass && !known.count(c.id);
    if (o.pass && known.count(c.id)) fixed_known.push_back(c.id);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.name << "): " << o.detail << " ["
              << (o.cached ? "cached result, " : "") << fixed(secs, 1) << " s, budget " << fixed(c.budget_s, 0) << " s"
              << (!o.cached && secs > c.budget_s ? ", OVER BUDGET" : "")
              << (!o.pass && known.count(c.id) ? ", known failure" : "") << "]" << std::endl;
  }
  for (int id : fixed_known) std::cout << "note: criterion " << id << " is listed as a known failure but passed\n";
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << failed << " failing criteria (" << failed - unexpected
            << " known), threads=" << opt.threads << '\n';
  return unexpected ? 1 : 0;
}
