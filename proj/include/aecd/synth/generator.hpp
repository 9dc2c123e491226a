#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "aecd/crack_class.hpp"
#include "aecd/preprocess/channel.hpp"
#include "aecd/preprocess/transducer.hpp"
#include "aecd/signal/analytic.hpp"
#include "aecd/synth/rng.hpp"

namespace aecd::synth {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Class-specific phenomenology. Times in seconds.
struct ClassProfile {
  Range energy_ratio;  // E_P / E_S of the two wavelets
  Range rise_time;     // S-wavelet rise constant
  Range s_decay;       // S-wavelet decay constant
  Range transients;    // number of micro-transients
};

struct SynthConfig {
  double sample_rate = signal::kDefaultSampleRate;
  std::size_t duration = 16384;
  std::size_t channels = 5;

  Range p_freq{25e3, 50e3};
  Range s_freq{5e3, 22e3};
  Range p_rise{2e-6, 8e-6};
  Range p_decay{80e-6, 200e-6};
  Range onset{0.08, 0.12};          // fraction of the record
  Range ps_delay{100e-6, 300e-6};   // S arrival after P
  Range amplitude{0.5, 2.0};        // peak-scale of the clean event (log-uniform)
  Range transient_sigma{8e-6, 25e-6};
  Range transient_freq{5e3, 22e3};
  Range transient_amp{0.3, 0.8};    // relative to the P-wavelet peak
  double transient_window = 400e-6; // micro-transients cluster after the P onset

  std::array<ClassProfile, kClassCount> classes{{
      {{3.0, 8.0}, {20e-6, 50e-6}, {100e-6, 250e-6}, {5, 15}},         // tensile
      {{1.0 / 8.0, 1.0 / 3.0}, {60e-6, 150e-6}, {300e-6, 600e-6}, {0, 3}},  // shear
      {{0.7, 1.4}, {40e-6, 100e-6}, {1.5e-3, 4e-3}, {0, 0}},         // mixed
  }};

  Range attenuation{0.3, 1.0};
  Range channel_delay{0.0, 50.0};  // samples
  double snr_db = 20.0;
  std::uint64_t seed = 1;

  // Acquisition chain applied to every channel.
  double sensor_resonance = 150e3;
  double sensor_quality = 2.0;
  double sensor_gain = 100.0;  // 40 dB pre-amplification

  const ClassProfile& profile(CrackClass c) const { return classes[class_index(c)]; }

  void validate() const {
    if (!(sample_rate > 0.0) || duration < 64 || channels == 0) fail(ErrorCode::InvalidArgument, "bad synth geometry");
    const double record = static_cast<double>(duration) / sample_rate;
    if (onset.hi * record + ps_delay.hi >= record) {
      fail(ErrorCode::InvalidArgument, "record too short for the latest S-wave arrival");
    }
    for (const auto& p : classes) {
      if (!(p.energy_ratio.lo > 0.0) || p.energy_ratio.lo > p.energy_ratio.hi) {
        fail(ErrorCode::InvalidArgument, "energy ratios must be positive ranges");
      }
    }
    if (!(profile(CrackClass::Tensile).rise_time.hi < profile(CrackClass::Shear).rise_time.lo)) {
      fail(ErrorCode::InvalidArgument, "tensile rise time must be shorter than shear rise time");
    }
  }

  preprocess::TransducerModel transducer() const {
    return preprocess::resonant_model(signal::next_pow2(duration), sample_rate, sensor_resonance, sensor_quality,
                                      sensor_gain);
  }
};

/// Every random quantity behind one event.
struct EventDraw {
  CrackClass label = CrackClass::Tensile;
  double p_freq = 0, s_freq = 0;
  double p_rise = 0, p_decay = 0, s_rise = 0, s_decay = 0;
  double onset = 0, ps_delay = 0;
  double energy_ratio = 0;
  double amplitude = 0;
  double p_phase = 0, s_phase = 0;
  struct Transient {
    double time = 0, sigma = 0, freq = 0, amp = 0, phase = 0;
  };
  std::vector<Transient> transients;
  std::vector<double> attenuation;
  std::vector<std::size_t> delay;
  double noise_sd = 0;
  std::uint64_t noise_seed = 0;
};

struct LabeledEvent {
  preprocess::RawEvent event;
  CrackClass label = CrackClass::Tensile;
  EventDraw draw;
};

/// Noise-free parts of an event on the reference channel (attenuation 1,
/// no delay, before the sensor).
struct EventComponents {
  std::vector<double> p_wave;
  std::vector<double> s_wave;
  std::vector<double> transients;

  std::vector<double> sum() const {
    std::vector<double> out(p_wave.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = p_wave[i] + s_wave[i] + transients[i];
    return out;
  }
};

namespace detail {

/// carrier * (1 - exp(-t/rise)) * exp(-t/decay), zero before `start`.
inline void add_wavelet(std::vector<double>& out, double fs, double start, double freq, double rise, double decay,
                        double amp, double phase) {
  const double two_pi_f = 2.0 * std::numbers::pi * freq;
  const auto first = static_cast<std::size_t>(std::ceil(start * fs));
  for (std::size_t i = first; i < out.size(); ++i) {
    const double t = static_cast<double>(i) / fs - start;
    const double env = (1.0 - std::exp(-t / rise)) * std::exp(-t / decay);
    out[i] += amp * env * std::sin(two_pi_f * t + phase);
  }
}

inline void add_burst(std::vector<double>& out, double fs, const EventDraw::Transient& tr) {
  const double two_pi_f = 2.0 * std::numbers::pi * tr.freq;
  const double span = 4.0 * tr.sigma;
  const auto lo = static_cast<std::size_t>(std::max(0.0, std::floor((tr.time - span) * fs)));
  const auto hi = std::min(out.size(), static_cast<std::size_t>(std::ceil((tr.time + span) * fs)) + 1);
  for (std::size_t i = lo; i < hi; ++i) {
    const double t = static_cast<double>(i) / fs - tr.time;
    out[i] += tr.amp * std::exp(-0.5 * t * t / (tr.sigma * tr.sigma)) * std::cos(two_pi_f * t + tr.phase);
  }
}

inline double sum_sq(const std::vector<double>& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

}  // namespace detail

/// Draw the random parameters of one event of class `label`.
inline EventDraw draw_event(CrackClass label, const SynthConfig& cfg, Rng& rng) {
  const auto& prof = cfg.profile(label);
  const double record = static_cast<double>(cfg.duration) / cfg.sample_rate;
  EventDraw d;
  d.label = label;
  d.p_freq = rng.uniform(cfg.p_freq.lo, cfg.p_freq.hi);
  d.s_freq = rng.uniform(cfg.s_freq.lo, cfg.s_freq.hi);
  d.p_rise = rng.uniform(cfg.p_rise.lo, cfg.p_rise.hi);
  d.p_decay = rng.uniform(cfg.p_decay.lo, cfg.p_decay.hi);
  d.s_rise = rng.uniform(prof.rise_time.lo, prof.rise_time.hi);
  d.s_decay = rng.uniform(prof.s_decay.lo, prof.s_decay.hi);
  d.onset = rng.uniform(cfg.onset.lo, cfg.onset.hi) * record;
  d.ps_delay = rng.uniform(cfg.ps_delay.lo, cfg.ps_delay.hi);
  d.energy_ratio = rng.log_uniform(prof.energy_ratio.lo, prof.energy_ratio.hi);
  d.amplitude = rng.log_uniform(cfg.amplitude.lo, cfg.amplitude.hi);
  d.p_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  d.s_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const auto n_tr = rng.uniform_int(static_cast<std::int64_t>(prof.transients.lo),
                                    static_cast<std::int64_t>(prof.transients.hi));
  for (std::int64_t i = 0; i < n_tr; ++i) {
    EventDraw::Transient tr;
    tr.time = d.onset + rng.uniform(0.0, cfg.transient_window);
    tr.sigma = rng.uniform(cfg.transient_sigma.lo, cfg.transient_sigma.hi);
    tr.freq = rng.uniform(cfg.transient_freq.lo, cfg.transient_freq.hi);
    tr.amp = rng.uniform(cfg.transient_amp.lo, cfg.transient_amp.hi);
    tr.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    d.transients.push_back(tr);
  }
  for (std::size_t k = 0; k < cfg.channels; ++k) {
    d.attenuation.push_back(rng.uniform(cfg.attenuation.lo, cfg.attenuation.hi));
    d.delay.push_back(static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(cfg.channel_delay.lo), static_cast<std::int64_t>(cfg.channel_delay.hi))));
  }
  d.noise_seed = rng.engine()();
  return d;
}

/// Render the noise-free P wavelet, S wavelet and micro-transients. The S
/// amplitude is set so that E_P / E_S equals the drawn ratio on the sample
/// grid; the P wavelet has peak envelope `amplitude`.
inline EventComponents render_components(const EventDraw& d, const SynthConfig& cfg) {
  const double fs = cfg.sample_rate;
  EventComponents c;
  c.p_wave.assign(cfg.duration, 0.0);
  c.s_wave.assign(cfg.duration, 0.0);
  c.transients.assign(cfg.duration, 0.0);
  detail::add_wavelet(c.p_wave, fs, d.onset, d.p_freq, d.p_rise, d.p_decay, 1.0, d.p_phase);
  detail::add_wavelet(c.s_wave, fs, d.onset + d.ps_delay, d.s_freq, d.s_rise, d.s_decay, 1.0, d.s_phase);

  double p_peak = 0.0;
  for (double v : c.p_wave) p_peak = std::max(p_peak, std::abs(v));
  const double p_scale = d.amplitude / p_peak;
  for (double& v : c.p_wave) v *= p_scale;
  const double e_p = detail::sum_sq(c.p_wave);
  const double s_scale = std::sqrt(e_p / (d.energy_ratio * detail::sum_sq(c.s_wave)));
  for (double& v : c.s_wave) v *= s_scale;

  for (auto tr : d.transients) {
    tr.amp *= d.amplitude;
    detail::add_burst(c.transients, fs, tr);
  }
  return c;
}

/// Per-channel attenuation and delay, Gaussian noise at snr_db relative to the
/// clean reference RMS, then the sensor/amplifier chain.
inline preprocess::RawEvent render_event(const EventDraw& d, const SynthConfig& cfg, std::int64_t event_id,
                                         EventDraw* noise_out = nullptr) {
  const auto clean = render_components(d, cfg).sum();
  const double rms = std::sqrt(detail::sum_sq(clean) / static_cast<double>(clean.size()));
  const double noise_sd = rms * std::pow(10.0, -cfg.snr_db / 20.0);
  if (noise_out) noise_out->noise_sd = noise_sd;

  const auto model = cfg.transducer();
  Rng noise(d.noise_seed);
  preprocess::RawEvent ev;
  ev.event_id = event_id;
  ev.trigger_time = d.onset;
  for (std::size_t k = 0; k < cfg.channels; ++k) {
    std::vector<double> ch(cfg.duration, 0.0);
    for (std::size_t i = d.delay[k]; i < cfg.duration; ++i) ch[i] = d.attenuation[k] * clean[i - d.delay[k]];
    for (double& v : ch) v += noise.normal(0.0, noise_sd);
    ev.channels.push_back(preprocess::convolve_tfr(signal::TimeSeries(std::move(ch), cfg.sample_rate), model));
  }
  return ev;
}

/// One labeled multi-channel event; a pure function of (class, cfg, seed).
inline LabeledEvent generate_event(CrackClass label, const SynthConfig& cfg, std::uint64_t seed,
                                   std::int64_t event_id = 0) {
  cfg.validate();
  Rng rng(seed);
  LabeledEvent e;
  e.label = label;
  e.draw = draw_event(label, cfg, rng);
  e.event = render_event(e.draw, cfg, event_id, &e.draw);
  return e;
}

/// 10%-to-90% rise time (seconds) of the analytic envelope's leading edge.
inline double rise_time_10_90(std::span<const double> x, double sample_rate) {
  const auto env = signal::analytic_signal(signal::TimeSeries({x.begin(), x.end()}, sample_rate)).envelope();
  const auto peak_it = std::max_element(env.begin(), env.end());
  const double peak = *peak_it;
  const auto peak_idx = static_cast<std::size_t>(peak_it - env.begin());
  std::size_t i10 = 0, i90 = 0;
  bool got10 = false;
  for (std::size_t i = 0; i <= peak_idx; ++i) {
    if (!got10 && env[i] >= 0.1 * peak) {
      i10 = i;
      got10 = true;
    }
    if (env[i] >= 0.9 * peak) {
      i90 = i;
      break;
    }
  }
  return static_cast<double>(i90 - i10) / sample_rate;
}

}  // namespace aecd::synth
