// Stem storage, WAV I/O and rendering of the adaptive mixture.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "abgm/mapping.hpp"

namespace abgm::audio {

class AudioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AudioClip {
  int sample_rate = 48000;
  std::vector<double> samples;  // mono

  void validate() const;
  std::size_t size() const { return samples.size(); }
};

struct StemBank {
  AudioClip drums;
  AudioClip strings;
  AudioClip others;

  // All three clips must share a sample rate and a length.
  void validate() const;
  int sample_rate() const { return drums.sample_rate; }
  std::size_t loop_length() const { return drums.size(); }
};

enum class ClipPolicy { HardClamp };

struct RenderConfig {
  double ramp_ms = 50.0;
  ClipPolicy clip_policy = ClipPolicy::HardClamp;
  bool loop = true;

  void validate() const;
};

// 16-bit PCM RIFF/WAVE, mono or stereo (stereo is averaged to mono).
AudioClip load_wav(const std::filesystem::path& path);
// 16-bit PCM mono; out-of-range samples are clamped before rounding.
void save_wav(const AudioClip& clip, const std::filesystem::path& path);

std::int16_t quantize_sample(double x);

// Loads drums.wav, strings.wav and others.wav from `dir`.
StemBank load_stem_bank(const std::filesystem::path& dir);
void save_stem_bank(const StemBank& stems, const std::filesystem::path& dir);

// First sample of tick k: floor(k * sample_rate / tick_rate).
std::int64_t tick_start_sample(std::int64_t tick, int sample_rate, int tick_rate);
double ramp_samples(const RenderConfig& config, int sample_rate);

// Follows the per-stem gain trajectory of a schedule. Each stem ramps
// linearly from its current gain to a new directive value over the ramp
// length, starting at the tick boundary where the value changed. A change
// arriving mid-ramp restarts the ramp from wherever the gain currently is.
class GainTracker {
 public:
  GainTracker(int sample_rate, int tick_rate, const RenderConfig& config);

  // Feeds the directive for the next tick; ticks must arrive in order.
  void push(const mapping::MixDirective& directive);
  // Gain at sample t; valid for t at or after the latest pushed boundary.
  mapping::StemGains at(std::int64_t t) const;
  std::size_t ticks() const { return ticks_; }

 private:
  struct Ramp {
    std::int64_t start = 0;
    double from = 0.0;
    double to = 0.0;
    double value_at(std::int64_t t, double len) const;
  };

  int sample_rate_;
  int tick_rate_;
  double ramp_len_;
  std::size_t ticks_ = 0;
  Ramp drums_, strings_, others_;
};

mapping::StemGains gain_at(const mapping::GainSchedule& schedule,
                           std::int64_t sample_index, int sample_rate,
                           const RenderConfig& config);

struct MixResult {
  AudioClip clip;
  std::size_t clipped_samples = 0;
};

// Incremental renderer: every pushed directive appends one tick of audio.
// Produces exactly the samples render_mix would for the same schedule.
class StreamingMixer {
 public:
  StreamingMixer(const StemBank& stems, int tick_rate, const RenderConfig& config);

  void push(const mapping::MixDirective& directive);
  const std::vector<double>& samples() const { return out_; }
  std::size_t clipped_samples() const { return clipped_; }
  std::size_t ticks() const { return tracker_.ticks(); }

 private:
  const StemBank& stems_;
  RenderConfig config_;
  int tick_rate_;
  GainTracker tracker_;
  std::vector<double> out_;
  std::size_t clipped_ = 0;
};

MixResult render_mix(const StemBank& stems, const mapping::GainSchedule& schedule,
                     const RenderConfig& config);

// Adds white Gaussian noise whose RMS is `level_dbfs` relative to full scale.
void add_white_noise(std::span<double> samples, double level_dbfs, std::uint64_t seed);

double rms(std::span<const double> samples);

}  // namespace abgm::audio
