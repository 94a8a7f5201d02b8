// Audio observation front-ends: raw frames, FFT magnitude, log-mel spectrogram.
#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "abgm/audio.hpp"

namespace abgm::features {

class FeatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Window { Hann, Rectangular };
enum class FeatureKind { Raw, FftMag, MelSpec };

std::string_view to_string(FeatureKind k);
FeatureKind parse_feature_kind(std::string_view s);

struct FeatureConfig {
  std::size_t frame_size = 1024;
  std::size_t hop = 512;
  Window window = Window::Hann;
  int n_mels = 80;
  double f_min = 0.0;
  std::optional<double> f_max;  // defaults to sample_rate / 2
  double log_floor = 1e-10;

  double resolved_f_max(int sample_rate) const { return f_max.value_or(sample_rate / 2.0); }
  void validate(int sample_rate) const;
};

struct FeatureVector {
  FeatureKind kind = FeatureKind::Raw;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

bool is_power_of_two(std::size_t n);

// In-place iterative radix-2 decimation-in-time FFT (forward, unnormalized).
void fft(std::span<std::complex<double>> x);

std::vector<double> window_coefficients(Window w, std::size_t n);

FeatureVector frame_raw(const audio::AudioClip& clip, std::size_t start, const FeatureConfig& config);
FeatureVector fft_magnitude(const FeatureVector& frame, const FeatureConfig& config);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// n_mels x (frame_size / 2 + 1) triangular filters, row-major.
FeatureVector mel_filterbank(const FeatureConfig& config, int sample_rate);

std::size_t frame_count(std::size_t length, const FeatureConfig& config);

// Mel-filtered power spectrogram before log compression, (n_mels, n_frames).
FeatureVector mel_power(const audio::AudioClip& clip, const FeatureConfig& config);
FeatureVector mel_spectrogram(const audio::AudioClip& clip, const FeatureConfig& config);

// `kind rows cols` followed by one space-separated line per row, each value in
// its shortest round-trippable decimal form.
void write_features(std::ostream& os, const FeatureVector& fv);

}  // namespace abgm::features
