#include "abgm/encoders.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

namespace abgm::features {

std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::Raw: return "Raw";
    case FeatureKind::FftMag: return "FftMag";
    case FeatureKind::MelSpec: return "MelSpec";
  }
  return "?";
}

FeatureKind parse_feature_kind(std::string_view s) {
  if (s == "Raw" || s == "raw") return FeatureKind::Raw;
  if (s == "FftMag" || s == "fft") return FeatureKind::FftMag;
  if (s == "MelSpec" || s == "mel") return FeatureKind::MelSpec;
  throw FeatureError("unknown feature kind '" + std::string(s) + "'");
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void FeatureConfig::validate(int sample_rate) const {
  if (!is_power_of_two(frame_size)) throw FeatureError("frame_size must be a power of two");
  if (hop == 0 || hop > frame_size) throw FeatureError("hop must be in (0, frame_size]");
  if (n_mels < 1) throw FeatureError("n_mels must be at least 1");
  const double hi = resolved_f_max(sample_rate);
  if (!(f_min >= 0.0 && f_min < hi && hi <= sample_rate / 2.0))
    throw FeatureError("need 0 <= f_min < f_max <= sample_rate / 2");
  if (!(log_floor > 0.0)) throw FeatureError("log_floor must be positive");
}

void fft(std::span<std::complex<double>> x) {
  const std::size_t n = x.size();
  if (!is_power_of_two(n)) throw FeatureError("fft length must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const double step = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t k = 0; k < half; ++k) {
      // Twiddles are evaluated directly rather than by recurrence.
      const std::complex<double> w = std::polar(1.0, step * static_cast<double>(k));
      for (std::size_t i = k; i < n; i += len) {
        const std::complex<double> u = x[i];
        const std::complex<double> v = x[i + half] * w;
        x[i] = u + v;
        x[i + half] = u - v;
      }
    }
  }
}

std::vector<double> window_coefficients(Window w, std::size_t n) {
  std::vector<double> c(n, 1.0);
  if (w == Window::Hann) {
    // Periodic Hann.
    for (std::size_t i = 0; i < n; ++i)
      c[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return c;
}

FeatureVector frame_raw(const audio::AudioClip& clip, std::size_t start, const FeatureConfig& config) {
  FeatureVector fv{FeatureKind::Raw, 1, config.frame_size, std::vector<double>(config.frame_size, 0.0)};
  if (start < clip.samples.size()) {
    const std::size_t n = std::min(config.frame_size, clip.samples.size() - start);
    std::copy_n(clip.samples.begin() + static_cast<std::ptrdiff_t>(start), n, fv.data.begin());
  }
  return fv;
}

namespace {

std::vector<std::complex<double>> windowed_spectrum(std::span<const double> frame,
                                                   const std::vector<double>& win) {
  std::vector<std::complex<double>> buf(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i] * win[i];
  fft(buf);
  return buf;
}

}  // namespace

FeatureVector fft_magnitude(const FeatureVector& frame, const FeatureConfig& config) {
  const std::size_t n = frame.data.size();
  if (!is_power_of_two(n)) throw FeatureError("fft_magnitude: frame length must be a power of two");
  if (n != config.frame_size) throw FeatureError("fft_magnitude: frame length differs from frame_size");
  const auto spec = windowed_spectrum(frame.data, window_coefficients(config.window, n));
  FeatureVector out{FeatureKind::FftMag, 1, n / 2 + 1, {}};
  out.data.resize(out.cols);
  for (std::size_t k = 0; k < out.cols; ++k) out.data[k] = std::abs(spec[k]);
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

FeatureVector mel_filterbank(const FeatureConfig& config, int sample_rate) {
  config.validate(sample_rate);
  const std::size_t bins = config.frame_size / 2 + 1;
  const auto n_mels = static_cast<std::size_t>(config.n_mels);
  const double mel_lo = hz_to_mel(config.f_min);
  const double mel_hi = hz_to_mel(config.resolved_f_max(sample_rate));

  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n_mels + 1));

  FeatureVector fb{FeatureKind::MelSpec, n_mels, bins, std::vector<double>(n_mels * bins, 0.0)};
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(config.frame_size);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    bool any = false;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      const double rise = (f - left) / (center - left);
      const double fall = (right - f) / (right - center);
      const double w = std::max(0.0, std::min(rise, fall));
      fb.data[m * bins + k] = w;
      any = any || w > 0.0;
    }
    if (!any)
      throw FeatureError("mel filter " + std::to_string(m) +
                         " covers no FFT bin; reduce n_mels or enlarge frame_size");
  }
  return fb;
}

std::size_t frame_count(std::size_t length, const FeatureConfig& config) {
  if (length < config.frame_size) return 0;
  return (length - config.frame_size) / config.hop + 1;
}

FeatureVector mel_power(const audio::AudioClip& clip, const FeatureConfig& config) {
  const FeatureVector fb = mel_filterbank(config, clip.sample_rate);
  const std::size_t frames = frame_count(clip.samples.size(), config);
  if (frames == 0) throw FeatureError("mel_spectrogram: clip shorter than one frame");

  const std::size_t n = config.frame_size;
  const std::size_t bins = fb.cols;
  const auto win = window_coefficients(config.window, n);
  FeatureVector out{FeatureKind::MelSpec, fb.rows, frames, std::vector<double>(fb.rows * frames, 0.0)};
  std::vector<double> power(bins);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::span<const double> frame(clip.samples.data() + f * config.hop, n);
    const auto spec = windowed_spectrum(frame, win);
    for (std::size_t k = 0; k < bins; ++k) power[k] = std::norm(spec[k]);
    for (std::size_t m = 0; m < fb.rows; ++m) {
      double acc = 0.0;
      for (std::size_t k = 0; k < bins; ++k) acc += fb.data[m * bins + k] * power[k];
      out.data[m * frames + f] = acc;
    }
  }
  return out;
}

FeatureVector mel_spectrogram(const audio::AudioClip& clip, const FeatureConfig& config) {
  FeatureVector out = mel_power(clip, config);
  for (double& v : out.data) v = std::log(v + config.log_floor);
  return out;
}

void write_features(std::ostream& os, const FeatureVector& fv) {
  os << to_string(fv.kind) << ' ' << fv.rows << ' ' << fv.cols << '\n';
  char buf[64];
  for (std::size_t r = 0; r < fv.rows; ++r) {
    for (std::size_t c = 0; c < fv.cols; ++c) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, fv.at(r, c));
      if (c) os << ' ';
      os.write(buf, end - buf);
    }
    os << '\n';
  }
}

}  // namespace abgm::features
