#include "abgm/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

namespace abgm::audio {

void AudioClip::validate() const {
  if (sample_rate <= 0) throw AudioError("audio clip: sample rate must be positive");
  if (samples.empty()) throw AudioError("audio clip: no samples");
  for (double s : samples) {
    if (!std::isfinite(s)) throw AudioError("audio clip: non-finite sample");
  }
}

void StemBank::validate() const {
  drums.validate();
  strings.validate();
  others.validate();
  if (strings.sample_rate != drums.sample_rate || others.sample_rate != drums.sample_rate)
    throw AudioError("stem bank: sample rates differ");
  if (strings.size() != drums.size() || others.size() != drums.size())
    throw AudioError("stem bank: stem lengths differ");
}

void RenderConfig::validate() const {
  if (!(ramp_ms >= 0.0) || !std::isfinite(ramp_ms))
    throw AudioError("render config: ramp_ms must be a non-negative number");
}

// ---------------------------------------------------------------------------
// WAV

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AudioError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw AudioError(where + "not a RIFF/WAVE file");

  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t len = read_u32(hdr + 4);
    const std::size_t body = pos + 8;
    if (len > bytes.size() - body) throw AudioError(where + "truncated chunk");
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (len < 16) throw AudioError(where + "short fmt chunk");
      const unsigned char* f = bytes.data() + body;
      std::uint16_t tag = read_u16(f);
      channels = read_u16(f + 2);
      rate = read_u32(f + 4);
      bits = read_u16(f + 14);
      // WAVE_FORMAT_EXTENSIBLE carries the real tag in its sub-format GUID.
      if (tag == 0xFFFE && len >= 40) tag = read_u16(f + 24);
      if (tag != 1) throw AudioError(where + "only PCM WAV is supported");
      if (bits != 16) throw AudioError(where + "only 16-bit PCM is supported");
      if (channels != 1 && channels != 2) throw AudioError(where + "only mono or stereo is supported");
      if (rate == 0) throw AudioError(where + "zero sample rate");
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = len;
    }
    pos = body + len + (len & 1);
  }
  if (!have_fmt) throw AudioError(where + "missing fmt chunk");
  if (data == nullptr) throw AudioError(where + "missing data chunk");

  const std::size_t frame_bytes = 2u * channels;
  const std::size_t frames = data_len / frame_bytes;
  if (frames == 0) throw AudioError(where + "no samples");

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const unsigned char* fr = data + i * frame_bytes;
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      acc += static_cast<std::int16_t>(read_u16(fr + 2 * c)) / 32768.0;
    }
    clip.samples[i] = acc / channels;
  }
  return clip;
}

std::int16_t quantize_sample(double x) {
  const double scaled = std::clamp(x, -1.0, 1.0) * 32768.0;
  const long q = std::lround(scaled);
  return static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L));
}

void save_wav(const AudioClip& clip, const std::filesystem::path& path) {
  clip.validate();
  const auto n = static_cast<std::uint32_t>(clip.samples.size());
  const auto rate = static_cast<std::uint32_t>(clip.sample_rate);
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  put_u32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);         // PCM
  put_u16(out, 1);         // mono
  put_u32(out, rate);
  put_u32(out, rate * 2);  // byte rate
  put_u16(out, 2);         // block align
  put_u16(out, 16);
  out += "data";
  put_u32(out, 2 * n);
  for (double s : clip.samples) put_u16(out, static_cast<std::uint16_t>(quantize_sample(s)));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw AudioError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw AudioError("write failed for " + path.string());
}

StemBank load_stem_bank(const std::filesystem::path& dir) {
  StemBank bank;
  bank.drums = load_wav(dir / "drums.wav");
  bank.strings = load_wav(dir / "strings.wav");
  bank.others = load_wav(dir / "others.wav");
  bank.validate();
  return bank;
}

void save_stem_bank(const StemBank& stems, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_wav(stems.drums, dir / "drums.wav");
  save_wav(stems.strings, dir / "strings.wav");
  save_wav(stems.others, dir / "others.wav");
}

// ---------------------------------------------------------------------------
// Gain automation

std::int64_t tick_start_sample(std::int64_t tick, int sample_rate, int tick_rate) {
  return tick * sample_rate / tick_rate;
}

double ramp_samples(const RenderConfig& config, int sample_rate) {
  return config.ramp_ms * sample_rate / 1000.0;
}

double GainTracker::Ramp::value_at(std::int64_t t, double len) const {
  const double elapsed = static_cast<double>(t - start);
  if (elapsed >= len || from == to) return to;
  if (elapsed <= 0.0) return from;
  return from + (to - from) * (elapsed / len);
}

GainTracker::GainTracker(int sample_rate, int tick_rate, const RenderConfig& config)
    : sample_rate_(sample_rate), tick_rate_(tick_rate),
      ramp_len_(ramp_samples(config, sample_rate)) {
  config.validate();
  if (sample_rate <= 0 || tick_rate <= 0) throw AudioError("gain tracker: rates must be positive");
}

void GainTracker::push(const mapping::MixDirective& directive) {
  const std::int64_t t = tick_start_sample(static_cast<std::int64_t>(ticks_), sample_rate_, tick_rate_);
  auto update = [&](Ramp& r, double target) {
    if (ticks_ == 0) {
      r = {t, target, target};
    } else if (target != r.to) {
      r = {t, r.value_at(t, ramp_len_), target};
    }
  };
  update(drums_, directive.gains.drums);
  update(strings_, directive.gains.strings);
  update(others_, directive.gains.others);
  ++ticks_;
}

mapping::StemGains GainTracker::at(std::int64_t t) const {
  return {drums_.value_at(t, ramp_len_), strings_.value_at(t, ramp_len_),
          others_.value_at(t, ramp_len_)};
}

mapping::StemGains gain_at(const mapping::GainSchedule& schedule, std::int64_t sample_index,
                           int sample_rate, const RenderConfig& config) {
  schedule.validate();
  GainTracker tracker(sample_rate, schedule.tick_rate, config);
  for (const auto& d : schedule.directives) {
    const std::int64_t start =
        tick_start_sample(static_cast<std::int64_t>(tracker.ticks()), sample_rate, schedule.tick_rate);
    if (tracker.ticks() > 0 && start > sample_index) break;
    tracker.push(d);
  }
  return tracker.at(std::max<std::int64_t>(sample_index, 0));
}

// ---------------------------------------------------------------------------
// Rendering

StreamingMixer::StreamingMixer(const StemBank& stems, int tick_rate, const RenderConfig& config)
    : stems_(stems), config_(config), tick_rate_(tick_rate),
      tracker_(stems.sample_rate(), tick_rate, config) {
  stems_.validate();
}

void StreamingMixer::push(const mapping::MixDirective& directive) {
  const int sr = stems_.sample_rate();
  const auto k = static_cast<std::int64_t>(tracker_.ticks());
  const std::int64_t begin = tick_start_sample(k, sr, tick_rate_);
  const std::int64_t end = tick_start_sample(k + 1, sr, tick_rate_);
  tracker_.push(directive);

  const auto len = static_cast<std::int64_t>(stems_.loop_length());
  const auto& d = stems_.drums.samples;
  const auto& s = stems_.strings.samples;
  const auto& o = stems_.others.samples;
  for (std::int64_t t = begin; t < end; ++t) {
    double v = 0.0;
    if (config_.loop || t < len) {
      const auto i = static_cast<std::size_t>(t % len);
      const mapping::StemGains g = tracker_.at(t);
      v = g.drums * d[i] + g.strings * s[i] + g.others * o[i];
    }
    if (v > 1.0 || v < -1.0) {
      v = std::clamp(v, -1.0, 1.0);
      ++clipped_;
    }
    out_.push_back(v);
  }
}

MixResult render_mix(const StemBank& stems, const mapping::GainSchedule& schedule,
                     const RenderConfig& config) {
  stems.validate();
  schedule.validate();
  StreamingMixer mixer(stems, schedule.tick_rate, config);
  for (const auto& d : schedule.directives) mixer.push(d);
  MixResult result;
  result.clip.sample_rate = stems.sample_rate();
  result.clip.samples = mixer.samples();
  result.clipped_samples = mixer.clipped_samples();
  if (result.clip.samples.empty()) throw AudioError("render_mix: schedule shorter than one sample");
  return result;
}

void add_white_noise(std::span<double> samples, double level_dbfs, std::uint64_t seed) {
  const double sigma = std::pow(10.0, level_dbfs / 20.0);
  std::mt19937_64 rng(seed);
  // Box-Muller on raw 53-bit draws keeps the sequence vendor independent.
  auto uniform = [&rng] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  for (std::size_t i = 0; i < samples.size(); i += 2) {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double th = 2.0 * std::numbers::pi * uniform();
    samples[i] += sigma * r * std::cos(th);
    if (i + 1 < samples.size()) samples[i + 1] += sigma * r * std::sin(th);
  }
}

double rms(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

}  // namespace abgm::audio
