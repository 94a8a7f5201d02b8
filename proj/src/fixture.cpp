#include "abgm/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <unordered_set>
#include <vector>

namespace abgm::audio {

namespace {

struct Band {
  double lo_hz;
  double hi_hz;
};

// drums / strings / others
constexpr Band kBands[3] = {{60.0, 1500.0}, {2500.0, 6000.0}, {8000.0, 16000.0}};

std::vector<double> multitone(const std::vector<double>& sine, Band band, int seconds,
                              int partials, double target_rms, std::mt19937_64& rng) {
  const std::size_t len = sine.size();
  // Partials sit on multiples of 1/seconds Hz, i.e. whole cycles per loop.
  const auto lo = static_cast<std::uint64_t>(std::ceil(band.lo_hz * seconds));
  const auto hi = static_cast<std::uint64_t>(std::floor(band.hi_hz * seconds));
  std::unordered_set<std::uint64_t> picked;
  std::vector<std::uint64_t> cycles;
  while (cycles.size() < static_cast<std::size_t>(partials)) {
    const std::uint64_t c = lo + rng() % (hi - lo + 1);
    if (picked.insert(c).second) cycles.push_back(c);
  }
  std::sort(cycles.begin(), cycles.end());

  std::vector<double> out(len, 0.0);
  const double amp = target_rms * std::sqrt(2.0 / partials);
  for (std::uint64_t c : cycles) {
    std::uint64_t idx = rng() % len;  // phase
    for (std::size_t t = 0; t < len; ++t) {
      out[t] += amp * sine[idx];
      idx += c;
      if (idx >= len) idx %= len;
    }
  }
  return out;
}

StemBank generate(std::uint64_t seed, const FixtureSpec& spec) {
  const std::size_t len = static_cast<std::size_t>(spec.sample_rate) * spec.seconds;
  std::vector<double> sine(len);
  for (std::size_t i = 0; i < len; ++i)
    sine[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(len));

  std::mt19937_64 rng(seed);
  StemBank bank;
  AudioClip* clips[3] = {&bank.drums, &bank.strings, &bank.others};
  for (int s = 0; s < 3; ++s) {
    clips[s]->sample_rate = spec.sample_rate;
    clips[s]->samples =
        multitone(sine, kBands[s], spec.seconds, spec.partials_per_stem, spec.stem_rms, rng);
  }
  return bank;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b,
                   std::size_t offset, std::size_t window) {
  const std::size_t len = a.size();
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < window; ++i) {
    const std::size_t t = (offset + i) % len;
    ab += a[t] * b[t];
    aa += a[t] * a[t];
    bb += b[t] * b[t];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

}  // namespace

double max_pairwise_correlation(const StemBank& stems, std::size_t offset, std::size_t window) {
  const auto& d = stems.drums.samples;
  const auto& s = stems.strings.samples;
  const auto& o = stems.others.samples;
  return std::max({std::abs(correlation(d, s, offset, window)),
                   std::abs(correlation(d, o, offset, window)),
                   std::abs(correlation(s, o, offset, window))});
}

StemBank make_fixture_stems(std::uint64_t seed, const FixtureSpec& spec, std::uint64_t* used_seed) {
  if (spec.sample_rate <= 0 || spec.seconds <= 0 || spec.partials_per_stem <= 0)
    throw AudioError("fixture: sample_rate, seconds and partials must be positive");
  if (kBands[2].hi_hz * 2.0 > spec.sample_rate)
    throw AudioError("fixture: sample rate too low for the stem bands");
  for (int attempt = 0; attempt < 64; ++attempt) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt);
    StemBank bank = generate(s, spec);
    if (max_pairwise_correlation(bank, 0, spec.check_window) < spec.max_correlation) {
      if (used_seed) *used_seed = s;
      return bank;
    }
  }
  throw AudioError("fixture: no seed produced sufficiently uncorrelated stems");
}

}  // namespace abgm::audio
