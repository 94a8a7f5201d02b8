// Synthetic, loop-aligned stems for hermetic testing.
//
// Each stem is a sum of random-phase sinusoids confined to its own frequency
// band. Every partial completes a whole number of cycles per loop, so the
// stems loop without a seam, and the band gaps keep the three stems nearly
// orthogonal over short windows.
#pragma once

#include <cstddef>
#include <cstdint>

#include "abgm/audio.hpp"

namespace abgm::audio {

struct FixtureSpec {
  int sample_rate = 48000;
  int seconds = 10;
  int partials_per_stem = 256;
  double stem_rms = 0.09;
  double max_correlation = 0.01;
  std::size_t check_window = 4096;
};

// Generates stems for `seed`; if the first window fails the correlation bound,
// the next seed is tried. `used_seed` (optional) receives the accepted seed.
StemBank make_fixture_stems(std::uint64_t seed, const FixtureSpec& spec = {},
                            std::uint64_t* used_seed = nullptr);

// Largest absolute normalized correlation between any two stems over
// [offset, offset + window), wrapping around the loop.
double max_pairwise_correlation(const StemBank& stems, std::size_t offset, std::size_t window);

}  // namespace abgm::audio
