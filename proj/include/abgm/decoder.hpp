// Recovers stem gains, and from them the HP / distance bins, from a rendered
// mixture by least squares against the known stems.
//
// For a window where all gains are constant the mixture is exactly
// sum_k g_k * stem_k, so the gains solve the 3x3 normal equations
// (G + ridge*I) g = b with G the stem Gram matrix over the window and
// b_k = <stem_k, mix>.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "abgm/audio.hpp"
#include "abgm/mapping.hpp"

namespace abgm::decoder {

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IllConditioned : public DecodeError {
 public:
  IllConditioned(double condition, const std::string& what)
      : DecodeError(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

class BadWindow : public DecodeError {
 public:
  using DecodeError::DecodeError;
};

struct DecoderConfig {
  std::size_t window_samples = 4096;
  // Shortest settled stretch decode_trace will still analyze.
  std::size_t min_window_samples = 1024;
  double ridge = 0.0;
  double condition_cap = 1e8;

  void validate() const;
};

using Matrix3 = std::array<std::array<double, 3>, 3>;
using Vector3 = std::array<double, 3>;  // drums, strings, others

struct GainEstimate {
  mapping::StemGains gains;
  double residual_rms = 0.0;
  double condition = 0.0;
};

struct DecodedState {
  mapping::StemGains gains;
  double residual_rms = 0.0;
  mapping::LevelBins bins;
};

// Eigenvalues of a symmetric 3x3 matrix, ascending (cyclic Jacobi).
Vector3 symmetric_eigenvalues(const Matrix3& m);

// Solves the regularized normal equations; negative gains are clamped to 0.
// Throws IllConditioned when cond(G + ridge*I) exceeds the cap.
Vector3 solve_normal_equations(const Matrix3& gram, const Vector3& rhs, double ridge,
                               double condition_cap, double* condition = nullptr);

// Direct O(window) estimate. `phase` is the loop position of mix_window[0].
GainEstimate estimate_gains(std::span<const double> mix_window, const audio::StemBank& stems,
                            std::size_t phase, const DecoderConfig& config);

// Index of the volume nearest to `gain`; ties go to the louder volume.
std::size_t nearest_level(double gain, const mapping::LevelTable& table);

mapping::LevelBins bins_from_gains(const mapping::StemGains& g, const mapping::VolumeMap& map);

// Reusable decoder: prefix sums over the stem loop make every Gram matrix an
// O(1) lookup. Immutable after construction; safe to share across threads.
class StemDecoder {
 public:
  StemDecoder(const audio::StemBank& stems, mapping::VolumeMap map, DecoderConfig config);

  Matrix3 gram(std::size_t phase, std::size_t length) const;
  GainEstimate estimate(std::span<const double> mix_window, std::size_t phase) const;
  DecodedState decode(std::span<const double> mix_window, std::size_t phase) const;

  const audio::StemBank& stems() const { return stems_; }
  const mapping::VolumeMap& map() const { return map_; }
  const DecoderConfig& config() const { return config_; }

 private:
  audio::StemBank stems_;
  mapping::VolumeMap map_;
  DecoderConfig config_;
  // prefix_[p][i] = sum of products p over loop samples [0, i).
  std::array<std::vector<double>, 6> prefix_;
};

DecodedState decode_window(std::span<const double> mix_window, const audio::StemBank& stems,
                           std::size_t phase, const mapping::VolumeMap& map,
                           const DecoderConfig& config);

// Timing of a render: where ticks start and when any stem gain changed.
struct TickGeometry {
  int sample_rate = 48000;
  int tick_rate = 60;
  std::size_t ticks = 0;
  double ramp_ms = 50.0;
  std::vector<std::size_t> change_ticks;  // ascending, all >= 1
};

std::vector<std::size_t> change_ticks(const mapping::GainSchedule& schedule);
TickGeometry geometry_for(const mapping::GainSchedule& schedule, int sample_rate,
                          const audio::RenderConfig& render);

// First sample at which every gain has settled after the change at `tick`.
std::int64_t settle_sample(std::size_t change_tick, const TickGeometry& geo);

// Analysis window ending at `end`: as long as possible up to window_samples
// while starting no earlier than `settled_from`. Empty if shorter than
// min_window_samples.
struct SampleRange {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  std::size_t size() const { return static_cast<std::size_t>(end - begin); }
};
std::optional<SampleRange> settled_window(std::int64_t end, std::int64_t settled_from,
                                          const DecoderConfig& config);

struct TickDecode {
  std::size_t tick = 0;
  bool analyzed = false;  // false: the tick had no settled window
  DecodedState state;
};

// One entry per tick. Tick k is analyzed over the settled audio that ends
// where tick k ends.
std::vector<TickDecode> decode_trace(const audio::AudioClip& mix, const StemDecoder& decoder,
                                     const TickGeometry& geometry);

// CSV: `tick,g_drums,g_strings,g_others,hp1_bin,hp2_bin,pd_bin,residual_rms`,
// analyzed ticks only.
void write_decode_table(std::ostream& os, const std::vector<TickDecode>& rows);

}  // namespace abgm::decoder
