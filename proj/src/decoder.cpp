#include "abgm/decoder.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace abgm::decoder {

void DecoderConfig::validate() const {
  if (window_samples < 3) throw DecodeError("decoder config: window_samples must be at least 3");
  if (min_window_samples < 3 || min_window_samples > window_samples)
    throw DecodeError("decoder config: min_window_samples must be in [3, window_samples]");
  if (!(ridge >= 0.0)) throw DecodeError("decoder config: ridge must be non-negative");
  if (!(condition_cap >= 1.0)) throw DecodeError("decoder config: condition_cap must be >= 1");
}

Vector3 symmetric_eigenvalues(const Matrix3& m) {
  Matrix3 a = m;
  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    const double scale = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
    if (off <= 1e-30 * scale || off == 0.0) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  Vector3 ev{a[0][0], a[1][1], a[2][2]};
  std::sort(ev.begin(), ev.end());
  return ev;
}

Vector3 solve_normal_equations(const Matrix3& gram, const Vector3& rhs, double ridge,
                               double condition_cap, double* condition) {
  Matrix3 a = gram;
  for (int i = 0; i < 3; ++i) a[i][i] += ridge;

  const Vector3 ev = symmetric_eigenvalues(a);
  const double cond = ev[0] > 0.0 ? ev[2] / ev[0] : std::numeric_limits<double>::infinity();
  if (condition) *condition = cond;
  if (!(cond <= condition_cap))
    throw IllConditioned(cond, "stem Gram matrix is ill-conditioned (condition " +
                                   std::to_string(cond) + "); stems too correlated over this window");

  // Cholesky: a = L L^T.
  Matrix3 l{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = a[i][j];
      for (int k = 0; k < j; ++k) sum -= l[i][k] * l[j][k];
      if (i == j) {
        if (!(sum > 0.0)) throw IllConditioned(cond, "stem Gram matrix is not positive definite");
        l[i][i] = std::sqrt(sum);
      } else {
        l[i][j] = sum / l[j][j];
      }
    }
  }
  Vector3 y{};
  for (int i = 0; i < 3; ++i) {
    double sum = rhs[i];
    for (int k = 0; k < i; ++k) sum -= l[i][k] * y[k];
    y[i] = sum / l[i][i];
  }
  Vector3 g{};
  for (int i = 2; i >= 0; --i) {
    double sum = y[i];
    for (int k = i + 1; k < 3; ++k) sum -= l[k][i] * g[k];
    g[i] = sum / l[i][i];
  }
  for (double& v : g) v = std::max(0.0, v);
  return g;
}

namespace {

void check_window(std::size_t window, std::size_t loop) {
  if (window < 3) throw BadWindow("decode window shorter than 3 samples");
  if (window > loop) throw BadWindow("decode window longer than the stem loop");
}

double residual_rms(std::span<const double> mix, const audio::StemBank& stems, std::size_t phase,
                    const Vector3& g) {
  const std::size_t len = stems.loop_length();
  const auto& d = stems.drums.samples;
  const auto& s = stems.strings.samples;
  const auto& o = stems.others.samples;
  double acc = 0.0;
  std::size_t i = phase % len;
  for (double m : mix) {
    const double r = m - (g[0] * d[i] + g[1] * s[i] + g[2] * o[i]);
    acc += r * r;
    if (++i == len) i = 0;
  }
  return std::sqrt(acc / static_cast<double>(mix.size()));
}

Vector3 stem_mix_products(std::span<const double> mix, const audio::StemBank& stems,
                          std::size_t phase) {
  const std::size_t len = stems.loop_length();
  const auto& d = stems.drums.samples;
  const auto& s = stems.strings.samples;
  const auto& o = stems.others.samples;
  Vector3 b{};
  std::size_t i = phase % len;
  for (double m : mix) {
    b[0] += d[i] * m;
    b[1] += s[i] * m;
    b[2] += o[i] * m;
    if (++i == len) i = 0;
  }
  return b;
}

mapping::StemGains to_gains(const Vector3& g) { return {g[0], g[1], g[2]}; }

}  // namespace

GainEstimate estimate_gains(std::span<const double> mix_window, const audio::StemBank& stems,
                            std::size_t phase, const DecoderConfig& config) {
  stems.validate();
  const std::size_t len = stems.loop_length();
  check_window(mix_window.size(), len);

  const auto& d = stems.drums.samples;
  const auto& s = stems.strings.samples;
  const auto& o = stems.others.samples;
  Matrix3 gram{};
  std::size_t i = phase % len;
  for (std::size_t t = 0; t < mix_window.size(); ++t) {
    const double v[3] = {d[i], s[i], o[i]};
    for (int r = 0; r < 3; ++r)
      for (int c = r; c < 3; ++c) gram[r][c] += v[r] * v[c];
    if (++i == len) i = 0;
  }
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < r; ++c) gram[r][c] = gram[c][r];

  GainEstimate est;
  const Vector3 g = solve_normal_equations(gram, stem_mix_products(mix_window, stems, phase),
                                           config.ridge, config.condition_cap, &est.condition);
  est.gains = to_gains(g);
  est.residual_rms = residual_rms(mix_window, stems, phase, g);
  return est;
}

std::size_t nearest_level(double gain, const mapping::LevelTable& table) {
  if (table.volumes.empty()) throw DecodeError("nearest_level on an empty table");
  constexpr double kTie = 1e-12;
  std::size_t best = 0;
  double best_diff = std::abs(gain - table.volumes[0]);
  for (std::size_t i = 1; i < table.volumes.size(); ++i) {
    const double diff = std::abs(gain - table.volumes[i]);
    const bool tie = std::abs(diff - best_diff) <= kTie;
    if ((diff < best_diff && !tie) || (tie && table.volumes[i] > table.volumes[best])) {
      best = i;
      best_diff = std::min(diff, best_diff);
    }
  }
  return best;
}

mapping::LevelBins bins_from_gains(const mapping::StemGains& g, const mapping::VolumeMap& map) {
  return {nearest_level(g.strings, map.strings_table), nearest_level(g.others, map.others_table),
          nearest_level(g.drums, map.drums_table)};
}

// ---------------------------------------------------------------------------

StemDecoder::StemDecoder(const audio::StemBank& stems, mapping::VolumeMap map, DecoderConfig config)
    : stems_(stems), map_(std::move(map)), config_(config) {
  stems_.validate();
  map_.validate();
  config_.validate();
  const std::size_t len = stems_.loop_length();
  const auto& d = stems_.drums.samples;
  const auto& s = stems_.strings.samples;
  const auto& o = stems_.others.samples;
  for (auto& p : prefix_) p.assign(len + 1, 0.0);
  long double acc[6] = {};
  for (std::size_t i = 0; i < len; ++i) {
    const long double v[6] = {d[i] * d[i], d[i] * s[i], d[i] * o[i],
                              s[i] * s[i], s[i] * o[i], o[i] * o[i]};
    for (int p = 0; p < 6; ++p) {
      acc[p] += v[p];
      prefix_[p][i + 1] = static_cast<double>(acc[p]);
    }
  }
}

Matrix3 StemDecoder::gram(std::size_t phase, std::size_t length) const {
  const std::size_t len = stems_.loop_length();
  check_window(length, len);
  const std::size_t begin = phase % len;
  const std::size_t end = begin + length;
  auto range = [&](int p) {
    const auto& pre = prefix_[p];
    if (end <= len) return pre[end] - pre[begin];
    return (pre[len] - pre[begin]) + pre[end - len];
  };
  const double dd = range(0), ds = range(1), d_o = range(2), ss = range(3), so = range(4),
               oo = range(5);
  return Matrix3{{{dd, ds, d_o}, {ds, ss, so}, {d_o, so, oo}}};
}

GainEstimate StemDecoder::estimate(std::span<const double> mix_window, std::size_t phase) const {
  const Matrix3 g_mat = gram(phase, mix_window.size());
  GainEstimate est;
  const Vector3 g = solve_normal_equations(g_mat, stem_mix_products(mix_window, stems_, phase),
                                           config_.ridge, config_.condition_cap, &est.condition);
  est.gains = to_gains(g);
  est.residual_rms = residual_rms(mix_window, stems_, phase, g);
  return est;
}

DecodedState StemDecoder::decode(std::span<const double> mix_window, std::size_t phase) const {
  const GainEstimate est = estimate(mix_window, phase);
  return {est.gains, est.residual_rms, bins_from_gains(est.gains, map_)};
}

DecodedState decode_window(std::span<const double> mix_window, const audio::StemBank& stems,
                           std::size_t phase, const mapping::VolumeMap& map,
                           const DecoderConfig& config) {
  const GainEstimate est = estimate_gains(mix_window, stems, phase, config);
  return {est.gains, est.residual_rms, bins_from_gains(est.gains, map)};
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> change_ticks(const mapping::GainSchedule& schedule) {
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k < schedule.directives.size(); ++k) {
    if (!(schedule.directives[k].gains == schedule.directives[k - 1].gains)) out.push_back(k);
  }
  return out;
}

TickGeometry geometry_for(const mapping::GainSchedule& schedule, int sample_rate,
                          const audio::RenderConfig& render) {
  return {sample_rate, schedule.tick_rate, schedule.ticks(), render.ramp_ms, change_ticks(schedule)};
}

std::int64_t settle_sample(std::size_t change_tick, const TickGeometry& geo) {
  const double ramp = geo.ramp_ms * geo.sample_rate / 1000.0;
  return audio::tick_start_sample(static_cast<std::int64_t>(change_tick), geo.sample_rate, geo.tick_rate) +
         static_cast<std::int64_t>(std::ceil(ramp));
}

std::optional<SampleRange> settled_window(std::int64_t end, std::int64_t settled_from,
                                          const DecoderConfig& config) {
  const std::int64_t begin =
      std::max({end - static_cast<std::int64_t>(config.window_samples), settled_from, std::int64_t{0}});
  if (end - begin < static_cast<std::int64_t>(config.min_window_samples)) return std::nullopt;
  return SampleRange{begin, end};
}

std::vector<TickDecode> decode_trace(const audio::AudioClip& mix, const StemDecoder& decoder,
                                     const TickGeometry& geometry) {
  if (mix.sample_rate != decoder.stems().sample_rate())
    throw DecodeError("decode_trace: mixture and stems have different sample rates");
  if (geometry.sample_rate != mix.sample_rate)
    throw DecodeError("decode_trace: geometry sample rate differs from the mixture");
  if (geometry.tick_rate <= 0) throw DecodeError("decode_trace: tick_rate must be positive");

  const std::size_t loop = decoder.stems().loop_length();
  const auto total = static_cast<std::int64_t>(mix.samples.size());
  std::vector<TickDecode> out;
  out.reserve(geometry.ticks);
  for (std::size_t k = 0; k < geometry.ticks; ++k) {
    TickDecode row;
    row.tick = k;
    const std::int64_t end = std::min(
        audio::tick_start_sample(static_cast<std::int64_t>(k + 1), geometry.sample_rate, geometry.tick_rate),
        total);
    const auto it = std::upper_bound(geometry.change_ticks.begin(), geometry.change_ticks.end(), k);
    const std::int64_t settled =
        it == geometry.change_ticks.begin() ? 0 : settle_sample(*std::prev(it), geometry);
    if (const auto w = settled_window(end, settled, decoder.config())) {
      const std::span<const double> window(mix.samples.data() + w->begin, w->size());
      row.state = decoder.decode(window, static_cast<std::size_t>(w->begin) % loop);
      row.analyzed = true;
    }
    out.push_back(row);
  }
  return out;
}

void write_decode_table(std::ostream& os, const std::vector<TickDecode>& rows) {
  os << "tick,g_drums,g_strings,g_others,hp1_bin,hp2_bin,pd_bin,residual_rms\n";
  char buf[64];
  auto num = [&](double v) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    os.write(buf, end - buf);
  };
  for (const auto& r : rows) {
    if (!r.analyzed) continue;
    const auto& s = r.state;
    os << r.tick << ',';
    num(s.gains.drums);
    os << ',';
    num(s.gains.strings);
    os << ',';
    num(s.gains.others);
    os << ',' << s.bins.hp1 << ',' << s.bins.hp2 << ',' << s.bins.pd << ',';
    num(s.residual_rms);
    os << '\n';
  }
}

}  // namespace abgm::decoder
