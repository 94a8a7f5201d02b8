// abgm: simulate duels, render the adaptive soundtrack, extract features,
// decode game state back out of the audio, and run evaluation arms.
//
// Exit codes: 0 success, 2 usage / configuration / input error, 1 runtime
// failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "abgm/audio.hpp"
#include "abgm/config.hpp"
#include "abgm/decoder.hpp"
#include "abgm/encoders.hpp"
#include "abgm/eval.hpp"
#include "abgm/fixture.hpp"
#include "abgm/mapping.hpp"
#include "abgm/sim.hpp"

namespace fs = std::filesystem;
using namespace abgm;
using config::Json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Anything that goes wrong while reading user-supplied inputs is a usage error.
template <class F>
auto input(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw UsageError(what + ": " + e.what());
  }
}

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

fs::path manifest_path(const fs::path& artifact) { return fs::path(artifact.string() + ".manifest.json"); }

fs::path require_out(const Globals& g) {
  if (g.out.empty()) throw UsageError("--out is required");
  return g.out;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

audio::StemBank load_stems(const fs::path& dir) {
  for (const char* name : {"drums.wav", "strings.wav", "others.wav"}) {
    if (!fs::is_regular_file(dir / name)) throw UsageError("missing stem " + (dir / name).string());
  }
  return input("stems", [&] { return audio::load_stem_bank(dir); });
}

std::vector<fs::path> stem_paths(const fs::path& dir) {
  return {dir / "drums.wav", dir / "strings.wav", dir / "others.wav"};
}

mapping::VolumeMap load_map(const std::string& path) {
  if (path.empty()) return mapping::default_volume_map();
  return input("table config", [&] { return mapping::load_volume_map(path); });
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Globals& g, const std::string& result_arg) {
  auto cfg = input("config", [&] { return config::parse_simulate_config(config::read_json_file(g.config)); });
  if (g.seed) cfg.sim.seed = *g.seed;
  const fs::path trace_path = require_out(g);
  const fs::path result_path = result_arg.empty() ? fs::path(trace_path.string() + ".result.json") : fs::path(result_arg);

  const auto p1 = sim::make_scripted_policy(cfg.p1, cfg.sim, cfg.sim.seed);
  const auto p2 = sim::make_scripted_policy(cfg.p2, cfg.sim, cfg.sim.seed + 1);
  std::vector<sim::GameState> trace;
  const auto result = sim::run_round(p1, p2, cfg.sim, [&](const sim::GameState& s) { trace.push_back(s); });

  {
    auto out = open_out(trace_path);
    sim::write_trace(out, trace);
  }
  {
    auto out = open_out(result_path);
    out << config::round_result_to_json(result).dump(2) << '\n';
  }
  config::RunManifest m;
  m.command = "simulate";
  m.config = config::to_json(cfg);
  if (!g.config.empty()) m.inputs.push_back(g.config);
  m.outputs = {trace_path, result_path};
  config::write_manifest(m, manifest_path(trace_path));
  return 0;
}

int cmd_mix(const Globals& g, const std::string& stems_dir, const std::string& trace_path,
            const std::string& map_path, bool static_mix, int tick_rate) {
  if (stems_dir.empty()) throw UsageError("--stems is required");
  if (trace_path.empty()) throw UsageError("--trace is required");
  const fs::path out_path = require_out(g);
  const auto render = input("config", [&] { return config::parse_render_config(config::read_json_file(g.config)); });
  const auto map = load_map(map_path);
  const auto stems = load_stems(stems_dir);
  const auto trace = input("trace", [&] {
    std::ifstream in(trace_path);
    if (!in) throw std::runtime_error("cannot open " + trace_path);
    return sim::read_trace(in, 0);
  });
  if (tick_rate <= 0) throw UsageError("--tick-rate must be positive");

  const auto schedule = static_mix ? mapping::constant_schedule({1.0, 1.0, 1.0}, trace.size(), tick_rate)
                                   : mapping::schedule_from_trace(trace, map, tick_rate);
  const auto mixed = audio::render_mix(stems, schedule, render);
  audio::save_wav(mixed.clip, out_path);
  std::cerr << "clipped_samples=" << mixed.clipped_samples << '\n';

  const auto geo = decoder::geometry_for(schedule, stems.sample_rate(), render);
  config::RunManifest m;
  m.command = "mix";
  m.config = {{"render", config::to_json(render)},
              {"map", config::to_json(map)},
              {"static", static_mix},
              {"tick_rate", tick_rate}};
  m.inputs = stem_paths(stems_dir);
  m.inputs.push_back(trace_path);
  if (!map_path.empty()) m.inputs.push_back(map_path);
  if (!g.config.empty()) m.inputs.push_back(g.config);
  m.outputs = {out_path};
  m.extra["geometry"] = {{"sample_rate", geo.sample_rate},
                         {"tick_rate", geo.tick_rate},
                         {"ticks", geo.ticks},
                         {"ramp_ms", geo.ramp_ms},
                         {"change_ticks", geo.change_ticks}};
  m.extra["clipped_samples"] = mixed.clipped_samples;
  config::write_manifest(m, manifest_path(out_path));
  return 0;
}

int cmd_decode(const Globals& g, const std::string& mix_path, const std::string& stems_dir,
               const std::string& map_path) {
  if (mix_path.empty()) throw UsageError("--in is required");
  if (stems_dir.empty()) throw UsageError("--stems is required");
  const fs::path out_path = require_out(g);
  const auto dec_cfg = input("config", [&] { return config::parse_decoder_config(config::read_json_file(g.config)); });
  const auto map = load_map(map_path);
  const fs::path mix_manifest = manifest_path(mix_path);
  const auto geo = input("manifest", [&] {
    const Json man = config::read_manifest(mix_manifest);
    const Json& j = man.at("geometry");
    decoder::TickGeometry geo;
    geo.sample_rate = j.at("sample_rate").get<int>();
    geo.tick_rate = j.at("tick_rate").get<int>();
    geo.ticks = j.at("ticks").get<std::size_t>();
    geo.ramp_ms = j.at("ramp_ms").get<double>();
    geo.change_ticks = j.at("change_ticks").get<std::vector<std::size_t>>();
    return geo;
  });
  const auto mix = input("mixture", [&] { return audio::load_wav(mix_path); });
  const auto stems = load_stems(stems_dir);
  if (mix.sample_rate != stems.sample_rate() || geo.sample_rate != mix.sample_rate)
    throw UsageError("mixture, stems and manifest disagree on the sample rate");

  const decoder::StemDecoder dec(stems, map, dec_cfg);
  const auto rows = decoder::decode_trace(mix, dec, geo);
  {
    auto out = open_out(out_path);
    decoder::write_decode_table(out, rows);
  }
  config::RunManifest m;
  m.command = "decode";
  m.config = {{"decoder", config::to_json(dec_cfg)}, {"map", config::to_json(map)}};
  m.inputs = {mix_path, mix_manifest};
  for (const auto& p : stem_paths(stems_dir)) m.inputs.push_back(p);
  if (!map_path.empty()) m.inputs.push_back(map_path);
  if (!g.config.empty()) m.inputs.push_back(g.config);
  m.outputs = {out_path};
  config::write_manifest(m, manifest_path(out_path));
  return 0;
}

int cmd_features(const Globals& g, const std::string& in_path, const std::string& kind_name,
                 std::size_t start) {
  if (in_path.empty()) throw UsageError("--in is required");
  const fs::path out_path = require_out(g);
  const auto kind = input("--kind", [&] { return features::parse_feature_kind(kind_name); });
  const auto clip = input("audio", [&] { return audio::load_wav(in_path); });
  const auto fcfg = input("config", [&] {
    auto c = config::parse_feature_config(config::read_json_file(g.config));
    c.validate(clip.sample_rate);
    return c;
  });

  features::FeatureVector fv;
  switch (kind) {
    case features::FeatureKind::Raw: fv = features::frame_raw(clip, start, fcfg); break;
    case features::FeatureKind::FftMag:
      fv = features::fft_magnitude(features::frame_raw(clip, start, fcfg), fcfg);
      break;
    case features::FeatureKind::MelSpec:
      fv = input("mel spectrogram", [&] { return features::mel_spectrogram(clip, fcfg); });
      break;
  }
  {
    auto out = open_out(out_path);
    features::write_features(out, fv);
  }
  config::RunManifest m;
  m.command = "features";
  m.config = {{"features", config::to_json(fcfg)}, {"kind", features::to_string(kind)}, {"start", start}};
  m.inputs = {in_path};
  if (!g.config.empty()) m.inputs.push_back(g.config);
  m.outputs = {out_path};
  config::write_manifest(m, manifest_path(out_path));
  return 0;
}

int cmd_evaluate(const Globals& g, const std::string& mode, int rounds) {
  auto cfg = input("config", [&] {
    auto c = config::parse_experiment_config(config::read_json_file(g.config));
    if (!mode.empty()) c.bgm_mode = eval::parse_bgm_mode(mode);
    if (rounds > 0) c.n_rounds = rounds;
    return c;
  });
  if (g.seed) cfg.seed = *g.seed;
  const fs::path out_path = require_out(g);

  const auto stems = cfg.stems_dir ? load_stems(*cfg.stems_dir) : audio::make_fixture_stems(cfg.fixture_seed);
  const auto report = eval::run_experiment(cfg, stems);
  {
    auto out = open_out(out_path);
    out << eval::report_to_json(report);
  }
  std::cout << "win_ratio=" << eval::format_two_decimals(report.win_ratio)
            << " avg_hp_diff=" << eval::format_two_decimals(report.avg_hp_diff) << '\n';

  config::RunManifest m;
  m.command = "evaluate";
  m.config = config::to_json(cfg);
  if (!g.config.empty()) m.inputs.push_back(g.config);
  if (cfg.stems_dir) {
    for (const auto& p : stem_paths(*cfg.stems_dir)) m.inputs.push_back(p);
  }
  m.outputs = {out_path};
  config::write_manifest(m, manifest_path(out_path));
  return 0;
}

int cmd_fixture(const Globals& g) {
  const fs::path dir = require_out(g);
  const std::uint64_t seed = g.seed.value_or(7);
  std::uint64_t used = seed;
  const auto stems = audio::make_fixture_stems(seed, {}, &used);
  audio::save_stem_bank(stems, dir);

  config::RunManifest m;
  m.command = "fixture";
  m.config = {{"seed", seed}, {"accepted_seed", used}};
  m.outputs = stem_paths(dir);
  config::write_manifest(m, dir / "manifest.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive fighting-game soundtrack toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Configuration file (JSON)");
  app.add_option("--seed", g.seed, "Seed (u64)");
  app.add_option("--out", g.out, "Output path");

  auto* simulate = app.add_subcommand("simulate", "Simulate one round and write its state trace");
  std::string result_path;
  simulate->add_option("--result", result_path, "Round result path (default <out>.result.json)");

  auto* mix = app.add_subcommand("mix", "Render the adaptive mixture for a trace");
  std::string stems_dir, trace_path, map_path;
  bool static_mix = false;
  int tick_rate = 60;
  mix->add_option("--stems", stems_dir, "Directory with drums.wav, strings.wav, others.wav");
  mix->add_option("--trace", trace_path, "State trace CSV");
  mix->add_option("--map", map_path, "Level table configuration");
  mix->add_flag("--static", static_mix, "Unmodified soundtrack: every stem at full gain");
  mix->add_option("--tick-rate", tick_rate, "Trace tick rate in Hz");

  auto* decode = app.add_subcommand("decode", "Recover per-tick gains and level bins from a mixture");
  std::string mix_path;
  decode->add_option("--in", mix_path, "Mixture WAV written by `mix`");
  decode->add_option("--stems", stems_dir, "Stem directory used for the mixture");
  decode->add_option("--map", map_path, "Level table configuration");

  auto* feats = app.add_subcommand("features", "Extract raw, FFT-magnitude or mel features");
  std::string feat_in, kind = "fft";
  std::size_t start = 0;
  feats->add_option("--in", feat_in, "Input WAV");
  feats->add_option("--kind", kind, "raw | fft | mel");
  feats->add_option("--start", start, "First sample of the frame (raw, fft)");

  auto* evaluate = app.add_subcommand("evaluate", "Run an experiment arm and write its report");
  std::string mode;
  int rounds = 0;
  evaluate->add_option("--mode", mode, "Override bgm_mode: adaptive | static | silent");
  evaluate->add_option("--rounds", rounds, "Override n_rounds");

  auto* fixture = app.add_subcommand("fixture", "Generate synthetic loop-aligned stems");

  for (auto* sub : {simulate, mix, decode, feats, evaluate, fixture}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return cmd_simulate(g, result_path);
    if (*mix) return cmd_mix(g, stems_dir, trace_path, map_path, static_mix, tick_rate);
    if (*decode) return cmd_decode(g, mix_path, stems_dir, map_path);
    if (*feats) return cmd_features(g, feat_in, kind, start);
    if (*evaluate) return cmd_evaluate(g, mode, rounds);
    if (*fixture) return cmd_fixture(g);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const decoder::IllConditioned& e) {
    std::cerr << "error: IllConditioned: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
