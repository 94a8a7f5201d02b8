#include "abgm/config.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

namespace abgm::config {

namespace {

// Reads known keys out of an object and rejects anything left over.
class Fields {
 public:
  Fields(const Json& j, std::string context) : j_(j), ctx_(std::move(context)) {
    if (!j_.is_object()) throw ConfigError(ctx_ + ": expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(ctx_ + "." + key + ": wrong type");
    }
  }

  const Json* sub(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return nullptr;
    return &j_.at(key);
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(ctx_ + ": unknown key '" + item.key() + "'");
    }
  }

 private:
  const Json& j_;
  std::string ctx_;
  std::set<std::string> seen_;
};

template <class F>
auto rethrow_as_config(const std::string& ctx, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(ctx + ": " + e.what());
  }
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  if (path.empty()) return Json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

sim::SimConfig parse_sim_config(const Json& j) {
  sim::SimConfig c;
  Fields f(j, "sim");
  f.get("stage_width", c.stage_width);
  f.get("tick_rate", c.tick_rate);
  f.get("round_seconds", c.round_seconds);
  f.get("attack_range", c.attack_range);
  f.get("attack_damage", c.attack_damage);
  f.get("move_speed", c.move_speed);
  f.get("start_separation", c.start_separation);
  f.get("attack_recovery", c.attack_recovery);
  f.get("whiff_recovery", c.whiff_recovery);
  f.get("hitstun", c.hitstun);
  f.get("knockback", c.knockback);
  f.get("seed", c.seed);
  f.finish();
  rethrow_as_config("sim", [&] { c.validate(); return 0; });
  return c;
}

Json to_json(const sim::SimConfig& c) {
  Json j;
  j["stage_width"] = c.stage_width;
  j["tick_rate"] = c.tick_rate;
  j["round_seconds"] = c.round_seconds;
  j["attack_range"] = c.attack_range;
  j["attack_damage"] = c.attack_damage;
  j["move_speed"] = c.move_speed;
  j["start_separation"] = c.start_separation;
  j["attack_recovery"] = c.attack_recovery;
  j["whiff_recovery"] = c.whiff_recovery;
  j["hitstun"] = c.hitstun;
  j["knockback"] = c.knockback;
  j["seed"] = c.seed;
  return j;
}

audio::RenderConfig parse_render_config(const Json& j) {
  audio::RenderConfig c;
  Fields f(j, "render");
  f.get("ramp_ms", c.ramp_ms);
  f.get("loop", c.loop);
  std::string clip = "HardClamp";
  f.get("clip_policy", clip);
  if (clip != "HardClamp") throw ConfigError("render.clip_policy: only HardClamp is supported");
  f.finish();
  rethrow_as_config("render", [&] { c.validate(); return 0; });
  return c;
}

Json to_json(const audio::RenderConfig& c) {
  Json j;
  j["ramp_ms"] = c.ramp_ms;
  j["clip_policy"] = "HardClamp";
  j["loop"] = c.loop;
  return j;
}

decoder::DecoderConfig parse_decoder_config(const Json& j) {
  decoder::DecoderConfig c;
  Fields f(j, "decoder");
  f.get("window_samples", c.window_samples);
  f.get("min_window_samples", c.min_window_samples);
  f.get("ridge", c.ridge);
  f.get("condition_cap", c.condition_cap);
  f.finish();
  rethrow_as_config("decoder", [&] { c.validate(); return 0; });
  return c;
}

Json to_json(const decoder::DecoderConfig& c) {
  Json j;
  j["window_samples"] = c.window_samples;
  j["min_window_samples"] = c.min_window_samples;
  j["ridge"] = c.ridge;
  j["condition_cap"] = c.condition_cap;
  return j;
}

features::FeatureConfig parse_feature_config(const Json& j) {
  features::FeatureConfig c;
  Fields f(j, "features");
  f.get("frame_size", c.frame_size);
  f.get("hop", c.hop);
  std::string window = "Hann";
  f.get("window", window);
  f.get("n_mels", c.n_mels);
  f.get("f_min", c.f_min);
  if (const Json* hi = f.sub("f_max")) {
    if (hi->is_number()) c.f_max = hi->get<double>();
    else if (!hi->is_null()) throw ConfigError("features.f_max: wrong type");
  }
  f.get("log_floor", c.log_floor);
  f.finish();
  if (window == "Hann") c.window = features::Window::Hann;
  else if (window == "Rectangular") c.window = features::Window::Rectangular;
  else throw ConfigError("features.window: expected 'Hann' or 'Rectangular'");
  return c;
}

Json to_json(const features::FeatureConfig& c) {
  Json j;
  j["frame_size"] = c.frame_size;
  j["hop"] = c.hop;
  j["window"] = c.window == features::Window::Hann ? "Hann" : "Rectangular";
  j["n_mels"] = c.n_mels;
  j["f_min"] = c.f_min;
  j["f_max"] = c.f_max ? Json(*c.f_max) : Json(nullptr);
  j["log_floor"] = c.log_floor;
  return j;
}

Json to_json(const mapping::VolumeMap& map) { return Json::parse(mapping::volume_map_to_json(map)); }

mapping::VolumeMap parse_volume_map(const Json& j) {
  return rethrow_as_config("map", [&] { return mapping::parse_volume_map(j.dump()); });
}

SimulateConfig parse_simulate_config(const Json& j) {
  SimulateConfig c;
  Fields f(j, "simulate");
  if (const Json* s = f.sub("sim")) c.sim = parse_sim_config(*s);
  f.get("p1", c.p1);
  f.get("p2", c.p2);
  f.finish();
  for (const auto* name : {&c.p1, &c.p2}) {
    rethrow_as_config("simulate", [&] { sim::make_scripted_policy(*name, c.sim, 0); return 0; });
  }
  return c;
}

Json to_json(const SimulateConfig& c) {
  Json j;
  j["sim"] = to_json(c.sim);
  j["p1"] = c.p1;
  j["p2"] = c.p2;
  return j;
}

eval::ExperimentConfig parse_experiment_config(const Json& j) {
  eval::ExperimentConfig c;
  Fields f(j, "experiment");
  f.get("n_rounds", c.n_rounds);
  std::string mode(eval::to_string(c.bgm_mode));
  f.get("bgm_mode", mode);
  std::string kind(features::to_string(c.encoder_kind));
  f.get("encoder_kind", kind);
  f.get("seed", c.seed);
  if (const Json* s = f.sub("sim")) c.sim = parse_sim_config(*s);
  if (const Json* s = f.sub("map")) c.map = parse_volume_map(*s);
  if (const Json* s = f.sub("decoder")) c.decoder = parse_decoder_config(*s);
  if (const Json* s = f.sub("render")) c.render = parse_render_config(*s);
  if (const Json* s = f.sub("agent")) {
    Fields a(*s, "experiment.agent");
    a.get("close_px", c.agent.close_px);
    std::string toward = "right";
    a.get("toward", toward);
    a.finish();
    if (toward == "right") c.agent.toward = sim::Action::MoveRight;
    else if (toward == "left") c.agent.toward = sim::Action::MoveLeft;
    else throw ConfigError("experiment.agent.toward: expected 'left' or 'right'");
  }
  if (const Json* s = f.sub("opponent")) {
    Fields o(*s, "experiment.opponent");
    o.get("policy", c.opponent.policy);
    o.get("max_reaction", c.opponent.max_reaction);
    o.finish();
  }
  if (const Json* s = f.sub("stems_dir")) {
    if (!s->is_string()) throw ConfigError("experiment.stems_dir: wrong type");
    if (!s->get<std::string>().empty()) c.stems_dir = s->get<std::string>();
  }
  f.get("fixture_seed", c.fixture_seed);
  f.get("threads", c.threads);
  f.finish();

  rethrow_as_config("experiment", [&] {
    c.bgm_mode = eval::parse_bgm_mode(mode);
    c.encoder_kind = features::parse_feature_kind(kind);
    sim::make_scripted_policy(c.opponent.policy, c.sim, 0);
    c.validate();
    return 0;
  });
  return c;
}

Json to_json(const eval::ExperimentConfig& c) {
  Json j;
  j["n_rounds"] = c.n_rounds;
  j["bgm_mode"] = eval::to_string(c.bgm_mode);
  j["encoder_kind"] = features::to_string(c.encoder_kind);
  j["seed"] = c.seed;
  j["sim"] = to_json(c.sim);
  j["map"] = to_json(c.map);
  j["decoder"] = to_json(c.decoder);
  j["render"] = to_json(c.render);
  j["agent"] = {{"close_px", c.agent.close_px},
                {"toward", c.agent.toward == sim::Action::MoveLeft ? "left" : "right"}};
  j["opponent"] = {{"policy", c.opponent.policy}, {"max_reaction", c.opponent.max_reaction}};
  j["stems_dir"] = c.stems_dir ? Json(c.stems_dir->generic_string()) : Json(nullptr);
  j["fixture_seed"] = c.fixture_seed;
  j["threads"] = c.threads;
  return j;
}

Json round_result_to_json(const sim::RoundResult& r) {
  Json j;
  j["winner"] = sim::to_string(r.winner);
  j["hp_self"] = r.hp_self;
  j["hp_opp"] = r.hp_opp;
  j["ticks"] = r.ticks_elapsed;
  return j;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string() + " for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: digest init failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned i = 0; i < len; ++i) {
    hex.push_back(kHex[md[i] >> 4]);
    hex.push_back(kHex[md[i] & 0xf]);
  }
  return hex;
}

void write_manifest(const RunManifest& m, const std::filesystem::path& path) {
  auto files = [](const std::vector<std::filesystem::path>& paths) {
    Json arr = Json::array();
    for (const auto& p : paths) arr.push_back({{"path", p.generic_string()}, {"sha256", sha256_file(p)}});
    return arr;
  };
  Json j;
  j["tool"] = "abgm";
  j["version"] = kToolVersion;
  j["command"] = m.command;
  j["config"] = m.config;
  j["inputs"] = files(m.inputs);
  j["outputs"] = files(m.outputs);
  for (const auto& item : m.extra.items()) j[item.key()] = item.value();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
}

Json read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing manifest " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace abgm::config
