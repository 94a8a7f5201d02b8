#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "abgm/config.hpp"

using namespace abgm;
using namespace abgm::config;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  const fs::path d = fs::path(ABGM_TEST_TMP) / "config";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("empty documents give defaults") {
  CHECK(read_json_file("") == Json::object());
  const auto sim = parse_sim_config(Json::object());
  CHECK(sim.stage_width == 800);
  CHECK(sim.tick_rate == 60);
  const auto exp = parse_experiment_config(Json::object());
  CHECK(exp.n_rounds == 90);
  CHECK(exp.bgm_mode == eval::BgmMode::Adaptive);
  CHECK_FALSE(exp.stems_dir);
}

TEST_CASE("dumped configurations parse back to the same document") {
  eval::ExperimentConfig e;
  e.n_rounds = 12;
  e.bgm_mode = eval::BgmMode::Static;
  e.sim.knockback = 40;
  e.decoder.ridge = 1e-6;
  e.agent.toward = sim::Action::MoveLeft;
  e.stems_dir = "some/dir";
  const Json j = to_json(e);
  CHECK(to_json(parse_experiment_config(j)) == j);
  e.stems_dir.reset();
  CHECK(to_json(parse_experiment_config(to_json(e))) == to_json(e));

  SimulateConfig s;
  s.p1 = "idle";
  CHECK(to_json(parse_simulate_config(to_json(s))) == to_json(s));

  features::FeatureConfig f;
  f.f_max = 12000.0;
  f.window = features::Window::Rectangular;
  CHECK(to_json(parse_feature_config(to_json(f))) == to_json(f));
  CHECK(to_json(parse_feature_config(to_json(features::FeatureConfig{}))) == to_json(features::FeatureConfig{}));
  CHECK(to_json(parse_render_config(to_json(audio::RenderConfig{}))) == to_json(audio::RenderConfig{}));
}

TEST_CASE("unknown keys, wrong types and invalid values are rejected") {
  CHECK_THROWS_AS(parse_sim_config(Json{{"stage_widht", 800}}), ConfigError);
  CHECK_THROWS_AS(parse_sim_config(Json{{"tick_rate", "fast"}}), ConfigError);
  CHECK_THROWS_AS(parse_sim_config(Json{{"tick_rate", 0}}), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(Json{{"bgm_mode", "loud"}}), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(Json{{"sim", {{"bogus", 1}}}}), ConfigError);
  CHECK_THROWS_AS(parse_decoder_config(Json{{"window_samples", 2}}), ConfigError);
  CHECK_THROWS_AS(parse_simulate_config(Json{{"p1", "robot"}}), ConfigError);
  CHECK_THROWS_AS(parse_render_config(Json::array()), ConfigError);

  const auto bad = tmp_dir() / "bad.json";
  std::ofstream(bad) << "{ not json";
  CHECK_THROWS_AS(read_json_file(bad), ConfigError);
  CHECK_THROWS_AS(read_json_file(tmp_dir() / "absent.json"), ConfigError);
}

TEST_CASE("sha256 of known content") {
  const auto p = tmp_dir() / "abc.txt";
  std::ofstream(p, std::ios::binary) << "abc";
  CHECK(sha256_file(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const auto e = tmp_dir() / "empty.txt";
  std::ofstream(e, std::ios::binary).close();
  CHECK(sha256_file(e) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("manifests") {
  const auto in = tmp_dir() / "in.txt";
  std::ofstream(in, std::ios::binary) << "abc";
  RunManifest m;
  m.command = "test";
  m.config = {{"k", 1}};
  m.inputs = {in};
  m.extra["geometry"] = {{"ticks", 3}};
  const auto path = tmp_dir() / "m.json";
  write_manifest(m, path);
  const Json j = read_manifest(path);
  CHECK(j["tool"] == "abgm");
  CHECK(j["command"] == "test");
  CHECK(j["inputs"][0]["sha256"] == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(j["geometry"]["ticks"] == 3);

  std::ifstream a(path);
  const std::string first((std::istreambuf_iterator<char>(a)), {});
  write_manifest(m, path);
  std::ifstream b(path);
  CHECK(first == std::string((std::istreambuf_iterator<char>(b)), {}));

  CHECK_THROWS_AS(read_manifest(tmp_dir() / "nope.json"), ConfigError);
}
