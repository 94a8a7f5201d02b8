// JSON configuration documents and run manifests.
//
// Every parser rejects unknown keys and fills absent ones with defaults, and
// every dumper writes the fully resolved configuration in a fixed key order.
#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "abgm/audio.hpp"
#include "abgm/decoder.hpp"
#include "abgm/eval.hpp"
#include "abgm/sim.hpp"
#include "json.hpp"

namespace abgm::config {

using Json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads a JSON document; an empty path yields an empty object.
Json read_json_file(const std::filesystem::path& path);

sim::SimConfig parse_sim_config(const Json& j);
Json to_json(const sim::SimConfig& c);

audio::RenderConfig parse_render_config(const Json& j);
Json to_json(const audio::RenderConfig& c);

decoder::DecoderConfig parse_decoder_config(const Json& j);
Json to_json(const decoder::DecoderConfig& c);

features::FeatureConfig parse_feature_config(const Json& j);
Json to_json(const features::FeatureConfig& c);

Json to_json(const mapping::VolumeMap& map);
mapping::VolumeMap parse_volume_map(const Json& j);

// Configuration of the `simulate` command.
struct SimulateConfig {
  sim::SimConfig sim;
  std::string p1 = "approach";
  std::string p2 = "aggressor";
};
SimulateConfig parse_simulate_config(const Json& j);
Json to_json(const SimulateConfig& c);

eval::ExperimentConfig parse_experiment_config(const Json& j);
Json to_json(const eval::ExperimentConfig& c);

Json round_result_to_json(const sim::RoundResult& r);

// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

// Manifest written next to every artifact a command produces.
struct RunManifest {
  std::string command;
  Json config = Json::object();
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  Json extra = Json::object();
};

inline constexpr const char* kToolVersion = "1.0.0";

// Hashes inputs and outputs and writes the manifest to `path`.
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);
Json read_manifest(const std::filesystem::path& path);

}  // namespace abgm::config
