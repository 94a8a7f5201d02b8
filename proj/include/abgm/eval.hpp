// Experiment arms (adaptive / static / silent soundtrack), the audio-informed
// policy, and the two round metrics: win ratio and average end-of-round HP
// difference.
#pragma once

#include <cstdint>
#include <optional>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "abgm/audio.hpp"
#include "abgm/decoder.hpp"
#include "abgm/encoders.hpp"
#include "abgm/mapping.hpp"
#include "abgm/sim.hpp"

namespace abgm::eval {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BgmMode { Adaptive, Static, Silent };

std::string_view to_string(BgmMode m);
BgmMode parse_bgm_mode(std::string_view s);

struct AgentConfig {
  // Decoded distance bands whose threshold is at or below this count as close.
  int close_px = 60;
  // Direction of the opponent. P1 starts on the left and fighters never cross.
  sim::Action toward = sim::Action::MoveRight;
};

struct OpponentConfig {
  std::string policy = "aggressor";
  int max_reaction = 30;
};

struct ExperimentConfig {
  int n_rounds = 90;
  BgmMode bgm_mode = BgmMode::Adaptive;
  features::FeatureKind encoder_kind = features::FeatureKind::FftMag;
  sim::SimConfig sim;
  mapping::VolumeMap map = mapping::default_volume_map();
  decoder::DecoderConfig decoder;
  audio::RenderConfig render;
  AgentConfig agent;
  OpponentConfig opponent;
  std::uint64_t seed = 1;
  // Stems come from this directory when set, otherwise from the fixture
  // generator seeded with fixture_seed.
  std::optional<std::filesystem::path> stems_dir;
  std::uint64_t fixture_seed = 7;
  // 0 picks the hardware concurrency.
  unsigned threads = 0;

  void validate() const;
};

struct EvalReport {
  int n = 0;
  int wins = 0;
  int draws = 0;
  double win_ratio = 0.0;
  double avg_hp_diff = 0.0;
  BgmMode bgm_mode = BgmMode::Adaptive;
  features::FeatureKind encoder_kind = features::FeatureKind::FftMag;
  std::uint64_t seed = 0;
  std::vector<sim::RoundResult> per_round;
};

double win_ratio(const std::vector<sim::RoundResult>& results);
double avg_hp_diff(const std::vector<sim::RoundResult>& results);

// Two-decimal presentation used in human-readable output.
std::string format_two_decimals(double v);

// Bins-only rules: low own HP with the opponent close -> Guard; opponent
// close -> Attack; otherwise walk toward the opponent.
sim::Action audio_informed_policy(const decoder::DecodedState& decoded,
                                  const mapping::VolumeMap& map, const AgentConfig& agent);

// Per-round seed derived from the experiment seed.
std::uint64_t round_seed(std::uint64_t experiment_seed, int round_index);

struct RoundLog {
  std::vector<decoder::DecodedState> observations;
  std::vector<sim::Action> actions;
};

// Runs one round with the audio-informed agent as P1. The agent never sees
// the game state: each tick the state drives the soundtrack, one tick of
// audio is rendered, the latest settled window is decoded, and only the
// decoded bins reach the policy.
sim::RoundResult run_audio_round(const ExperimentConfig& config, const decoder::StemDecoder& decoder,
                                 int round_index, RoundLog* log = nullptr);

EvalReport run_experiment(const ExperimentConfig& config, const audio::StemBank& stems);
EvalReport run_experiment(const ExperimentConfig& config);

// Stable key order; identical reports serialize to identical bytes.
std::string report_to_json(const EvalReport& report);

}  // namespace abgm::eval
