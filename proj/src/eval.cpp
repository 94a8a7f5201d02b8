#include "abgm/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

#include "abgm/fixture.hpp"
#include "json.hpp"

namespace abgm::eval {

std::string_view to_string(BgmMode m) {
  switch (m) {
    case BgmMode::Adaptive: return "Adaptive";
    case BgmMode::Static: return "Static";
    case BgmMode::Silent: return "Silent";
  }
  return "?";
}

BgmMode parse_bgm_mode(std::string_view s) {
  if (s == "Adaptive" || s == "adaptive") return BgmMode::Adaptive;
  if (s == "Static" || s == "static") return BgmMode::Static;
  if (s == "Silent" || s == "silent") return BgmMode::Silent;
  throw EvalError("unknown bgm_mode '" + std::string(s) + "'");
}

void ExperimentConfig::validate() const {
  if (n_rounds < 1) throw EvalError("experiment: n_rounds must be at least 1");
  if (opponent.max_reaction < 0) throw EvalError("experiment: opponent max_reaction must be non-negative");
  if (agent.toward != sim::Action::MoveLeft && agent.toward != sim::Action::MoveRight)
    throw EvalError("experiment: agent direction must be MoveLeft or MoveRight");
  sim.validate();
  map.validate();
  decoder.validate();
  render.validate();
}

double win_ratio(const std::vector<sim::RoundResult>& results) {
  if (results.empty()) throw EvalError("win_ratio: no rounds");
  const auto wins = std::count_if(results.begin(), results.end(),
                                  [](const auto& r) { return r.winner == sim::Outcome::P1; });
  return static_cast<double>(wins) / static_cast<double>(results.size());
}

double avg_hp_diff(const std::vector<sim::RoundResult>& results) {
  if (results.empty()) throw EvalError("avg_hp_diff: no rounds");
  long long sum = 0;
  for (const auto& r : results) sum += r.hp_self - r.hp_opp;
  return static_cast<double>(sum) / static_cast<double>(results.size());
}

std::string format_two_decimals(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

sim::Action audio_informed_policy(const decoder::DecodedState& decoded,
                                  const mapping::VolumeMap& map, const AgentConfig& agent) {
  const bool close = map.drums_table.thresholds[decoded.bins.pd] <= agent.close_px;
  const bool own_low = decoded.bins.hp1 + 1 == map.strings_table.size();
  if (close && own_low) return sim::Action::Guard;
  if (close) return sim::Action::Attack;
  return agent.toward;
}

std::uint64_t round_seed(std::uint64_t experiment_seed, int round_index) {
  // splitmix64
  std::uint64_t z = experiment_seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(round_index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

mapping::StemGains soundtrack_gains(BgmMode mode, const sim::GameState& s, const mapping::VolumeMap& map) {
  switch (mode) {
    case BgmMode::Adaptive: return mapping::directive_for(s, map).gains;
    case BgmMode::Static: return {1.0, 1.0, 1.0};
    case BgmMode::Silent: return {0.0, 0.0, 0.0};
  }
  return {};
}

// Plays the soundtrack for each state it is shown and acts on what it hears.
class AudioAgent {
 public:
  AudioAgent(const ExperimentConfig& config, const decoder::StemDecoder& decoder, RoundLog* log)
      : config_(config), decoder_(decoder), log_(log),
        mixer_(decoder.stems(), config.sim.tick_rate, config.render) {
    geometry_.sample_rate = decoder.stems().sample_rate();
    geometry_.tick_rate = config.sim.tick_rate;
    geometry_.ramp_ms = config.render.ramp_ms;
    // Before anything is decodable the agent holds the no-information reading.
    latest_.bins = decoder::bins_from_gains({}, config.map);
  }

  sim::Action operator()(const sim::GameState& state) {
    const std::size_t k = mixer_.ticks();
    const mapping::StemGains g = soundtrack_gains(config_.bgm_mode, state, config_.map);
    if (k > 0 && !(g == previous_)) last_change_ = k;
    previous_ = g;
    mixer_.push({static_cast<int>(k), g});

    const auto& audio = mixer_.samples();
    const auto end = static_cast<std::int64_t>(audio.size());
    const std::int64_t settled = last_change_ ? decoder::settle_sample(*last_change_, geometry_) : 0;
    if (const auto w = decoder::settled_window(end, settled, decoder_.config())) {
      const std::span<const double> window(audio.data() + w->begin, w->size());
      latest_ = decoder_.decode(window, static_cast<std::size_t>(w->begin) % decoder_.stems().loop_length());
    }
    const sim::Action a = audio_informed_policy(latest_, config_.map, config_.agent);
    if (log_) {
      log_->observations.push_back(latest_);
      log_->actions.push_back(a);
    }
    return a;
  }

 private:
  const ExperimentConfig& config_;
  const decoder::StemDecoder& decoder_;
  RoundLog* log_;
  audio::StreamingMixer mixer_;
  decoder::TickGeometry geometry_;
  mapping::StemGains previous_;
  std::optional<std::size_t> last_change_;
  decoder::DecodedState latest_;
};

}  // namespace

sim::RoundResult run_audio_round(const ExperimentConfig& config, const decoder::StemDecoder& decoder,
                                 int round_index, RoundLog* log) {
  sim::SimConfig sim_cfg = config.sim;
  sim_cfg.seed = round_seed(config.seed, round_index);

  auto agent = std::make_shared<AudioAgent>(config, decoder, log);
  const sim::Policy p1 = [agent](const sim::GameState& s, sim::Side) { return (*agent)(s); };
  sim::Policy p2;
  if (config.opponent.policy == "aggressor")
    p2 = sim::aggressor_policy(sim_cfg, sim_cfg.seed, config.opponent.max_reaction);
  else
    p2 = sim::make_scripted_policy(config.opponent.policy, sim_cfg, sim_cfg.seed);
  return sim::run_round(p1, p2, sim_cfg);
}

EvalReport run_experiment(const ExperimentConfig& config, const audio::StemBank& stems) {
  config.validate();
  const decoder::StemDecoder decoder(stems, config.map, config.decoder);

  const auto n = static_cast<std::size_t>(config.n_rounds);
  std::vector<sim::RoundResult> results(n);
  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));

  if (threads <= 1) {
    for (std::size_t r = 0; r < n; ++r) results[r] = run_audio_round(config, decoder, static_cast<int>(r));
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
          for (std::size_t r = next++; r < n; r = next++) {
            try {
              results[r] = run_audio_round(config, decoder, static_cast<int>(r));
            } catch (...) {
              std::lock_guard lock(failure_mu);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  EvalReport report;
  report.n = config.n_rounds;
  for (const auto& r : results) {
    report.wins += r.winner == sim::Outcome::P1;
    report.draws += r.winner == sim::Outcome::Draw;
  }
  report.win_ratio = win_ratio(results);
  report.avg_hp_diff = avg_hp_diff(results);
  report.bgm_mode = config.bgm_mode;
  report.encoder_kind = config.encoder_kind;
  report.seed = config.seed;
  report.per_round = std::move(results);
  return report;
}

EvalReport run_experiment(const ExperimentConfig& config) {
  if (config.stems_dir) return run_experiment(config, audio::load_stem_bank(*config.stems_dir));
  return run_experiment(config, audio::make_fixture_stems(config.fixture_seed));
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["n"] = report.n;
  j["wins"] = report.wins;
  j["draws"] = report.draws;
  j["win_ratio"] = report.win_ratio;
  j["avg_hp_diff"] = report.avg_hp_diff;
  j["bgm_mode"] = to_string(report.bgm_mode);
  j["encoder_kind"] = features::to_string(report.encoder_kind);
  j["seed"] = report.seed;
  auto rounds = nlohmann::ordered_json::array();
  for (const auto& r : report.per_round) {
    nlohmann::ordered_json row;
    row["winner"] = sim::to_string(r.winner);
    row["hp_self"] = r.hp_self;
    row["hp_opp"] = r.hp_opp;
    row["ticks"] = r.ticks_elapsed;
    rounds.push_back(std::move(row));
  }
  j["per_round"] = std::move(rounds);
  return j.dump(2) + "\n";
}

}  // namespace abgm::eval
