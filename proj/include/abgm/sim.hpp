// Deterministic 1-D duel used to drive the adaptive soundtrack.
//
// The simulator only models what the music consumes: both fighters' health
// and their horizontal distance. Combat is deliberately small: range-gated
// attacks with recovery, guarding, hitstun and knockback.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace abgm::sim {

inline constexpr int kMaxHp = 400;
inline constexpr int kMaxDistance = 800;

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Action { MoveLeft, MoveRight, Attack, Guard, Idle };
enum class Side { P1, P2 };
enum class Outcome { P1, P2, Draw, Ongoing };

std::string_view to_string(Action a);
std::string_view to_string(Outcome o);

struct FighterState {
  int hp = kMaxHp;
  int x = 0;
  bool guard = false;
  // Ticks during which submitted actions are ignored (attack recovery or
  // hitstun).
  int busy = 0;

  friend bool operator==(const FighterState&, const FighterState&) = default;
};

struct GameState {
  int tick = 0;
  FighterState p1;
  FighterState p2;
  int limit_ticks = 0;

  const FighterState& fighter(Side s) const { return s == Side::P1 ? p1 : p2; }
  const FighterState& opponent(Side s) const { return s == Side::P1 ? p2 : p1; }

  friend bool operator==(const GameState&, const GameState&) = default;
};

struct SimConfig {
  int stage_width = 800;
  int tick_rate = 60;
  int round_seconds = 60;
  int attack_range = 120;
  int attack_damage = 10;
  int move_speed = 8;
  int start_separation = 640;
  // Ticks an attacker stays committed after a connected (or blocked) attack.
  int attack_recovery = 20;
  // Ticks an attacker stays committed after an attack that reached nobody.
  int whiff_recovery = 45;
  int hitstun = 12;
  // Pixels a landed hit separates the fighters by.
  int knockback = 80;
  std::uint64_t seed = 0;

  int limit_ticks() const { return tick_rate * round_seconds; }
  // Throws SimError naming the first offending field.
  void validate() const;
};

struct RoundResult {
  Outcome winner = Outcome::Draw;
  int hp_self = 0;
  int hp_opp = 0;
  int ticks_elapsed = 0;

  friend bool operator==(const RoundResult&, const RoundResult&) = default;
};

GameState new_round(const SimConfig& config);

// Advances one tick. Attacks resolve against pre-move positions, then
// movement, knockback and the no-crossing rule are applied.
GameState step(const GameState& state, Action a1, Action a2,
               const SimConfig& config);

int player_distance(const GameState& state);

Outcome decide_winner(const GameState& state);

// A policy observes the full state from its own side and picks an action.
// Policies may hold internal state (e.g. seeded RNGs); they are called
// exactly once per tick, in tick order.
using Policy = std::function<Action(const GameState&, Side)>;
using StateSink = std::function<void(const GameState&)>;

// Runs until decide_winner reports a result. The sink receives every state,
// starting with the initial one. The result is reported from P1's side.
RoundResult run_round(const Policy& policy1, const Policy& policy2,
                      const SimConfig& config, const StateSink& sink = {});

// Direction that moves `side` toward its opponent.
Action move_toward(const GameState& state, Side side);

// Scripted policies.
Policy idle_policy();
Policy spam_attack_policy();
// Walks toward the opponent and attacks whenever within attack_range.
Policy approach_attack_policy(const SimConfig& config);
// The default opponent: approaches, and once in range waits a seeded random
// reaction delay in [0, max_reaction] ticks before attacking.
Policy aggressor_policy(const SimConfig& config, std::uint64_t seed,
                        int max_reaction = 30);

// Builds a scripted policy by name: idle, spam, approach, aggressor.
Policy make_scripted_policy(std::string_view name, const SimConfig& config,
                            std::uint64_t seed);

// State trace CSV: header `tick,p1_hp,p2_hp,p1_x,p2_x`, one record per tick.
void write_trace(std::ostream& os, const std::vector<GameState>& trace);
// Parses a trace written by write_trace. `limit_ticks` is taken from the
// caller since the format does not carry it.
std::vector<GameState> read_trace(std::istream& is, int limit_ticks);

}  // namespace abgm::sim
