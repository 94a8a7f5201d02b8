#include "abgm/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <random>

namespace abgm::sim {

std::string_view to_string(Action a) {
  switch (a) {
    case Action::MoveLeft: return "MoveLeft";
    case Action::MoveRight: return "MoveRight";
    case Action::Attack: return "Attack";
    case Action::Guard: return "Guard";
    case Action::Idle: return "Idle";
  }
  return "?";
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::P1: return "P1";
    case Outcome::P2: return "P2";
    case Outcome::Draw: return "Draw";
    case Outcome::Ongoing: return "Ongoing";
  }
  return "?";
}

void SimConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw SimError(std::string("sim config: ") + name + " must be positive");
  };
  positive(stage_width, "stage_width");
  positive(tick_rate, "tick_rate");
  positive(round_seconds, "round_seconds");
  positive(attack_range, "attack_range");
  positive(attack_damage, "attack_damage");
  positive(move_speed, "move_speed");
  positive(start_separation, "start_separation");
  if (start_separation > stage_width)
    throw SimError("sim config: start_separation exceeds stage_width");
  if (attack_recovery < 0 || whiff_recovery < 0 || hitstun < 0 || knockback < 0)
    throw SimError("sim config: recovery, hitstun and knockback must be non-negative");
}

GameState new_round(const SimConfig& config) {
  config.validate();
  GameState s;
  s.limit_ticks = config.limit_ticks();
  s.p1.x = (config.stage_width - config.start_separation) / 2;
  s.p2.x = s.p1.x + config.start_separation;
  return s;
}

namespace {

Action effective_action(FighterState& f, Action requested) {
  if (f.busy > 0) {
    --f.busy;
    return Action::Idle;
  }
  return requested;
}

int move_delta(Action a, int speed) {
  if (a == Action::MoveLeft) return -speed;
  if (a == Action::MoveRight) return speed;
  return 0;
}

// Pushes `victim` away from `other` by `amount` along `dir`; whatever the wall
// absorbs is applied to `other` in the opposite direction.
void push_apart(FighterState& victim, FighterState& other, int dir, int amount,
                int width) {
  const int target = victim.x + dir * amount;
  const int clamped = std::clamp(target, 0, width);
  const int overflow = std::abs(target - clamped);
  victim.x = clamped;
  other.x = std::clamp(other.x - dir * overflow, 0, width);
}

}  // namespace

GameState step(const GameState& state, Action a1, Action a2,
               const SimConfig& config) {
  if (state.tick >= state.limit_ticks) throw SimError("step: round already at its time limit");
  if (state.p1.hp <= 0 || state.p2.hp <= 0) throw SimError("step: round already decided by KO");

  GameState next = state;
  const Action e1 = effective_action(next.p1, a1);
  const Action e2 = effective_action(next.p2, a2);
  next.p1.guard = e1 == Action::Guard;
  next.p2.guard = e2 == Action::Guard;

  // +1 when p1 is on the left (or overlapping), -1 otherwise.
  const int orient = state.p2.x >= state.p1.x ? 1 : -1;
  const int dist = std::abs(state.p1.x - state.p2.x);
  const bool reach = dist <= config.attack_range;

  const bool hit_p2 = e1 == Action::Attack && reach && !next.p2.guard;
  const bool hit_p1 = e2 == Action::Attack && reach && !next.p1.guard;
  if (e1 == Action::Attack) next.p1.busy = reach ? config.attack_recovery : config.whiff_recovery;
  if (e2 == Action::Attack) next.p2.busy = reach ? config.attack_recovery : config.whiff_recovery;
  if (hit_p2) next.p2.hp = std::max(0, next.p2.hp - config.attack_damage);
  if (hit_p1) next.p1.hp = std::max(0, next.p1.hp - config.attack_damage);

  const int w = config.stage_width;
  next.p1.x = std::clamp(next.p1.x + move_delta(e1, config.move_speed), 0, w);
  next.p2.x = std::clamp(next.p2.x + move_delta(e2, config.move_speed), 0, w);
  if ((next.p2.x - next.p1.x) * orient < 0) {
    const int mid = (next.p1.x + next.p2.x) / 2;
    next.p1.x = mid;
    next.p2.x = mid;
  }

  if (hit_p2) {
    push_apart(next.p2, next.p1, orient, config.knockback, w);
    next.p2.busy = std::max(next.p2.busy, config.hitstun);
  }
  if (hit_p1) {
    push_apart(next.p1, next.p2, -orient, config.knockback, w);
    next.p1.busy = std::max(next.p1.busy, config.hitstun);
  }

  ++next.tick;
  return next;
}

int player_distance(const GameState& state) {
  return std::min(std::abs(state.p1.x - state.p2.x), kMaxDistance);
}

Outcome decide_winner(const GameState& state) {
  const int h1 = state.p1.hp;
  const int h2 = state.p2.hp;
  if (h1 == 0 && h2 == 0) return Outcome::Draw;
  if (h1 == 0) return Outcome::P2;
  if (h2 == 0) return Outcome::P1;
  if (state.tick >= state.limit_ticks) {
    if (h1 > h2) return Outcome::P1;
    if (h2 > h1) return Outcome::P2;
    return Outcome::Draw;
  }
  return Outcome::Ongoing;
}

RoundResult run_round(const Policy& policy1, const Policy& policy2,
                      const SimConfig& config, const StateSink& sink) {
  GameState state = new_round(config);
  Outcome outcome = decide_winner(state);
  while (outcome == Outcome::Ongoing) {
    if (sink) sink(state);
    const Action a1 = policy1(state, Side::P1);
    const Action a2 = policy2(state, Side::P2);
    state = step(state, a1, a2, config);
    outcome = decide_winner(state);
  }
  return RoundResult{outcome, state.p1.hp, state.p2.hp, state.tick};
}

Action move_toward(const GameState& state, Side side) {
  const int self = state.fighter(side).x;
  const int opp = state.opponent(side).x;
  if (opp > self) return Action::MoveRight;
  if (opp < self) return Action::MoveLeft;
  return Action::Idle;
}

Policy idle_policy() {
  return [](const GameState&, Side) { return Action::Idle; };
}

Policy spam_attack_policy() {
  return [](const GameState&, Side) { return Action::Attack; };
}

Policy approach_attack_policy(const SimConfig& config) {
  const int range = config.attack_range;
  return [range](const GameState& s, Side side) {
    if (std::abs(s.p1.x - s.p2.x) <= range) return Action::Attack;
    return move_toward(s, side);
  };
}

namespace {

struct Aggressor {
  int range;
  int max_reaction;
  std::mt19937_64 rng;
  std::optional<int> pending;

  Action operator()(const GameState& s, Side side) {
    if (std::abs(s.p1.x - s.p2.x) > range) {
      pending.reset();
      return move_toward(s, side);
    }
    if (s.fighter(side).busy > 0) {
      pending.reset();
      return Action::Idle;
    }
    if (!pending) {
      // Modulo keeps the draw identical across standard library vendors.
      pending = static_cast<int>(rng() % static_cast<std::uint64_t>(max_reaction + 1));
    }
    if (*pending == 0) {
      pending.reset();
      return Action::Attack;
    }
    --*pending;
    return Action::Idle;
  }
};

}  // namespace

Policy aggressor_policy(const SimConfig& config, std::uint64_t seed, int max_reaction) {
  if (max_reaction < 0) throw SimError("aggressor: max_reaction must be non-negative");
  return Aggressor{config.attack_range, max_reaction, std::mt19937_64(seed), std::nullopt};
}

Policy make_scripted_policy(std::string_view name, const SimConfig& config,
                            std::uint64_t seed) {
  if (name == "idle") return idle_policy();
  if (name == "spam") return spam_attack_policy();
  if (name == "approach") return approach_attack_policy(config);
  if (name == "aggressor") return aggressor_policy(config, seed);
  throw SimError("unknown policy '" + std::string(name) + "'");
}

void write_trace(std::ostream& os, const std::vector<GameState>& trace) {
  os << "tick,p1_hp,p2_hp,p1_x,p2_x\n";
  for (const auto& s : trace) {
    os << s.tick << ',' << s.p1.hp << ',' << s.p2.hp << ',' << s.p1.x << ','
       << s.p2.x << '\n';
  }
}

std::vector<GameState> read_trace(std::istream& is, int limit_ticks) {
  std::string line;
  if (!std::getline(is, line) || line != "tick,p1_hp,p2_hp,p1_x,p2_x")
    throw SimError("trace: missing or malformed header");

  std::vector<GameState> trace;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    int fields[5];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int i = 0; i < 5; ++i) {
      auto [ptr, ec] = std::from_chars(p, end, fields[i]);
      const bool last = i == 4;
      if (ec != std::errc() || (last ? ptr != end : (ptr == end || *ptr != ',')))
        throw SimError("trace: malformed record on line " + std::to_string(line_no));
      p = last ? ptr : ptr + 1;
    }
    GameState s;
    s.tick = fields[0];
    s.p1.hp = fields[1];
    s.p2.hp = fields[2];
    s.p1.x = fields[3];
    s.p2.x = fields[4];
    s.limit_ticks = limit_ticks;
    if (s.p1.hp < 0 || s.p1.hp > kMaxHp || s.p2.hp < 0 || s.p2.hp > kMaxHp)
      throw SimError("trace: hp out of range on line " + std::to_string(line_no));
    if (!trace.empty() && s.tick <= trace.back().tick)
      throw SimError("trace: ticks not strictly increasing on line " + std::to_string(line_no));
    trace.push_back(s);
  }
  if (trace.empty()) throw SimError("trace: no records");
  return trace;
}

}  // namespace abgm::sim
