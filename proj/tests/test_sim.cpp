#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "abgm/sim.hpp"

using namespace abgm::sim;

namespace {

GameState at(int x1, int x2, const SimConfig& cfg = {}) {
  GameState s = new_round(cfg);
  s.p1.x = x1;
  s.p2.x = x2;
  return s;
}

}  // namespace

TEST_CASE("new round starts at full hp and the configured separation") {
  const SimConfig cfg;
  const GameState s = new_round(cfg);
  CHECK(s.tick == 0);
  CHECK(s.p1.hp == 400);
  CHECK(s.p2.hp == 400);
  CHECK(s.p1.x == 80);
  CHECK(s.p2.x == 720);
  CHECK(player_distance(s) == 640);
  CHECK(s.limit_ticks == 3600);
  CHECK(new_round(cfg) == new_round(cfg));
}

TEST_CASE("player distance") {
  CHECK(player_distance(at(100, 500)) == 400);
  CHECK(player_distance(at(300, 300)) == 0);
  CHECK(player_distance(at(0, 800)) == 800);
  CHECK(player_distance(at(500, 100)) == 400);
}

TEST_CASE("idle step only advances the clock") {
  const SimConfig cfg;
  const GameState s = new_round(cfg);
  GameState n = step(s, Action::Idle, Action::Idle, cfg);
  CHECK(n.tick == 1);
  n.tick = 0;
  CHECK(n == s);
}

TEST_CASE("attack resolution") {
  const SimConfig cfg;
  SUBCASE("out of range does nothing to the target") {
    const GameState s = at(100, 100 + cfg.attack_range + 1);
    const GameState n = step(s, Action::Attack, Action::Idle, cfg);
    CHECK(n.p2.hp == 400);
    CHECK(n.p1.busy == cfg.whiff_recovery);
  }
  SUBCASE("in range, unguarded: 400 -> 390") {
    const GameState s = at(300, 300 + cfg.attack_range);
    const GameState n = step(s, Action::Attack, Action::Idle, cfg);
    CHECK(n.p2.hp == 390);
    CHECK(n.p1.hp == 400);
    CHECK(n.p1.busy == cfg.attack_recovery);
    CHECK(n.p2.busy == cfg.hitstun);
    CHECK(player_distance(n) == cfg.attack_range + cfg.knockback);
  }
  SUBCASE("guard blocks") {
    const GameState s = at(300, 350);
    const GameState n = step(s, Action::Attack, Action::Guard, cfg);
    CHECK(n.p2.hp == 400);
  }
  SUBCASE("simultaneous hits trade") {
    const GameState s = at(300, 350);
    const GameState n = step(s, Action::Attack, Action::Attack, cfg);
    CHECK(n.p1.hp == 390);
    CHECK(n.p2.hp == 390);
  }
  SUBCASE("hp floors at zero") {
    GameState s = at(300, 350);
    s.p2.hp = 4;
    CHECK(step(s, Action::Attack, Action::Idle, cfg).p2.hp == 0);
  }
}

TEST_CASE("busy fighters cannot act") {
  const SimConfig cfg;
  GameState s = at(300, 350);
  s.p1.busy = 2;
  GameState n = step(s, Action::Attack, Action::Idle, cfg);
  CHECK(n.p2.hp == 400);
  CHECK(n.p1.busy == 1);
  n = step(n, Action::MoveRight, Action::Idle, cfg);
  CHECK(n.p1.x == 300);
  CHECK(n.p1.busy == 0);
}

TEST_CASE("knockback against the wall pushes the attacker back instead") {
  const SimConfig cfg;
  const GameState s = at(700, cfg.stage_width - 20);
  const GameState n = step(s, Action::Attack, Action::Idle, cfg);
  CHECK(n.p2.x == cfg.stage_width);
  CHECK(player_distance(n) == player_distance(s) + cfg.knockback);
}

TEST_CASE("movement is clamped to the stage and fighters do not pass") {
  const SimConfig cfg;
  CHECK(step(at(2, 400), Action::MoveLeft, Action::Idle, cfg).p1.x == 0);
  const GameState n = step(at(398, 402), Action::MoveRight, Action::MoveLeft, cfg);
  CHECK(n.p1.x == 400);
  CHECK(n.p2.x == 400);
  CHECK(move_toward(at(100, 500), Side::P1) == Action::MoveRight);
  CHECK(move_toward(at(100, 500), Side::P2) == Action::MoveLeft);
}

TEST_CASE("winner decision") {
  GameState s = new_round({});
  s.p1.hp = 0;
  s.p2.hp = 50;
  CHECK(decide_winner(s) == Outcome::P2);

  s = new_round({});
  s.tick = s.limit_ticks;
  s.p1.hp = 200;
  s.p2.hp = 150;
  CHECK(decide_winner(s) == Outcome::P1);
  s.p1.hp = s.p2.hp = 100;
  CHECK(decide_winner(s) == Outcome::Draw);

  s.tick = 10;
  CHECK(decide_winner(s) == Outcome::Ongoing);
  s.p1.hp = s.p2.hp = 0;
  CHECK(decide_winner(s) == Outcome::Draw);
}

TEST_CASE("step refuses a finished round") {
  const SimConfig cfg;
  GameState s = new_round(cfg);
  s.p2.hp = 0;
  CHECK_THROWS_AS(step(s, Action::Idle, Action::Idle, cfg), SimError);
  s = new_round(cfg);
  s.tick = s.limit_ticks;
  CHECK_THROWS_AS(step(s, Action::Idle, Action::Idle, cfg), SimError);
}

TEST_CASE("attacker in range vs idle wins after 40 hits") {
  SimConfig cfg;
  cfg.start_separation = 100;
  cfg.knockback = 0;
  int hits = 0;
  int last_hp = 400;
  const auto r = run_round(approach_attack_policy(cfg), idle_policy(), cfg, [&](const GameState& s) {
    if (s.p2.hp < last_hp) ++hits;
    last_hp = s.p2.hp;
  });
  CHECK(r.winner == Outcome::P1);
  CHECK(r.hp_opp == 0);
  // The sink sees states before each step, so the final hit is not counted there.
  CHECK(hits + 1 == (400 + cfg.attack_damage - 1) / cfg.attack_damage);
  // One attack, then attack_recovery ticks of forced idle, per hit.
  CHECK(r.ticks_elapsed == 1 + 39 * (cfg.attack_recovery + 1));
}

TEST_CASE("idle vs idle draws at the time limit") {
  const SimConfig cfg;
  std::vector<GameState> trace;
  const auto r = run_round(idle_policy(), idle_policy(), cfg, [&](const GameState& s) { trace.push_back(s); });
  CHECK(r.winner == Outcome::Draw);
  CHECK(r.ticks_elapsed == 3600);
  CHECK(trace.size() == 3600);
  CHECK(trace.back().tick == 3599);
}

TEST_CASE("rounds are reproducible from the seed") {
  SimConfig cfg;
  auto run = [&](std::uint64_t seed) {
    std::vector<GameState> trace;
    run_round(approach_attack_policy(cfg), aggressor_policy(cfg, seed), cfg,
              [&](const GameState& s) { trace.push_back(s); });
    return trace;
  };
  CHECK(run(11) == run(11));
  CHECK_FALSE(run(11) == run(12));
}

TEST_CASE("hp never increases and positions stay on stage") {
  const SimConfig cfg;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GameState prev = new_round(cfg);
    run_round(aggressor_policy(cfg, seed + 100), aggressor_policy(cfg, seed), cfg, [&](const GameState& s) {
      CHECK(s.p1.hp <= prev.p1.hp);
      CHECK(s.p2.hp <= prev.p2.hp);
      CHECK(s.p1.x >= 0);
      CHECK(s.p2.x <= cfg.stage_width);
      CHECK(s.p1.x <= s.p2.x);
      prev = s;
    });
  }
}

TEST_CASE("trace round trip and validation") {
  const SimConfig cfg;
  std::vector<GameState> trace;
  run_round(approach_attack_policy(cfg), aggressor_policy(cfg, 5), cfg,
            [&](const GameState& s) { trace.push_back(s); });
  std::stringstream ss;
  write_trace(ss, trace);
  CHECK(ss.str().rfind("tick,p1_hp,p2_hp,p1_x,p2_x\n", 0) == 0);
  const auto back = read_trace(ss, cfg.limit_ticks());
  REQUIRE(back.size() == trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    CHECK(back[i].tick == trace[i].tick);
    CHECK(back[i].p1.hp == trace[i].p1.hp);
    CHECK(back[i].p2.x == trace[i].p2.x);
  }

  std::istringstream bad("tick,p1_hp,p2_hp,p1_x,p2_x\n0,400,abc,80,720\n");
  CHECK_THROWS_AS(read_trace(bad, 0), SimError);
  std::istringstream header("t,a\n");
  CHECK_THROWS_AS(read_trace(header, 0), SimError);
}

TEST_CASE("config validation") {
  SimConfig cfg;
  cfg.tick_rate = 0;
  CHECK_THROWS_AS(cfg.validate(), SimError);
  cfg = {};
  cfg.start_separation = cfg.stage_width + 1;
  CHECK_THROWS_AS(cfg.validate(), SimError);
  CHECK_THROWS_AS(make_scripted_policy("nope", SimConfig{}, 0), SimError);
}
