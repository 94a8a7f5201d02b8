#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <utility>

#include "abgm/mapping.hpp"

using namespace abgm;
using namespace abgm::mapping;

namespace {

sim::GameState state(int hp1, int hp2, int x1, int x2) {
  sim::GameState s = sim::new_round({});
  s.p1.hp = hp1;
  s.p2.hp = hp2;
  s.p1.x = x1;
  s.p2.x = x2;
  return s;
}

}  // namespace

TEST_CASE("listed level pairs are exact") {
  const std::pair<int, double> hp[] = {{400, 0.75}, {300, 0.60}, {250, 0.55}, {200, 0.40},
                                       {150, 0.35}, {100, 0.25}, {50, 0.10}};
  const std::pair<int, double> pd[] = {{800, 0.10}, {600, 0.20}, {500, 0.30}, {400, 0.40},
                                       {300, 0.50}, {60, 0.60}, {0, 0.75}};
  for (auto [level, vol] : hp) CHECK(level_lookup(default_hp_table(), level) == vol);
  for (auto [level, vol] : pd) CHECK(level_lookup(default_pd_table(), level) == vol);
}

TEST_CASE("bin rule between and beyond thresholds") {
  CHECK(level_lookup(default_hp_table(), 125) == 0.35);
  CHECK(level_lookup(default_hp_table(), 0) == 0.10);
  CHECK(level_lookup(default_hp_table(), 1000) == 0.75);
  CHECK(level_lookup(default_pd_table(), 650) == 0.10);
  CHECK(level_lookup(default_pd_table(), 61) == 0.50);
  CHECK(level_lookup(default_pd_table(), -5) == 0.75);
  CHECK(level_index(default_hp_table(), 400) == 0);
  CHECK(level_index(default_hp_table(), 1) == 6);
}

TEST_CASE("hp gain is monotone and distance gain antitone over the whole domain") {
  const auto hp = default_hp_table();
  const auto pd = default_pd_table();
  for (int v = 1; v <= 400; ++v) CHECK(level_lookup(hp, v) >= level_lookup(hp, v - 1));
  for (int v = 1; v <= 800; ++v) CHECK(level_lookup(pd, v) <= level_lookup(pd, v - 1));
}

TEST_CASE("directives wire hp1 to strings, hp2 to others, distance to drums") {
  const auto map = default_volume_map();
  auto d = directive_for(state(400, 400, 0, 800), map);
  CHECK(d.gains.strings == 0.75);
  CHECK(d.gains.others == 0.75);
  CHECK(d.gains.drums == 0.10);
  d = directive_for(state(0, 400, 300, 300), map);
  CHECK(d.gains.strings == 0.10);
  CHECK(d.gains.others == 0.75);
  CHECK(d.gains.drums == 0.75);
  d = directive_for(state(400, 120, 300, 300), map);
  CHECK(d.gains.others == 0.35);

  const auto b = bins_for(state(125, 400, 100, 500), map);
  CHECK(b.hp1 == 4);
  CHECK(b.hp2 == 0);
  CHECK(b.pd == 3);
}

TEST_CASE("schedule from a trace") {
  const auto map = default_volume_map();
  SUBCASE("constant trace") {
    std::vector<sim::GameState> trace;
    for (int k = 0; k < 10; ++k) {
      auto s = state(400, 400, 80, 720);
      s.tick = k;
      trace.push_back(s);
    }
    const auto sched = schedule_from_trace(trace, map, 60);
    REQUIRE(sched.ticks() == 10);
    for (std::size_t k = 0; k < 10; ++k) {
      CHECK(sched.directives[k].tick == static_cast<int>(k));
      CHECK(sched.directives[k].gains == sched.directives[0].gains);
    }
  }
  SUBCASE("strings step exactly at the tick where hp enters a new bin") {
    // 301 -> 300 enters the 300 bin; 300 -> 299 stays in it.
    const int hp[] = {301, 301, 300, 300, 299, 251, 250};
    std::vector<sim::GameState> trace;
    for (int k = 0; k < 7; ++k) {
      auto s = state(hp[k], 400, 80, 720);
      s.tick = k;
      trace.push_back(s);
    }
    const auto sched = schedule_from_trace(trace, map, 60);
    CHECK(sched.directives[1].gains.strings == 0.75);
    CHECK(sched.directives[2].gains.strings == 0.60);
    CHECK(sched.directives[4].gains.strings == 0.60);
    CHECK(sched.directives[5].gains.strings == 0.60);
    CHECK(sched.directives[6].gains.strings == 0.55);
  }
  SUBCASE("traces not starting at zero are reindexed") {
    auto s = state(400, 400, 80, 720);
    s.tick = 7;
    const auto sched = schedule_from_trace({s}, map, 60);
    CHECK(sched.directives[0].tick == 0);
  }
  CHECK_THROWS_AS(schedule_from_trace({}, map, 60), MappingError);
}

TEST_CASE("constant schedule") {
  const auto sched = constant_schedule({1.0, 1.0, 1.0}, 5, 60);
  CHECK(sched.ticks() == 5);
  CHECK(sched.directives[4].tick == 4);
  CHECK_NOTHROW(sched.validate());
}

TEST_CASE("level table validation") {
  LevelTable t{{400, 300}, {0.5}};
  CHECK_THROWS_AS(t.validate(), MappingError);
  t = {{300, 400}, {0.5, 0.6}};
  CHECK_THROWS_AS(t.validate(), MappingError);
  t = {{400, 300}, {0.5, 1.5}};
  CHECK_THROWS_AS(t.validate(), MappingError);
  t = {{}, {}};
  CHECK_THROWS_AS(t.validate(), MappingError);
}

TEST_CASE("volume map json round trip") {
  const auto map = default_volume_map();
  const auto back = parse_volume_map(volume_map_to_json(map));
  CHECK(back.strings_table.thresholds == map.strings_table.thresholds);
  CHECK(back.strings_table.volumes == map.strings_table.volumes);
  CHECK(back.drums_table.volumes == map.drums_table.volumes);

  CHECK_THROWS_AS(parse_volume_map("{"), MappingError);
  CHECK_THROWS_AS(parse_volume_map(R"({"strings": {"thresholds": [1], "volumes_percent": [10]}, "bogus": 1})"),
                  MappingError);
  CHECK_THROWS_AS(parse_volume_map(R"({"drums": {"thresholds": [1], "volumes_percent": [120]}})"), MappingError);
}
