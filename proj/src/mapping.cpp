#include "abgm/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace abgm::mapping {

void LevelTable::validate() const {
  if (thresholds.empty()) throw MappingError("level table is empty");
  if (volumes.size() != thresholds.size())
    throw MappingError("level table: thresholds and volumes differ in length");
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (thresholds[i] >= thresholds[i - 1])
      throw MappingError("level table: thresholds must be strictly decreasing");
  }
  for (double v : volumes) {
    if (!(v >= 0.0 && v <= 1.0)) throw MappingError("level table: volume outside [0, 1]");
  }
}

LevelTable default_hp_table() {
  return {{400, 300, 250, 200, 150, 100, 50}, {0.75, 0.60, 0.55, 0.40, 0.35, 0.25, 0.10}};
}

LevelTable default_pd_table() {
  return {{800, 600, 500, 400, 300, 60, 0}, {0.10, 0.20, 0.30, 0.40, 0.50, 0.60, 0.75}};
}

void VolumeMap::validate() const {
  strings_table.validate();
  others_table.validate();
  drums_table.validate();
}

VolumeMap default_volume_map() {
  return {default_hp_table(), default_hp_table(), default_pd_table()};
}

void GainSchedule::validate() const {
  if (tick_rate <= 0) throw MappingError("schedule: tick_rate must be positive");
  if (directives.empty()) throw MappingError("schedule: no directives");
  for (std::size_t k = 0; k < directives.size(); ++k) {
    if (directives[k].tick != static_cast<int>(k))
      throw MappingError("schedule: ticks must be contiguous from 0");
  }
}

std::size_t level_index(const LevelTable& table, int value) {
  if (table.thresholds.empty()) throw MappingError("level lookup on an empty table");
  const int hi = table.thresholds.front();
  const int lo = std::min(0, table.thresholds.back());
  const int v = std::clamp(value, lo, hi);
  // Thresholds decrease, so the smallest one >= v is the last such index.
  std::size_t idx = 0;
  for (std::size_t i = 0; i < table.thresholds.size(); ++i) {
    if (table.thresholds[i] >= v) idx = i;
  }
  return idx;
}

double level_lookup(const LevelTable& table, int value) {
  return table.volumes[level_index(table, value)];
}

LevelBins bins_for(const sim::GameState& state, const VolumeMap& map) {
  return {level_index(map.strings_table, state.p1.hp),
          level_index(map.others_table, state.p2.hp),
          level_index(map.drums_table, sim::player_distance(state))};
}

MixDirective directive_for(const sim::GameState& state, const VolumeMap& map) {
  const LevelBins b = bins_for(state, map);
  MixDirective d;
  d.tick = state.tick;
  d.gains.drums = map.drums_table.volumes[b.pd];
  d.gains.strings = map.strings_table.volumes[b.hp1];
  d.gains.others = map.others_table.volumes[b.hp2];
  return d;
}

GainSchedule schedule_from_trace(const std::vector<sim::GameState>& trace,
                                 const VolumeMap& map, int tick_rate) {
  if (trace.empty()) throw MappingError("schedule_from_trace: empty trace");
  GainSchedule schedule;
  schedule.tick_rate = tick_rate;
  schedule.directives.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i > 0 && trace[i].tick <= trace[i - 1].tick)
      throw MappingError("schedule_from_trace: ticks not strictly increasing");
    MixDirective d = directive_for(trace[i], map);
    d.tick = static_cast<int>(i);
    schedule.directives.push_back(d);
  }
  return schedule;
}

GainSchedule constant_schedule(const StemGains& gains, std::size_t ticks, int tick_rate) {
  GainSchedule s;
  s.tick_rate = tick_rate;
  s.directives.resize(ticks);
  for (std::size_t k = 0; k < ticks; ++k) s.directives[k] = {static_cast<int>(k), gains};
  return s;
}

namespace {

using nlohmann::json;

LevelTable table_from_json(const json& j, const char* name) {
  if (!j.is_object() || !j.contains("thresholds") || !j.contains("volumes_percent"))
    throw MappingError(std::string("table '") + name +
                       "' needs 'thresholds' and 'volumes_percent' arrays");
  LevelTable t;
  try {
    t.thresholds = j.at("thresholds").get<std::vector<int>>();
    for (int pct : j.at("volumes_percent").get<std::vector<int>>()) {
      if (pct < 0 || pct > 100)
        throw MappingError(std::string("table '") + name + "': volume percent outside 0..100");
      t.volumes.push_back(pct / 100.0);
    }
  } catch (const json::exception& e) {
    throw MappingError(std::string("table '") + name + "': " + e.what());
  }
  try {
    t.validate();
  } catch (const MappingError& e) {
    throw MappingError(std::string("table '") + name + "': " + e.what());
  }
  return t;
}

json table_to_json(const LevelTable& t) {
  std::vector<int> pct;
  for (double v : t.volumes) pct.push_back(static_cast<int>(std::lround(v * 100.0)));
  return {{"thresholds", t.thresholds}, {"volumes_percent", pct}};
}

}  // namespace

VolumeMap parse_volume_map(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw MappingError(std::string("table config: ") + e.what());
  }
  if (!j.is_object()) throw MappingError("table config: expected an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "strings" && key != "others" && key != "drums")
      throw MappingError("table config: unknown key '" + key + "'");
  }
  VolumeMap map = default_volume_map();
  if (j.contains("strings")) map.strings_table = table_from_json(j["strings"], "strings");
  if (j.contains("others")) map.others_table = table_from_json(j["others"], "others");
  if (j.contains("drums")) map.drums_table = table_from_json(j["drums"], "drums");
  return map;
}

VolumeMap load_volume_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MappingError("cannot open table config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_volume_map(ss.str());
}

std::string volume_map_to_json(const VolumeMap& map) {
  nlohmann::ordered_json j;
  j["strings"] = table_to_json(map.strings_table);
  j["others"] = table_to_json(map.others_table);
  j["drums"] = table_to_json(map.drums_table);
  return j.dump();
}

}  // namespace abgm::mapping
