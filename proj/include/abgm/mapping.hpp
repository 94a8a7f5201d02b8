// Threshold tables that turn game quantities into stem volumes, and the
// wiring of those tables to the three instrument groups:
//
//   strings <- P1 HP      others <- P2 HP      drums <- player distance
//
// Lookup rule: clamp the value into the table's domain, then take the volume
// of the smallest threshold that is >= the clamped value. The same rule works
// for the HP tables (gain falls with the value) and the distance table (gain
// rises as the fighters close in).
#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "abgm/sim.hpp"

namespace abgm::mapping {

class MappingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LevelTable {
  std::vector<int> thresholds;  // strictly decreasing
  std::vector<double> volumes;  // linear amplitude gains in [0, 1]

  void validate() const;
  std::size_t size() const { return thresholds.size(); }
};

LevelTable default_hp_table();
LevelTable default_pd_table();

struct VolumeMap {
  LevelTable strings_table;  // keyed by P1 HP
  LevelTable others_table;   // keyed by P2 HP
  LevelTable drums_table;    // keyed by player distance

  void validate() const;
};

VolumeMap default_volume_map();

// Gains are carried in this fixed order everywhere in the toolkit.
struct StemGains {
  double drums = 0.0;
  double strings = 0.0;
  double others = 0.0;

  friend bool operator==(const StemGains&, const StemGains&) = default;
};

struct MixDirective {
  int tick = 0;
  StemGains gains;

  friend bool operator==(const MixDirective&, const MixDirective&) = default;
};

struct GainSchedule {
  int tick_rate = 60;
  std::vector<MixDirective> directives;  // directives[k].tick == k

  void validate() const;
  std::size_t ticks() const { return directives.size(); }
};

// Indices into each table's volume list.
struct LevelBins {
  std::size_t hp1 = 0;
  std::size_t hp2 = 0;
  std::size_t pd = 0;

  friend bool operator==(const LevelBins&, const LevelBins&) = default;
};

std::size_t level_index(const LevelTable& table, int value);
double level_lookup(const LevelTable& table, int value);

MixDirective directive_for(const sim::GameState& state, const VolumeMap& map);
LevelBins bins_for(const sim::GameState& state, const VolumeMap& map);

GainSchedule schedule_from_trace(const std::vector<sim::GameState>& trace,
                                 const VolumeMap& map, int tick_rate);

// A schedule holding `gains` for `ticks` ticks.
GainSchedule constant_schedule(const StemGains& gains, std::size_t ticks, int tick_rate);

// Table configuration: a JSON object with optional `strings`, `others` and
// `drums` entries, each `{"thresholds": [...], "volumes_percent": [...]}`.
// Missing entries keep the built-in defaults.
VolumeMap parse_volume_map(const std::string& json_text);
VolumeMap load_volume_map(const std::filesystem::path& path);
std::string volume_map_to_json(const VolumeMap& map);

}  // namespace abgm::mapping
