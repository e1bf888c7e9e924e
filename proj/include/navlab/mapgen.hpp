#pragma once

// Procedural floorplans: a row/column layout of rooms separated by one-cell
// walls, connected through doors, optionally cluttered with free-standing
// obstacles, plus episode sampling across rooms.

#include <cstdint>
#include <vector>

#include "navlab/world.hpp"

namespace navlab {

/// SplitMix64 mixing of a base seed with a stream of labels.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

struct MapSpec {
  WorldMode mode{WorldMode::Continuous};
  double cell_size{0.1};
  int rooms_min{2};
  int rooms_max{4};
  int room_size_min{20};  // interior side, cells
  int room_size_max{36};
  int door_width{6};      // cells
  int max_width{0};       // 0 = unbounded
  int max_height{0};
  double extra_door_prob{0.3};  // chance of a loop-closing door per extra adjacency
  int clutter_min{0};           // obstacles per room
  int clutter_max{2};
  int clutter_size_min{2};      // obstacle side, cells
  int clutter_size_max{4};
  int clearance{2};             // start/goal distance to any obstacle, cells
  int episodes{10};
  int budget{500};
  double success_radius{0.2};
  std::uint64_t seed{1};

  static MapSpec continuous_default();
  static MapSpec discrete_default();
  void validate() const;
};

struct GeneratedMap {
  GroundTruthMap map;
  std::vector<Episode> episodes;
  Grid<int> rooms;                  // room id per interior cell, -1 elsewhere
  Grid<std::uint8_t> doors;         // door cells
  int room_count{0};
  WorldMode mode{WorldMode::Continuous};
};

/// Throws GenerationFailed when no valid map is found after bounded retries.
GeneratedMap generate_map(const MapSpec& spec);

/// True when the obstacle-masked shortest path start -> goal passes a door cell.
bool crosses_door(const GeneratedMap& g, const Episode& e);

/// True when every free cell is 4-connected to every other.
bool is_connected(const GroundTruthMap& map);

}  // namespace navlab
