#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "crop/grid.hpp"

namespace crop {

// Fixed set of procedurally generated layouts used as a training or test
// distribution. Exactly `count` members, none structurally equal to the
// excluded deterministic configuration.
struct MazePool {
  std::vector<uint64_t> seeds;
  std::vector<Layout> layouts;
  uint64_t excluded_seed = 0;
};

// Perfect maze on the odd-coordinate room lattice via randomized depth-first
// search (recursive backtracker). Walls everywhere except rooms and carved
// passages; agent start (1,1); goal uniform over the remaining rooms.
// Deterministic for a fixed seed. Height and width must be odd and >= 5.
Layout generate_maze(int height, int width, uint64_t seed);

// First `count` generated layouts from seeds base_seed, base_seed+1, ...
// skipping any layout structurally equal to `excluded`.
MazePool build_pool(int height, int width, int count, const Layout& excluded,
                    uint64_t excluded_seed, uint64_t base_seed = 0);

// Scans seeds 0,1,2,... and returns the first maze whose shortest path equals
// `target_path`, together with its seed: the deterministic single-maze
// configuration for an environment family.
std::pair<Layout, uint64_t> find_single_maze(int height, int width, int target_path);

// The fixed single-maze configurations (shortest paths 8 and 20, so optimal
// returns 42 and 30) and their 100-maze pools.
const Layout& maze7_single_layout();
const Layout& maze11_single_layout();
const MazePool& maze7_pool();
const MazePool& maze11_pool();

}  // namespace crop
