#include "crop/maze.hpp"

#include <stdexcept>
#include <string>

#include "crop/rng.hpp"

namespace crop {

Layout generate_maze(int height, int width, uint64_t seed) {
  if (height < 5 || width < 5 || height % 2 == 0 || width % 2 == 0)
    throw std::invalid_argument("maze dimensions must be odd and >= 5");

  std::vector<FeatureKind> cells(static_cast<size_t>(height) * width, FeatureKind::Wall);
  const auto carve = [&](Position p) { cells[static_cast<size_t>(p.row) * width + p.col] = FeatureKind::Field; };
  const auto visited_at = [&](Position p) {
    return cells[static_cast<size_t>(p.row) * width + p.col] != FeatureKind::Wall;
  };

  Rng rng(seed);
  std::vector<Position> stack;
  carve({1, 1});
  stack.push_back({1, 1});
  while (!stack.empty()) {
    const Position room = stack.back();
    // Unvisited rooms two cells away, in fixed action order before the draw.
    Position candidates[kNumActions];
    int n = 0;
    for (const Offset d : kActionOffsets) {
      const Position next{room.row + 2 * d.row, room.col + 2 * d.col};
      if (next.row < 1 || next.row >= height - 1 || next.col < 1 || next.col >= width - 1)
        continue;
      if (!visited_at(next)) candidates[n++] = next;
    }
    if (n == 0) {
      stack.pop_back();
      continue;
    }
    const Position next = candidates[rng.uniform_int(0, n - 1)];
    carve({(room.row + next.row) / 2, (room.col + next.col) / 2});
    carve(next);
    stack.push_back(next);
  }

  // Goal uniform over rooms excluding the start room (1,1).
  std::vector<Position> rooms;
  for (int r = 1; r < height; r += 2)
    for (int c = 1; c < width; c += 2)
      if (!(r == 1 && c == 1)) rooms.push_back({r, c});
  const Position goal = rooms[rng.uniform_int(0, static_cast<int>(rooms.size()) - 1)];
  cells[static_cast<size_t>(goal.row) * width + goal.col] = FeatureKind::Goal;

  const std::string name =
      "maze" + std::to_string(height) + "x" + std::to_string(width) + "-s" + std::to_string(seed);
  return Layout(height, width, std::move(cells), {1, 1}, name);
}

MazePool build_pool(int height, int width, int count, const Layout& excluded,
                    uint64_t excluded_seed, uint64_t base_seed) {
  if (excluded.height() != height || excluded.width() != width)
    throw std::invalid_argument("excluded layout dimensions do not match pool dimensions");
  MazePool pool;
  pool.excluded_seed = excluded_seed;
  for (uint64_t seed = base_seed; static_cast<int>(pool.layouts.size()) < count; ++seed) {
    Layout candidate = generate_maze(height, width, seed);
    if (candidate.same_cells(excluded)) continue;
    pool.seeds.push_back(seed);
    pool.layouts.push_back(std::move(candidate));
  }
  return pool;
}

std::pair<Layout, uint64_t> find_single_maze(int height, int width, int target_path) {
  for (uint64_t seed = 0;; ++seed) {
    Layout candidate = generate_maze(height, width, seed);
    if (shortest_path(candidate) == target_path) return {std::move(candidate), seed};
  }
}

const Layout& maze7_single_layout() {
  static const Layout layout = find_single_maze(7, 7, 8).first;
  return layout;
}

const Layout& maze11_single_layout() {
  static const Layout layout = find_single_maze(11, 11, 20).first;
  return layout;
}

const MazePool& maze7_pool() {
  static const MazePool pool = [] {
    const auto [single, seed] = find_single_maze(7, 7, 8);
    return build_pool(7, 7, 100, single, seed);
  }();
  return pool;
}

const MazePool& maze11_pool() {
  static const MazePool pool = [] {
    const auto [single, seed] = find_single_maze(11, 11, 20);
    return build_pool(11, 11, 100, single, seed);
  }();
  return pool;
}

}  // namespace crop
