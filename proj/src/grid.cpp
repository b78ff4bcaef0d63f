#include "crop/grid.hpp"

#include <array>
#include <deque>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace crop {

namespace {

// BFS distances from `from` over non-Wall, non-Hole cells. Unreachable cells
// keep -1. Holes block because entering one ends the episode.
std::vector<int> bfs_distances(const Layout& layout, Position from) {
  std::vector<int> dist(layout.cells().size(), -1);
  std::deque<Position> queue;
  dist[layout.index(from)] = 0;
  queue.push_back(from);
  while (!queue.empty()) {
    const Position cur = queue.front();
    queue.pop_front();
    for (const Offset d : kActionOffsets) {
      const Position next = cur + d;
      if (!layout.in_bounds(next)) continue;
      const FeatureKind kind = layout.at(next);
      if (kind == FeatureKind::Wall || kind == FeatureKind::Hole) continue;
      if (dist[layout.index(next)] >= 0) continue;
      dist[layout.index(next)] = dist[layout.index(cur)] + 1;
      queue.push_back(next);
    }
  }
  return dist;
}

}  // namespace

Layout::Layout(int height, int width, std::vector<FeatureKind> cells, Position agent_start,
               std::string name)
    : height_(height),
      width_(width),
      cells_(std::move(cells)),
      agent_start_(agent_start),
      name_(std::move(name)) {
  if (height_ < 3 || width_ < 3) throw std::invalid_argument("layout smaller than 3x3");
  if (cells_.size() != static_cast<size_t>(height_) * static_cast<size_t>(width_))
    throw std::invalid_argument("cell count does not match dimensions");

  int goals = 0;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      const FeatureKind kind = at({r, c});
      if (kind == FeatureKind::Agent)
        throw std::invalid_argument("Agent may not appear in layout cells");
      const bool border = r == 0 || c == 0 || r == height_ - 1 || c == width_ - 1;
      if (border && kind != FeatureKind::Wall)
        throw std::invalid_argument("layout border must be Wall");
      if (kind == FeatureKind::Goal) {
        goal_ = {r, c};
        ++goals;
      }
    }
  }
  if (goals != 1) throw std::invalid_argument("layout must contain exactly one Goal");
  if (!in_bounds(agent_start_) || at(agent_start_) != FeatureKind::Field)
    throw std::invalid_argument("agent start must be a Field cell");

  if (bfs_distances(*this, agent_start_)[index(goal_)] < 0)
    throw std::invalid_argument("goal unreachable from agent start");
}

Layout parse_layout(std::string_view text, std::string name) {
  std::vector<std::string> rows;
  std::string line;
  for (const char ch : text) {
    if (ch == '\n') {
      rows.push_back(line);
      line.clear();
    } else if (ch != '\r') {
      line.push_back(ch);
    }
  }
  if (!line.empty()) rows.push_back(line);
  if (rows.empty()) throw std::invalid_argument("empty layout text");

  const size_t width = rows.front().size();
  for (const auto& row : rows)
    if (row.size() != width) throw std::invalid_argument("layout rows differ in length");

  std::vector<FeatureKind> cells;
  cells.reserve(rows.size() * width);
  std::optional<Position> start;
  int starts = 0;
  for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
    for (int c = 0; c < static_cast<int>(width); ++c) {
      switch (rows[r][c]) {
        case '#': cells.push_back(FeatureKind::Wall); break;
        case '_':
        case ' ': cells.push_back(FeatureKind::Field); break;
        case 'H': cells.push_back(FeatureKind::Hole); break;
        case 'G': cells.push_back(FeatureKind::Goal); break;
        case 'A':
          cells.push_back(FeatureKind::Field);
          start = Position{r, c};
          ++starts;
          break;
        default:
          throw std::invalid_argument(std::string("unknown layout character '") + rows[r][c] +
                                      "'");
      }
    }
  }
  if (starts != 1) throw std::invalid_argument("layout must contain exactly one 'A'");
  return Layout(static_cast<int>(rows.size()), static_cast<int>(width), std::move(cells), *start,
                std::move(name));
}

std::string format_layout(const Layout& layout) {
  std::string out;
  for (int r = 0; r < layout.height(); ++r) {
    for (int c = 0; c < layout.width(); ++c) {
      if (layout.agent_start() == Position{r, c}) {
        out.push_back('A');
        continue;
      }
      switch (layout.at({r, c})) {
        case FeatureKind::Wall: out.push_back('#'); break;
        case FeatureKind::Field: out.push_back('_'); break;
        case FeatureKind::Hole: out.push_back('H'); break;
        case FeatureKind::Goal: out.push_back('G'); break;
        case FeatureKind::Agent: break;  // never stored
      }
    }
    out.push_back('\n');
  }
  return out;
}

EnvState reset(const Layout& layout) {
  return EnvState{&layout, layout.agent_start(), 0, false, false};
}

StepOutcome step(const EnvState& state, Action action) {
  if (state.done()) throw std::logic_error("step called on a finished episode");
  const Layout& layout = *state.layout;

  const Position target = state.agent_pos + action_offset(action);
  const Position next_pos = layout.at(target) == FeatureKind::Wall ? state.agent_pos : target;

  double reward = kStepPenalty;
  bool terminated = false;
  const FeatureKind landed = layout.at(next_pos);
  if (landed == FeatureKind::Goal) {
    reward += kGoalReward;
    terminated = true;
  } else if (landed == FeatureKind::Hole) {
    reward += kHolePenalty;
    terminated = true;
  }

  EnvState next = state;
  next.agent_pos = next_pos;
  next.steps_taken = state.steps_taken + 1;
  next.terminated = terminated;
  next.truncated = !terminated && next.steps_taken >= kMaxEpisodeSteps;
  return StepOutcome{reward, next, next.terminated, next.truncated};
}

std::vector<FeatureKind> full_observation(const EnvState& state) {
  std::vector<FeatureKind> grid = state.layout->cells();
  grid[state.layout->index(state.agent_pos)] = FeatureKind::Agent;
  return grid;
}

int shortest_path(const Layout& layout) {
  const int d = bfs_distances(layout, layout.agent_start())[layout.index(layout.goal())];
  if (d < 0) throw std::runtime_error("goal unreachable from agent start");
  return d;
}

std::vector<Action> shortest_path_actions(const Layout& layout) {
  // Walk the BFS distance field backwards from the goal.
  const std::vector<int> dist = bfs_distances(layout, layout.agent_start());
  if (dist[layout.index(layout.goal())] < 0)
    throw std::runtime_error("goal unreachable from agent start");

  std::vector<Action> reversed;
  Position cur = layout.goal();
  while (cur != layout.agent_start()) {
    const int d = dist[layout.index(cur)];
    for (int a = 0; a < kNumActions; ++a) {
      const Position prev = cur + action_offset(static_cast<Action>(a));
      if (!layout.in_bounds(prev)) continue;
      if (dist[layout.index(prev)] == d - 1) {
        // The action leading prev -> cur is the opposite of offset a.
        reversed.push_back(static_cast<Action>((a + 2) % kNumActions));
        cur = prev;
        break;
      }
    }
  }
  return {reversed.rbegin(), reversed.rend()};
}

double optimal_return(const Layout& layout) {
  return kGoalReward - static_cast<double>(shortest_path(layout));
}

namespace {

constexpr std::string_view kShiftTrainMap =
    "#########\n"
    "#A______#\n"
    "#HH_HH__#\n"
    "#_______#\n"
    "#_______#\n"
    "#____G__#\n"
    "#########\n";

constexpr std::string_view kShiftTestMap =
    "#########\n"
    "#A______#\n"
    "#HHHHH__#\n"
    "#_______#\n"
    "#_______#\n"
    "#____G__#\n"
    "#########\n";

}  // namespace

const Layout& shift_train_layout() {
  static const Layout layout = parse_layout(kShiftTrainMap, "shift-train");
  return layout;
}

const Layout& shift_test_layout() {
  static const Layout layout = parse_layout(kShiftTestMap, "shift-test");
  return layout;
}

}  // namespace crop
