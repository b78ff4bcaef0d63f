#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace crop {

// Cell features. Agent never appears inside a Layout's cell grid; it is
// overlaid from EnvState when building observations.
enum class FeatureKind : uint8_t { Wall = 0, Field = 1, Hole = 2, Goal = 3, Agent = 4 };
constexpr int kNumFeatureKinds = 5;

enum class Action : uint8_t { Up = 0, Right = 1, Down = 2, Left = 3 };
constexpr int kNumActions = 4;

struct Offset {
  int row = 0;
  int col = 0;
  auto operator<=>(const Offset&) const = default;
};

// Action mutation table: Up, Right, Down, Left as (row, col) deltas.
constexpr Offset kActionOffsets[kNumActions] = {{-1, 0}, {0, 1}, {1, 0}, {0, -1}};

inline Offset action_offset(Action a) { return kActionOffsets[static_cast<int>(a)]; }

struct Position {
  int row = 0;
  int col = 0;
  auto operator<=>(const Position&) const = default;
  Position operator+(Offset d) const { return {row + d.row, col + d.col}; }
};

// Immutable grid of feature cells plus the agent start; the environment
// definition. Construction validates the full invariant set: walled border,
// exactly one goal, agent start on a field, goal reachable.
class Layout {
 public:
  Layout(int height, int width, std::vector<FeatureKind> cells, Position agent_start,
         std::string name);

  int height() const { return height_; }
  int width() const { return width_; }
  const std::string& name() const { return name_; }
  Position agent_start() const { return agent_start_; }
  Position goal() const { return goal_; }
  const std::vector<FeatureKind>& cells() const { return cells_; }

  FeatureKind at(Position p) const { return cells_[index(p)]; }
  bool in_bounds(Position p) const {
    return p.row >= 0 && p.row < height_ && p.col >= 0 && p.col < width_;
  }
  size_t index(Position p) const {
    return static_cast<size_t>(p.row) * static_cast<size_t>(width_) + static_cast<size_t>(p.col);
  }

  // Structural equality; names are ignored.
  bool same_cells(const Layout& other) const {
    return height_ == other.height_ && width_ == other.width_ &&
           agent_start_ == other.agent_start_ && cells_ == other.cells_;
  }

 private:
  int height_;
  int width_;
  std::vector<FeatureKind> cells_;
  Position agent_start_;
  Position goal_;
  std::string name_;
};

// One episode's mutable state. Layout is shared and immutable; EnvState is
// cheap to copy, so `step` stays a pure function of (state, action).
struct EnvState {
  const Layout* layout = nullptr;
  Position agent_pos;
  int steps_taken = 0;
  bool terminated = false;
  bool truncated = false;

  bool done() const { return terminated || truncated; }
};

struct StepOutcome {
  double reward = 0.0;
  EnvState next_state;
  bool terminated = false;
  bool truncated = false;
};

constexpr int kMaxEpisodeSteps = 100;
constexpr double kStepPenalty = -1.0;
constexpr double kGoalReward = 50.0;
constexpr double kHolePenalty = -50.0;

// Parses an ASCII map: '#'=Wall, '_' or ' '=Field, 'H'=Hole, 'G'=Goal,
// 'A'=agent start (a Field cell). Throws std::invalid_argument on
// non-rectangular input, unknown characters, missing or duplicate 'A'/'G',
// a non-wall border, or an unreachable goal.
Layout parse_layout(std::string_view text, std::string name = "layout");

// Renders a layout back to its ASCII map form.
std::string format_layout(const Layout& layout);

EnvState reset(const Layout& layout);

// Moves by the action offset unless the target is a Wall (then stays).
// Reward is -1 per step, +50 on reaching the Goal, -50 on falling into a
// Hole; Goal and Hole terminate, step 100 truncates. Throws std::logic_error
// when called on a finished episode.
StepOutcome step(const EnvState& state, Action action);

// Copy of the layout cells with Agent overlaid at the agent position,
// row-major, shape (height, width).
std::vector<FeatureKind> full_observation(const EnvState& state);

// Minimal number of actions from agent start to the goal through non-Wall,
// non-Hole cells (BFS over the 4-neighbor graph). Throws std::runtime_error
// if the goal is unreachable.
int shortest_path(const Layout& layout);

// One BFS-optimal action sequence from agent start to the goal.
std::vector<Action> shortest_path_actions(const Layout& layout);

// 50 - shortest_path(layout): the undiscounted return of an optimal episode.
double optimal_return(const Layout& layout);

// The two holey shift layouts: 7x9, walled border, start (1,1), goal (5,5),
// hole barrier on row 3. Training holes cover columns 1-3 (shortest path 8);
// the test barrier extends over columns 1-5, leaving only the 6-7 gap
// (shortest path 10), so every training-optimal path crosses a test hole.
const Layout& shift_train_layout();
const Layout& shift_test_layout();

}  // namespace crop
