#include <doctest.h>

#include <set>
#include <stdexcept>
#include <tuple>

#include "crop/grid.hpp"
#include "crop/maze.hpp"
#include "crop/rng.hpp"

using namespace crop;

namespace {

// Follows an action sequence from reset and sums rewards.
double rollout_return(const Layout& layout, const std::vector<Action>& actions) {
  EnvState state = reset(layout);
  double total = 0.0;
  for (const Action a : actions) {
    const StepOutcome out = step(state, a);
    total += out.reward;
    state = out.next_state;
    if (state.done()) break;
  }
  return total;
}

}  // namespace

TEST_CASE("parse_layout rejects malformed maps") {
  CHECK_THROWS_AS(parse_layout("###\n#A#\n###\n"), std::invalid_argument);  // no goal
  CHECK_THROWS_AS(parse_layout("#####\n#AGG#\n#####\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_layout("####\n#AG#\n###\n"), std::invalid_argument);  // ragged
  CHECK_THROWS_AS(parse_layout("#####\n#AAG#\n#####\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_layout("#####\n#AXG#\n#####\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_layout("#####\n#A#G#\n#####\n"), std::invalid_argument);  // unreachable
  CHECK_THROWS_AS(parse_layout("#####\n#AHG#\n#####\n"), std::invalid_argument);  // hole blocks
  CHECK_THROWS_AS(parse_layout("#####\n_A_G#\n#####\n"), std::invalid_argument);  // open border
}

TEST_CASE("shift layouts match their published reward ranges") {
  const Layout& train = shift_train_layout();
  CHECK(train.height() == 7);
  CHECK(train.width() == 9);
  CHECK(train.agent_start() == Position{1, 1});
  CHECK(train.goal() == Position{5, 5});
  CHECK(shortest_path(train) == 8);
  CHECK(optimal_return(train) == 42.0);

  const Layout& test = shift_test_layout();
  CHECK(shortest_path(test) == 10);
  CHECK(optimal_return(test) == 40.0);

  // The training-optimal path must cross a test hole (the published failure
  // mode of full observability under the shift).
  EnvState state = reset(test);
  bool crossed_hole = false;
  for (const Action a : shortest_path_actions(train)) {
    const StepOutcome out = step(state, a);
    state = out.next_state;
    if (state.layout->at(state.agent_pos) == FeatureKind::Hole) crossed_hole = true;
    if (state.done()) break;
  }
  CHECK(crossed_hole);
}

TEST_CASE("goal adjacent to start has path length one") {
  const Layout layout = parse_layout("####\n#AG#\n#__#\n####\n");
  CHECK(shortest_path(layout) == 1);
  CHECK(optimal_return(layout) == 49.0);
}

TEST_CASE("reset starts a fresh episode") {
  EnvState state = reset(shift_train_layout());
  CHECK(state.agent_pos == Position{1, 1});
  CHECK(state.steps_taken == 0);
  CHECK_FALSE(state.terminated);
  CHECK_FALSE(state.truncated);

  CHECK(reset(maze7_single_layout()).agent_pos == Position{1, 1});

  // Reset after termination clears flags.
  const Layout tiny = parse_layout("####\n#AG#\n#__#\n####\n");
  EnvState st = reset(tiny);
  st = step(st, Action::Right).next_state;
  CHECK(st.terminated);
  const EnvState fresh = reset(tiny);
  CHECK_FALSE(fresh.terminated);
  CHECK(fresh.steps_taken == 0);
}

TEST_CASE("step rewards and termination") {
  const Layout& train = shift_train_layout();
  EnvState state = reset(train);

  SUBCASE("moving onto a field costs one") {
    const StepOutcome out = step(state, Action::Right);
    CHECK(out.reward == -1.0);
    CHECK_FALSE(out.terminated);
    CHECK(out.next_state.agent_pos == Position{1, 2});
  }
  SUBCASE("walking into a wall stays in place and still costs one") {
    const StepOutcome out = step(state, Action::Up);
    CHECK(out.reward == -1.0);
    CHECK(out.next_state.agent_pos == Position{1, 1});
  }
  SUBCASE("falling into a hole costs 51 and terminates") {
    EnvState st = reset(train);
    st = step(st, Action::Down).next_state;   // (2,1)
    st = step(st, Action::Right).next_state;  // (2,2)
    st = step(st, Action::Right).next_state;  // (2,3)
    const StepOutcome out = step(st, Action::Down);  // (3,3) is a hole
    CHECK(out.reward == -51.0);
    CHECK(out.terminated);
    CHECK_FALSE(out.truncated);
  }
  SUBCASE("reaching the goal nets plus 49 and terminates") {
    const Layout tiny = parse_layout("####\n#AG#\n#__#\n####\n");
    const StepOutcome out = step(reset(tiny), Action::Right);
    CHECK(out.reward == 49.0);
    CHECK(out.terminated);
  }
  SUBCASE("stepping a finished episode throws") {
    const Layout tiny = parse_layout("####\n#AG#\n#__#\n####\n");
    const EnvState done = step(reset(tiny), Action::Right).next_state;
    CHECK_THROWS_AS(step(done, Action::Right), std::logic_error);
  }
  SUBCASE("episodes truncate at one hundred steps") {
    EnvState st = reset(train);
    for (int i = 0; i < 99; ++i) {
      st = step(st, Action::Up).next_state;  // wall: stays forever
      CHECK_FALSE(st.done());
    }
    const StepOutcome out = step(st, Action::Up);
    CHECK(out.truncated);
    CHECK_FALSE(out.terminated);
    CHECK(out.next_state.steps_taken == 100);
  }
}

TEST_CASE("full_observation overlays the agent") {
  EnvState state = reset(shift_train_layout());
  const auto grid = full_observation(state);
  CHECK(grid.size() == 7 * 9);
  CHECK(grid[1 * 9 + 1] == FeatureKind::Agent);
  CHECK(grid[0] == FeatureKind::Wall);
  CHECK(grid[5 * 9 + 5] == FeatureKind::Goal);

  // Agent overlaid on the goal cell after a terminal step.
  const Layout tiny = parse_layout("####\n#AG#\n#__#\n####\n");
  const EnvState done = step(reset(tiny), Action::Right).next_state;
  const auto end_grid = full_observation(done);
  CHECK(end_grid[1 * 4 + 2] == FeatureKind::Agent);

  int agents = 0;
  for (const FeatureKind k : end_grid) agents += k == FeatureKind::Agent;
  CHECK(agents == 1);
}

TEST_CASE("generate_maze is deterministic and validates input") {
  const Layout a = generate_maze(7, 7, 3);
  const Layout b = generate_maze(7, 7, 3);
  CHECK(a.same_cells(b));
  CHECK_THROWS_AS(generate_maze(6, 7, 0), std::invalid_argument);
  CHECK_THROWS_AS(generate_maze(7, 8, 0), std::invalid_argument);
  CHECK_THROWS_AS(generate_maze(3, 3, 0), std::invalid_argument);
}

TEST_CASE("generated mazes are perfect mazes with bounded paths") {
  for (const auto [h, w, bound] : {std::tuple<int, int, int>{7, 7, 16}, {11, 11, 48}}) {
    const int rooms = ((h - 1) / 2) * ((w - 1) / 2);
    for (uint64_t seed = 0; seed < 200; ++seed) {
      const Layout maze = generate_maze(h, w, seed);
      CHECK(maze.agent_start() == Position{1, 1});

      // Spanning tree: every room open, carved passages = rooms - 1.
      int open_rooms = 0;
      int passages = 0;
      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          const bool open = maze.at({r, c}) != FeatureKind::Wall;
          const bool room = r % 2 == 1 && c % 2 == 1;
          const bool between = (r % 2 == 1) != (c % 2 == 1);
          if (room) open_rooms += open;
          if (between) passages += open;
          if (!room && !between) CHECK_FALSE(open);  // lattice corners stay walls
        }
      }
      CHECK(open_rooms == rooms);
      CHECK(passages == rooms - 1);

      // Room-lattice paths have even length: twice the tree distance.
      const int path = shortest_path(maze);
      CHECK(path % 2 == 0);
      CHECK(path <= bound);
    }
  }
}

TEST_CASE("single maze configurations match the published optima") {
  CHECK(shortest_path(maze7_single_layout()) == 8);
  CHECK(optimal_return(maze7_single_layout()) == 42.0);
  CHECK(shortest_path(maze11_single_layout()) == 20);
  CHECK(optimal_return(maze11_single_layout()) == 30.0);
}

TEST_CASE("build_pool excludes the deterministic configuration") {
  const auto [single, seed] = find_single_maze(7, 7, 8);
  const MazePool pool = build_pool(7, 7, 100, single, seed);
  CHECK(pool.layouts.size() == 100);
  CHECK(pool.seeds.size() == 100);
  for (const Layout& maze : pool.layouts) {
    CHECK_FALSE(maze.same_cells(single));
    CHECK_NOTHROW(shortest_path(maze));
  }
  const MazePool again = build_pool(7, 7, 100, single, seed);
  for (size_t i = 0; i < pool.layouts.size(); ++i)
    CHECK(pool.layouts[i].same_cells(again.layouts[i]));

  const std::set<uint64_t> seeds(pool.seeds.begin(), pool.seeds.end());
  CHECK(seeds.size() == 100);
}

TEST_CASE("episode returns stay inside the published reward ranges") {
  Rng rng(7);
  const auto check_range = [&](const Layout& layout, double low) {
    const double high = optimal_return(layout);
    for (int episode = 0; episode < 200; ++episode) {
      EnvState state = reset(layout);
      double total = 0.0;
      while (!state.done()) {
        const StepOutcome out = step(state, static_cast<Action>(rng.uniform_int(0, 3)));
        total += out.reward;
        state = out.next_state;
      }
      CHECK(total >= low);
      CHECK(total <= high);
    }
  };
  check_range(shift_train_layout(), -150.0);
  check_range(shift_test_layout(), -150.0);
  check_range(maze7_single_layout(), -100.0);
  check_range(generate_maze(11, 11, 42), -100.0);
}

TEST_CASE("following the BFS path earns exactly the optimal return") {
  for (const Layout* layout : {&shift_train_layout(), &shift_test_layout(),
                               &maze7_single_layout(), &maze11_single_layout()}) {
    const auto actions = shortest_path_actions(*layout);
    CHECK(actions.size() == static_cast<size_t>(shortest_path(*layout)));
    CHECK(rollout_return(*layout, actions) == optimal_return(*layout));
  }
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const Layout maze = generate_maze(9, 9, seed);
    CHECK(rollout_return(maze, shortest_path_actions(maze)) == optimal_return(maze));
  }
}

TEST_CASE("step is a pure function of state and action") {
  Rng rng(11);
  std::vector<Action> actions;
  for (int i = 0; i < 60; ++i) actions.push_back(static_cast<Action>(rng.uniform_int(0, 3)));

  const auto run = [&] {
    EnvState state = reset(shift_train_layout());
    std::vector<std::pair<double, Position>> trace;
    for (const Action a : actions) {
      if (state.done()) break;
      const StepOutcome out = step(state, a);
      trace.emplace_back(out.reward, out.next_state.agent_pos);
      state = out.next_state;
    }
    return trace;
  };
  CHECK(run() == run());
}
