#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crop/grid.hpp"
#include "crop/maze.hpp"
#include "crop/metrics.hpp"
#include "crop/observe.hpp"
#include "crop/optimize.hpp"

namespace crop {

enum class Algo : uint8_t { PPO = 0, A2C = 1 };
enum class EnvFamily : uint8_t { Shift = 0, Maze7 = 1, Maze11 = 2 };
enum class TrainMode : uint8_t { Single = 0, Pool = 1 };

std::string to_string(Algo algo);
std::string to_string(EnvFamily family);
std::string to_string(TrainMode mode);
Algo algo_from_string(const std::string& name);
EnvFamily env_family_from_string(const std::string& name);
TrainMode train_mode_from_string(const std::string& name);

// A full experiment description. Unset fields resolve to the published
// defaults for the environment family (step budgets, early-stop threshold,
// Object-CROP eta) via resolved().
struct RunConfig {
  Algo algo = Algo::PPO;
  ObsMethod method = ObsMethod::Radius;
  EnvFamily env = EnvFamily::Shift;
  TrainMode mode = TrainMode::Single;
  long total_steps = 0;       // 0: family default
  long eval_interval = 8192;  // 2^13
  std::optional<double> threshold;  // unset: 40 for shift, none for mazes
  std::vector<uint64_t> seeds{0};
  std::string out_dir;
  int radius = 2;  // rho, symmetric
  int eta = 0;     // 0: family default (1 holey, 2 maze)

  // Fills every default and validates the combination (RAD is defined for
  // maze environments only).
  RunConfig resolved() const;
  ObservationSpec observation_spec() const;  // requires a resolved config
  OptimConfig optim_config() const;
};

std::string run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const std::string& json_text);

// The concrete layout sets behind a family/mode combination. Validation runs
// in the training configuration(s); evaluation runs in the unseen
// counterpart: single-maze training evaluates on the pool and vice versa,
// the shift family evaluates on the shifted test layout.
struct ResolvedEnv {
  std::vector<const Layout*> train_layouts;
  std::vector<const Layout*> eval_layouts;
  int rows = 0;
  int cols = 0;
  bool maze = false;
  // Holey environments measure a single deterministic (argmax) episode;
  // mazes average 100 sampled-action episodes.
  bool deterministic_episodes = false;
  int episodes = 100;
};
ResolvedEnv resolve_env(EnvFamily family, TrainMode mode);

// Uniform draw used at every episode reset in pool mode (and per evaluation
// episode on multi-layout sets).
const Layout& sample_pool_layout(std::span<const Layout* const> layouts, Rng& rng);

// Mean undiscounted return over episodes. Multi-layout sets draw one uniform
// layout per episode from `rng`; action sampling also comes from `rng` unless
// deterministic (argmax) episodes are requested. Never mutates the network.
double evaluate(const PolicyNet& net, const ObservationSpec& spec,
                std::span<const Layout* const> layouts, int episodes, bool deterministic,
                Rng& rng);

struct TrainResult {
  std::vector<MetricRecord> log;
  PolicyNet net;
  long final_step = 0;
  bool early_stopped = false;
};

// One seed's training run: rollout -> observation transform -> sample ->
// step -> store -> update across four parallel environments, with validation
// and evaluation every eval_interval steps and optional early stopping on
// the validation return. Writes <out>/seed<k>/metrics.csv and
// checkpoint.json when the config names an output directory. `clock` feeds
// the wall_s metric column; pass a constant to make logs byte-reproducible.
TrainResult train_run(const RunConfig& config, uint64_t seed,
                      std::function<double()> clock = nullptr);

// Runs every seed in the config sequentially.
std::vector<TrainResult> train(const RunConfig& config);

// Per-cell argmax action of the policy over every standable (Field) cell;
// -1 elsewhere.
struct Heatmap {
  const Layout* layout = nullptr;
  std::vector<int> dominant;  // row-major

  bool standable(Position p) const { return dominant[layout->index(p)] >= 0; }
};
Heatmap dominant_action_heatmap(const PolicyNet& net, const ObservationSpec& spec,
                                const Layout& layout);

// CSV of U/R/D/L tokens, '.' for cells the agent cannot stand on.
std::string heatmap_to_csv(const Heatmap& heatmap);
std::string heatmap_to_svg(const Heatmap& heatmap);

// True when greedily following the dominant actions reaches the goal from
// every standable cell (within the episode step limit, no holes).
bool heatmap_reaches_goal(const Heatmap& heatmap);

}  // namespace crop
