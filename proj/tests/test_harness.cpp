#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "crop/harness.hpp"
#include "crop/plot.hpp"

using namespace crop;
namespace fs = std::filesystem;

namespace {

// A policy that always prefers one action: zero weights, forced head bias.
PolicyNet constant_policy(int input_size, Action action) {
  PolicyNet net(input_size, 8, 8);
  const auto layers = net.layers();
  for (const auto& layer : layers)
    if (std::string(layer.name) == "policy_b")
      net.params()[layer.offset + static_cast<int>(action)] = 25.0;
  return net;
}

std::string slurp(const fs::path& path) {
  std::ifstream file(path, std::ios::binary);
  REQUIRE(file);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config resolution fills the published defaults") {
  RunConfig config;
  config.env = EnvFamily::Shift;
  const RunConfig shift = config.resolved();
  CHECK(shift.total_steps == 1'000'000);
  CHECK(shift.eval_interval == 8192);
  REQUIRE(shift.threshold.has_value());
  CHECK(*shift.threshold == 40.0);
  CHECK(shift.eta == 1);

  config.env = EnvFamily::Maze7;
  config.mode = TrainMode::Pool;
  const RunConfig maze7 = config.resolved();
  CHECK(maze7.total_steps == 200'000);
  CHECK_FALSE(maze7.threshold.has_value());
  CHECK(maze7.eta == 2);

  config.env = EnvFamily::Maze11;
  config.mode = TrainMode::Single;
  CHECK(config.resolved().total_steps == 150'000);
  config.mode = TrainMode::Pool;
  CHECK(config.resolved().total_steps == 300'000);
}

TEST_CASE("config validation rejects invalid combinations") {
  RunConfig config;
  config.method = ObsMethod::RAD;
  config.env = EnvFamily::Shift;
  CHECK_THROWS_AS(config.resolved(), std::invalid_argument);

  config.env = EnvFamily::Maze7;
  CHECK_NOTHROW(config.resolved());

  RunConfig pooled;
  pooled.env = EnvFamily::Shift;
  pooled.mode = TrainMode::Pool;
  CHECK_THROWS_AS(pooled.resolved(), std::invalid_argument);
}

TEST_CASE("run configs round-trip through JSON") {
  RunConfig config;
  config.algo = Algo::A2C;
  config.method = ObsMethod::Object;
  config.env = EnvFamily::Maze11;
  config.mode = TrainMode::Pool;
  config.seeds = {3, 4, 5};
  config.out_dir = "runs/x";
  const RunConfig resolved = config.resolved();

  const RunConfig parsed = run_config_from_json(run_config_to_json(resolved));
  CHECK(parsed.algo == resolved.algo);
  CHECK(parsed.method == resolved.method);
  CHECK(parsed.env == resolved.env);
  CHECK(parsed.mode == resolved.mode);
  CHECK(parsed.total_steps == resolved.total_steps);
  CHECK(parsed.seeds == resolved.seeds);
  CHECK(parsed.threshold == resolved.threshold);
  CHECK(parsed.eta == resolved.eta);
}

TEST_CASE("environment pairing puts the unseen configuration on evaluation") {
  const ResolvedEnv shift = resolve_env(EnvFamily::Shift, TrainMode::Single);
  CHECK(shift.train_layouts.size() == 1);
  CHECK(shift.eval_layouts.size() == 1);
  CHECK(shift.deterministic_episodes);
  CHECK(shift.episodes == 1);
  CHECK(shift.train_layouts[0]->name() == "shift-train");
  CHECK(shift.eval_layouts[0]->name() == "shift-test");

  const ResolvedEnv single = resolve_env(EnvFamily::Maze7, TrainMode::Single);
  CHECK(single.train_layouts.size() == 1);
  CHECK(single.eval_layouts.size() == 100);
  CHECK_FALSE(single.deterministic_episodes);
  CHECK(single.episodes == 100);

  const ResolvedEnv pool = resolve_env(EnvFamily::Maze7, TrainMode::Pool);
  CHECK(pool.train_layouts.size() == 100);
  CHECK(pool.eval_layouts.size() == 1);
  CHECK(pool.eval_layouts[0]->same_cells(maze7_single_layout()));
}

TEST_CASE("evaluate runs scripted and random policies inside the reward ranges") {
  // Straight corridor: always-right is optimal and earns 50 - 2 = 48.
  const Layout corridor = parse_layout("#####\n#A_G#\n#####\n");
  const ObservationSpec spec = make_spec(ObsMethod::FO, 3, 5, false);
  const PolicyNet right = constant_policy(spec.size(), Action::Right);
  Rng rng(1);
  const std::vector<const Layout*> layouts{&corridor};
  CHECK(evaluate(right, spec, layouts, 1, true, rng) == 48.0);

  // A uniform-random policy stays within the published range.
  const PolicyNet uniform(make_spec(ObsMethod::FO, 7, 9, false).size(), 8, 8);
  const ObservationSpec shift_spec = make_spec(ObsMethod::FO, 7, 9, false);
  const std::vector<const Layout*> shift{&shift_train_layout()};
  const double mean_return = evaluate(uniform, shift_spec, shift, 50, false, rng);
  CHECK(mean_return >= -150.0);
  CHECK(mean_return <= 42.0);

  // Deterministic episodes repeat exactly.
  Rng a(7), b(7);
  const double first = evaluate(right, spec, layouts, 1, true, a);
  const double second = evaluate(right, spec, layouts, 1, true, b);
  CHECK(first == second);
}

TEST_CASE("evaluate does not mutate parameters") {
  Rng init(3);
  PolicyNet net(make_spec(ObsMethod::Radius, 7, 9, false).size());
  net.init_orthogonal(init);
  const std::vector<double> before(net.params().begin(), net.params().end());

  Rng rng(9);
  const std::vector<const Layout*> layouts{&shift_train_layout()};
  evaluate(net, make_spec(ObsMethod::Radius, 7, 9, false), layouts, 3, false, rng);
  const std::vector<double> after(net.params().begin(), net.params().end());
  CHECK(before == after);
}

TEST_CASE("dominant action heatmaps cover exactly the standable cells") {
  const ObservationSpec spec = make_spec(ObsMethod::FO, 7, 9, false);
  const PolicyNet right = constant_policy(spec.size(), Action::Right);
  const Heatmap heatmap = dominant_action_heatmap(right, spec, shift_train_layout());

  const Layout& layout = shift_train_layout();
  for (int r = 0; r < layout.height(); ++r) {
    for (int c = 0; c < layout.width(); ++c) {
      const int action = heatmap.dominant[layout.index({r, c})];
      if (layout.at({r, c}) == FeatureKind::Field)
        CHECK(action == static_cast<int>(Action::Right));
      else
        CHECK(action == -1);  // walls, holes and the goal are absent
    }
  }

  const std::string csv = heatmap_to_csv(heatmap);
  CHECK(csv.find('R') != std::string::npos);
  CHECK(csv.find('U') == std::string::npos);

  // Always-right solves the corridor from every standable cell.
  const Layout corridor = parse_layout("#####\n#A_G#\n#####\n");
  const ObservationSpec tiny = make_spec(ObsMethod::FO, 3, 5, false);
  CHECK(heatmap_reaches_goal(
      dominant_action_heatmap(constant_policy(tiny.size(), Action::Right), tiny, corridor)));
  // Always-left never reaches it.
  CHECK_FALSE(heatmap_reaches_goal(
      dominant_action_heatmap(constant_policy(tiny.size(), Action::Left), tiny, corridor)));
}

TEST_CASE("metrics CSV format and round-trip") {
  const std::vector<MetricRecord> one{{8192, 0, -52.0, -100.0, 1.25}};
  const std::string csv = metrics_to_csv(one);
  CHECK(csv == "step,seed,validation_return,evaluation_return,wall_s\n"
               "8192,0,-52,-100,1.25\n");

  std::vector<MetricRecord> log;
  Rng rng(4);
  for (int i = 1; i <= 10; ++i)
    log.push_back({8192L * i, 3, rng.normal() * 37.1, rng.normal() * 93.7, rng.uniform()});
  CHECK(parse_metrics_csv(metrics_to_csv(log)) == log);
}

TEST_CASE("confidence band uses the z-scaled standard error") {
  std::vector<std::vector<MetricRecord>> runs;
  double mean = 0.0;
  const double values[8] = {40.0, 38.5, 41.0, 39.0, 42.0, 37.5, 40.5, 39.5};
  for (int s = 0; s < 8; ++s) {
    runs.push_back({MetricRecord{8192, static_cast<uint64_t>(s), values[s], 0.0, 0.0}});
    mean += values[s];
  }
  mean /= 8.0;
  double var = 0.0;
  for (const double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / 7.0);

  const auto band = confidence_band(runs, true);
  REQUIRE(band.size() == 1);
  CHECK(band[0].step == 8192);
  CHECK(band[0].n == 8);
  CHECK(band[0].mean == doctest::Approx(mean));
  CHECK(band[0].half_width == doctest::Approx(1.96 * sd / std::sqrt(8.0)));
}

TEST_CASE("pool sampling covers every maze") {
  const MazePool& pool = maze7_pool();
  std::vector<const Layout*> layouts;
  for (const Layout& layout : pool.layouts) layouts.push_back(&layout);

  Rng rng(123);
  std::set<const Layout*> seen;
  for (int i = 0; i < 10'000; ++i) seen.insert(&sample_pool_layout(layouts, rng));
  CHECK(seen.size() == 100);
}

TEST_CASE("training logs metrics at interval multiples and early-stops") {
  RunConfig config;
  config.algo = Algo::A2C;
  config.method = ObsMethod::Object;  // 8 inputs: cheap
  config.env = EnvFamily::Shift;
  config.total_steps = 20'000;
  config.eval_interval = 4096;
  config.threshold = -1000.0;  // any validation return fires the stop
  const TrainResult result = train_run(config, 0, [] { return 0.0; });

  REQUIRE(result.log.size() == 1);  // stopped at the first record
  CHECK(result.log[0].step == 4096);
  CHECK(result.early_stopped);
  // No training after the stop: the final step is the update that crossed
  // the first mark.
  CHECK(result.final_step < 4096 + 8192);

  RunConfig full = config;
  full.threshold = 1e9;  // never fires
  full.total_steps = 12'000;
  const TrainResult complete = train_run(full, 0, [] { return 0.0; });
  CHECK_FALSE(complete.early_stopped);
  REQUIRE(complete.log.size() == 2);  // marks 4096 and 8192 crossed within the budget
  for (size_t i = 0; i < complete.log.size(); ++i) {
    CHECK(complete.log[i].step == 4096 * static_cast<long>(i + 1));
    CHECK(complete.log[i].step % config.eval_interval == 0);
  }
  CHECK(complete.final_step >= 12'000);
}

TEST_CASE("identical seeds reproduce byte-identical metrics and parameters") {
  RunConfig config;
  config.algo = Algo::A2C;
  config.method = ObsMethod::Object;
  config.env = EnvFamily::Shift;
  config.total_steps = 8192;
  config.threshold = 1e9;

  const TrainResult a = train_run(config, 5, [] { return 0.0; });
  const TrainResult b = train_run(config, 5, [] { return 0.0; });
  CHECK(metrics_to_csv(a.log) == metrics_to_csv(b.log));
  REQUIRE(a.net.num_params() == b.net.num_params());
  for (size_t i = 0; i < a.net.num_params(); ++i)
    CHECK(a.net.params()[i] == b.net.params()[i]);

  const TrainResult c = train_run(config, 6, [] { return 0.0; });
  CHECK(metrics_to_csv(a.log) != metrics_to_csv(c.log));
}

TEST_CASE("training writes metrics, checkpoint and config files") {
  const fs::path dir = fresh_dir("crop_harness_outputs");
  RunConfig config;
  config.algo = Algo::A2C;
  config.method = ObsMethod::Object;
  config.env = EnvFamily::Shift;
  config.total_steps = 8192;
  config.threshold = 1e9;
  config.seeds = {0};
  config.out_dir = dir.string();
  train(config);

  CHECK(fs::exists(dir / "config.json"));
  CHECK(fs::exists(dir / "seed0" / "metrics.csv"));
  CHECK(fs::exists(dir / "seed0" / "checkpoint.json"));

  const auto log = read_metrics((dir / "seed0" / "metrics.csv").string());
  CHECK(log.size() == 1);
  const Checkpoint checkpoint = load_checkpoint((dir / "seed0" / "checkpoint.json").string());
  // A2C updates in 20-step chunks, so the final step overshoots the budget
  // by less than one rollout.
  CHECK(checkpoint.steps >= 8192);
  CHECK(checkpoint.steps < 8192 + 20);
  const RunConfig echoed = run_config_from_json(checkpoint.config_json);
  CHECK(echoed.method == ObsMethod::Object);

  // Checkpoint files are stable across an evaluate call.
  const std::string before = slurp(dir / "seed0" / "checkpoint.json");
  Rng rng(2);
  const ResolvedEnv env = resolve_env(EnvFamily::Shift, TrainMode::Single);
  evaluate(checkpoint.net, config.resolved().observation_spec(), env.train_layouts, 1, true,
           rng);
  save_checkpoint(checkpoint, (dir / "seed0" / "checkpoint.json").string());
  CHECK(slurp(dir / "seed0" / "checkpoint.json") == before);
}

TEST_CASE("svg rendering emits bands, threshold and legend") {
  std::vector<CurveSeries> series(1);
  series[0].label = "radius";
  for (int s = 0; s < 3; ++s) {
    std::vector<MetricRecord> run;
    for (int i = 1; i <= 5; ++i)
      run.push_back({8192L * i, static_cast<uint64_t>(s), -100.0 + 25.0 * i + s, -120.0 + 20.0 * i, 0.0});
    series[0].runs.push_back(run);
  }
  PlotOptions options;
  options.threshold = 40.0;
  options.title = "shift";
  const std::string svg = render_curves_svg(series, options);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polygon") != std::string::npos);        // confidence band
  CHECK(svg.find("stroke-dasharray='2,4'") != std::string::npos);  // threshold line
  CHECK(svg.find("radius") != std::string::npos);         // legend
  CHECK(svg.find("#1f77b4") != std::string::npos);        // radius color
}
