#include "crop/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "crop/harness.hpp"
#include "crop/plot.hpp"

namespace crop {

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

struct TrainFlags {
  std::string algo = "ppo";
  std::string obs = "radius";
  std::string env = "shift";
  std::string mode = "single";
  uint64_t seed = 0;
  int seed_count = 0;
  long steps = 0;
  long eval_every = 0;
  double threshold = 0.0;
  std::string out_dir;
  std::string config_file;
  int rho = 0;
  int eta = 0;
};

int cmd_train(const CLI::App& cmd, const TrainFlags& flags) {
  RunConfig config;
  if (!flags.config_file.empty()) config = run_config_from_json(read_file(flags.config_file));

  // Flags given on the command line override the config file.
  if (cmd.count("--algo")) config.algo = algo_from_string(flags.algo);
  if (cmd.count("--obs")) config.method = obs_method_from_string(flags.obs);
  if (cmd.count("--env")) config.env = env_family_from_string(flags.env);
  if (cmd.count("--mode")) config.mode = train_mode_from_string(flags.mode);
  if (cmd.count("--steps")) config.total_steps = flags.steps;
  if (cmd.count("--eval-every")) config.eval_interval = flags.eval_every;
  if (cmd.count("--threshold")) config.threshold = flags.threshold;
  if (cmd.count("--out")) config.out_dir = flags.out_dir;
  if (cmd.count("--rho")) config.radius = flags.rho;
  if (cmd.count("--eta")) config.eta = flags.eta;
  if (cmd.count("--seeds")) {
    const uint64_t base = cmd.count("--seed") ? flags.seed : 0;
    config.seeds.clear();
    for (int k = 0; k < flags.seed_count; ++k) config.seeds.push_back(base + k);
  } else if (cmd.count("--seed")) {
    config.seeds = {flags.seed};
  }
  config = config.resolved();

  std::cout << "training " << to_string(config.algo) << " / " << to_string(config.method)
            << " on " << to_string(config.env) << " (" << to_string(config.mode) << "), "
            << config.total_steps << " steps, " << config.seeds.size() << " seed(s)\n";
  for (const uint64_t seed : config.seeds) {
    const TrainResult result = train_run(config, seed);
    const MetricRecord last = result.log.empty() ? MetricRecord{} : result.log.back();
    std::cout << "seed " << seed << ": stopped at step " << result.final_step
              << (result.early_stopped ? " (threshold reached)" : "")
              << ", validation " << format_double(last.validation_return) << ", evaluation "
              << format_double(last.evaluation_return) << "\n";
  }
  if (!config.out_dir.empty()) {
    write_text_file((fs::path(config.out_dir) / "config.json").string(),
                    run_config_to_json(config) + "\n");
    std::cout << "metrics and checkpoints under " << config.out_dir << "\n";
  }
  return 0;
}

int cmd_evaluate(const std::string& checkpoint_path, int episodes_override, uint64_t seed) {
  const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
  const RunConfig config = run_config_from_json(checkpoint.config_json).resolved();
  const ObservationSpec spec = config.observation_spec();
  const ResolvedEnv env = resolve_env(config.env, config.mode);
  const int episodes = episodes_override > 0 ? episodes_override : env.episodes;

  Rng validation_rng(derive_seed(seed, seed_tag::kEval, 0));
  Rng evaluation_rng(derive_seed(seed, seed_tag::kEval, 1));
  const double validation = evaluate(checkpoint.net, spec, env.train_layouts, episodes,
                                     env.deterministic_episodes, validation_rng);
  const double evaluation = evaluate(checkpoint.net, spec, env.eval_layouts, episodes,
                                     env.deterministic_episodes, evaluation_rng);
  std::cout << "validation_return " << format_double(validation) << "\n"
            << "evaluation_return " << format_double(evaluation) << "\n";
  return 0;
}

int cmd_heatmap(const std::string& checkpoint_path, const std::string& layout_file,
                const std::string& out_dir, bool svg) {
  const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
  const RunConfig config = run_config_from_json(checkpoint.config_json).resolved();
  const ObservationSpec spec = config.observation_spec();

  const Layout* layout = nullptr;
  Layout custom = shift_test_layout();  // placeholder until assigned
  if (!layout_file.empty()) {
    custom = parse_layout(read_file(layout_file), fs::path(layout_file).stem().string());
    layout = &custom;
  } else if (config.env == EnvFamily::Shift) {
    layout = &shift_test_layout();
  } else if (config.env == EnvFamily::Maze7) {
    layout = &maze7_single_layout();
  } else {
    layout = &maze11_single_layout();
  }

  const Heatmap heatmap = dominant_action_heatmap(checkpoint.net, spec, *layout);
  fs::create_directories(out_dir);
  const fs::path csv_path = fs::path(out_dir) / "heatmap.csv";
  write_text_file(csv_path.string(), heatmap_to_csv(heatmap));
  std::cout << "wrote " << csv_path.string() << "\n";
  if (svg) {
    const fs::path svg_path = fs::path(out_dir) / "heatmap.svg";
    write_text_file(svg_path.string(), heatmap_to_svg(heatmap));
    std::cout << "wrote " << svg_path.string() << "\n";
  }
  return 0;
}

int cmd_oracle(const std::string& layout_file) {
  const Layout layout = parse_layout(read_file(layout_file));
  std::cout << shortest_path(layout) << " / " << format_double(optimal_return(layout))
            << "\n";
  return 0;
}

// Runs grouped into series by directory: seed directories collapse into
// their parent run directory.
std::string series_label(const fs::path& csv_path) {
  const fs::path parent = csv_path.parent_path();
  const std::string name = parent.filename().string();
  if (name.rfind("seed", 0) == 0 && !parent.parent_path().filename().empty())
    return parent.parent_path().filename().string();
  return name.empty() ? csv_path.stem().string() : name;
}

int cmd_plot(const std::vector<std::string>& csv_files, const std::string& out_file,
             const CLI::App& cmd, double threshold, const std::string& title) {
  std::map<std::string, CurveSeries> grouped;
  for (const std::string& file : csv_files) {
    const std::string label = series_label(fs::path(file));
    auto& series = grouped[label];
    series.label = label;
    series.runs.push_back(read_metrics(file));
  }
  std::vector<CurveSeries> series;
  for (auto& [label, s] : grouped) series.push_back(std::move(s));

  PlotOptions options;
  options.title = title;
  if (cmd.count("--threshold")) options.threshold = threshold;
  write_text_file(out_file, render_curves_svg(series, options));
  std::cout << "wrote " << out_file << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Gridworld RL workbench: compact observation transforms (Radius/Action/Object "
               "CROP), RAD augmentation, and PPO/A2C training"};
  app.require_subcommand(1);

  TrainFlags tf;
  CLI::App* train_cmd = app.add_subcommand("train", "train a policy and log metrics");
  train_cmd->add_option("--algo", tf.algo, "ppo or a2c")
      ->check(CLI::IsMember({"ppo", "a2c"}));
  train_cmd->add_option("--obs", tf.obs, "observation method")
      ->check(CLI::IsMember({"fo", "radius", "action", "object", "rad"}));
  train_cmd->add_option("--env", tf.env, "environment family")
      ->check(CLI::IsMember({"shift", "maze7", "maze11"}));
  train_cmd->add_option("--mode", tf.mode, "train on the single layout or the 100-maze pool")
      ->check(CLI::IsMember({"single", "pool"}));
  train_cmd->add_option("--seed", tf.seed, "run seed (with --seeds: first of the range)");
  train_cmd->add_option("--seeds", tf.seed_count, "number of consecutive seeds to run")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--steps", tf.steps, "environment step budget");
  train_cmd->add_option("--eval-every", tf.eval_every, "metric interval in steps");
  train_cmd->add_option("--threshold", tf.threshold,
                        "early-stop validation return (default 40 on shift)");
  train_cmd->add_option("--out", tf.out_dir, "output directory");
  train_cmd->add_option("--config", tf.config_file, "JSON config file (flags override)")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--rho", tf.rho, "Radius CROP radius");
  train_cmd->add_option("--eta", tf.eta, "Object CROP nearest count");

  std::string eval_checkpoint;
  int eval_episodes = 0;
  uint64_t eval_seed = 0;
  CLI::App* eval_cmd =
      app.add_subcommand("evaluate", "validation/evaluation returns of a checkpoint");
  eval_cmd->add_option("checkpoint", eval_checkpoint, "checkpoint.json path")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--episodes", eval_episodes, "override the episode count");
  eval_cmd->add_option("--seed", eval_seed, "episode sampling seed");

  std::string hm_checkpoint, hm_layout, hm_out = ".";
  bool hm_svg = false;
  CLI::App* hm_cmd =
      app.add_subcommand("heatmap", "dominant-action heatmap of a checkpoint");
  hm_cmd->add_option("checkpoint", hm_checkpoint, "checkpoint.json path")
      ->required()
      ->check(CLI::ExistingFile);
  hm_cmd->add_option("--layout", hm_layout, "ASCII layout file (default: the family's test "
                                            "layout)")
      ->check(CLI::ExistingFile);
  hm_cmd->add_option("--out", hm_out, "output directory");
  hm_cmd->add_flag("--svg", hm_svg, "also render an SVG");

  std::string oracle_file;
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle", "print shortest path and optimal return of a layout");
  oracle_cmd->add_option("layout", oracle_file, "ASCII layout file")
      ->required()
      ->check(CLI::ExistingFile);

  std::vector<std::string> plot_files;
  std::string plot_out = "curves.svg", plot_title;
  double plot_threshold = 0.0;
  CLI::App* plot_cmd = app.add_subcommand("plot", "render metric CSVs as SVG curves");
  plot_cmd->add_option("csv", plot_files, "metrics.csv files (grouped by run directory)")
      ->required()
      ->check(CLI::ExistingFile);
  plot_cmd->add_option("--out", plot_out, "output SVG file");
  plot_cmd->add_option("--threshold", plot_threshold, "horizontal threshold line");
  plot_cmd->add_option("--title", plot_title, "plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train_cmd) return cmd_train(*train_cmd, tf);
    if (*eval_cmd) return cmd_evaluate(eval_checkpoint, eval_episodes, eval_seed);
    if (*hm_cmd) return cmd_heatmap(hm_checkpoint, hm_layout, hm_out, hm_svg);
    if (*oracle_cmd) return cmd_oracle(oracle_file);
    if (*plot_cmd)
      return cmd_plot(plot_files, plot_out, *plot_cmd, plot_threshold, plot_title);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace crop
