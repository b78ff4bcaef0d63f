#include "crop/harness.hpp"

#include <chrono>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "crop/plot.hpp"

namespace crop {

std::string to_string(Algo algo) { return algo == Algo::PPO ? "ppo" : "a2c"; }

std::string to_string(EnvFamily family) {
  switch (family) {
    case EnvFamily::Shift: return "shift";
    case EnvFamily::Maze7: return "maze7";
    case EnvFamily::Maze11: return "maze11";
  }
  return "?";
}

std::string to_string(TrainMode mode) { return mode == TrainMode::Single ? "single" : "pool"; }

Algo algo_from_string(const std::string& name) {
  if (name == "ppo") return Algo::PPO;
  if (name == "a2c") return Algo::A2C;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

EnvFamily env_family_from_string(const std::string& name) {
  if (name == "shift") return EnvFamily::Shift;
  if (name == "maze7") return EnvFamily::Maze7;
  if (name == "maze11") return EnvFamily::Maze11;
  throw std::invalid_argument("unknown environment family '" + name + "'");
}

TrainMode train_mode_from_string(const std::string& name) {
  if (name == "single") return TrainMode::Single;
  if (name == "pool") return TrainMode::Pool;
  throw std::invalid_argument("unknown training mode '" + name + "'");
}

namespace {

long default_budget(EnvFamily family, TrainMode mode) {
  switch (family) {
    case EnvFamily::Shift: return 1'000'000;
    case EnvFamily::Maze7: return 200'000;
    case EnvFamily::Maze11: return mode == TrainMode::Single ? 150'000 : 300'000;
  }
  return 0;
}

}  // namespace

RunConfig RunConfig::resolved() const {
  RunConfig out = *this;
  if (out.env == EnvFamily::Shift && out.mode == TrainMode::Pool)
    throw std::invalid_argument("the shift family has no layout pool");
  if (out.method == ObsMethod::RAD && out.env == EnvFamily::Shift)
    throw std::invalid_argument("RAD is defined for maze environments only");
  if (out.total_steps <= 0) out.total_steps = default_budget(out.env, out.mode);
  if (out.eval_interval <= 0) out.eval_interval = 8192;
  if (!out.threshold && out.env == EnvFamily::Shift) out.threshold = 40.0;
  if (out.eta <= 0) out.eta = out.env == EnvFamily::Shift ? 1 : 2;
  if (out.seeds.empty()) out.seeds = {0};
  out.observation_spec().validate();
  out.optim_config().validate();
  return out;
}

ObservationSpec RunConfig::observation_spec() const {
  const bool maze = env != EnvFamily::Shift;
  const int rows = env == EnvFamily::Shift ? 7 : (env == EnvFamily::Maze7 ? 7 : 11);
  const int cols = env == EnvFamily::Shift ? 9 : rows;
  ObservationSpec spec = make_spec(method, rows, cols, maze);
  spec.radius_rows = radius;
  spec.radius_cols = radius;
  if (eta > 0) spec.nearest_count = eta;
  return spec;
}

OptimConfig RunConfig::optim_config() const {
  return algo == Algo::PPO ? OptimConfig::ppo_defaults() : OptimConfig::a2c_defaults();
}

std::string run_config_to_json(const RunConfig& config) {
  nlohmann::json doc;
  doc["algo"] = to_string(config.algo);
  doc["obs"] = to_string(config.method);
  doc["env"] = to_string(config.env);
  doc["mode"] = to_string(config.mode);
  doc["steps"] = config.total_steps;
  doc["eval_every"] = config.eval_interval;
  if (config.threshold)
    doc["threshold"] = *config.threshold;
  else
    doc["threshold"] = nullptr;
  doc["seeds"] = config.seeds;
  doc["out"] = config.out_dir;
  doc["rho"] = config.radius;
  doc["eta"] = config.eta;
  return doc.dump(2);
}

RunConfig run_config_from_json(const std::string& json_text) {
  const nlohmann::json doc = nlohmann::json::parse(json_text);
  RunConfig config;
  if (doc.contains("algo")) config.algo = algo_from_string(doc.at("algo").get<std::string>());
  if (doc.contains("obs"))
    config.method = obs_method_from_string(doc.at("obs").get<std::string>());
  if (doc.contains("env"))
    config.env = env_family_from_string(doc.at("env").get<std::string>());
  if (doc.contains("mode"))
    config.mode = train_mode_from_string(doc.at("mode").get<std::string>());
  if (doc.contains("steps")) config.total_steps = doc.at("steps").get<long>();
  if (doc.contains("eval_every")) config.eval_interval = doc.at("eval_every").get<long>();
  if (doc.contains("threshold") && !doc.at("threshold").is_null())
    config.threshold = doc.at("threshold").get<double>();
  if (doc.contains("seeds")) config.seeds = doc.at("seeds").get<std::vector<uint64_t>>();
  if (doc.contains("out")) config.out_dir = doc.at("out").get<std::string>();
  if (doc.contains("rho")) config.radius = doc.at("rho").get<int>();
  if (doc.contains("eta")) config.eta = doc.at("eta").get<int>();
  return config;
}

ResolvedEnv resolve_env(EnvFamily family, TrainMode mode) {
  ResolvedEnv env;
  if (family == EnvFamily::Shift) {
    env.train_layouts = {&shift_train_layout()};
    env.eval_layouts = {&shift_test_layout()};
    env.rows = 7;
    env.cols = 9;
    env.deterministic_episodes = true;
    env.episodes = 1;
    return env;
  }
  const Layout& single =
      family == EnvFamily::Maze7 ? maze7_single_layout() : maze11_single_layout();
  const MazePool& pool = family == EnvFamily::Maze7 ? maze7_pool() : maze11_pool();
  env.rows = single.height();
  env.cols = single.width();
  env.maze = true;
  env.deterministic_episodes = false;
  env.episodes = 100;
  std::vector<const Layout*> pool_ptrs;
  pool_ptrs.reserve(pool.layouts.size());
  for (const Layout& layout : pool.layouts) pool_ptrs.push_back(&layout);
  if (mode == TrainMode::Single) {
    env.train_layouts = {&single};
    env.eval_layouts = std::move(pool_ptrs);
  } else {
    env.train_layouts = std::move(pool_ptrs);
    env.eval_layouts = {&single};
  }
  return env;
}

const Layout& sample_pool_layout(std::span<const Layout* const> layouts, Rng& rng) {
  if (layouts.size() == 1) return *layouts[0];
  return *layouts[rng.uniform_int(0, static_cast<int>(layouts.size()) - 1)];
}

double evaluate(const PolicyNet& net, const ObservationSpec& spec,
                std::span<const Layout* const> layouts, int episodes, bool deterministic,
                Rng& rng) {
  if (layouts.empty() || episodes < 1) throw std::invalid_argument("nothing to evaluate");
  double total = 0.0;
  for (int episode = 0; episode < episodes; ++episode) {
    const Layout* layout = &sample_pool_layout(layouts, rng);
    EnvState state = reset(*layout);
    double episode_return = 0.0;
    while (!state.done()) {
      const Observation obs = apply(spec, state);  // RAD evaluates un-augmented
      const auto out = net.forward(obs.values);
      const int action =
          deterministic ? out.dist.argmax() : sample_action(out.dist, rng).first;
      const StepOutcome outcome = step(state, static_cast<Action>(action));
      episode_return += outcome.reward;
      state = outcome.next_state;
    }
    total += episode_return;
  }
  return total / episodes;
}

TrainResult train_run(const RunConfig& raw_config, uint64_t seed,
                      std::function<double()> clock) {
  const RunConfig config = raw_config.resolved();
  const ObservationSpec spec = config.observation_spec();
  const OptimConfig optim = config.optim_config();
  const ResolvedEnv env = resolve_env(config.env, config.mode);
  const int obs_size = spec.size();
  const int n_envs = optim.n_envs;

  const auto start = std::chrono::steady_clock::now();
  if (!clock)
    clock = [start] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

  // Independent streams fanned out from the one run seed.
  Rng init_rng(derive_seed(seed, seed_tag::kInit));
  Rng shuffle_rng(derive_seed(seed, seed_tag::kShuffle));
  std::vector<Rng> action_rng, pool_rng, rad_rng;
  for (int e = 0; e < n_envs; ++e) {
    action_rng.emplace_back(derive_seed(seed, seed_tag::kAction, e));
    pool_rng.emplace_back(derive_seed(seed, seed_tag::kPool, e));
    rad_rng.emplace_back(derive_seed(seed, seed_tag::kRad, e));
  }

  PolicyNet net(obs_size);
  net.init_orthogonal(init_rng);
  AdamOptimizer adam(net.num_params(), optim.learning_rate, optim.max_grad_norm);

  const auto sample_layout = [&](int e) -> const Layout& {
    return sample_pool_layout(env.train_layouts, pool_rng[e]);
  };

  std::vector<EnvState> states;
  for (int e = 0; e < n_envs; ++e) states.push_back(reset(sample_layout(e)));

  const bool rad_training = spec.method == ObsMethod::RAD;
  RolloutBuffer buffer(optim.rollout_steps, n_envs, obs_size);
  std::vector<double> bootstrap(n_envs, 0.0);
  std::vector<double> grad;
  std::vector<size_t> order(buffer.size());

  TrainResult result{{}, net, 0, false};
  long global_step = 0;
  long next_eval = config.eval_interval;

  const auto record_metrics = [&](long mark) {
    Rng validation_rng(derive_seed(seed, seed_tag::kEval, 2 * static_cast<uint64_t>(mark)));
    Rng evaluation_rng(
        derive_seed(seed, seed_tag::kEval, 2 * static_cast<uint64_t>(mark) + 1));
    MetricRecord rec;
    rec.step = mark;
    rec.seed = seed;
    rec.validation_return = evaluate(net, spec, env.train_layouts, env.episodes,
                                     env.deterministic_episodes, validation_rng);
    rec.evaluation_return = evaluate(net, spec, env.eval_layouts, env.episodes,
                                     env.deterministic_episodes, evaluation_rng);
    rec.wall_seconds = clock();
    result.log.push_back(rec);
    return rec.validation_return;
  };

  while (global_step < config.total_steps && !result.early_stopped) {
    // Rollout across the parallel environments, merged env-index-major.
    for (int t = 0; t < optim.rollout_steps; ++t) {
      for (int e = 0; e < n_envs; ++e) {
        const size_t i = buffer.flat(t, e);
        const Observation obs =
            apply(spec, states[e], rad_training ? &rad_rng[e] : nullptr);
        std::copy(obs.values.begin(), obs.values.end(),
                  buffer.observations.begin() + i * obs_size);
        const auto out = net.forward(obs.values);
        const auto [action, log_prob] = sample_action(out.dist, action_rng[e]);
        const StepOutcome outcome = step(states[e], static_cast<Action>(action));

        buffer.actions[i] = action;
        buffer.rewards[i] = outcome.reward;
        buffer.values[i] = out.value;
        buffer.log_probs[i] = log_prob;
        buffer.dones[i] = outcome.next_state.done() ? 1 : 0;
        states[e] = outcome.next_state.done() ? reset(sample_layout(e)) : outcome.next_state;
      }
    }
    for (int e = 0; e < n_envs; ++e) {
      const Observation obs = apply(spec, states[e], rad_training ? &rad_rng[e] : nullptr);
      bootstrap[e] = net.forward(obs.values).value;
    }
    compute_gae(buffer, optim.gamma, optim.gae_lambda, bootstrap);

    FlatRollout flat = flatten_env_major(buffer);
    if (config.algo == Algo::PPO) {
      if (optim.normalize_advantage) normalize_advantages(flat.advantages);
      std::iota(order.begin(), order.end(), size_t{0});
      for (int epoch = 0; epoch < optim.epochs; ++epoch) {
        // Fisher-Yates with the run's shuffle stream.
        for (size_t i = order.size() - 1; i > 0; --i)
          std::swap(order[i], order[shuffle_rng.uniform_int(0, static_cast<int>(i))]);
        const size_t batch = static_cast<size_t>(optim.minibatch_size);
        for (size_t begin = 0; begin < order.size(); begin += batch) {
          SampleBatch minibatch = SampleBatch::over(flat);
          minibatch.indices = std::span<const size_t>(order).subspan(
              begin, std::min(batch, order.size() - begin));
          ppo_loss(net, minibatch, optim.clip_epsilon, optim.value_coef, optim.entropy_coef,
                   grad);
          adam.step(net.params(), grad);
        }
      }
    } else {
      a2c_loss(net, SampleBatch::over(flat), optim.value_coef, optim.entropy_coef, grad);
      adam.step(net.params(), grad);
    }

    global_step += static_cast<long>(optim.rollout_steps) * n_envs;

    // Metric marks are exact multiples of the interval; an update that
    // overshoots a mark records against the mark it crossed.
    while (next_eval <= global_step && !result.early_stopped) {
      const double validation = record_metrics(next_eval);
      if (config.threshold && validation >= *config.threshold) result.early_stopped = true;
      next_eval += config.eval_interval;
    }
  }

  result.net = net;
  result.final_step = global_step;

  if (!config.out_dir.empty()) {
    namespace fs = std::filesystem;
    const fs::path seed_dir = fs::path(config.out_dir) / ("seed" + std::to_string(seed));
    fs::create_directories(seed_dir);
    write_metrics(result.log, (seed_dir / "metrics.csv").string());
    save_checkpoint(Checkpoint{run_config_to_json(config), seed, global_step, net},
                    (seed_dir / "checkpoint.json").string());
  }
  return result;
}

std::vector<TrainResult> train(const RunConfig& raw_config) {
  const RunConfig config = raw_config.resolved();
  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    write_text_file((std::filesystem::path(config.out_dir) / "config.json").string(),
                    run_config_to_json(config) + "\n");
  }
  std::vector<TrainResult> results;
  for (const uint64_t seed : config.seeds) results.push_back(train_run(config, seed));
  return results;
}

Heatmap dominant_action_heatmap(const PolicyNet& net, const ObservationSpec& spec,
                                const Layout& layout) {
  Heatmap heatmap{&layout, std::vector<int>(layout.cells().size(), -1)};
  for (int r = 0; r < layout.height(); ++r) {
    for (int c = 0; c < layout.width(); ++c) {
      if (layout.at({r, c}) != FeatureKind::Field) continue;
      EnvState state = reset(layout);
      state.agent_pos = {r, c};
      const Observation obs = apply(spec, state);
      heatmap.dominant[layout.index({r, c})] = net.forward(obs.values).dist.argmax();
    }
  }
  return heatmap;
}

std::string heatmap_to_csv(const Heatmap& heatmap) {
  constexpr char kTokens[kNumActions] = {'U', 'R', 'D', 'L'};
  const Layout& layout = *heatmap.layout;
  std::string out;
  for (int r = 0; r < layout.height(); ++r) {
    for (int c = 0; c < layout.width(); ++c) {
      if (c > 0) out.push_back(',');
      const int action = heatmap.dominant[layout.index({r, c})];
      out.push_back(action < 0 ? '.' : kTokens[action]);
    }
    out.push_back('\n');
  }
  return out;
}

std::string heatmap_to_svg(const Heatmap& heatmap) {
  const Layout& layout = *heatmap.layout;
  const int cell = 40;
  const int w = layout.width() * cell;
  const int h = layout.height() * cell;
  constexpr const char* kArrows[kNumActions] = {"&#8593;", "&#8594;", "&#8595;", "&#8592;"};

  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
      << "' viewBox='0 0 " << w << ' ' << h << "'>\n";
  for (int r = 0; r < layout.height(); ++r) {
    for (int c = 0; c < layout.width(); ++c) {
      const char* fill = "#ffffff";
      switch (layout.at({r, c})) {
        case FeatureKind::Wall: fill = "#555555"; break;
        case FeatureKind::Hole: fill = "#3b6fb6"; break;
        case FeatureKind::Goal: fill = "#49a24d"; break;
        default: break;
      }
      svg << "<rect x='" << c * cell << "' y='" << r * cell << "' width='" << cell
          << "' height='" << cell << "' fill='" << fill << "' stroke='#999'/>\n";
      const int action = heatmap.dominant[layout.index({r, c})];
      if (action >= 0)
        svg << "<text x='" << c * cell + cell / 2 << "' y='" << r * cell + cell / 2 + 7
            << "' text-anchor='middle' font-size='20' font-family='sans-serif'>"
            << kArrows[action] << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

bool heatmap_reaches_goal(const Heatmap& heatmap) {
  const Layout& layout = *heatmap.layout;
  for (int r = 0; r < layout.height(); ++r) {
    for (int c = 0; c < layout.width(); ++c) {
      if (!heatmap.standable({r, c})) continue;
      EnvState state = reset(layout);
      state.agent_pos = {r, c};
      bool reached = false;
      while (!state.done()) {
        const int action = heatmap.dominant[layout.index(state.agent_pos)];
        const StepOutcome outcome = step(state, static_cast<Action>(action));
        state = outcome.next_state;
        if (state.terminated && layout.at(state.agent_pos) == FeatureKind::Goal)
          reached = true;
      }
      if (!reached) return false;
    }
  }
  return true;
}

}  // namespace crop
