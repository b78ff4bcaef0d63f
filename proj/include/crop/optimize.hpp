#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crop/policy.hpp"
#include "crop/rng.hpp"

namespace crop {

// Update hyperparameters. The published experiments adopt the cited library
// defaults; the two factories below pin them.
struct OptimConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  double learning_rate = 3e-4;
  int rollout_steps = 2048;  // per environment
  int epochs = 10;
  int minibatch_size = 64;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  double max_grad_norm = 0.5;
  int n_envs = 4;
  bool normalize_advantage = true;

  static OptimConfig ppo_defaults();
  static OptimConfig a2c_defaults();
  void validate() const;
};

// Per-step records over n_steps x n_envs, stored step-major. `dones` marks
// steps that ended an episode (termination or truncation); GAE never
// bootstraps across them.
struct RolloutBuffer {
  int n_steps = 0;
  int n_envs = 0;
  int obs_size = 0;
  std::vector<double> observations;  // [t][env][obs]
  std::vector<int> actions;          // [t][env]
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<double> log_probs;
  std::vector<uint8_t> dones;
  std::vector<double> advantages;
  std::vector<double> returns;

  RolloutBuffer(int n_steps, int n_envs, int obs_size);
  size_t flat(int t, int e) const { return static_cast<size_t>(t) * n_envs + e; }
  size_t size() const { return static_cast<size_t>(n_steps) * n_envs; }
};

// delta_t = r_t + gamma*V(s_{t+1})*(1-done_t) - V(s_t)
// A_t     = delta_t + gamma*lambda*(1-done_t)*A_{t+1}
// returns = A_t + V(s_t). `bootstrap_values` holds V of the state following
// the last stored step, one entry per environment.
void compute_gae(RolloutBuffer& buffer, double gamma, double lambda,
                 std::span<const double> bootstrap_values);

// In-place (x - mean) / (std + 1e-8) with sample standard deviation.
void normalize_advantages(std::span<double> advantages);

// Samples flattened env-index-major for updates, so concurrent collection
// cannot change results.
struct FlatRollout {
  int obs_size = 0;
  std::vector<double> observations;
  std::vector<int> actions;
  std::vector<double> old_log_probs;
  std::vector<double> advantages;
  std::vector<double> returns;
};
FlatRollout flatten_env_major(const RolloutBuffer& buffer);

// A view over flattened rollout data; `indices` selects the minibatch rows
// (empty = all rows).
struct SampleBatch {
  int obs_size = 0;
  std::span<const double> observations;
  std::span<const int> actions;
  std::span<const double> old_log_probs;
  std::span<const double> advantages;
  std::span<const double> returns;
  std::span<const size_t> indices{};

  size_t count() const { return indices.empty() ? actions.size() : indices.size(); }
  size_t row(size_t k) const { return indices.empty() ? k : indices[k]; }
  static SampleBatch over(const FlatRollout& flat);
};

struct LossBreakdown {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
};

// Clipped-surrogate PPO loss over the batch:
//   policy = -mean(min(r*A, clip(r, 1-eps, 1+eps)*A)), r = exp(lp_new - lp_old)
//   total  = policy + value_coef * mean((V - return)^2) - entropy_coef * mean(H)
// Writes the parameter gradient into `grad` (resized to num_params). Throws
// std::runtime_error on a non-finite loss, which aborts the update.
LossBreakdown ppo_loss(const PolicyNet& net, const SampleBatch& batch, double clip_epsilon,
                       double value_coef, double entropy_coef, std::vector<double>& grad);

// On-policy advantage-actor-critic loss: policy = -mean(A * log pi(a|s)) with
// the same value and entropy terms as PPO.
LossBreakdown a2c_loss(const PolicyNet& net, const SampleBatch& batch, double value_coef,
                       double entropy_coef, std::vector<double>& grad);

// Draws an action from the distribution; returns the action index and its
// log-probability under the distribution.
std::pair<int, double> sample_action(const ActionDistribution& dist, Rng& rng);

// Adaptive-moment gradient descent with bias correction. The gradient's
// global norm is clipped to `max_grad_norm` (in place) before the step.
class AdamOptimizer {
 public:
  AdamOptimizer(size_t num_params, double learning_rate, double max_grad_norm);
  void step(std::span<double> params, std::span<double> grad);

 private:
  double lr_;
  double max_grad_norm_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

// Clips `grad` so its global L2 norm is at most `max_norm`; returns the
// pre-clip norm.
double clip_grad_norm(std::span<double> grad, double max_norm);

// Checkpoint: config echo, seed, step count and flat parameter arrays per
// layer in one JSON document. Round-trips bit-exactly.
struct Checkpoint {
  std::string config_json;  // serialized run configuration
  uint64_t seed = 0;
  long steps = 0;
  PolicyNet net;
};
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace crop
