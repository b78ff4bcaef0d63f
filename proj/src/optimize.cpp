#include "crop/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace crop {

OptimConfig OptimConfig::ppo_defaults() {
  OptimConfig cfg;
  cfg.entropy_coef = 0.01;
  return cfg;
}

OptimConfig OptimConfig::a2c_defaults() {
  OptimConfig cfg;
  cfg.gae_lambda = 1.0;
  cfg.learning_rate = 7e-4;
  cfg.rollout_steps = 5;
  cfg.epochs = 1;
  cfg.minibatch_size = 0;  // single pass over the whole rollout
  cfg.normalize_advantage = false;
  return cfg;
}

void OptimConfig::validate() const {
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must be in [0,1]");
  if (gae_lambda < 0.0 || gae_lambda > 1.0)
    throw std::invalid_argument("gae_lambda must be in [0,1]");
  if (clip_epsilon <= 0.0 || clip_epsilon >= 1.0)
    throw std::invalid_argument("clip epsilon must be in (0,1)");
  if (learning_rate <= 0.0) throw std::invalid_argument("learning rate must be positive");
  if (rollout_steps < 1 || epochs < 1 || n_envs < 1)
    throw std::invalid_argument("rollout_steps, epochs and n_envs must be >= 1");
}

RolloutBuffer::RolloutBuffer(int steps, int envs, int obs)
    : n_steps(steps), n_envs(envs), obs_size(obs) {
  const size_t n = size();
  observations.assign(n * obs_size, 0.0);
  actions.assign(n, 0);
  rewards.assign(n, 0.0);
  values.assign(n, 0.0);
  log_probs.assign(n, 0.0);
  dones.assign(n, 0);
  advantages.assign(n, 0.0);
  returns.assign(n, 0.0);
}

void compute_gae(RolloutBuffer& buffer, double gamma, double lambda,
                 std::span<const double> bootstrap_values) {
  if (bootstrap_values.size() != static_cast<size_t>(buffer.n_envs))
    throw std::invalid_argument("one bootstrap value per environment required");
  for (int e = 0; e < buffer.n_envs; ++e) {
    double next_advantage = 0.0;
    double next_value = bootstrap_values[e];
    for (int t = buffer.n_steps - 1; t >= 0; --t) {
      const size_t i = buffer.flat(t, e);
      const double not_done = buffer.dones[i] ? 0.0 : 1.0;
      const double delta =
          buffer.rewards[i] + gamma * next_value * not_done - buffer.values[i];
      next_advantage = delta + gamma * lambda * not_done * next_advantage;
      buffer.advantages[i] = next_advantage;
      buffer.returns[i] = next_advantage + buffer.values[i];
      next_value = buffer.values[i];
    }
  }
}

void normalize_advantages(std::span<double> advantages) {
  const size_t n = advantages.size();
  if (n < 2) return;
  double mean = 0.0;
  for (const double a : advantages) mean += a;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (const double a : advantages) var += (a - mean) * (a - mean);
  const double std_dev = std::sqrt(var / static_cast<double>(n - 1));
  for (double& a : advantages) a = (a - mean) / (std_dev + 1e-8);
}

FlatRollout flatten_env_major(const RolloutBuffer& buffer) {
  FlatRollout flat;
  flat.obs_size = buffer.obs_size;
  const size_t n = buffer.size();
  flat.observations.reserve(n * buffer.obs_size);
  flat.actions.reserve(n);
  flat.old_log_probs.reserve(n);
  flat.advantages.reserve(n);
  flat.returns.reserve(n);
  for (int e = 0; e < buffer.n_envs; ++e) {
    for (int t = 0; t < buffer.n_steps; ++t) {
      const size_t i = buffer.flat(t, e);
      const double* obs = buffer.observations.data() + i * buffer.obs_size;
      flat.observations.insert(flat.observations.end(), obs, obs + buffer.obs_size);
      flat.actions.push_back(buffer.actions[i]);
      flat.old_log_probs.push_back(buffer.log_probs[i]);
      flat.advantages.push_back(buffer.advantages[i]);
      flat.returns.push_back(buffer.returns[i]);
    }
  }
  return flat;
}

SampleBatch SampleBatch::over(const FlatRollout& flat) {
  return SampleBatch{flat.obs_size, flat.observations, flat.actions,
                     flat.old_log_probs, flat.advantages, flat.returns};
}

namespace {

// Shared by the PPO and A2C losses: `policy_coeff(k, cache)` returns the
// per-sample coefficient on d log pi(a|s) in the maximized objective.
template <typename PolicyCoeff>
LossBreakdown actor_critic_loss(const PolicyNet& net, const SampleBatch& batch,
                                double value_coef, double entropy_coef,
                                std::vector<double>& grad, PolicyCoeff&& policy_objective) {
  const size_t n = batch.count();
  if (n == 0) throw std::invalid_argument("empty batch");
  grad.assign(net.num_params(), 0.0);

  LossBreakdown loss;
  PolicyNet::Cache cache;
  const double inv_n = 1.0 / static_cast<double>(n);
  std::array<double, kNumActions> dlogits;

  for (size_t k = 0; k < n; ++k) {
    const size_t row = batch.row(k);
    const std::span<const double> obs{
        batch.observations.data() + row * batch.obs_size, static_cast<size_t>(batch.obs_size)};
    net.forward_cached(obs, cache);

    const int action = batch.actions[row];
    const auto [objective, coeff] = policy_objective(row, cache);

    const double value_err = cache.value - batch.returns[row];
    const double ent = cache.dist.entropy();

    loss.policy -= inv_n * objective;
    loss.value += inv_n * value_err * value_err;
    loss.entropy += inv_n * ent;

    // d(-objective)/dlogit_j = -coeff * (1[j==a] - p_j)
    // d(-ent_coef*H)/dlogit_j = ent_coef * p_j * (log p_j + H)
    for (int j = 0; j < kNumActions; ++j) {
      const double indicator = j == action ? 1.0 : 0.0;
      const double p = cache.dist.probs[j];
      double d = -coeff * (indicator - p);
      d += entropy_coef * p * (cache.dist.log_probs[j] + ent);
      dlogits[j] = inv_n * d;
    }
    const double dvalue = inv_n * value_coef * 2.0 * value_err;
    net.backward(obs, cache, dlogits, dvalue, grad);
  }

  loss.total = loss.policy + value_coef * loss.value - entropy_coef * loss.entropy;
  if (!std::isfinite(loss.total))
    throw std::runtime_error("non-finite loss: update aborted (divergence)");
  return loss;
}

}  // namespace

LossBreakdown ppo_loss(const PolicyNet& net, const SampleBatch& batch, double clip_epsilon,
                       double value_coef, double entropy_coef, std::vector<double>& grad) {
  return actor_critic_loss(
      net, batch, value_coef, entropy_coef, grad,
      [&](size_t row, const PolicyNet::Cache& cache) {
        const double advantage = batch.advantages[row];
        const double ratio =
            std::exp(cache.dist.log_probs[batch.actions[row]] - batch.old_log_probs[row]);
        const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
        const double surr1 = ratio * advantage;
        const double surr2 = clipped * advantage;
        // min() selects the unclipped branch on ties, where both derivatives
        // agree; the clipped branch contributes no policy gradient.
        if (surr1 <= surr2) return std::pair{surr1, advantage * ratio};
        return std::pair{surr2, 0.0};
      });
}

LossBreakdown a2c_loss(const PolicyNet& net, const SampleBatch& batch, double value_coef,
                       double entropy_coef, std::vector<double>& grad) {
  return actor_critic_loss(net, batch, value_coef, entropy_coef, grad,
                           [&](size_t row, const PolicyNet::Cache& cache) {
                             const double advantage = batch.advantages[row];
                             const double log_prob =
                                 cache.dist.log_probs[batch.actions[row]];
                             return std::pair{advantage * log_prob, advantage};
                           });
}

std::pair<int, double> sample_action(const ActionDistribution& dist, Rng& rng) {
  const int action = rng.categorical(dist.probs);
  return {action, dist.log_probs[action]};
}

double clip_grad_norm(std::span<double> grad, double max_norm) {
  double sq = 0.0;
  for (const double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (double& g : grad) g *= scale;
  }
  return norm;
}

AdamOptimizer::AdamOptimizer(size_t num_params, double learning_rate, double max_grad_norm)
    : lr_(learning_rate), max_grad_norm_(max_grad_norm), m_(num_params, 0.0),
      v_(num_params, 0.0) {}

void AdamOptimizer::step(std::span<double> params, std::span<double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw std::invalid_argument("parameter/gradient size mismatch");
  if (max_grad_norm_ > 0.0) clip_grad_norm(grad, max_grad_norm_);
  ++t_;
  const double bias1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < m_.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double m_hat = m_[i] / bias1;
    const double v_hat = v_[i] / bias2;
    params[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
  nlohmann::json doc;
  doc["config"] = checkpoint.config_json.empty()
                      ? nlohmann::json::object()
                      : nlohmann::json::parse(checkpoint.config_json);
  doc["seed"] = checkpoint.seed;
  doc["steps"] = checkpoint.steps;
  doc["arch"] = {{"input", checkpoint.net.input_size()},
                 {"hidden1", checkpoint.net.hidden1()},
                 {"hidden2", checkpoint.net.hidden2()}};
  nlohmann::json layers = nlohmann::json::object();
  const auto params = checkpoint.net.params();
  for (const auto& layer : checkpoint.net.layers()) {
    layers[layer.name] = std::vector<double>(params.begin() + layer.offset,
                                             params.begin() + layer.offset + layer.count);
  }
  doc["layers"] = std::move(layers);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open checkpoint file for writing: " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint file: " + path);
  nlohmann::json doc = nlohmann::json::parse(in);

  PolicyNet net(doc.at("arch").at("input").get<int>(), doc.at("arch").at("hidden1").get<int>(),
                doc.at("arch").at("hidden2").get<int>());
  auto params = net.params();
  for (const auto& layer : net.layers()) {
    const auto values = doc.at("layers").at(layer.name).get<std::vector<double>>();
    if (values.size() != layer.count)
      throw std::runtime_error(std::string("checkpoint layer size mismatch: ") + layer.name);
    std::copy(values.begin(), values.end(), params.begin() + layer.offset);
  }
  Checkpoint checkpoint{doc.at("config").dump(), doc.at("seed").get<uint64_t>(),
                        doc.at("steps").get<long>(), std::move(net)};
  return checkpoint;
}

}  // namespace crop
