#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "crop/grid.hpp"
#include "crop/rng.hpp"

namespace crop {

// Categorical distribution over the four actions, derived from logits via a
// numerically stable softmax.
struct ActionDistribution {
  std::array<double, kNumActions> logits{};
  std::array<double, kNumActions> log_probs{};
  std::array<double, kNumActions> probs{};

  int argmax() const;
  double entropy() const;  // -sum p log p
};

ActionDistribution softmax_distribution(std::span<const double> logits);

// Dense policy/value network: a shared trunk of two tanh hidden layers, a
// 4-logit policy head and a scalar value head. Parameters live in one flat
// array with per-layer views, which keeps the optimizer, finite-difference
// checks and checkpointing trivial.
class PolicyNet {
 public:
  explicit PolicyNet(int input_size, int hidden1 = 64, int hidden2 = 64);

  // Orthogonal-style initialization (Gram-Schmidt on Gaussian draws): gain
  // sqrt(2) on the trunk, 0.01 on the policy head so initial policies are
  // near-uniform, 1 on the value head. Biases start at zero.
  void init_orthogonal(Rng& rng);

  int input_size() const { return in_; }
  int hidden1() const { return h1_; }
  int hidden2() const { return h2_; }

  size_t num_params() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  struct Output {
    ActionDistribution dist;
    double value = 0.0;
  };
  Output forward(std::span<const double> obs) const;

  // Forward pass that keeps the activations needed for backprop.
  struct Cache {
    std::vector<double> a1, a2;  // post-tanh activations
    ActionDistribution dist;
    double value = 0.0;
  };
  void forward_cached(std::span<const double> obs, Cache& cache) const;

  // Accumulates this sample's parameter gradient into `grad` (size
  // num_params), given the loss gradient at the two heads.
  void backward(std::span<const double> obs, const Cache& cache,
                std::span<const double> dlogits, double dvalue, std::span<double> grad) const;

  struct LayerView {
    const char* name;
    size_t offset;
    size_t count;
  };
  std::vector<LayerView> layers() const;

 private:
  int in_, h1_, h2_;
  size_t w1_, b1_, w2_, b2_, wp_, bp_, wv_, bv_;  // offsets into params_
  std::vector<double> params_;
};

}  // namespace crop
