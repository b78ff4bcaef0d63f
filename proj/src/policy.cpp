#include "crop/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crop {

int ActionDistribution::argmax() const {
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

double ActionDistribution::entropy() const {
  double h = 0.0;
  for (int a = 0; a < kNumActions; ++a) h -= probs[a] * log_probs[a];
  return h;
}

ActionDistribution softmax_distribution(std::span<const double> logits) {
  ActionDistribution dist;
  std::copy(logits.begin(), logits.end(), dist.logits.begin());
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (int a = 0; a < kNumActions; ++a) sum += std::exp(logits[a] - max_logit);
  const double log_sum = std::log(sum);
  for (int a = 0; a < kNumActions; ++a) {
    dist.log_probs[a] = logits[a] - max_logit - log_sum;
    dist.probs[a] = std::exp(dist.log_probs[a]);
  }
  return dist;
}

PolicyNet::PolicyNet(int input_size, int hidden1, int hidden2)
    : in_(input_size), h1_(hidden1), h2_(hidden2) {
  if (in_ < 1 || h1_ < 1 || h2_ < 1) throw std::invalid_argument("network sizes must be >= 1");
  w1_ = 0;
  b1_ = w1_ + static_cast<size_t>(h1_) * in_;
  w2_ = b1_ + h1_;
  b2_ = w2_ + static_cast<size_t>(h2_) * h1_;
  wp_ = b2_ + h2_;
  bp_ = wp_ + static_cast<size_t>(kNumActions) * h2_;
  wv_ = bp_ + kNumActions;
  bv_ = wv_ + h2_;
  params_.assign(bv_ + 1, 0.0);
}

namespace {

// k orthonormal vectors of dimension m (k <= m), rows of the returned array.
// Gram-Schmidt with one re-orthogonalization pass.
std::vector<double> orthonormal_rows(int k, int m, Rng& rng) {
  std::vector<double> v(static_cast<size_t>(k) * m);
  for (auto& x : v) x = rng.normal();
  for (int i = 0; i < k; ++i) {
    double* row = v.data() + static_cast<size_t>(i) * m;
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < i; ++j) {
        const double* prev = v.data() + static_cast<size_t>(j) * m;
        double dot = 0.0;
        for (int t = 0; t < m; ++t) dot += row[t] * prev[t];
        for (int t = 0; t < m; ++t) row[t] -= dot * prev[t];
      }
    }
    double norm = 0.0;
    for (int t = 0; t < m; ++t) norm += row[t] * row[t];
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
      for (int t = 0; t < m; ++t) row[t] = rng.normal();
      --i;
      continue;
    }
    for (int t = 0; t < m; ++t) row[t] /= norm;
  }
  return v;
}

// Fills an (out x in) weight matrix with gain-scaled orthonormal rows or
// columns, whichever fit.
void fill_orthogonal(double* w, int out, int in, double gain, Rng& rng) {
  if (out <= in) {
    const auto rows = orthonormal_rows(out, in, rng);
    for (size_t i = 0; i < rows.size(); ++i) w[i] = gain * rows[i];
  } else {
    const auto cols = orthonormal_rows(in, out, rng);
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) w[static_cast<size_t>(r) * in + c] = gain * cols[static_cast<size_t>(c) * out + r];
  }
}

}  // namespace

void PolicyNet::init_orthogonal(Rng& rng) {
  std::fill(params_.begin(), params_.end(), 0.0);
  const double root2 = std::sqrt(2.0);
  fill_orthogonal(params_.data() + w1_, h1_, in_, root2, rng);
  fill_orthogonal(params_.data() + w2_, h2_, h1_, root2, rng);
  fill_orthogonal(params_.data() + wp_, kNumActions, h2_, 0.01, rng);
  fill_orthogonal(params_.data() + wv_, 1, h2_, 1.0, rng);
}

void PolicyNet::forward_cached(std::span<const double> obs, Cache& cache) const {
  if (obs.size() != static_cast<size_t>(in_))
    throw std::invalid_argument("observation length does not match network input width");
  cache.a1.resize(h1_);
  cache.a2.resize(h2_);
  const double* p = params_.data();

  for (int i = 0; i < h1_; ++i) {
    const double* row = p + w1_ + static_cast<size_t>(i) * in_;
    double z = p[b1_ + i];
    for (int j = 0; j < in_; ++j) z += row[j] * obs[j];
    cache.a1[i] = std::tanh(z);
  }
  for (int i = 0; i < h2_; ++i) {
    const double* row = p + w2_ + static_cast<size_t>(i) * h1_;
    double z = p[b2_ + i];
    for (int j = 0; j < h1_; ++j) z += row[j] * cache.a1[j];
    cache.a2[i] = std::tanh(z);
  }
  double logits[kNumActions];
  for (int a = 0; a < kNumActions; ++a) {
    const double* row = p + wp_ + static_cast<size_t>(a) * h2_;
    double z = p[bp_ + a];
    for (int j = 0; j < h2_; ++j) z += row[j] * cache.a2[j];
    logits[a] = z;
  }
  double value = p[bv_];
  for (int j = 0; j < h2_; ++j) value += p[wv_ + j] * cache.a2[j];

  cache.dist = softmax_distribution(logits);
  cache.value = value;
}

PolicyNet::Output PolicyNet::forward(std::span<const double> obs) const {
  Cache cache;
  forward_cached(obs, cache);
  return Output{cache.dist, cache.value};
}

void PolicyNet::backward(std::span<const double> obs, const Cache& cache,
                         std::span<const double> dlogits, double dvalue,
                         std::span<double> grad) const {
  const double* p = params_.data();
  double* g = grad.data();

  // Heads: dWp += dlogits (x) a2, dWv += dvalue * a2.
  std::vector<double> da2(h2_, 0.0);
  for (int a = 0; a < kNumActions; ++a) {
    const double d = dlogits[a];
    if (d != 0.0) {
      double* grow = g + wp_ + static_cast<size_t>(a) * h2_;
      const double* wrow = p + wp_ + static_cast<size_t>(a) * h2_;
      for (int j = 0; j < h2_; ++j) {
        grow[j] += d * cache.a2[j];
        da2[j] += d * wrow[j];
      }
    }
    g[bp_ + a] += d;
  }
  if (dvalue != 0.0) {
    for (int j = 0; j < h2_; ++j) {
      g[wv_ + j] += dvalue * cache.a2[j];
      da2[j] += dvalue * p[wv_ + j];
    }
    g[bv_] += dvalue;
  }

  // Trunk layer 2.
  std::vector<double> da1(h1_, 0.0);
  for (int i = 0; i < h2_; ++i) {
    const double dz = da2[i] * (1.0 - cache.a2[i] * cache.a2[i]);
    if (dz == 0.0) continue;
    double* grow = g + w2_ + static_cast<size_t>(i) * h1_;
    const double* wrow = p + w2_ + static_cast<size_t>(i) * h1_;
    for (int j = 0; j < h1_; ++j) {
      grow[j] += dz * cache.a1[j];
      da1[j] += dz * wrow[j];
    }
    g[b2_ + i] += dz;
  }

  // Trunk layer 1.
  for (int i = 0; i < h1_; ++i) {
    const double dz = da1[i] * (1.0 - cache.a1[i] * cache.a1[i]);
    if (dz == 0.0) continue;
    double* grow = g + w1_ + static_cast<size_t>(i) * in_;
    for (int j = 0; j < in_; ++j) grow[j] += dz * obs[j];
    g[b1_ + i] += dz;
  }
}

std::vector<PolicyNet::LayerView> PolicyNet::layers() const {
  return {
      {"w1", w1_, static_cast<size_t>(h1_) * in_},
      {"b1", b1_, static_cast<size_t>(h1_)},
      {"w2", w2_, static_cast<size_t>(h2_) * h1_},
      {"b2", b2_, static_cast<size_t>(h2_)},
      {"policy_w", wp_, static_cast<size_t>(kNumActions) * h2_},
      {"policy_b", bp_, static_cast<size_t>(kNumActions)},
      {"value_w", wv_, static_cast<size_t>(h2_)},
      {"value_b", bv_, 1},
  };
}

}  // namespace crop
