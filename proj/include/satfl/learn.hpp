#pragma once

// Multinomial logistic regression trained with mini-batch SGD, plus the
// FedAvg pieces: local gradient, global update and evaluation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "satfl/errors.hpp"
#include "satfl/sparse.hpp"

namespace satfl {

// Row-major samples with features in [0, 1].
struct Dataset {
  std::size_t feature_dim = 784;
  std::size_t num_classes = 10;
  std::vector<float> features;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::span<const float> sample(std::size_t i) const {
    return {features.data() + i * feature_dim, feature_dim};
  }
  void push_back(std::span<const float> x, std::uint8_t label) {
    if (x.size() != feature_dim) throw ContractViolation("Dataset: feature length mismatch");
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(label);
  }
  void validate() const {
    if (features.size() != labels.size() * feature_dim)
      throw ContractViolation("Dataset: feature/label counts disagree");
  }
};

// Weight layout: class c owns the contiguous block [c*(F+1), (c+1)*(F+1)),
// the last entry of each block is the bias (constant feature 1).
struct ModelShape {
  std::size_t feature_dim = 784;
  std::size_t num_classes = 10;

  std::size_t row() const { return feature_dim + 1; }
  std::size_t num_params() const { return num_classes * row(); }

  static ModelShape of(const Dataset& d) { return {d.feature_dim, d.num_classes}; }
};

struct HyperParams {
  double learning_rate = 0.1;
  int local_epochs = 1;
  std::size_t batch_size = 32;
  int rounds = 500;
  std::uint64_t seed = 1;
};

namespace detail {

inline void require_shape(const DenseVector& w, const ModelShape& s) {
  if (w.dim() != s.num_params()) throw ContractViolation("model: weight dimension mismatch");
}

// Softmax probabilities written into `probs`, computed from the nonzero
// features only.
inline void predict_proba(const DenseVector& w, const ModelShape& s, std::span<const float> x,
                          std::span<const std::uint32_t> nz, std::span<double> probs) {
  const std::size_t row = s.row();
  double max_logit = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < s.num_classes; ++c) {
    const double* wc = w.values.data() + c * row;
    double z = wc[s.feature_dim];
    for (auto j : nz) z += wc[j] * static_cast<double>(x[j]);
    probs[c] = z;
    max_logit = std::max(max_logit, z);
  }
  double total = 0.0;
  for (std::size_t c = 0; c < s.num_classes; ++c) {
    probs[c] = std::exp(probs[c] - max_logit);
    total += probs[c];
  }
  for (std::size_t c = 0; c < s.num_classes; ++c) probs[c] /= total;
}

inline void nonzeros(std::span<const float> x, std::vector<std::uint32_t>& out) {
  out.clear();
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x[j] != 0.0f) out.push_back(static_cast<std::uint32_t>(j));
}

}  // namespace detail

inline std::vector<double> predict_proba(const DenseVector& w, const ModelShape& s,
                                         std::span<const float> x) {
  detail::require_shape(w, s);
  if (x.size() != s.feature_dim) throw ContractViolation("predict_proba: feature length mismatch");
  std::vector<std::uint32_t> nz;
  detail::nonzeros(x, nz);
  std::vector<double> p(s.num_classes);
  detail::predict_proba(w, s, x, nz, p);
  return p;
}

// Cross-entropy -log softmax(Wx + b)[label], evaluated with log-sum-exp.
inline double per_sample_loss(const DenseVector& w, const ModelShape& s, std::span<const float> x,
                              std::size_t label) {
  detail::require_shape(w, s);
  if (x.size() != s.feature_dim) throw ContractViolation("per_sample_loss: feature length mismatch");
  if (label >= s.num_classes) throw IndexError("per_sample_loss: label out of range");
  std::vector<double> z(s.num_classes);
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < s.num_classes; ++c) {
    const double* wc = w.values.data() + c * s.row();
    double acc = wc[s.feature_dim];
    for (std::size_t j = 0; j < s.feature_dim; ++j) acc += wc[j] * static_cast<double>(x[j]);
    z[c] = acc;
    m = std::max(m, acc);
  }
  double total = 0.0;
  for (double v : z) total += std::exp(v - m);
  return m + std::log(total) - z[label];
}

// Adds d f(w, x) / d w, scaled by `scale`, into grad.
inline void accumulate_gradient(const DenseVector& w, const ModelShape& s, std::span<const float> x,
                                std::size_t label, double scale, DenseVector& grad) {
  detail::require_shape(w, s);
  detail::require_shape(grad, s);
  std::vector<std::uint32_t> nz;
  detail::nonzeros(x, nz);
  std::vector<double> p(s.num_classes);
  detail::predict_proba(w, s, x, nz, p);
  for (std::size_t c = 0; c < s.num_classes; ++c) {
    const double coef = scale * (p[c] - (c == label ? 1.0 : 0.0));
    double* gc = grad.values.data() + c * s.row();
    for (auto j : nz) gc[j] += coef * static_cast<double>(x[j]);
    gc[s.feature_dim] += coef;
  }
}

inline DenseVector per_sample_gradient(const DenseVector& w, const ModelShape& s,
                                       std::span<const float> x, std::size_t label) {
  DenseVector g(s.num_params());
  accumulate_gradient(w, s, x, label, 1.0, g);
  return g;
}

inline double local_loss(const DenseVector& w, const Dataset& d) {
  if (d.empty()) throw DomainError("local_loss: empty dataset");
  const auto s = ModelShape::of(d);
  double total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) total += per_sample_loss(w, s, d.sample(i), d.labels[i]);
  return total / static_cast<double>(d.size());
}

inline DenseVector local_loss_gradient(const DenseVector& w, const Dataset& d) {
  if (d.empty()) throw DomainError("local_loss_gradient: empty dataset");
  const auto s = ModelShape::of(d);
  DenseVector g(s.num_params());
  const double scale = 1.0 / static_cast<double>(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) accumulate_gradient(w, s, d.sample(i), d.labels[i], scale, g);
  return g;
}

// I epochs of shuffled mini-batch SGD starting from w_global. Each batch
// step is w -= (eta / |batch|) * sum of per-sample gradients.
inline DenseVector sat_learn_proc(const DenseVector& w_global, const Dataset& d,
                                  const HyperParams& hp, std::mt19937_64& rng) {
  if (d.empty()) throw DomainError("sat_learn_proc: empty dataset");
  if (hp.batch_size == 0) throw DomainError("sat_learn_proc: batch size must be positive");
  const auto s = ModelShape::of(d);
  detail::require_shape(w_global, s);

  DenseVector w = w_global;
  DenseVector grad(s.num_params());
  std::vector<std::size_t> order(d.size());
  std::vector<std::uint32_t> nz;
  std::vector<double> p(s.num_classes);
  for (int epoch = 0; epoch < hp.local_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
      const std::size_t end = std::min(order.size(), start + hp.batch_size);
      std::fill(grad.values.begin(), grad.values.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const auto x = d.sample(order[b]);
        const std::size_t label = d.labels[order[b]];
        detail::nonzeros(x, nz);
        detail::predict_proba(w, s, x, nz, p);
        for (std::size_t c = 0; c < s.num_classes; ++c) {
          const double coef = p[c] - (c == label ? 1.0 : 0.0);
          double* gc = grad.values.data() + c * s.row();
          for (auto j : nz) gc[j] += coef * static_cast<double>(x[j]);
          gc[s.feature_dim] += coef;
        }
      }
      const double step = hp.learning_rate / static_cast<double>(end - start);
      for (std::size_t i = 0; i < w.dim(); ++i) w[i] -= step * grad[i];
    }
  }
  return w;
}

inline DenseVector gradient(const DenseVector& w_local, const DenseVector& w_global) {
  if (w_local.dim() != w_global.dim()) throw ContractViolation("gradient: dimension mismatch");
  return w_local - w_global;
}

// w + aggregate / total_D, where aggregate = sum_k D_k g_k.
inline DenseVector global_update(const DenseVector& w, const DenseVector& aggregate, double total_D) {
  if (!(total_D > 0.0)) throw DomainError("global_update: total data size must be positive");
  if (w.dim() != aggregate.dim()) throw ContractViolation("global_update: dimension mismatch");
  DenseVector out = w;
  for (std::size_t i = 0; i < out.dim(); ++i) out[i] += aggregate[i] / total_D;
  return out;
}

inline std::size_t predict(const DenseVector& w, const ModelShape& s, std::span<const float> x,
                           std::vector<std::uint32_t>& nz) {
  detail::nonzeros(x, nz);
  const std::size_t row = s.row();
  std::size_t best = 0;
  double best_z = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < s.num_classes; ++c) {
    const double* wc = w.values.data() + c * row;
    double z = wc[s.feature_dim];
    for (auto j : nz) z += wc[j] * static_cast<double>(x[j]);
    if (z > best_z) {  // strict: ties keep the lowest class
      best_z = z;
      best = c;
    }
  }
  return best;
}

inline double evaluate(const DenseVector& w, const Dataset& test) {
  if (test.empty()) throw DomainError("evaluate: empty test set");
  const auto s = ModelShape::of(test);
  detail::require_shape(w, s);
  std::vector<std::uint32_t> nz;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i)
    if (predict(w, s, test.sample(i), nz) == test.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

// Random even split into K disjoint shards (sizes differ by at most one).
inline std::vector<Dataset> partition(const Dataset& d, std::size_t K, std::uint64_t seed) {
  if (K == 0) throw DomainError("partition: K must be at least 1");
  if (K > d.size()) throw DomainError("partition: more shards than samples");
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Dataset> shards(K);
  const std::size_t base = d.size() / K, extra = d.size() % K;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < K; ++k) {
    auto& shard = shards[k];
    shard.feature_dim = d.feature_dim;
    shard.num_classes = d.num_classes;
    const std::size_t n = base + (k < extra ? 1 : 0);
    shard.features.reserve(n * d.feature_dim);
    shard.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i, ++pos) shard.push_back(d.sample(order[pos]), d.labels[order[pos]]);
  }
  return shards;
}

}  // namespace satfl
