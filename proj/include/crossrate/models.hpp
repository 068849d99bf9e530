#pragma once

// Top-K unigram baseline features and the multinomial logistic regression rater.

#include <array>
#include <cmath>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "crossrate/common.hpp"
#include "crossrate/corpus.hpp"
#include "crossrate/embeddings.hpp"
#include "crossrate/textproc.hpp"

namespace crossrate {

/// Top-K unigrams in rank order (count descending, then lexicographic).
struct UnigramVocab {
  std::vector<std::string> words;
  std::size_t k = 0;

  std::size_t size() const { return words.size(); }
};

/// Ranking hook for the baseline vocabulary: total occurrence counts over the training texts.
inline std::vector<std::pair<std::string, std::size_t>> unigram_counts(const ReviewSet& train) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& r : train)
    for (auto& w : embedding_words(r.text)) counts[std::move(w)]++;
  return {counts.begin(), counts.end()};
}

inline UnigramVocab select_top_k_unigrams(const ReviewSet& train, std::size_t k) {
  if (k < 1) throw UsageError("k must be at least 1");
  if (train.empty()) throw DataError("cannot select unigrams from an empty training set");
  auto ranked = unigram_counts(train);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
  UnigramVocab vocab;
  vocab.k = k;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) vocab.words.push_back(ranked[i].first);
  return vocab;
}

/// Per-review token counts of each vocabulary word.
inline FeatureVector bl_featurize(const std::vector<Token>& tokens, const UnigramVocab& vocab) {
  std::unordered_map<std::string_view, std::size_t> slot;
  for (std::size_t i = 0; i < vocab.words.size(); ++i) slot.emplace(vocab.words[i], i);
  FeatureVector fv{FeatureScheme::bl, std::vector<double>(vocab.words.size(), 0.0)};
  for (const auto& t : tokens)
    if (auto it = slot.find(t.norm); it != slot.end()) fv.values[it->second] += 1.0;
  return fv;
}

inline FeatureVector bl_featurize(const Review& review, const UnigramVocab& vocab) {
  return bl_featurize(tokenize(review.text), vocab);
}

struct MLRConfig {
  double learning_rate = 0.1;  // step t uses learning_rate / sqrt(t)
  double l2 = 1e-4;
  int epochs = 20;
  std::size_t batch_size = 256;
  std::uint64_t seed = 1;
  bool standardize = true;  // z-score features with training statistics before the linear layer
  unsigned threads = 1;     // gradient accumulation shards; reduction order is fixed

  void validate() const {
    if (!(learning_rate > 0.0)) throw UsageError("mlr learning_rate must be > 0");
    if (l2 < 0.0) throw UsageError("mlr l2 must be >= 0");
    if (epochs < 1) throw UsageError("mlr epochs must be >= 1");
    if (batch_size < 1) throw UsageError("mlr batch_size must be >= 1");
    if (threads < 1) throw UsageError("mlr threads must be >= 1");
  }
};

/// Parameters of a K-class linear softmax layer. weights is row-major K x F.
struct SoftmaxParams {
  std::size_t num_features = 0;
  std::vector<double> weights;
  std::array<double, kNumClasses> bias{};

  explicit SoftmaxParams(std::size_t f = 0) : num_features(f), weights(kNumClasses * f, 0.0) {}

  double& w(std::size_t cls, std::size_t j) { return weights[cls * num_features + j]; }
  double w(std::size_t cls, std::size_t j) const { return weights[cls * num_features + j]; }

  std::array<double, kNumClasses> scores(std::span<const double> x) const {
    std::array<double, kNumClasses> s = bias;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const double* row = weights.data() + c * num_features;
      double acc = 0.0;
      for (std::size_t j = 0; j < num_features; ++j) acc += row[j] * x[j];
      s[c] += acc;
    }
    return s;
  }
};

inline std::array<double, kNumClasses> softmax(const std::array<double, kNumClasses>& scores) {
  double m = *std::max_element(scores.begin(), scores.end());
  std::array<double, kNumClasses> p{};
  double z = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) z += (p[c] = std::exp(scores[c] - m));
  for (auto& v : p) v /= z;
  return p;
}

/// Index of the maximum; ties go to the lowest index (lowest star).
inline std::size_t argmax_lowest(const std::array<double, kNumClasses>& v) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNumClasses; ++c)
    if (v[c] > v[best]) best = c;
  return best;
}

inline std::size_t class_of(int stars) {
  if (stars < kMinStars || stars > kMaxStars) throw DataError("label outside 1..5: " + std::to_string(stars));
  return static_cast<std::size_t>(stars - kMinStars);
}

struct LossAndGradient {
  double loss = 0.0;
  SoftmaxParams grad;
};

/// Mean cross-entropy over rows[begin, end) of X plus (l2 / 2) * ||W||^2, and its gradient.
/// The bias is not regularized. X is row-major n x F.
inline LossAndGradient softmax_loss_and_gradient(const SoftmaxParams& params, std::span<const double> X,
                                                 std::span<const std::size_t> labels,
                                                 std::span<const std::size_t> rows, double l2) {
  const std::size_t F = params.num_features;
  LossAndGradient out{0.0, SoftmaxParams(F)};
  for (auto i : rows) {
    std::span<const double> x = X.subspan(i * F, F);
    auto p = softmax(params.scores(x));
    out.loss -= std::log(std::max(p[labels[i]], 1e-300));
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      double g = p[c] - (c == labels[i] ? 1.0 : 0.0);
      out.grad.bias[c] += g;
      double* row = out.grad.weights.data() + c * F;
      for (std::size_t j = 0; j < F; ++j) row[j] += g * x[j];
    }
  }
  const double inv = rows.empty() ? 0.0 : 1.0 / static_cast<double>(rows.size());
  out.loss *= inv;
  for (auto& g : out.grad.weights) g *= inv;
  for (auto& g : out.grad.bias) g *= inv;
  double sq = 0.0;
  for (std::size_t k = 0; k < params.weights.size(); ++k) {
    sq += params.weights[k] * params.weights[k];
    out.grad.weights[k] += l2 * params.weights[k];
  }
  out.loss += 0.5 * l2 * sq;
  return out;
}

class MLRModel {
public:
  MLRModel() = default;
  MLRModel(FeatureScheme scheme, SoftmaxParams params, std::vector<double> mean, std::vector<double> scale)
      : scheme_(scheme), params_(std::move(params)), mean_(std::move(mean)), scale_(std::move(scale)) {
    if (mean_.size() != params_.num_features || scale_.size() != params_.num_features)
      throw DataError("standardization vectors do not match feature dimension");
  }

  /// Model with all-zero weights and bias over F features.
  static MLRModel zeros(FeatureScheme scheme, std::size_t num_features) {
    return MLRModel(scheme, SoftmaxParams(num_features), std::vector<double>(num_features, 0.0),
                    std::vector<double>(num_features, 1.0));
  }

  FeatureScheme scheme() const { return scheme_; }
  std::size_t feature_dim() const { return params_.num_features; }
  const SoftmaxParams& params() const { return params_; }
  const std::vector<double>& feature_mean() const { return mean_; }
  const std::vector<double>& feature_scale() const { return scale_; }
  const MLRConfig& config() const { return config_; }
  const std::vector<double>& epoch_losses() const { return epoch_losses_; }

  /// Featurizer state saved alongside the weights: the unigram vocabulary for bl, or a path to
  /// the embedding file for the embedding schemes.
  const std::optional<UnigramVocab>& vocab() const { return vocab_; }
  void set_vocab(UnigramVocab v) { vocab_ = std::move(v); }
  const std::string& embedding_ref() const { return embedding_ref_; }
  void set_embedding_ref(std::string ref) { embedding_ref_ = std::move(ref); }

  std::array<double, kNumClasses> scores(std::span<const double> features) const {
    check_dim(features.size());
    std::vector<double> z(features.size());
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = (features[j] - mean_[j]) * scale_[j];
    return params_.scores(z);
  }

  std::array<double, kNumClasses> predict_proba(std::span<const double> features) const {
    return softmax(scores(features));
  }

  int predict(std::span<const double> features) const {
    return static_cast<int>(argmax_lowest(scores(features))) + kMinStars;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double w : params_.weights) s += w * w;
    return std::sqrt(s);
  }

  /// Versioned JSON container; doubles are written with round-trip precision.
  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "crossrate-mlr";
    j["version"] = 1;
    j["scheme"] = std::string(to_string(scheme_));
    j["feature_dim"] = params_.num_features;
    j["classes"] = {1, 2, 3, 4, 5};
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < kNumClasses; ++c)
      rows.push_back(std::vector<double>(params_.weights.begin() + static_cast<std::ptrdiff_t>(c * params_.num_features),
                                         params_.weights.begin() + static_cast<std::ptrdiff_t>((c + 1) * params_.num_features)));
    j["weights"] = rows;
    j["bias"] = params_.bias;
    j["feature_mean"] = mean_;
    j["feature_scale"] = scale_;
    j["train_config"] = {{"learning_rate", config_.learning_rate}, {"l2", config_.l2},
                         {"epochs", config_.epochs},               {"batch_size", config_.batch_size},
                         {"seed", config_.seed},                   {"standardize", config_.standardize}};
    if (vocab_) j["vocab"] = {{"k", vocab_->k}, {"words", vocab_->words}};
    if (!embedding_ref_.empty()) j["embeddings"] = embedding_ref_;
    return j;
  }

  static MLRModel from_json(const nlohmann::ordered_json& j) {
    try {
      if (j.at("format") != "crossrate-mlr") throw DataError("not an MLR model file");
      if (j.at("version") != 1) throw DataError("unsupported MLR model version");
      auto F = j.at("feature_dim").get<std::size_t>();
      SoftmaxParams p(F);
      const auto& rows = j.at("weights");
      if (rows.size() != kNumClasses) throw DataError("MLR model must have 5 weight rows");
      for (std::size_t c = 0; c < kNumClasses; ++c) {
        auto row = rows[c].get<std::vector<double>>();
        if (row.size() != F) throw DataError("MLR weight row has wrong length");
        std::copy(row.begin(), row.end(), p.weights.begin() + static_cast<std::ptrdiff_t>(c * F));
      }
      p.bias = j.at("bias").get<std::array<double, kNumClasses>>();
      MLRModel m(scheme_from_string(j.at("scheme").get<std::string>()), std::move(p),
                 j.at("feature_mean").get<std::vector<double>>(), j.at("feature_scale").get<std::vector<double>>());
      if (j.contains("train_config")) {
        const auto& tc = j["train_config"];
        m.config_.learning_rate = tc.value("learning_rate", m.config_.learning_rate);
        m.config_.l2 = tc.value("l2", m.config_.l2);
        m.config_.epochs = tc.value("epochs", m.config_.epochs);
        m.config_.batch_size = tc.value("batch_size", m.config_.batch_size);
        m.config_.seed = tc.value("seed", m.config_.seed);
        m.config_.standardize = tc.value("standardize", m.config_.standardize);
      }
      if (j.contains("vocab")) {
        UnigramVocab v;
        v.k = j["vocab"].at("k").get<std::size_t>();
        v.words = j["vocab"].at("words").get<std::vector<std::string>>();
        m.vocab_ = std::move(v);
      }
      if (j.contains("embeddings")) m.embedding_ref_ = j["embeddings"].get<std::string>();
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("malformed MLR model: ") + e.what());
    }
  }

private:
  friend MLRModel train_mlr(const std::vector<FeatureVector>&, const std::vector<int>&, const MLRConfig&);

  void check_dim(std::size_t f) const {
    if (f != params_.num_features)
      throw DataError("feature dimension " + std::to_string(f) + " does not match model dimension " +
                      std::to_string(params_.num_features));
  }

  FeatureScheme scheme_ = FeatureScheme::w2v;
  SoftmaxParams params_;
  std::vector<double> mean_;
  std::vector<double> scale_;
  MLRConfig config_;
  std::vector<double> epoch_losses_;
  std::optional<UnigramVocab> vocab_;
  std::string embedding_ref_;
};

/// Mini-batch SGD on L2-regularized multinomial cross-entropy.
inline MLRModel train_mlr(const std::vector<FeatureVector>& features, const std::vector<int>& labels,
                          const MLRConfig& cfg) {
  cfg.validate();
  if (features.empty()) throw DataError("cannot train on an empty feature set");
  if (features.size() != labels.size()) throw DataError("features and labels differ in length");
  const std::size_t n = features.size();
  const std::size_t F = features.front().dim();
  const FeatureScheme scheme = features.front().scheme;

  std::vector<std::size_t> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (features[i].dim() != F) throw DataError("feature dimension mismatch at row " + std::to_string(i));
    if (features[i].scheme != scheme) throw DataError("mixed feature schemes in training data");
    for (double v : features[i].values)
      if (!std::isfinite(v)) throw DataError("non-finite feature value at row " + std::to_string(i));
    y[i] = class_of(labels[i]);
  }

  std::vector<double> mean(F, 0.0), scale(F, 1.0);
  if (cfg.standardize) {
    for (const auto& fv : features)
      for (std::size_t j = 0; j < F; ++j) mean[j] += fv.values[j];
    for (auto& m : mean) m /= static_cast<double>(n);
    std::vector<double> var(F, 0.0);
    for (const auto& fv : features)
      for (std::size_t j = 0; j < F; ++j) var[j] += (fv.values[j] - mean[j]) * (fv.values[j] - mean[j]);
    for (std::size_t j = 0; j < F; ++j) {
      double sd = std::sqrt(var[j] / static_cast<double>(n));
      scale[j] = sd > 1e-12 ? 1.0 / sd : 1.0;
    }
  }
  std::vector<double> X(n * F);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < F; ++j) X[i * F + j] = (features[i].values[j] - mean[j]) * scale[j];

  SoftmaxParams params(F);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed);
  std::vector<double> epoch_losses;
  std::uint64_t step = 0;

  auto batch_gradient = [&](std::span<const std::size_t> rows) {
    if (cfg.threads <= 1 || rows.size() < 2 * cfg.threads) return softmax_loss_and_gradient(params, X, y, rows, cfg.l2);
    // fixed sharding and in-order reduction keep the result independent of scheduling
    const std::size_t shards = cfg.threads;
    std::vector<LossAndGradient> parts(shards);
    std::vector<std::thread> workers;
    const std::size_t chunk = (rows.size() + shards - 1) / shards;
    for (std::size_t s = 0; s < shards; ++s) {
      auto sub = rows.subspan(std::min(rows.size(), s * chunk),
                              std::min(rows.size(), (s + 1) * chunk) - std::min(rows.size(), s * chunk));
      workers.emplace_back([&, sub, s] { parts[s] = softmax_loss_and_gradient(params, X, y, sub, 0.0); });
    }
    for (auto& w : workers) w.join();
    LossAndGradient total{0.0, SoftmaxParams(F)};
    for (std::size_t s = 0; s < shards; ++s) {
      std::size_t len = std::min(rows.size(), (s + 1) * chunk) - std::min(rows.size(), s * chunk);
      double weight = static_cast<double>(len) / static_cast<double>(rows.size());
      total.loss += weight * parts[s].loss;
      for (std::size_t k = 0; k < total.grad.weights.size(); ++k) total.grad.weights[k] += weight * parts[s].grad.weights[k];
      for (std::size_t c = 0; c < kNumClasses; ++c) total.grad.bias[c] += weight * parts[s].grad.bias[c];
    }
    for (std::size_t k = 0; k < params.weights.size(); ++k) total.grad.weights[k] += cfg.l2 * params.weights[k];
    return total;
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      std::span<const std::size_t> rows(order.data() + start, std::min(cfg.batch_size, n - start));
      auto lg = batch_gradient(rows);
      ++step;
      const double lr = cfg.learning_rate / std::sqrt(static_cast<double>(step));
      for (std::size_t k = 0; k < params.weights.size(); ++k) params.weights[k] -= lr * lg.grad.weights[k];
      for (std::size_t c = 0; c < kNumClasses; ++c) params.bias[c] -= lr * lg.grad.bias[c];
    }
    epoch_losses.push_back(softmax_loss_and_gradient(params, X, y, order, cfg.l2).loss);
  }

  MLRModel model(scheme, std::move(params), std::move(mean), std::move(scale));
  model.config_ = cfg;
  model.epoch_losses_ = std::move(epoch_losses);
  return model;
}

inline int predict(const MLRModel& model, const FeatureVector& features) { return model.predict(features.values); }

inline std::array<double, kNumClasses> predict_proba(const MLRModel& model, const FeatureVector& features) {
  return model.predict_proba(features.values);
}

}  // namespace crossrate
