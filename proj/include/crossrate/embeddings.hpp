#pragma once

// Skip-gram word embeddings trained with negative sampling, and the review-level
// representations built on top of them:
//   w2v       mean of the token vectors of the whole review          (D)
//   w2v_ape   [w2v ; sum of vectors of every word of every phrase]    (2D)
//   w2v_pape  [w2v ; sum over positive phrases ; sum over negative]   (3D)

#include <atomic>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "crossrate/aspects.hpp"
#include "crossrate/common.hpp"
#include "crossrate/corpus.hpp"
#include "crossrate/textproc.hpp"

namespace crossrate {

struct Word2VecConfig {
  int dim = 100;
  int window = 5;
  int negatives = 5;
  int min_count = 5;
  int epochs = 5;
  double learning_rate = 0.025;  // decays linearly to 1e-4 of its initial value
  double subsample = 0.0;        // 0 disables; 1e-3 is the usual threshold
  std::uint64_t seed = 1;
  unsigned threads = 1;          // > 1 trains lock-free and is not bit-reproducible

  void validate() const {
    if (dim < 1) throw UsageError("embedding dim must be >= 1");
    if (window < 1) throw UsageError("embedding window must be >= 1");
    if (negatives < 1) throw UsageError("embedding negatives must be >= 1");
    if (min_count < 1) throw UsageError("embedding min_count must be >= 1");
    if (epochs < 1) throw UsageError("embedding epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw UsageError("embedding learning_rate must be > 0");
    if (subsample < 0.0) throw UsageError("embedding subsample must be >= 0");
    if (threads < 1) throw UsageError("embedding threads must be >= 1");
  }
};

class EmbeddingModel {
public:
  EmbeddingModel() = default;

  EmbeddingModel(int dim, std::vector<std::string> words, std::vector<float> vectors)
      : dim_(dim), words_(std::move(words)), vectors_(std::move(vectors)) {
    if (dim_ < 1) throw DataError("embedding dimension must be >= 1");
    if (vectors_.size() != words_.size() * static_cast<std::size_t>(dim_))
      throw DataError("embedding matrix size does not match vocabulary");
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (!index_.emplace(words_[i], i).second) throw DataError("duplicate embedding word: " + words_[i]);
  }

  int dim() const { return dim_; }
  std::size_t vocab_size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  bool contains(std::string_view word) const { return index_.contains(util::to_lower(word)); }

  /// The trained row for a word (case-normalized), or nullopt for out-of-vocabulary words.
  std::optional<std::span<const float>> vector(std::string_view word) const {
    auto it = index_.find(util::to_lower(word));
    if (it == index_.end()) return std::nullopt;
    return row(it->second);
  }

  std::span<const float> row(std::size_t i) const {
    return {vectors_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }

  const Word2VecConfig& config() const { return config_; }
  /// Mean skip-gram loss per (center, context) pair, one entry per epoch.
  const std::vector<double>& epoch_losses() const { return epoch_losses_; }

  /// Text format: "<vocab size> <dim>" then one "word v1 ... vD" line per word.
  void save(std::ostream& out) const {
    out << words_.size() << ' ' << dim_ << '\n';
    char buf[64];
    for (std::size_t i = 0; i < words_.size(); ++i) {
      out << words_[i];
      for (float v : row(i)) {
        auto res = std::to_chars(buf, buf + sizeof buf, v);
        out << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
      }
      out << '\n';
    }
  }

  static EmbeddingModel load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("embedding file is empty");
    std::istringstream header(line);
    std::size_t n = 0;
    int dim = 0;
    if (!(header >> n >> dim) || dim < 1) throw DataError("bad embedding header: " + line);
    std::vector<std::string> words;
    std::vector<float> vectors;
    words.reserve(n);
    vectors.reserve(n * static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::getline(in, line)) throw DataError("embedding file truncated at row " + std::to_string(i + 1));
      auto parts = util::split(util::trim(line), ' ');
      if (parts.size() != static_cast<std::size_t>(dim) + 1)
        throw DataError("embedding row " + std::to_string(i + 1) + " has wrong number of values");
      words.push_back(parts[0]);
      for (std::size_t k = 1; k < parts.size(); ++k) {
        float v = 0.0f;
        auto res = std::from_chars(parts[k].data(), parts[k].data() + parts[k].size(), v);
        if (res.ec != std::errc() || res.ptr != parts[k].data() + parts[k].size() || !std::isfinite(v))
          throw DataError("bad embedding value in row " + std::to_string(i + 1));
        vectors.push_back(v);
      }
    }
    return EmbeddingModel(dim, std::move(words), std::move(vectors));
  }

  static EmbeddingModel load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read embeddings: " + path);
    return load(in);
  }

private:
  friend class Word2VecTrainer;

  int dim_ = 0;
  std::vector<std::string> words_;
  std::vector<float> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
  Word2VecConfig config_;
  std::vector<double> epoch_losses_;
};

/// Token norms of a text with punctuation-only tokens removed: the unit embeddings are trained on.
inline std::vector<std::string> embedding_words(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens)
    if (!is_all_punct(t.surface)) out.push_back(t.norm);
  return out;
}

inline std::vector<std::string> embedding_words(std::string_view text) { return embedding_words(tokenize(text)); }

class Word2VecTrainer {
public:
  using Sentence = std::vector<std::string>;

  static EmbeddingModel train(const std::vector<Sentence>& sentences, const Word2VecConfig& cfg) {
    cfg.validate();
    if (sentences.empty()) throw DataError("embedding corpus is empty");

    // vocabulary: frequency >= min_count, ordered by count desc then word
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& s : sentences)
      for (const auto& w : s) counts[w]++;
    std::vector<std::pair<std::string, std::uint64_t>> vocab;
    for (auto& [w, n] : counts)
      if (n >= static_cast<std::uint64_t>(cfg.min_count)) vocab.emplace_back(w, n);
    if (vocab.empty()) throw DataError("empty effective vocabulary: no word reaches min_count");
    std::sort(vocab.begin(), vocab.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });

    const auto dim = static_cast<std::size_t>(cfg.dim);
    const std::size_t V = vocab.size();
    std::vector<std::string> words;
    std::unordered_map<std::string, std::uint32_t> ids;
    std::vector<std::uint64_t> freq;
    for (const auto& [w, n] : vocab) {
      ids.emplace(w, static_cast<std::uint32_t>(words.size()));
      words.push_back(w);
      freq.push_back(n);
    }

    std::vector<std::vector<std::uint32_t>> corpus;
    corpus.reserve(sentences.size());
    std::uint64_t train_words = 0;
    for (const auto& s : sentences) {
      std::vector<std::uint32_t> ids_s;
      for (const auto& w : s)
        if (auto it = ids.find(w); it != ids.end()) ids_s.push_back(it->second);
      train_words += ids_s.size();
      corpus.push_back(std::move(ids_s));
    }

    State st;
    st.cfg = cfg;
    st.dim = dim;
    st.input.resize(V * dim);
    st.output.assign(V * dim, 0.0f);
    std::mt19937_64 init_rng(util::derive_seed(cfg.seed, "w2v-init"));
    std::uniform_real_distribution<float> init(-0.5f / static_cast<float>(dim), 0.5f / static_cast<float>(dim));
    for (auto& v : st.input) v = init(init_rng);
    st.neg_table = unigram_table(freq);
    st.keep_prob = keep_probabilities(freq, train_words, cfg.subsample);
    st.total_words = static_cast<std::uint64_t>(cfg.epochs) * train_words;

    std::vector<double> epoch_losses;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      double loss = 0.0;
      std::uint64_t pairs = 0;
      if (cfg.threads <= 1) {
        Shard shard{0, corpus.size(), util::derive_seed(cfg.seed, "w2v-epoch", static_cast<std::uint64_t>(epoch))};
        run_shard<PlainAccess>(st, corpus, shard, st.processed, loss, pairs);
      } else {
        run_parallel(st, corpus, epoch, loss, pairs);
      }
      epoch_losses.push_back(pairs > 0 ? loss / static_cast<double>(pairs) : 0.0);
    }

    EmbeddingModel model(cfg.dim, std::move(words), std::move(st.input));
    model.config_ = cfg;
    model.epoch_losses_ = std::move(epoch_losses);
    return model;
  }

private:
  struct State {
    Word2VecConfig cfg;
    std::size_t dim = 0;
    std::vector<float> input;
    std::vector<float> output;
    std::vector<std::uint32_t> neg_table;
    std::vector<double> keep_prob;
    std::uint64_t total_words = 0;
    std::uint64_t processed = 0;
  };

  struct Shard {
    std::size_t begin;
    std::size_t end;
    std::uint64_t seed;
  };

  struct PlainAccess {
    static float load(const float& x) { return x; }
    static void store(float& x, float v) { x = v; }
  };

  // Lock-free shared updates: concurrent writers may overwrite each other, which only adds noise.
  struct RelaxedAccess {
    static float load(const float& x) { return std::atomic_ref<const float>(x).load(std::memory_order_relaxed); }
    static void store(float& x, float v) { std::atomic_ref<float>(x).store(v, std::memory_order_relaxed); }
  };

  static std::vector<std::uint32_t> unigram_table(const std::vector<std::uint64_t>& freq) {
    const std::size_t size = std::max<std::size_t>(1000, std::min<std::size_t>(10'000'000, freq.size() * 1000));
    double norm = 0.0;
    for (auto f : freq) norm += std::pow(static_cast<double>(f), 0.75);
    std::vector<std::uint32_t> table(size);
    std::size_t w = 0;
    double cum = std::pow(static_cast<double>(freq[0]), 0.75) / norm;
    for (std::size_t a = 0; a < size; ++a) {
      table[a] = static_cast<std::uint32_t>(w);
      if (static_cast<double>(a + 1) / static_cast<double>(size) > cum && w + 1 < freq.size()) {
        ++w;
        cum += std::pow(static_cast<double>(freq[w]), 0.75) / norm;
      }
    }
    return table;
  }

  static std::vector<double> keep_probabilities(const std::vector<std::uint64_t>& freq, std::uint64_t total,
                                                double threshold) {
    std::vector<double> keep(freq.size(), 1.0);
    if (threshold <= 0.0 || total == 0) return keep;
    for (std::size_t i = 0; i < freq.size(); ++i) {
      double f = static_cast<double>(freq[i]) / static_cast<double>(total);
      keep[i] = std::min(1.0, (std::sqrt(f / threshold) + 1.0) * threshold / f);
    }
    return keep;
  }

  static double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

  template <class Access>
  static void run_shard(State& st, const std::vector<std::vector<std::uint32_t>>& corpus, const Shard& shard,
                        std::uint64_t& processed, double& loss, std::uint64_t& pairs) {
    const auto& cfg = st.cfg;
    const std::size_t dim = st.dim;
    std::mt19937_64 rng(shard.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<float> grad(dim);
    std::vector<std::uint32_t> sent;

    for (std::size_t si = shard.begin; si < shard.end; ++si) {
      const auto& raw = corpus[si];
      sent.clear();
      for (auto w : raw)
        if (cfg.subsample <= 0.0 || unit(rng) < st.keep_prob[w]) sent.push_back(w);
      processed += raw.size();
      double progress = static_cast<double>(processed) / static_cast<double>(st.total_words + 1);
      const double lr = cfg.learning_rate * std::max(1e-4, 1.0 - progress);

      for (std::size_t pos = 0; pos < sent.size(); ++pos) {
        const auto center = sent[pos];
        const auto shrink = static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(cfg.window));
        const std::size_t span = static_cast<std::size_t>(cfg.window) - shrink;
        const std::size_t lo = pos >= span ? pos - span : 0;
        const std::size_t hi = std::min(sent.size() - 1, pos + span);
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          float* in = st.input.data() + static_cast<std::size_t>(sent[c]) * dim;
          std::fill(grad.begin(), grad.end(), 0.0f);
          for (int d = 0; d <= cfg.negatives; ++d) {
            std::uint32_t target;
            double label;
            if (d == 0) {
              target = center;
              label = 1.0;
            } else {
              target = st.neg_table[rng() % st.neg_table.size()];
              if (target == center) continue;
              label = 0.0;
            }
            float* out = st.output.data() + static_cast<std::size_t>(target) * dim;
            double f = 0.0;
            for (std::size_t k = 0; k < dim; ++k) f += static_cast<double>(Access::load(in[k])) * Access::load(out[k]);
            loss -= label > 0.5 ? log_sigmoid(f) : log_sigmoid(-f);
            double sig = 1.0 / (1.0 + std::exp(-f));
            auto g = static_cast<float>((label - sig) * lr);
            for (std::size_t k = 0; k < dim; ++k) {
              grad[k] += g * Access::load(out[k]);
              Access::store(out[k], Access::load(out[k]) + g * Access::load(in[k]));
            }
          }
          for (std::size_t k = 0; k < dim; ++k) Access::store(in[k], Access::load(in[k]) + grad[k]);
          ++pairs;
        }
      }
    }
  }

  static void run_parallel(State& st, const std::vector<std::vector<std::uint32_t>>& corpus, int epoch, double& loss,
                           std::uint64_t& pairs) {
    const unsigned n = st.cfg.threads;
    std::vector<double> losses(n, 0.0);
    std::vector<std::uint64_t> pair_counts(n, 0), processed(n, 0);
    std::vector<std::thread> workers;
    const std::size_t chunk = (corpus.size() + n - 1) / n;
    const std::uint64_t base = st.processed;
    for (unsigned t = 0; t < n; ++t) {
      Shard shard{std::min(corpus.size(), t * chunk), std::min(corpus.size(), (t + 1) * chunk),
                  util::derive_seed(st.cfg.seed, "w2v-epoch", static_cast<std::uint64_t>(epoch) * 1024 + t)};
      // each worker estimates global progress from its own share
      processed[t] = base;
      workers.emplace_back([&, shard, t] {
        run_shard<RelaxedAccess>(st, corpus, shard, processed[t], losses[t], pair_counts[t]);
      });
    }
    for (auto& w : workers) w.join();
    for (unsigned t = 0; t < n; ++t) {
      loss += losses[t];
      pairs += pair_counts[t];
      st.processed += processed[t] - base;
    }
  }
};

inline EmbeddingModel train_word2vec(const std::vector<std::vector<std::string>>& sentences,
                                     const Word2VecConfig& cfg) {
  return Word2VecTrainer::train(sentences, cfg);
}

inline EmbeddingModel train_word2vec(const ReviewSet& corpus, const Word2VecConfig& cfg) {
  if (corpus.empty()) throw DataError("embedding corpus is empty");
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(corpus.size());
  for (const auto& r : corpus) sentences.push_back(embedding_words(r.text));
  return train_word2vec(sentences, cfg);
}

inline std::optional<std::span<const float>> vector(const EmbeddingModel& model, std::string_view word) {
  return model.vector(word);
}

inline double cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  return (na == 0.0 || nb == 0.0) ? 0.0 : dot / std::sqrt(na * nb);
}

/// Mean of the vectors of in-vocabulary tokens; the zero vector when none is in vocabulary.
inline std::vector<double> review_text_embedding(const EmbeddingModel& model, const std::vector<Token>& tokens) {
  std::vector<double> out(static_cast<std::size_t>(model.dim()), 0.0);
  std::size_t n = 0;
  for (const auto& t : tokens) {
    auto v = model.vector(t.norm);
    if (!v) continue;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += (*v)[k];
    ++n;
  }
  if (n > 0)
    for (auto& x : out) x /= static_cast<double>(n);
  return out;
}

inline std::vector<double> review_text_embedding(const EmbeddingModel& model, const Review& review) {
  return review_text_embedding(model, tokenize(review.text));
}

namespace detail {

inline void add_word(const EmbeddingModel& model, const std::string& word, std::span<double> acc) {
  if (auto v = model.vector(word))
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += (*v)[k];
}

}  // namespace detail

/// Sum of the vectors of both words of every phrase (OOV words contribute nothing).
inline std::vector<double> ape_vector(const EmbeddingModel& model, const std::vector<AspectPhrase>& phrases) {
  std::vector<double> out(static_cast<std::size_t>(model.dim()), 0.0);
  for (const auto& p : phrases) {
    detail::add_word(model, p.sentiment_word, out);
    detail::add_word(model, p.target_word, out);
  }
  return out;
}

/// [sum over positive phrases ; sum over negative phrases], 2D long.
inline std::vector<double> pape_vector(const EmbeddingModel& model, const std::vector<AspectPhrase>& phrases) {
  const auto dim = static_cast<std::size_t>(model.dim());
  std::vector<double> out(2 * dim, 0.0);
  std::span<double> pos(out.data(), dim), neg(out.data() + dim, dim);
  for (const auto& p : phrases) {
    auto half = p.polarity == Polarity::negative ? neg : pos;
    if (p.polarity == Polarity::none) continue;
    detail::add_word(model, p.sentiment_word, half);
    detail::add_word(model, p.target_word, half);
  }
  return out;
}

enum class FeatureScheme { bl, w2v, w2v_ape, w2v_pape };

inline std::string_view to_string(FeatureScheme s) {
  switch (s) {
    case FeatureScheme::bl: return "bl";
    case FeatureScheme::w2v: return "w2v";
    case FeatureScheme::w2v_ape: return "w2v_ape";
    case FeatureScheme::w2v_pape: return "w2v_pape";
  }
  return "bl";
}

inline FeatureScheme scheme_from_string(std::string_view s) {
  for (auto f : {FeatureScheme::bl, FeatureScheme::w2v, FeatureScheme::w2v_ape, FeatureScheme::w2v_pape})
    if (to_string(f) == s) return f;
  if (s == "ape") return FeatureScheme::w2v_ape;
  if (s == "pape") return FeatureScheme::w2v_pape;
  throw UsageError("unknown feature scheme: " + std::string(s));
}

/// Multiple of the embedding dimension produced by an embedding scheme.
inline std::size_t scheme_width(FeatureScheme s) {
  switch (s) {
    case FeatureScheme::w2v: return 1;
    case FeatureScheme::w2v_ape: return 2;
    case FeatureScheme::w2v_pape: return 3;
    case FeatureScheme::bl: break;
  }
  throw UsageError("bl features are not built from embeddings");
}

struct FeatureVector {
  FeatureScheme scheme = FeatureScheme::w2v;
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
};

inline FeatureVector featurize(const EmbeddingModel& model, const std::vector<Token>& tokens,
                               const std::vector<AspectPhrase>& phrases, FeatureScheme scheme) {
  FeatureVector fv{scheme, review_text_embedding(model, tokens)};
  fv.values.reserve(static_cast<std::size_t>(model.dim()) * scheme_width(scheme));
  if (scheme == FeatureScheme::w2v_ape) {
    auto ape = ape_vector(model, phrases);
    fv.values.insert(fv.values.end(), ape.begin(), ape.end());
  } else if (scheme == FeatureScheme::w2v_pape) {
    auto pape = pape_vector(model, phrases);
    fv.values.insert(fv.values.end(), pape.begin(), pape.end());
  }
  return fv;
}

inline FeatureVector featurize(const EmbeddingModel& model, const Review& review,
                               const std::vector<AspectPhrase>& phrases, FeatureScheme scheme) {
  return featurize(model, tokenize(review.text), phrases, scheme);
}

}  // namespace crossrate
