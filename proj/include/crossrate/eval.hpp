#pragma once

// Fold planning, in-domain / cross-domain training sets, MAE / RMSE, and experiment
// orchestration.
//
// For test domain i and fold j:
//   in-domain    train = folds (i, f) for every f != j
//   cross-domain train = fold (d, j) for every domain d != i   (one fold per other domain)
// Per-domain scores are the unweighted mean of the k fold scores.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "crossrate/aspects.hpp"
#include "crossrate/corpus.hpp"
#include "crossrate/embeddings.hpp"
#include "crossrate/lexicon.hpp"
#include "crossrate/models.hpp"
#include "crossrate/synth.hpp"
#include "crossrate/tagger.hpp"

namespace crossrate {

// ---------------------------------------------------------------------------------------------
// Metrics

namespace detail {
inline void check_metric_input(std::span<const int> preds, std::span<const int> truths) {
  if (preds.size() != truths.size()) throw DataError("predictions and truths differ in length");
  if (preds.empty()) throw DataError("cannot score an empty prediction list");
}
}  // namespace detail

/// Mean absolute error.
inline double mae(std::span<const int> preds, std::span<const int> truths) {
  detail::check_metric_input(preds, truths);
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) sum += std::abs(preds[i] - truths[i]);
  return sum / static_cast<double>(preds.size());
}

/// Root mean square error.
inline double rmse(std::span<const int> preds, std::span<const int> truths) {
  detail::check_metric_input(preds, truths);
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    double e = preds[i] - truths[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(preds.size()));
}

// ---------------------------------------------------------------------------------------------
// Fold plans

class FoldPlan {
public:
  struct Cell {
    std::size_t domain = 0;
    std::size_t fold = 0;
  };

  FoldPlan() = default;

  std::size_t k() const { return k_; }
  std::uint64_t seed() const { return seed_; }
  bool stratified() const { return stratified_; }
  /// Domain names in index order (lexicographic).
  const std::vector<std::string>& domains() const { return domains_; }
  std::size_t domain_index(const std::string& name) const {
    for (std::size_t d = 0; d < domains_.size(); ++d)
      if (domains_[d] == name) return d;
    throw UsageError("domain not in fold plan: " + name);
  }
  /// Review ids of fold f (0-based) of domain d, in dealing order.
  const std::vector<std::string>& fold(std::size_t d, std::size_t f) const {
    check(d, f);
    return folds_[d][f];
  }
  const std::unordered_map<std::string, Cell>& assignment() const { return assignment_; }
  std::size_t size() const { return assignment_.size(); }

  void check(std::size_t d, std::size_t f) const {
    if (d >= domains_.size()) throw UsageError("domain index out of range: " + std::to_string(d));
    if (f >= k_) throw UsageError("fold index out of range: " + std::to_string(f));
  }

private:
  friend FoldPlan make_fold_plan(const ReviewSet&, std::size_t, std::uint64_t, bool);

  std::size_t k_ = 0;
  std::uint64_t seed_ = 0;
  bool stratified_ = false;
  std::vector<std::string> domains_;
  std::vector<std::vector<std::vector<std::string>>> folds_;
  std::unordered_map<std::string, Cell> assignment_;
};

/// Seeded per-domain permutation dealt round-robin into k folds. With `stratified`, the
/// permuted reviews are stably ordered by stars before dealing.
inline FoldPlan make_fold_plan(const ReviewSet& set, std::size_t k = 10, std::uint64_t seed = 1,
                               bool stratified = false) {
  if (k < 2) throw UsageError("number of folds must be at least 2");
  FoldPlan plan;
  plan.k_ = k;
  plan.seed_ = seed;
  plan.stratified_ = stratified;
  plan.domains_.assign(set.domains().begin(), set.domains().end());

  std::map<std::string, std::vector<const Review*>> by_domain;
  for (const auto& r : set) by_domain[r.domain].push_back(&r);
  for (std::size_t d = 0; d < plan.domains_.size(); ++d) {
    auto& members = by_domain[plan.domains_[d]];
    if (members.size() < k)
      throw DataError("domain \"" + plan.domains_[d] + "\" has " + std::to_string(members.size()) +
                      " reviews, fewer than k=" + std::to_string(k));
    std::mt19937_64 rng(util::derive_seed(seed, "folds:" + plan.domains_[d]));
    std::shuffle(members.begin(), members.end(), rng);
    if (stratified)
      std::stable_sort(members.begin(), members.end(), [](const Review* a, const Review* b) { return a->stars < b->stars; });
    std::vector<std::vector<std::string>> folds(k);
    for (std::size_t p = 0; p < members.size(); ++p) {
      folds[p % k].push_back(members[p]->id);
      plan.assignment_[members[p]->id] = {d, p % k};
    }
    plan.folds_.push_back(std::move(folds));
  }
  return plan;
}

struct Split {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

/// Test = fold (i, j); train = every other fold of domain i.
inline Split in_domain_split(const FoldPlan& plan, std::size_t i, std::size_t j) {
  plan.check(i, j);
  Split s;
  s.test = plan.fold(i, j);
  for (std::size_t f = 0; f < plan.k(); ++f)
    if (f != j) s.train.insert(s.train.end(), plan.fold(i, f).begin(), plan.fold(i, f).end());
  return s;
}

/// Test = fold (i, j); train = fold j of every other domain.
inline Split cross_domain_split(const FoldPlan& plan, std::size_t i, std::size_t j) {
  plan.check(i, j);
  if (plan.domains().size() < 2) throw UsageError("cross-domain splits need at least two domains");
  Split s;
  s.test = plan.fold(i, j);
  for (std::size_t d = 0; d < plan.domains().size(); ++d)
    if (d != i) s.train.insert(s.train.end(), plan.fold(d, j).begin(), plan.fold(d, j).end());
  return s;
}

enum class Setting { in_domain, cross_domain };

inline std::string_view to_string(Setting s) { return s == Setting::in_domain ? "in_domain" : "cross_domain"; }

inline Setting setting_from_string(std::string_view s) {
  if (s == "in_domain" || s == "in-domain") return Setting::in_domain;
  if (s == "cross_domain" || s == "cross-domain") return Setting::cross_domain;
  throw UsageError("unknown setting: " + std::string(s));
}

inline Split make_split(const FoldPlan& plan, Setting setting, std::size_t i, std::size_t j) {
  return setting == Setting::in_domain ? in_domain_split(plan, i, j) : cross_domain_split(plan, i, j);
}

// ---------------------------------------------------------------------------------------------
// Featurization shared by the experiment runner and the CLI

/// A review with its tokens and aspect phrases precomputed.
struct PreparedReview {
  const Review* review = nullptr;
  AnalyzedReview analysis;
};

inline std::vector<PreparedReview> prepare_reviews(const ReviewSet& set, const SentimentLexicon& lex,
                                                   const Tagger& tagger, const ExtractOptions& opts = {},
                                                   unsigned threads = 1) {
  std::vector<PreparedReview> out(set.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = {&set[i], analyze_text(set[i].text, lex, tagger, opts)};
  };
  if (threads <= 1 || set.size() < 2 * threads) {
    work(0, set.size());
    return out;
  }
  std::vector<std::thread> workers;
  const std::size_t chunk = (set.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t)
    workers.emplace_back(work, std::min(set.size(), t * chunk), std::min(set.size(), (t + 1) * chunk));
  for (auto& w : workers) w.join();
  return out;
}

/// Scheme-specific review featurizer: either a unigram vocabulary or an embedding model.
class Featurizer {
public:
  static Featurizer baseline(UnigramVocab vocab) {
    Featurizer f;
    f.scheme_ = FeatureScheme::bl;
    f.vocab_ = std::move(vocab);
    return f;
  }
  static Featurizer embedding(FeatureScheme scheme, std::shared_ptr<const EmbeddingModel> model) {
    if (scheme == FeatureScheme::bl) throw UsageError("bl is not an embedding scheme");
    if (!model) throw UsageError("embedding featurizer needs a model");
    Featurizer f;
    f.scheme_ = scheme;
    f.model_ = std::move(model);
    return f;
  }

  FeatureScheme scheme() const { return scheme_; }
  const UnigramVocab& vocab() const { return vocab_; }
  const std::shared_ptr<const EmbeddingModel>& model() const { return model_; }

  FeatureVector operator()(const AnalyzedReview& a) const {
    if (scheme_ == FeatureScheme::bl) return bl_featurize(a.tokens, vocab_);
    return featurize(*model_, a.tokens, a.phrases, scheme_);
  }

private:
  FeatureScheme scheme_ = FeatureScheme::bl;
  UnigramVocab vocab_;
  std::shared_ptr<const EmbeddingModel> model_;
};

// ---------------------------------------------------------------------------------------------
// Experiments

struct ExperimentConfig {
  Word2VecConfig w2v;
  MLRConfig mlr;
  std::size_t bl_k = 100;
  /// Train embeddings once on the whole corpus instead of on each training split.
  bool paper_leakage = false;
  std::uint64_t seed = 1;
  /// Restrict test domains; empty runs every domain of the plan.
  std::vector<std::string> test_domains;
  unsigned threads = 1;
};

struct FoldRow {
  std::string domain;
  Setting setting = Setting::in_domain;
  FeatureScheme scheme = FeatureScheme::bl;
  std::size_t fold = 0;  // 1-based
  std::size_t n = 0;
  double mae = 0.0;
  double rmse = 0.0;
};

struct AggregateRow {
  std::string domain;
  Setting setting = Setting::in_domain;
  FeatureScheme scheme = FeatureScheme::bl;
  std::size_t n = 0;  // test reviews over all folds
  double mae = 0.0;   // mean of fold MAEs
  double rmse = 0.0;  // mean of fold RMSEs
};

struct PooledMetrics {
  std::size_t n = 0;
  double mae = 0.0;
  double rmse = 0.0;
};

struct MetricsReport {
  std::vector<FoldRow> folds;
  std::vector<AggregateRow> per_domain;
  /// Metrics over every test prediction of a scheme.
  std::map<FeatureScheme, PooledMetrics> overall;
};

/// Everything a predictor sees for one (domain, fold, scheme) cell.
struct CellTask {
  const ReviewSet* set = nullptr;
  const std::vector<PreparedReview>* prepared = nullptr;
  std::vector<std::size_t> train;  // indices into set
  std::vector<std::size_t> test;
  std::size_t domain = 0;
  std::size_t fold = 0;
  Setting setting = Setting::in_domain;
  FeatureScheme scheme = FeatureScheme::bl;
};

/// Replaces the built-in train-and-predict step; returns one star per test review.
using CellPredictor = std::function<std::vector<int>(const CellTask&)>;

namespace detail {

inline std::vector<std::vector<std::string>> embedding_sentences(const std::vector<PreparedReview>& prepared,
                                                                 std::span<const std::size_t> rows) {
  std::vector<std::vector<std::string>> out;
  out.reserve(rows.size());
  for (auto i : rows) out.push_back(embedding_words(prepared[i].analysis.tokens));
  return out;
}

inline Featurizer fit_featurizer(FeatureScheme scheme, const ReviewSet& set, std::span<const std::size_t> train,
                                 std::shared_ptr<const EmbeddingModel> model, std::size_t bl_k) {
  if (scheme != FeatureScheme::bl) return Featurizer::embedding(scheme, std::move(model));
  std::vector<Review> reviews;
  reviews.reserve(train.size());
  for (auto i : train) reviews.push_back(set[i]);
  return Featurizer::baseline(select_top_k_unigrams(ReviewSet(std::move(reviews)), bl_k));
}

}  // namespace detail

/// Runs every (test domain, fold) cell for each scheme. Cells are independent and seeded from
/// the experiment seed, so results do not depend on the thread count.
inline MetricsReport run_experiment(const ReviewSet& set, const std::vector<PreparedReview>& prepared,
                                    const FoldPlan& plan, Setting setting, std::span<const FeatureScheme> schemes,
                                    const ExperimentConfig& cfg, const CellPredictor& predictor = {}) {
  if (prepared.size() != set.size()) throw UsageError("prepared reviews do not match the review set");
  if (schemes.empty()) throw UsageError("no feature schemes requested");
  cfg.mlr.validate();
  cfg.w2v.validate();
  if (cfg.bl_k < 1) throw UsageError("bl_k must be at least 1");
  if (plan.size() != set.size()) throw UsageError("fold plan does not cover the review set");

  std::unordered_map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < set.size(); ++i) index_of.emplace(set[i].id, i);
  auto to_indices = [&](const std::vector<std::string>& ids) {
    std::vector<std::size_t> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
      auto it = index_of.find(id);
      if (it == index_of.end()) throw UsageError("fold plan references unknown review id " + id);
      out.push_back(it->second);
    }
    return out;
  };

  std::vector<std::size_t> domains;
  if (cfg.test_domains.empty()) {
    for (std::size_t d = 0; d < plan.domains().size(); ++d) domains.push_back(d);
  } else {
    for (const auto& name : cfg.test_domains) domains.push_back(plan.domain_index(name));
  }

  const bool needs_embeddings = std::any_of(schemes.begin(), schemes.end(), [](FeatureScheme s) { return s != FeatureScheme::bl; });
  std::shared_ptr<const EmbeddingModel> shared_model;
  if (needs_embeddings && cfg.paper_leakage && !predictor) {
    std::vector<std::size_t> all(set.size());
    std::iota(all.begin(), all.end(), 0);
    auto w2v = cfg.w2v;
    w2v.seed = util::derive_seed(cfg.seed, "embedding");
    shared_model = std::make_shared<EmbeddingModel>(train_word2vec(detail::embedding_sentences(prepared, all), w2v));
  }

  struct CellResult {
    std::vector<int> truths;
    std::vector<std::vector<int>> preds;  // per scheme
  };
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  for (auto d : domains)
    for (std::size_t f = 0; f < plan.k(); ++f) cells.emplace_back(d, f);
  std::vector<CellResult> results(cells.size());

  auto run_cell = [&](std::size_t c) {
    const auto [d, f] = cells[c];
    try {
      auto split = make_split(plan, setting, d, f);
      CellTask task{&set, &prepared, to_indices(split.train), to_indices(split.test), d, f, setting,
                    FeatureScheme::bl};
      if (task.train.empty()) throw DataError("empty training set");
      auto& res = results[c];
      for (auto i : task.test) res.truths.push_back(set[i].stars);

      const std::uint64_t cell_id = d * 1000003ULL + f;
      std::shared_ptr<const EmbeddingModel> model = shared_model;
      if (needs_embeddings && !model && !predictor) {
        auto w2v = cfg.w2v;
        w2v.seed = util::derive_seed(cfg.seed, std::string("embedding:") + std::string(to_string(setting)), cell_id);
        model = std::make_shared<EmbeddingModel>(train_word2vec(detail::embedding_sentences(prepared, task.train), w2v));
      }
      for (auto scheme : schemes) {
        task.scheme = scheme;
        if (predictor) {
          auto preds = predictor(task);
          if (preds.size() != task.test.size()) throw DataError("predictor returned wrong number of predictions");
          res.preds.push_back(std::move(preds));
          continue;
        }
        auto featurizer = detail::fit_featurizer(scheme, set, task.train, model, cfg.bl_k);
        std::vector<FeatureVector> X;
        std::vector<int> y;
        X.reserve(task.train.size());
        for (auto i : task.train) {
          X.push_back(featurizer(prepared[i].analysis));
          y.push_back(set[i].stars);
        }
        auto mlr = cfg.mlr;
        mlr.seed = util::derive_seed(cfg.seed, std::string("mlr:") + std::string(to_string(setting)) + ":" +
                                                   std::string(to_string(scheme)), cell_id);
        auto rater = train_mlr(X, y, mlr);
        std::vector<int> preds;
        preds.reserve(task.test.size());
        for (auto i : task.test) preds.push_back(rater.predict(featurizer(prepared[i].analysis).values));
        res.preds.push_back(std::move(preds));
      }
    } catch (const std::exception& e) {
      throw DataError("experiment cell (domain \"" + plan.domains()[d] + "\", fold " + std::to_string(f + 1) +
                      ", " + std::string(to_string(setting)) + "): " + e.what());
    }
  };

  const unsigned threads = std::max(1u, cfg.threads);
  if (threads == 1 || cells.size() < 2) {
    for (std::size_t c = 0; c < cells.size(); ++c) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < threads; ++t)
      workers.emplace_back([&] {
        for (std::size_t c; (c = next.fetch_add(1)) < cells.size();) {
          try {
            run_cell(c);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
  }

  // report rows: domains by descending review count, then name
  auto counts = domain_counts(set);
  std::vector<std::size_t> order = domains;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto ca = counts[plan.domains()[a]], cb = counts[plan.domains()[b]];
    return ca != cb ? ca > cb : plan.domains()[a] < plan.domains()[b];
  });
  std::map<std::size_t, std::size_t> position;  // domain -> first cell
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (!position.contains(cells[c].first)) position[cells[c].first] = c;

  MetricsReport report;
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    std::vector<int> all_preds, all_truths;
    for (const auto& r : results) {
      all_preds.insert(all_preds.end(), r.preds[s].begin(), r.preds[s].end());
      all_truths.insert(all_truths.end(), r.truths.begin(), r.truths.end());
    }
    report.overall[schemes[s]] = {all_preds.size(), mae(all_preds, all_truths), rmse(all_preds, all_truths)};
  }
  for (auto d : order) {
    for (std::size_t s = 0; s < schemes.size(); ++s) {
      AggregateRow agg{plan.domains()[d], setting, schemes[s], 0, 0.0, 0.0};
      for (std::size_t f = 0; f < plan.k(); ++f) {
        const auto& r = results[position[d] + f];
        FoldRow row{plan.domains()[d], setting, schemes[s], f + 1, r.truths.size(), mae(r.preds[s], r.truths),
                    rmse(r.preds[s], r.truths)};
        agg.n += row.n;
        agg.mae += row.mae;
        agg.rmse += row.rmse;
        report.folds.push_back(row);
      }
      agg.mae /= static_cast<double>(plan.k());
      agg.rmse /= static_cast<double>(plan.k());
      report.per_domain.push_back(agg);
    }
  }
  return report;
}

inline MetricsReport run_experiment(const ReviewSet& set, const std::vector<PreparedReview>& prepared,
                                    const FoldPlan& plan, Setting setting, FeatureScheme scheme,
                                    const ExperimentConfig& cfg, const CellPredictor& predictor = {}) {
  const FeatureScheme schemes[] = {scheme};
  return run_experiment(set, prepared, plan, setting, schemes, cfg, predictor);
}

inline void write_fold_csv(std::ostream& out, const std::vector<FoldRow>& rows) {
  out << "domain,setting,scheme,fold,mae,rmse\n";
  for (const auto& r : rows)
    out << util::csv_field(r.domain) << ',' << to_string(r.setting) << ',' << to_string(r.scheme) << ',' << r.fold
        << ',' << util::format_fixed(r.mae) << ',' << util::format_fixed(r.rmse) << '\n';
}

inline void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "domain,setting,scheme,mae,rmse\n";
  for (const auto& r : rows)
    out << util::csv_field(r.domain) << ',' << to_string(r.setting) << ',' << to_string(r.scheme) << ','
        << util::format_fixed(r.mae) << ',' << util::format_fixed(r.rmse) << '\n';
}

/// Best in-domain result per domain: the scheme with the lowest aggregated MAE (RMSE breaks ties).
inline std::vector<AggregateRow> best_in_domain(const std::vector<AggregateRow>& rows) {
  std::vector<AggregateRow> best;
  std::map<std::string, std::size_t> at;
  for (const auto& r : rows) {
    if (r.setting != Setting::in_domain) continue;
    auto it = at.find(r.domain);
    if (it == at.end()) {
      at[r.domain] = best.size();
      best.push_back(r);
    } else if (r.mae < best[it->second].mae || (r.mae == best[it->second].mae && r.rmse < best[it->second].rmse)) {
      best[it->second] = r;
    }
  }
  return best;
}

inline void write_bid_csv(std::ostream& out, const std::vector<AggregateRow>& bid) {
  out << "domain,scheme,mae,rmse\n";
  for (const auto& r : bid)
    out << util::csv_field(r.domain) << ',' << to_string(r.scheme) << ',' << util::format_fixed(r.mae) << ','
        << util::format_fixed(r.rmse) << '\n';
}

}  // namespace crossrate
