// crossrate: command-line entry point for corpus handling, aspect phrases, embeddings,
// rater training and the fold-based experiments.
//
// Exit codes: 0 success, 2 usage error, 3 data validation error, 4 internal error.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "crossrate/config.hpp"
#include "crossrate/eval.hpp"

namespace fs = std::filesystem;
using namespace crossrate;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

#ifndef CROSSRATE_DEFAULT_TAGGER_MODEL
#define CROSSRATE_DEFAULT_TAGGER_MODEL ""
#endif
#ifndef CROSSRATE_DEFAULT_LEXICON_DIR
#define CROSSRATE_DEFAULT_LEXICON_DIR ""
#endif

std::string flag_name(std::string_view key) {
  std::string f(key);
  std::replace(f.begin(), f.end(), '_', '-');
  std::replace(f.begin(), f.end(), '.', '-');
  return "--" + f;
}

bool is_bool_key(std::string_view key) {
  return key == "stratified" || key == "paper_leakage" || key == "synthesize_ids" || key == "strict" ||
         key == "mlr.standardize";
}

std::ofstream open_output(const std::string& path) {
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  return out;
}

std::string timestamp_utc() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Sidecar describing how a set of outputs was produced.
void write_manifest(const std::string& path, const RunConfig& cfg, const std::vector<std::string>& outputs,
                    const nlohmann::ordered_json& extra = nlohmann::ordered_json::object()) {
  nlohmann::ordered_json m;
  m["tool"] = "crossrate";
  m["version"] = std::string(kVersion);
  m["command"] = cfg.command;
  m["created"] = timestamp_utc();
  m["seed"] = cfg.seed;
  m["sub_seeds"] = {{"fold", util::derive_seed(cfg.seed, "fold")},
                    {"embedding", cfg.w2v.seed},
                    {"mlr", cfg.mlr.seed},
                    {"synth", util::derive_seed(cfg.seed, "synth")}};
  m["config"] = cfg.resolved;
  m["components"] = {{"corpus", 1}, {"tagger_model_format", 1}, {"embedding_format", 1}, {"mlr_format", 1}};
  m["outputs"] = outputs;
  for (const auto& [k, v] : extra.items()) m[k] = v;
  auto out = open_output(path);
  out << m.dump(2) << '\n';
}

std::string manifest_path_for(const std::string& output) { return output + ".manifest.json"; }

struct Resources {
  SentimentLexicon lexicon;
  PerceptronTagger tagger;
};

Resources load_resources(const RunConfig& cfg) {
  std::string lex_dir = cfg.lexicon_dir.empty() ? CROSSRATE_DEFAULT_LEXICON_DIR : cfg.lexicon_dir;
  std::string tagger_path = cfg.tagger_model.empty() ? CROSSRATE_DEFAULT_TAGGER_MODEL : cfg.tagger_model;
  if (lex_dir.empty()) throw UsageError("missing required option \"lexicon\"");
  if (tagger_path.empty()) throw UsageError("missing required option \"tagger\"");
  return {load_lexicon(lex_dir + "/positive-words.txt", lex_dir + "/negative-words.txt"),
          PerceptronTagger::load_file(tagger_path)};
}

ReviewSet load_corpus(const RunConfig& cfg) {
  auto result = load_reviews(cfg.data, cfg.load);
  if (!result.rejections.empty()) {
    const auto& r = result.rejections.front();
    std::cerr << "warning: " << cfg.data << ": skipped " << result.rejections.size()
              << " invalid line(s); first at line " << r.line << ": " << r.reason << '\n';
  }
  ReviewSet set = std::move(result.reviews);
  if (!cfg.domains.empty()) {
    std::vector<Review> kept;
    for (const auto& d : cfg.domains)
      if (!set.domains().contains(d)) throw DataError("domain \"" + d + "\" not present in " + cfg.data);
    for (const auto& r : set)
      if (std::find(cfg.domains.begin(), cfg.domains.end(), r.domain) != cfg.domains.end()) kept.push_back(r);
    set = ReviewSet(std::move(kept));
  }
  if (set.empty()) throw DataError(cfg.data + ": no reviews");
  return set;
}

// ---------------------------------------------------------------------------------------------

int cmd_ingest(const RunConfig& cfg) {
  auto result = load_reviews(cfg.data, cfg.load);
  const std::string rejections = cfg.out + ".rejections.csv";
  {
    auto out = open_output(cfg.out);
    write_reviews_jsonl(out, result.reviews);
  }
  {
    auto out = open_output(rejections);
    write_rejections_csv(out, result.rejections);
  }
  write_manifest(manifest_path_for(cfg.out), cfg, {cfg.out, rejections},
                 {{"lines", result.total_lines}, {"accepted", result.reviews.size()}, {"rejected", result.rejections.size()}});
  std::cerr << "ingest: " << result.reviews.size() << " accepted, " << result.rejections.size() << " rejected of "
            << result.total_lines << " lines\n";
  if (cfg.strict && !result.rejections.empty()) {
    std::cerr << "error: " << result.rejections.size() << " line(s) rejected, see " << rejections << '\n';
    return kExitData;
  }
  return 0;
}

int cmd_stats(const RunConfig& cfg) {
  auto set = load_corpus(cfg);
  auto hist = star_distribution(set);
  if (cfg.out.empty()) {
    write_star_distribution_csv(std::cout, hist);
    return 0;
  }
  {
    auto out = open_output(cfg.out);
    write_star_distribution_csv(out, hist);
  }
  write_manifest(manifest_path_for(cfg.out), cfg, {cfg.out});
  return 0;
}

int cmd_phrases(const RunConfig& cfg) {
  auto set = load_corpus(cfg);
  auto res = load_resources(cfg);
  auto prepared = prepare_reviews(set, res.lexicon, res.tagger, cfg.extract, cfg.threads);
  PhraseCounter counter;
  for (const auto& p : prepared) counter.add(p.review->domain, p.analysis.phrases);
  auto report = rank_salient(counter, cfg.top);
  std::vector<std::string> outputs;
  if (!cfg.phrase_dump.empty()) {
    auto out = open_output(cfg.phrase_dump);
    write_phrase_dump_header(out);
    for (const auto& p : prepared) write_phrase_dump_rows(out, p.review->id, p.analysis.phrases);
    outputs.push_back(cfg.phrase_dump);
  }
  if (cfg.out.empty()) {
    write_salience_csv(std::cout, report);
  } else {
    auto out = open_output(cfg.out);
    write_salience_csv(out, report);
    outputs.insert(outputs.begin(), cfg.out);
  }
  if (!outputs.empty()) write_manifest(manifest_path_for(outputs.front()), cfg, outputs);
  return 0;
}

EmbeddingModel train_embeddings_on(const std::vector<PreparedReview>& prepared, const Word2VecConfig& w2v) {
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(prepared.size());
  for (const auto& p : prepared) sentences.push_back(embedding_words(p.analysis.tokens));
  return train_word2vec(sentences, w2v);
}

int cmd_train_embeddings(const RunConfig& cfg) {
  auto set = load_corpus(cfg);
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(set.size());
  for (const auto& r : set) sentences.push_back(embedding_words(r.text));
  auto model = train_word2vec(sentences, cfg.w2v);
  {
    auto out = open_output(cfg.out);
    model.save(out);
  }
  write_manifest(manifest_path_for(cfg.out), cfg, {cfg.out},
                 {{"vocab_size", model.vocab_size()}, {"epoch_losses", model.epoch_losses()}});
  std::cerr << "train-embeddings: " << model.vocab_size() << " words, final epoch loss "
            << (model.epoch_losses().empty() ? 0.0 : model.epoch_losses().back()) << '\n';
  return 0;
}

Featurizer build_featurizer(const RunConfig& cfg, const ReviewSet& set, FeatureScheme scheme) {
  if (scheme == FeatureScheme::bl) return Featurizer::baseline(select_top_k_unigrams(set, cfg.bl_k));
  auto model = std::make_shared<const EmbeddingModel>(EmbeddingModel::load_file(cfg.embeddings));
  return Featurizer::embedding(scheme, std::move(model));
}

int cmd_featurize(const RunConfig& cfg) {
  auto set = load_corpus(cfg);
  auto res = load_resources(cfg);
  const FeatureScheme scheme = cfg.schemes.front();
  auto featurizer = build_featurizer(cfg, set, scheme);
  auto prepared = prepare_reviews(set, res.lexicon, res.tagger, cfg.extract, cfg.threads);
  std::ostringstream buf;
  std::size_t dim = 0;
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    auto fv = featurizer(prepared[i].analysis);
    if (i == 0) {
      dim = fv.dim();
      buf << "review_id,domain,stars";
      for (std::size_t j = 0; j < dim; ++j) buf << ",f" << j;
      buf << '\n';
    }
    buf << util::csv_field(set[i].id) << ',' << util::csv_field(set[i].domain) << ',' << set[i].stars;
    for (double v : fv.values) buf << ',' << util::format_fixed(v);
    buf << '\n';
  }
  if (cfg.out.empty()) {
    std::cout << buf.str();
    return 0;
  }
  {
    auto out = open_output(cfg.out);
    out << buf.str();
  }
  write_manifest(manifest_path_for(cfg.out), cfg, {cfg.out}, {{"scheme", std::string(to_string(scheme))}, {"dim", dim}});
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  auto set = load_corpus(cfg);
  auto res = load_resources(cfg);
  const FeatureScheme scheme = cfg.schemes.front();
  auto prepared = prepare_reviews(set, res.lexicon, res.tagger, cfg.extract, cfg.threads);
  std::vector<std::string> outputs{cfg.out};
  std::string embedding_path = cfg.embeddings;
  std::optional<Featurizer> featurizer;
  if (scheme == FeatureScheme::bl) {
    featurizer = Featurizer::baseline(select_top_k_unigrams(set, cfg.bl_k));
  } else {
    std::shared_ptr<const EmbeddingModel> emb;
    if (embedding_path.empty()) {
      embedding_path = cfg.out + ".embeddings.txt";
      emb = std::make_shared<const EmbeddingModel>(train_embeddings_on(prepared, cfg.w2v));
      auto out = open_output(embedding_path);
      emb->save(out);
      outputs.push_back(embedding_path);
    } else {
      emb = std::make_shared<const EmbeddingModel>(EmbeddingModel::load_file(embedding_path));
    }
    featurizer = Featurizer::embedding(scheme, std::move(emb));
  }
  std::vector<FeatureVector> X;
  std::vector<int> y;
  for (const auto& p : prepared) {
    X.push_back((*featurizer)(p.analysis));
    y.push_back(p.review->stars);
  }
  auto mlr = cfg.mlr;
  mlr.threads = cfg.threads;
  auto model = train_mlr(X, y, mlr);
  if (scheme == FeatureScheme::bl) model.set_vocab(featurizer->vocab());
  else model.set_embedding_ref(fs::absolute(embedding_path).lexically_normal().string());
  {
    auto out = open_output(cfg.out);
    out << model.to_json().dump(1) << '\n';
  }
  write_manifest(manifest_path_for(cfg.out), cfg, outputs,
                 {{"scheme", std::string(to_string(scheme))}, {"epoch_losses", model.epoch_losses()}});
  return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
  auto set = load_corpus(cfg);
  auto res = load_resources(cfg);
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(util::read_file(cfg.model));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(cfg.model + ": " + e.what());
  }
  auto model = MLRModel::from_json(j);
  std::optional<Featurizer> featurizer;
  if (model.scheme() == FeatureScheme::bl) {
    if (!model.vocab()) throw DataError(cfg.model + ": bl model has no vocabulary");
    featurizer = Featurizer::baseline(*model.vocab());
  } else {
    std::string path = cfg.embeddings.empty() ? model.embedding_ref() : cfg.embeddings;
    if (path.empty()) throw UsageError("missing required option \"embeddings\"");
    featurizer = Featurizer::embedding(model.scheme(), std::make_shared<const EmbeddingModel>(EmbeddingModel::load_file(path)));
  }
  auto prepared = prepare_reviews(set, res.lexicon, res.tagger, cfg.extract, cfg.threads);
  std::map<std::string, std::pair<std::vector<int>, std::vector<int>>> by_domain;
  std::vector<int> all_p, all_t;
  std::ostringstream preds_csv;
  preds_csv << "review_id,domain,stars,predicted\n";
  for (const auto& p : prepared) {
    int pred = model.predict((*featurizer)(p.analysis).values);
    by_domain[p.review->domain].first.push_back(pred);
    by_domain[p.review->domain].second.push_back(p.review->stars);
    all_p.push_back(pred);
    all_t.push_back(p.review->stars);
    preds_csv << util::csv_field(p.review->id) << ',' << util::csv_field(p.review->domain) << ',' << p.review->stars
              << ',' << pred << '\n';
  }
  std::ostringstream metrics;
  metrics << "domain,scheme,n,mae,rmse\n";
  auto row = [&](const std::string& name, const std::vector<int>& p, const std::vector<int>& t) {
    metrics << util::csv_field(name) << ',' << to_string(model.scheme()) << ',' << p.size() << ','
            << util::format_fixed(mae(p, t)) << ',' << util::format_fixed(rmse(p, t)) << '\n';
  };
  for (const auto& [domain, pt] : by_domain) row(domain, pt.first, pt.second);
  row("all", all_p, all_t);

  std::vector<std::string> outputs;
  if (cfg.out.empty()) {
    std::cout << metrics.str();
  } else {
    auto out = open_output(cfg.out);
    out << metrics.str();
    outputs.push_back(cfg.out);
  }
  if (!cfg.predictions.empty()) {
    auto out = open_output(cfg.predictions);
    out << preds_csv.str();
    outputs.push_back(cfg.predictions);
  }
  if (!outputs.empty()) write_manifest(manifest_path_for(outputs.front()), cfg, outputs);
  return 0;
}

int cmd_experiment(const RunConfig& cfg) {
  auto set = load_corpus(cfg);
  auto res = load_resources(cfg);
  auto prepared = prepare_reviews(set, res.lexicon, res.tagger, cfg.extract, cfg.threads);
  auto plan = make_fold_plan(set, cfg.folds, util::derive_seed(cfg.seed, "fold"), cfg.stratified);

  ExperimentConfig ec;
  ec.w2v = cfg.w2v;
  ec.mlr = cfg.mlr;
  ec.bl_k = cfg.bl_k;
  ec.paper_leakage = cfg.paper_leakage;
  ec.seed = cfg.seed;
  ec.threads = cfg.threads;

  std::vector<FoldRow> folds;
  std::vector<AggregateRow> aggregate;
  nlohmann::ordered_json overall = nlohmann::ordered_json::array();
  for (auto setting : cfg.settings) {
    auto report = run_experiment(set, prepared, plan, setting, cfg.schemes, ec);
    folds.insert(folds.end(), report.folds.begin(), report.folds.end());
    aggregate.insert(aggregate.end(), report.per_domain.begin(), report.per_domain.end());
    for (const auto& [scheme, m] : report.overall)
      overall.push_back({{"setting", std::string(to_string(setting))},
                         {"scheme", std::string(to_string(scheme))},
                         {"n", m.n},
                         {"mae", m.mae},
                         {"rmse", m.rmse}});
  }

  fs::create_directories(cfg.out);
  const std::string fold_path = (fs::path(cfg.out) / "folds.csv").string();
  const std::string agg_path = (fs::path(cfg.out) / "aggregate.csv").string();
  std::vector<std::string> outputs{agg_path, fold_path};
  {
    auto out = open_output(agg_path);
    write_aggregate_csv(out, aggregate);
  }
  {
    auto out = open_output(fold_path);
    write_fold_csv(out, folds);
  }
  auto bid = best_in_domain(aggregate);
  if (!bid.empty()) {
    const std::string bid_path = (fs::path(cfg.out) / "bid.csv").string();
    auto out = open_output(bid_path);
    write_bid_csv(out, bid);
    outputs.push_back(bid_path);
  }
  write_manifest((fs::path(cfg.out) / "manifest.json").string(), cfg, outputs,
                 {{"reviews", set.size()}, {"domains", plan.domains()}, {"overall", overall}});
  write_aggregate_csv(std::cout, aggregate);
  return 0;
}

int cmd_synth(const RunConfig& cfg) {
  SynthSpec spec = cfg.synth_preset == "twelve" ? SynthSpec::twelve_domains(cfg.synth_per_domain)
                                                : SynthSpec::acceptance(cfg.synth_per_domain, cfg.synth_scarce);
  auto set = synth_corpus(spec, util::derive_seed(cfg.seed, "synth"));
  {
    auto out = open_output(cfg.out);
    write_reviews_jsonl(out, set);
  }
  write_manifest(manifest_path_for(cfg.out), cfg, {cfg.out}, {{"reviews", set.size()}});
  return 0;
}

int dispatch(const RunConfig& cfg) {
  const auto& c = cfg.command;
  if (c == "ingest") return cmd_ingest(cfg);
  if (c == "stats") return cmd_stats(cfg);
  if (c == "phrases") return cmd_phrases(cfg);
  if (c == "train-embeddings") return cmd_train_embeddings(cfg);
  if (c == "featurize") return cmd_featurize(cfg);
  if (c == "train") return cmd_train(cfg);
  if (c == "evaluate") return cmd_evaluate(cfg);
  if (c == "experiment") return cmd_experiment(cfg);
  if (c == "synth") return cmd_synth(cfg);
  throw UsageError("unknown command \"" + c + "\"");
}

struct CommandFlags {
  std::string config_file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::map<std::string, CLI::Option*> options;
};

void add_command(CLI::App& app, const std::string& name, const std::string& description, CommandFlags& f) {
  auto* sub = app.add_subcommand(name, description);
  sub->add_option("--config", f.config_file, "key = value config file")->check(CLI::ExistingFile);
  sub->add_option("--set", f.sets, "override any config key: --set key=value");
  for (const auto& k : config_keys()) {
    const std::string key(k.name);
    std::string help(k.help);
    if (!k.default_value.empty()) help += " [" + std::string(k.default_value) + "]";
    if (is_bool_key(key)) {
      f.options[key] = sub->add_flag(flag_name(key), f.flags[key], help);
    } else {
      f.options[key] = sub->add_option(flag_name(key), f.values[key], help);
    }
  }
}

RawConfig collect(const CommandFlags& f) {
  RawConfig raw;
  if (!f.config_file.empty()) raw = load_config_file(f.config_file);
  for (const auto& s : f.sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got \"" + s + "\"");
    std::string key(util::trim(std::string_view(s).substr(0, eq)));
    std::replace(key.begin(), key.end(), '-', '_');
    raw[key] = std::string(util::trim(std::string_view(s).substr(eq + 1)));
  }
  for (const auto& [key, opt] : f.options) {
    if (opt->count() == 0) continue;
    raw[key] = is_bool_key(key) ? (f.flags.at(key) ? "true" : "false") : f.values.at(key);
  }
  return raw;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crossrate: review rating prediction with aspect phrase embeddings"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"ingest", "validate a raw JSONL corpus; write clean records and a rejection log"},
      {"stats", "star-rating distribution per domain"},
      {"phrases", "most salient aspect phrases per domain"},
      {"train-embeddings", "train skip-gram word embeddings on review text"},
      {"featurize", "write feature vectors for every review"},
      {"train", "train a rating model"},
      {"evaluate", "score a trained model on a corpus"},
      {"experiment", "fold-based in-domain / cross-domain evaluation"},
      {"synth", "generate a synthetic review corpus"},
  };
  std::map<std::string, CommandFlags> flags;
  for (const auto& [name, description] : commands) add_command(app, name, description, flags[name]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    auto cfg = validate_config(command, collect(flags[command]));
    return dispatch(cfg);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
