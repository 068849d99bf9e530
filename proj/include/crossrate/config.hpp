#pragma once

// Run configuration for the command-line tool.
//
// Config files hold one `key = value` per line; `#` starts a comment, blank lines are
// ignored, and list values are comma separated. Values are resolved as
// defaults < config file < command-line flags, and validated before any work starts.

#include <charconv>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crossrate/common.hpp"
#include "crossrate/embeddings.hpp"
#include "crossrate/eval.hpp"
#include "crossrate/models.hpp"

namespace crossrate {

inline constexpr std::array<std::string_view, 9> kCommands = {
    "ingest", "stats", "phrases", "train-embeddings", "featurize", "train", "evaluate", "experiment", "synth"};

/// Unvalidated key/value pairs, as read from a config file or flags.
using RawConfig = std::map<std::string, std::string>;

struct ConfigKey {
  std::string_view name;
  std::string_view default_value;  // empty means unset
  std::string_view help;
};

/// Every recognised key with its default.
inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"data", "", "input review corpus (JSONL)"},
      {"out", "", "output file or directory"},
      {"seed", "1", "top-level seed"},
      {"lexicon", "", "directory holding positive-words.txt and negative-words.txt"},
      {"tagger", "", "POS tagger model file"},
      {"embeddings", "", "word embedding file (text format)"},
      {"model", "", "trained rater (JSON)"},
      {"domains", "", "restrict to these domains (comma separated)"},
      {"scheme", "", "feature schemes: bl, w2v, w2v_ape, w2v_pape (comma separated)"},
      {"setting", "", "experiment settings: in-domain, cross-domain (comma separated)"},
      {"folds", "10", "number of folds"},
      {"stratified", "false", "order each domain by stars before dealing folds"},
      {"paper_leakage", "false", "train embeddings once on the whole corpus"},
      {"top", "10", "phrases per domain in the salience report"},
      {"phrase_dump", "", "also write every extracted phrase to this CSV"},
      {"max_distance", "0", "maximum token distance inside a phrase (0 = no limit)"},
      {"bl_k", "100", "baseline vocabulary size"},
      {"min_text_length", "1", "ingest: minimum trimmed text length in bytes"},
      {"synthesize_ids", "false", "ingest: derive ids for records without one"},
      {"strict", "false", "ingest: exit with a data error when any line is rejected"},
      {"predictions", "", "evaluate: also write per-review predictions to this CSV"},
      {"w2v.dim", "100", "embedding dimension"},
      {"w2v.window", "5", "context window"},
      {"w2v.negatives", "5", "negative samples per pair"},
      {"w2v.min_count", "5", "minimum word count"},
      {"w2v.epochs", "5", "training epochs"},
      {"w2v.learning_rate", "0.025", "initial learning rate"},
      {"w2v.subsample", "0", "frequent-word subsampling threshold (0 = off)"},
      {"w2v.threads", "1", "embedding training threads (above 1 is not reproducible)"},
      {"mlr.learning_rate", "0.1", "initial SGD step"},
      {"mlr.l2", "0.0001", "L2 penalty"},
      {"mlr.epochs", "20", "training epochs"},
      {"mlr.batch_size", "256", "mini-batch size"},
      {"mlr.standardize", "true", "z-score features before training"},
      {"synth.preset", "acceptance", "synth: acceptance or twelve"},
      {"synth.per_domain", "5000", "synth: reviews per large domain"},
      {"synth.scarce", "200", "synth: reviews in the scarce domain (acceptance preset)"},
  };
  return keys;
}

inline bool is_config_key(std::string_view key) {
  for (const auto& k : config_keys())
    if (k.name == key) return true;
  return false;
}

/// Parses the key/value config format. Unknown keys are reported with their line number.
inline RawConfig parse_config_text(std::string_view text) {
  RawConfig raw;
  std::size_t line_no = 0;
  for (const auto& line : util::split(text, '\n')) {
    ++line_no;
    std::string_view l = line;
    if (auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    l = util::trim(l);
    if (l.empty()) continue;
    auto eq = l.find('=');
    if (eq == std::string_view::npos)
      throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key(util::trim(l.substr(0, eq)));
    std::replace(key.begin(), key.end(), '-', '_');
    if (!is_config_key(key)) throw UsageError("config line " + std::to_string(line_no) + ": unknown key \"" + key + "\"");
    raw[key] = std::string(util::trim(l.substr(eq + 1)));
  }
  return raw;
}

inline RawConfig load_config_file(const std::string& path) {
  try {
    return parse_config_text(util::read_file(path));
  } catch (const DataError& e) {
    throw UsageError(std::string("cannot read config file: ") + e.what());
  }
}

/// Fully resolved configuration of one command.
struct RunConfig {
  std::string command;
  std::string data;
  std::string out;
  std::uint64_t seed = 1;
  std::string lexicon_dir;
  std::string tagger_model;
  std::string embeddings;
  std::string model;
  std::vector<std::string> domains;
  std::vector<FeatureScheme> schemes;
  std::vector<Setting> settings;
  std::size_t folds = 10;
  bool stratified = false;
  bool paper_leakage = false;
  std::size_t top = 10;
  std::string phrase_dump;
  ExtractOptions extract;
  std::size_t bl_k = 100;
  LoadOptions load;
  bool strict = false;
  std::string predictions;
  Word2VecConfig w2v;
  MLRConfig mlr;
  std::string synth_preset = "acceptance";
  std::size_t synth_per_domain = 5000;
  std::size_t synth_scarce = 200;
  unsigned threads = 1;
  /// Every key with its resolved value, for manifests.
  RawConfig resolved;
};

namespace detail {

inline std::string_view raw_value(const RawConfig& raw, std::string_view key) {
  auto it = raw.find(std::string(key));
  return it == raw.end() ? std::string_view{} : std::string_view(it->second);
}

template <class T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw UsageError("invalid value for \"" + std::string(key) + "\": \"" + std::string(v) + "\"");
  return out;
}

inline double parse_real(std::string_view key, std::string_view v) {
  // from_chars for double is not available on every supported standard library
  std::string s(v);
  char* end = nullptr;
  double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(out))
    throw UsageError("invalid value for \"" + std::string(key) + "\": \"" + s + "\"");
  return out;
}

inline bool parse_bool(std::string_view key, std::string_view v) {
  auto s = util::to_lower(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw UsageError("invalid value for \"" + std::string(key) + "\": \"" + std::string(v) + "\" (expected true/false)");
}

inline std::vector<std::string> parse_list(std::string_view v) {
  std::vector<std::string> out;
  for (const auto& item : util::split(v, ',')) {
    auto t = util::trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

inline void require_file(std::string_view key, const std::string& path) {
  if (path.empty()) throw UsageError("missing required option \"" + std::string(key) + "\"");
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw UsageError("\"" + std::string(key) + "\": no such file: " + path);
}

template <class T>
T at_least(std::string_view key, T value, T minimum) {
  if (value < minimum)
    throw UsageError("\"" + std::string(key) + "\" must be at least " + std::to_string(minimum) + ", got " +
                     std::to_string(value));
  return value;
}

}  // namespace detail

/// Fills defaults, parses and checks every value. The first offending key is named in the error.
inline RunConfig validate_config(const std::string& command, const RawConfig& raw) {
  using namespace detail;
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
    throw UsageError("unknown command \"" + command + "\"");
  RunConfig cfg;
  cfg.command = command;
  for (const auto& [key, value] : raw)
    if (!is_config_key(key)) throw UsageError("unknown key \"" + key + "\"");
  for (const auto& k : config_keys()) {
    auto v = raw_value(raw, k.name);
    cfg.resolved[std::string(k.name)] = raw.contains(std::string(k.name)) ? std::string(v) : std::string(k.default_value);
  }
  auto get = [&](std::string_view key) -> const std::string& { return cfg.resolved.at(std::string(key)); };
  auto size_key = [&](std::string_view key, std::size_t minimum) {
    return at_least<std::size_t>(key, parse_number<std::size_t>(key, get(key)), minimum);
  };
  auto int_key = [&](std::string_view key, int minimum) { return at_least<int>(key, parse_number<int>(key, get(key)), minimum); };
  auto real_key = [&](std::string_view key) { return parse_real(key, get(key)); };
  auto real_above = [&](std::string_view key, double bound, bool inclusive) {
    double v = real_key(key);
    if (inclusive ? v < bound : v <= bound)
      throw UsageError("\"" + std::string(key) + "\" must be " + (inclusive ? ">= " : "> ") + util::format_fixed(bound, 1) +
                       ", got " + get(key));
    return v;
  };
  auto bool_key = [&](std::string_view key) { return parse_bool(key, get(key)); };

  cfg.data = get("data");
  cfg.out = get("out");
  cfg.seed = parse_number<std::uint64_t>("seed", get("seed"));
  cfg.lexicon_dir = get("lexicon");
  cfg.tagger_model = get("tagger");
  cfg.embeddings = get("embeddings");
  cfg.model = get("model");
  cfg.domains = parse_list(get("domains"));
  cfg.folds = size_key("folds", 2);
  cfg.stratified = bool_key("stratified");
  cfg.paper_leakage = bool_key("paper_leakage");
  cfg.top = size_key("top", 1);
  cfg.phrase_dump = get("phrase_dump");
  cfg.extract.max_distance = size_key("max_distance", 0);
  cfg.bl_k = size_key("bl_k", 1);
  cfg.load.min_text_length = size_key("min_text_length", 1);
  cfg.load.synthesize_missing_ids = bool_key("synthesize_ids");
  cfg.strict = bool_key("strict");
  cfg.predictions = get("predictions");

  cfg.w2v.dim = int_key("w2v.dim", 1);
  cfg.w2v.window = int_key("w2v.window", 1);
  cfg.w2v.negatives = int_key("w2v.negatives", 1);
  cfg.w2v.min_count = int_key("w2v.min_count", 1);
  cfg.w2v.epochs = int_key("w2v.epochs", 1);
  cfg.w2v.learning_rate = real_above("w2v.learning_rate", 0.0, false);
  cfg.w2v.subsample = real_above("w2v.subsample", 0.0, true);
  cfg.w2v.threads = static_cast<unsigned>(int_key("w2v.threads", 1));
  cfg.w2v.seed = util::derive_seed(cfg.seed, "embedding");
  try {
    cfg.w2v.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  cfg.mlr.learning_rate = real_above("mlr.learning_rate", 0.0, false);
  cfg.mlr.l2 = real_above("mlr.l2", 0.0, true);
  cfg.mlr.epochs = int_key("mlr.epochs", 1);
  cfg.mlr.batch_size = size_key("mlr.batch_size", 1);
  cfg.mlr.standardize = bool_key("mlr.standardize");
  cfg.mlr.seed = util::derive_seed(cfg.seed, "mlr");
  cfg.mlr.validate();

  cfg.synth_preset = get("synth.preset");
  if (cfg.synth_preset != "acceptance" && cfg.synth_preset != "twelve")
    throw UsageError("\"synth.preset\" must be acceptance or twelve, got \"" + cfg.synth_preset + "\"");
  cfg.synth_per_domain = size_key("synth.per_domain", 10);
  cfg.synth_scarce = size_key("synth.scarce", 10);

  for (const auto& s : parse_list(get("scheme"))) {
    try {
      cfg.schemes.push_back(scheme_from_string(s));
    } catch (const UsageError& e) {
      throw UsageError(std::string("\"scheme\": ") + e.what());
    }
  }
  for (const auto& s : parse_list(get("setting"))) {
    try {
      cfg.settings.push_back(setting_from_string(s));
    } catch (const UsageError& e) {
      throw UsageError(std::string("\"setting\": ") + e.what());
    }
  }

  cfg.threads = util::thread_count_from_env();
  cfg.resolved["threads"] = std::to_string(cfg.threads);

  // per-command requirements
  const bool reads_corpus = command != "synth";
  if (reads_corpus) require_file("data", cfg.data);
  auto require_out = [&] {
    if (cfg.out.empty()) throw UsageError("missing required option \"out\"");
  };
  if (command == "ingest" || command == "train-embeddings" || command == "train" || command == "experiment" ||
      command == "synth")
    require_out();
  if (command == "featurize" || command == "train") {
    if (cfg.schemes.size() != 1) throw UsageError("\"scheme\": " + command + " needs exactly one scheme");
    if (cfg.schemes[0] != FeatureScheme::bl && command == "featurize") require_file("embeddings", cfg.embeddings);
    if (cfg.schemes[0] != FeatureScheme::bl && !cfg.embeddings.empty()) require_file("embeddings", cfg.embeddings);
  }
  if (command == "evaluate") require_file("model", cfg.model);
  if (command == "experiment") {
    if (cfg.schemes.empty())
      cfg.schemes = {FeatureScheme::bl, FeatureScheme::w2v, FeatureScheme::w2v_ape, FeatureScheme::w2v_pape};
    if (cfg.settings.empty()) cfg.settings = {Setting::in_domain, Setting::cross_domain};
  }
  if (!cfg.lexicon_dir.empty()) {
    require_file("lexicon", cfg.lexicon_dir + "/positive-words.txt");
    require_file("lexicon", cfg.lexicon_dir + "/negative-words.txt");
  }
  if (!cfg.tagger_model.empty()) require_file("tagger", cfg.tagger_model);
  return cfg;
}

}  // namespace crossrate
