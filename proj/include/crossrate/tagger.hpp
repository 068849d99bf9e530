#pragma once

// Part-of-speech tagging: an averaged perceptron over Penn-style fine tags, collapsed to
// coarse Pos classes through a table stored with the model, plus a deterministic
// closed-class/suffix rule tagger used for tokens the model has never seen in contracted
// form and as a standalone fallback.
//
// Model file (text, UTF-8, tab-separated):
//   #crossrate-tagger
//   version 1
//   classes <n>          then n lines:  <fine tag> TAB <coarse class>
//   tagdict <m>          then m lines:  <word> TAB <fine tag>
//   weights <f>          then f lines:  <feature> TAB <class index>:<weight> ...
//   end

#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "crossrate/common.hpp"
#include "crossrate/textproc.hpp"

namespace crossrate {

/// Default collapse of Penn Treebank tags onto the coarse classes.
inline Pos collapse_penn_tag(std::string_view tag) {
  if (tag.starts_with("NN")) return Pos::noun;
  if (tag.starts_with("VB")) return Pos::verb;
  if (tag.starts_with("JJ")) return Pos::adjective;
  if (tag == "RB" || tag == "RBR" || tag == "RBS") return Pos::adverb;
  if (tag == "CC") return Pos::conjunction;
  static constexpr std::array<std::string_view, 9> punct = {".", ",", ":", "(", ")", "``", "''", "\"", "-NONE-"};
  for (auto p : punct)
    if (tag == p) return Pos::punctuation;
  return Pos::other;
}

/// Assigns tag and pos to every token of one review. Implementations are immutable and thread-safe.
class Tagger {
public:
  virtual ~Tagger() = default;
  virtual void tag(std::vector<Token>& tokens) const = 0;
};

inline bool is_all_punct(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = 0;
  while (i < s.size()) {
    auto n = detail::punct_len_at(s, i);
    if (n == 0) return false;
    i += n;
  }
  return true;
}

inline bool has_digit(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return detail::is_ascii_digit(c); });
}

inline bool has_alpha(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || static_cast<unsigned char>(c) >= 0x80;
  });
}

/// Closed-class and suffix rules. Returns a Penn-style tag.
class RuleTagger final : public Tagger {
public:
  void tag(std::vector<Token>& tokens) const override {
    for (auto& t : tokens) {
      t.tag = rule_tag(t.surface);
      t.pos = collapse_penn_tag(t.tag);
    }
  }

  /// Tag for closed classes (punctuation, numbers, contractions, function words), or empty.
  static std::string closed_class_tag(std::string_view surface) {
    if (is_all_punct(surface)) {
      if (surface == ",") return ",";
      if (surface == "." || surface == "!" || surface == "?") return ".";
      if (surface == ";" || surface == ":" || surface == "-" || surface == "--") return ":";
      if (surface == "(" || surface == "[") return "(";
      if (surface == ")" || surface == "]") return ")";
      if (surface == "$" || surface == "#") return std::string(surface);
      return "''";
    }
    if (has_digit(surface) && !has_alpha(surface)) return "CD";

    auto w = apostrophe_normalized(util::to_lower(surface));
    static const std::unordered_map<std::string, std::string> words = {
        {"the", "DT"},     {"a", "DT"},       {"an", "DT"},       {"this", "DT"},    {"that", "DT"},
        {"these", "DT"},   {"those", "DT"},   {"every", "DT"},    {"each", "DT"},    {"some", "DT"},
        {"i", "PRP"},      {"you", "PRP"},    {"he", "PRP"},      {"she", "PRP"},    {"it", "PRP"},
        {"we", "PRP"},     {"they", "PRP"},   {"me", "PRP"},      {"him", "PRP"},    {"her", "PRP$"},
        {"us", "PRP"},     {"them", "PRP"},   {"my", "PRP$"},     {"your", "PRP$"},  {"his", "PRP$"},
        {"its", "PRP$"},   {"our", "PRP$"},   {"their", "PRP$"},  {"in", "IN"},      {"on", "IN"},
        {"at", "IN"},      {"of", "IN"},      {"with", "IN"},     {"from", "IN"},    {"by", "IN"},
        {"about", "IN"},   {"to", "TO"},      {"and", "CC"},      {"or", "CC"},      {"but", "CC"},
        {"nor", "CC"},     {"yet", "CC"},     {"so", "CC"},       {"for", "IN"},     {"is", "VBZ"},
        {"are", "VBP"},    {"was", "VBD"},    {"were", "VBD"},    {"be", "VB"},      {"been", "VBN"},
        {"being", "VBG"},  {"am", "VBP"},     {"has", "VBZ"},     {"have", "VBP"},   {"had", "VBD"},
        {"do", "VBP"},     {"does", "VBZ"},   {"did", "VBD"},     {"will", "MD"},    {"would", "MD"},
        {"can", "MD"},     {"could", "MD"},   {"should", "MD"},   {"may", "MD"},     {"might", "MD"},
        {"must", "MD"},    {"not", "RB"},     {"very", "RB"},     {"too", "RB"},     {"here", "RB"},
        {"there", "EX"},   {"won't", "MD"},   {"can't", "MD"},    {"wouldn't", "MD"}, {"couldn't", "MD"},
        {"shouldn't", "MD"}, {"mustn't", "MD"}, {"i'm", "PRP"},   {"you're", "PRP"}, {"we're", "PRP"},
        {"they're", "PRP"}, {"he's", "PRP"},  {"she's", "PRP"},   {"it's", "PRP"},   {"that's", "DT"},
        {"there's", "EX"}, {"what's", "WP"},  {"i've", "PRP"},    {"we've", "PRP"},  {"you've", "PRP"},
        {"they've", "PRP"}, {"i'll", "PRP"},  {"we'll", "PRP"},   {"you'll", "PRP"}, {"they'll", "PRP"},
        {"i'd", "PRP"},    {"we'd", "PRP"},   {"you'd", "PRP"},   {"they'd", "PRP"}, {"let's", "VB"}};
    if (auto it = words.find(w); it != words.end()) return it->second;
    if (w.ends_with("n't")) return w.starts_with("does") ? "VBZ" : (w.starts_with("did") || w.starts_with("was") || w.starts_with("were") || w.starts_with("had")) ? "VBD" : "VBP";
    if (w.ends_with("'s") && w.size() > 2) return "NN";
    return {};
  }

  static std::string rule_tag(std::string_view surface) {
    if (auto closed = closed_class_tag(surface); !closed.empty()) return closed;
    auto w = util::to_lower(surface);
    auto ends = [&](std::string_view suf) { return w.size() > suf.size() + 1 && w.ends_with(suf); };
    if (ends("ly")) return "RB";
    if (ends("ing")) return "VBG";
    if (ends("ed")) return "VBD";
    for (std::string_view suf : {"ous", "ful", "able", "ible", "ive", "less", "al", "ic", "est"})
      if (ends(suf)) return "JJ";
    if (ends("s") && !ends("ss")) return "NNS";
    return "NN";
  }

  static std::string apostrophe_normalized(std::string w) {
    static constexpr std::string_view curly = "\xE2\x80\x99";
    for (auto pos = w.find(curly); pos != std::string::npos; pos = w.find(curly, pos)) w.replace(pos, curly.size(), "'");
    return w;
  }
};

struct TaggerTrainOptions {
  int iterations = 5;
  std::uint64_t seed = 1;
  std::size_t tagdict_min_count = 20;
  double tagdict_min_ratio = 0.97;
  double prune_below = 1e-3;  // averaged weights with smaller magnitude are dropped
};

/// Averaged perceptron tagger with a frequent-word tag dictionary.
class PerceptronTagger final : public Tagger {
public:
  using TaggedSentence = std::vector<std::pair<std::string, std::string>>;

  using TrainOptions = TaggerTrainOptions;

  PerceptronTagger() = default;

  static PerceptronTagger train(const std::vector<TaggedSentence>& sentences, const TrainOptions& opts = {}) {
    if (sentences.empty()) throw DataError("tagger training corpus is empty");
    PerceptronTagger model;
    model.build_classes_and_tagdict(sentences, opts);
    Trainer trainer(model.classes_.size());

    std::vector<std::size_t> order(sentences.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(opts.seed);

    for (int iter = 0; iter < opts.iterations; ++iter) {
      for (std::size_t si : order) {
        const auto& sent = sentences[si];
        std::vector<std::string> words;
        words.reserve(sent.size());
        for (const auto& wt : sent) words.push_back(wt.first);
        auto context = make_context(words);
        std::string prev = "-START-", prev2 = "-START2-";
        for (std::size_t i = 0; i < sent.size(); ++i) {
          const auto& gold = sent[i].second;
          std::string guess;
          if (auto it = model.tagdict_.find(words[i]); it != model.tagdict_.end()) {
            guess = it->second;
          } else {
            auto feats = features(i, words[i], context, prev, prev2);
            int g = trainer.predict(feats);
            int truth = model.class_index(gold);
            trainer.update(truth, g, feats);
            guess = model.classes_[static_cast<std::size_t>(g)];
          }
          prev2 = std::move(prev);
          prev = guess;
        }
      }
      std::shuffle(order.begin(), order.end(), rng);
    }
    model.weights_ = trainer.averaged(opts.prune_below);
    return model;
  }

  void tag(std::vector<Token>& tokens) const override {
    std::vector<std::string> words;
    words.reserve(tokens.size());
    for (const auto& t : tokens) words.push_back(t.surface);
    auto fine = tag_words(words);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      tokens[i].tag = fine[i];
      tokens[i].pos = collapse(fine[i]);
    }
  }

  /// Fine tags for a word sequence.
  std::vector<std::string> tag_words(const std::vector<std::string>& words) const {
    if (classes_.empty()) throw Error("tagger model is not loaded");
    auto context = make_context(words);
    std::vector<std::string> out;
    out.reserve(words.size());
    std::string prev = "-START-", prev2 = "-START2-";
    for (std::size_t i = 0; i < words.size(); ++i) {
      std::string t = lookup(words[i]);
      if (t.empty()) {
        auto feats = features(i, words[i], context, prev, prev2);
        t = classes_[static_cast<std::size_t>(predict(feats))];
      }
      out.push_back(t);
      prev2 = std::move(prev);
      prev = t;
    }
    return out;
  }

  Pos collapse(std::string_view fine) const {
    if (auto it = collapse_.find(std::string(fine)); it != collapse_.end()) return it->second;
    return collapse_penn_tag(fine);
  }

  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t feature_count() const { return weights_.size(); }

  void save(std::ostream& out) const {
    out << "#crossrate-tagger\nversion 1\n";
    out << "classes " << classes_.size() << '\n';
    for (const auto& c : classes_) out << c << '\t' << to_string(collapse(c)) << '\n';
    std::map<std::string, std::string> dict(tagdict_.begin(), tagdict_.end());
    out << "tagdict " << dict.size() << '\n';
    for (const auto& [w, t] : dict) out << w << '\t' << t << '\n';
    std::map<std::string, const std::vector<ClassWeight>*> sorted;
    for (const auto& [f, ws] : weights_) sorted.emplace(f, &ws);
    out << "weights " << sorted.size() << '\n';
    char buf[32];
    for (const auto& [f, ws] : sorted) {
      out << f << '\t';
      for (std::size_t k = 0; k < ws->size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.6g", static_cast<double>((*ws)[k].weight));
        out << (k ? " " : "") << (*ws)[k].cls << ':' << buf;
      }
      out << '\n';
    }
    out << "end\n";
  }

  static PerceptronTagger load_unchecked(std::istream& in) {
    PerceptronTagger m;
    std::string line;
    auto expect_header = [&](std::string_view key) -> std::size_t {
      if (!std::getline(in, line) || !line.starts_with(key))
        throw DataError("corrupt tagger model: expected '" + std::string(key) + "'");
      return std::stoul(line.substr(key.size() + 1));
    };
    if (!std::getline(in, line) || line != "#crossrate-tagger") throw DataError("not a tagger model file (bad magic)");
    if (!std::getline(in, line) || line != "version 1") throw DataError("unsupported tagger model version: " + line);

    auto n_classes = expect_header("classes");
    for (std::size_t i = 0; i < n_classes; ++i) {
      if (!std::getline(in, line)) throw DataError("corrupt tagger model: truncated classes");
      auto cols = util::split(line, '\t');
      if (cols.size() != 2) throw DataError("corrupt tagger model: bad class line");
      m.class_ids_[cols[0]] = static_cast<int>(m.classes_.size());
      m.classes_.push_back(cols[0]);
      m.collapse_[cols[0]] = pos_from_string(cols[1]);
    }
    auto n_dict = expect_header("tagdict");
    for (std::size_t i = 0; i < n_dict; ++i) {
      if (!std::getline(in, line)) throw DataError("corrupt tagger model: truncated tagdict");
      auto tab = line.find('\t');
      if (tab == std::string::npos) throw DataError("corrupt tagger model: bad tagdict line");
      m.tagdict_.emplace(line.substr(0, tab), line.substr(tab + 1));
    }
    auto n_weights = expect_header("weights");
    m.weights_.reserve(n_weights);
    for (std::size_t i = 0; i < n_weights; ++i) {
      if (!std::getline(in, line)) throw DataError("corrupt tagger model: truncated weights");
      auto tab = line.find('\t');
      if (tab == std::string::npos) throw DataError("corrupt tagger model: bad weight line");
      std::vector<ClassWeight> ws;
      std::istringstream ss(line.substr(tab + 1));
      std::string item;
      while (ss >> item) {
        auto colon = item.find(':');
        if (colon == std::string::npos) throw DataError("corrupt tagger model: bad weight entry");
        int cls = std::stoi(item.substr(0, colon));
        if (cls < 0 || static_cast<std::size_t>(cls) >= m.classes_.size())
          throw DataError("corrupt tagger model: class index out of range");
        ws.push_back({cls, std::stof(item.substr(colon + 1))});
      }
      m.weights_.emplace(line.substr(0, tab), std::move(ws));
    }
    if (!std::getline(in, line) || line != "end") throw DataError("corrupt tagger model: missing end marker");
    if (m.classes_.empty()) throw DataError("corrupt tagger model: no classes");
    return m;
  }

  static PerceptronTagger load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read tagger model: " + path);
    return load(in);
  }

  static PerceptronTagger load(std::istream& in) {
    try {
      return load_unchecked(in);
    } catch (const std::logic_error&) {  // stoul / stoi / stof on malformed numbers
      throw DataError("corrupt tagger model: malformed number");
    }
  }

  /// Parses "word/TAG word/TAG ..." lines (one sentence per line).
  static std::vector<TaggedSentence> parse_slash_corpus(std::istream& in) {
    std::vector<TaggedSentence> out;
    std::string line;
    while (std::getline(in, line)) {
      TaggedSentence sent;
      std::istringstream ss(line);
      std::string item;
      while (ss >> item) {
        auto slash = item.rfind('/');
        if (slash == std::string::npos || slash == 0 || slash + 1 == item.size()) continue;
        sent.emplace_back(item.substr(0, slash), item.substr(slash + 1));
      }
      if (!sent.empty()) out.push_back(std::move(sent));
    }
    return out;
  }

private:
  struct ClassWeight {
    int cls;
    float weight;
  };

  using Features = std::vector<std::string>;

  class Trainer {
  public:
    explicit Trainer(std::size_t n_classes) : n_classes_(n_classes) {}

    int predict(const Features& feats) const {
      std::vector<double> scores(n_classes_, 0.0);
      for (const auto& f : feats) {
        auto it = params_.find(f);
        if (it == params_.end()) continue;
        for (const auto& [cls, p] : it->second) scores[static_cast<std::size_t>(cls)] += p.weight;
      }
      return argmax(scores);
    }

    void update(int truth, int guess, const Features& feats) {
      ++instances_;
      if (truth == guess) return;
      for (const auto& f : feats) {
        auto& row = params_[f];
        bump(row[truth], 1.0);
        bump(row[guess], -1.0);
      }
    }

    std::unordered_map<std::string, std::vector<ClassWeight>> averaged(double prune_below) {
      std::unordered_map<std::string, std::vector<ClassWeight>> out;
      for (auto& [f, row] : params_) {
        std::vector<ClassWeight> ws;
        for (auto& [cls, p] : row) {
          p.total += static_cast<double>(instances_ - p.stamp) * p.weight;
          double avg = p.total / static_cast<double>(instances_);
          if (std::fabs(avg) >= prune_below) ws.push_back({cls, static_cast<float>(avg)});
        }
        std::sort(ws.begin(), ws.end(), [](const ClassWeight& a, const ClassWeight& b) { return a.cls < b.cls; });
        if (!ws.empty()) out.emplace(f, std::move(ws));
      }
      return out;
    }

  private:
    struct Param {
      double weight = 0.0;
      double total = 0.0;
      std::uint64_t stamp = 0;
    };

    void bump(Param& p, double delta) {
      p.total += static_cast<double>(instances_ - p.stamp) * p.weight;
      p.stamp = instances_;
      p.weight += delta;
    }

    std::size_t n_classes_;
    std::uint64_t instances_ = 0;
    std::unordered_map<std::string, std::map<int, Param>> params_;
  };

  static int argmax(const std::vector<double>& scores) {
    int best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c)
      if (scores[c] > scores[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    return best;
  }

  int predict(const Features& feats) const {
    std::vector<double> scores(classes_.size(), 0.0);
    for (const auto& f : feats) {
      auto it = weights_.find(f);
      if (it == weights_.end()) continue;
      for (const auto& cw : it->second) scores[static_cast<std::size_t>(cw.cls)] += cw.weight;
    }
    return argmax(scores);
  }

  /// Closed-class rule, tag dictionary, or empty when the perceptron should decide.
  std::string lookup(const std::string& word) const {
    if (is_all_punct(word)) return RuleTagger::closed_class_tag(word);
    if (auto it = tagdict_.find(word); it != tagdict_.end()) return it->second;
    auto norm = util::to_lower(word);
    // contractions never appear unsplit in the training data
    bool apostrophe = norm.find('\'') != std::string::npos || norm.find("\xE2\x80\x99") != std::string::npos;
    if (apostrophe && !weights_.contains("i word " + normalize(word))) return RuleTagger::rule_tag(word);
    return {};
  }

  static std::string normalize(const std::string& word) {
    if (word.find('-') != std::string::npos && word.front() != '-') return "!HYPHEN";
    if (word.size() == 4 && std::all_of(word.begin(), word.end(), [](char c) { return detail::is_ascii_digit(c); }))
      return "!YEAR";
    if (!word.empty() && detail::is_ascii_digit(word.front())) return "!DIGITS";
    return util::to_lower(word);
  }

  static std::vector<std::string> make_context(const std::vector<std::string>& words) {
    std::vector<std::string> ctx{"-START-", "-START2-"};
    for (const auto& w : words) ctx.push_back(normalize(w));
    ctx.emplace_back("-END-");
    ctx.emplace_back("-END2-");
    return ctx;
  }

  static std::string suffix3(const std::string& w) { return w.size() <= 3 ? w : w.substr(w.size() - 3); }

  static Features features(std::size_t i, const std::string& word, const std::vector<std::string>& ctx,
                           const std::string& prev, const std::string& prev2) {
    std::size_t c = i + 2;
    Features f;
    f.reserve(14);
    f.emplace_back("bias");
    // suffix and first character keep the original case: capitalization separates proper nouns
    f.push_back("i suffix " + suffix3(word));
    f.push_back("i pref1 " + word.substr(0, 1));
    f.push_back("i-1 tag " + prev);
    f.push_back("i-2 tag " + prev2);
    f.push_back("i tag+i-2 tag " + prev + " " + prev2);
    f.push_back("i word " + ctx[c]);
    f.push_back("i-1 tag+i word " + prev + " " + ctx[c]);
    f.push_back("i-1 word " + ctx[c - 1]);
    f.push_back("i-1 suffix " + suffix3(ctx[c - 1]));
    f.push_back("i-2 word " + ctx[c - 2]);
    f.push_back("i+1 word " + ctx[c + 1]);
    f.push_back("i+1 suffix " + suffix3(ctx[c + 1]));
    f.push_back("i+2 word " + ctx[c + 2]);
    return f;
  }

  int class_index(const std::string& tag) const { return class_ids_.at(tag); }

  void build_classes_and_tagdict(const std::vector<TaggedSentence>& sentences, const TrainOptions& opts) {
    std::map<std::string, std::map<std::string, std::size_t>> counts;
    std::set<std::string> tags;
    for (const auto& s : sentences)
      for (const auto& [w, t] : s) {
        counts[w][t]++;
        tags.insert(t);
      }
    for (const auto& t : tags) {
      class_ids_[t] = static_cast<int>(classes_.size());
      classes_.push_back(t);
      collapse_[t] = collapse_penn_tag(t);
    }
    for (const auto& [w, per_tag] : counts) {
      std::size_t total = 0, best = 0;
      std::string best_tag;
      for (const auto& [t, n] : per_tag) {
        total += n;
        if (n > best) {
          best = n;
          best_tag = t;
        }
      }
      if (total >= opts.tagdict_min_count && static_cast<double>(best) / static_cast<double>(total) >= opts.tagdict_min_ratio)
        tagdict_.emplace(w, best_tag);
    }
  }

  std::vector<std::string> classes_;
  std::unordered_map<std::string, int> class_ids_;
  std::unordered_map<std::string, Pos> collapse_;
  std::unordered_map<std::string, std::string> tagdict_;
  std::unordered_map<std::string, std::vector<ClassWeight>> weights_;
};

/// Tags tokens in place with the given tagger and returns them.
inline std::vector<Token>& pos_tag(std::vector<Token>& tokens, const Tagger& tagger) {
  tagger.tag(tokens);
  return tokens;
}

}  // namespace crossrate
