#pragma once

// Aspect-phrase extraction: within each opinion segment, every sentiment word (lexicon
// hit) is paired with every non-sentiment token tagged noun or verb.

#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "crossrate/corpus.hpp"
#include "crossrate/lexicon.hpp"
#include "crossrate/tagger.hpp"
#include "crossrate/textproc.hpp"

namespace crossrate {

struct AspectPhrase {
  std::string sentiment_word;
  std::string target_word;
  Polarity polarity = Polarity::none;
  std::size_t segment_index = 0;
  // provenance: positions of both words inside the segment
  std::size_t sentiment_position = 0;
  std::size_t target_position = 0;

  friend bool operator==(const AspectPhrase&, const AspectPhrase&) = default;
};

struct ExtractOptions {
  /// Maximum token distance between the two words of a pair; 0 means the segment is the only limit.
  std::size_t max_distance = 0;
};

inline bool is_target_candidate(const Token& t, const SentimentLexicon& lex) {
  return (t.pos == Pos::noun || t.pos == Pos::verb) && lex.polarity(t.norm) == Polarity::none;
}

/// Phrases from already segmented, tagged text.
inline std::vector<AspectPhrase> extract_from_segments(const std::vector<Segment>& segments,
                                                       const SentimentLexicon& lex,
                                                       const ExtractOptions& opts = {}) {
  std::vector<AspectPhrase> out;
  for (std::size_t si = 0; si < segments.size(); ++si) {
    const auto& toks = segments[si].tokens;
    std::vector<std::size_t> targets;
    for (std::size_t k = 0; k < toks.size(); ++k)
      if (is_target_candidate(toks[k], lex)) targets.push_back(k);
    if (targets.empty()) continue;
    for (std::size_t s = 0; s < toks.size(); ++s) {
      auto pol = lex.polarity(toks[s].norm);
      if (pol == Polarity::none) continue;
      for (auto t : targets) {
        std::size_t dist = s > t ? s - t : t - s;
        if (opts.max_distance > 0 && dist > opts.max_distance) continue;
        out.push_back({toks[s].norm, toks[t].norm, pol, si, s, t});
      }
    }
  }
  return out;
}

/// Tokenized, tagged and segmented review together with its phrases.
struct AnalyzedReview {
  std::vector<Token> tokens;
  std::vector<AspectPhrase> phrases;
};

inline AnalyzedReview analyze_text(std::string_view text, const SentimentLexicon& lex, const Tagger& tagger,
                                   const ExtractOptions& opts = {}) {
  AnalyzedReview a;
  a.tokens = tokenize(text);
  pos_tag(a.tokens, tagger);
  a.phrases = extract_from_segments(segment(a.tokens), lex, opts);
  return a;
}

inline std::vector<AspectPhrase> extract_aspect_phrases(const Review& review, const SentimentLexicon& lex,
                                                        const Tagger& tagger, const ExtractOptions& opts = {}) {
  return analyze_text(review.text, lex, tagger, opts).phrases;
}

/// Phrase counts keyed by (domain, sentiment word, target word). Merging shards is order-independent.
class PhraseCounter {
public:
  using Key = std::tuple<std::string, std::string, std::string>;

  void add(const std::string& domain, const std::vector<AspectPhrase>& phrases) {
    for (const auto& p : phrases) counts_[{domain, p.sentiment_word, p.target_word}]++;
  }

  void merge(const PhraseCounter& other) {
    for (const auto& [k, n] : other.counts_) counts_[k] += n;
  }

  const std::map<Key, std::size_t>& counts() const { return counts_; }

private:
  std::map<Key, std::size_t> counts_;
};

struct SalientPhrase {
  std::string sentiment_word;
  std::string target_word;
  std::size_t count = 0;

  friend bool operator==(const SalientPhrase&, const SalientPhrase&) = default;
};

using SalienceReport = std::map<std::string, std::vector<SalientPhrase>>;

/// Ranks by count descending, then (sentiment word, target word) ascending; keeps top_n per domain.
inline SalienceReport rank_salient(const PhraseCounter& counter, std::size_t top_n) {
  if (top_n < 1) throw UsageError("top_n must be at least 1");
  SalienceReport report;
  for (const auto& [key, n] : counter.counts()) {
    const auto& [domain, s, t] = key;
    report[domain].push_back({s, t, n});
  }
  for (auto& [domain, rows] : report) {
    std::sort(rows.begin(), rows.end(), [](const SalientPhrase& a, const SalientPhrase& b) {
      if (a.count != b.count) return a.count > b.count;
      return std::tie(a.sentiment_word, a.target_word) < std::tie(b.sentiment_word, b.target_word);
    });
    if (rows.size() > top_n) rows.resize(top_n);
  }
  return report;
}

inline SalienceReport salient_phrases(const ReviewSet& set, const SentimentLexicon& lex, const Tagger& tagger,
                                      std::size_t top_n, const ExtractOptions& opts = {}) {
  if (top_n < 1) throw UsageError("top_n must be at least 1");
  PhraseCounter counter;
  for (const auto& r : set) counter.add(r.domain, extract_aspect_phrases(r, lex, tagger, opts));
  return rank_salient(counter, top_n);
}

inline void write_phrase_dump_header(std::ostream& out) {
  out << "review_id,segment_index,sentiment_word,target_word,polarity\n";
}

inline void write_phrase_dump_rows(std::ostream& out, const std::string& review_id,
                                   const std::vector<AspectPhrase>& phrases) {
  for (const auto& p : phrases)
    out << util::csv_field(review_id) << ',' << p.segment_index << ',' << util::csv_field(p.sentiment_word) << ','
        << util::csv_field(p.target_word) << ',' << to_string(p.polarity) << '\n';
}

inline void write_salience_csv(std::ostream& out, const SalienceReport& report) {
  out << "domain,rank,sentiment_word,target_word,count\n";
  for (const auto& [domain, rows] : report)
    for (std::size_t i = 0; i < rows.size(); ++i)
      out << util::csv_field(domain) << ',' << (i + 1) << ',' << util::csv_field(rows[i].sentiment_word) << ','
          << util::csv_field(rows[i].target_word) << ',' << rows[i].count << '\n';
}

}  // namespace crossrate
