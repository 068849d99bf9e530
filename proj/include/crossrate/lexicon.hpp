#pragma once

// Opinion lexicon: disjoint positive and negative word lists in the published plain-text
// format (one word per line, ';' starts a comment line, blank lines ignored).

#include <set>
#include <string>
#include <unordered_set>

#include "crossrate/common.hpp"

namespace crossrate {

enum class Polarity { none, positive, negative };

inline std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::positive: return "positive";
    case Polarity::negative: return "negative";
    case Polarity::none: return "none";
  }
  return "none";
}

namespace detail {

inline bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t n = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    if (n == 0 || i + n > s.size()) return false;
    for (std::size_t k = 1; k < n; ++k)
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
    i += n;
  }
  return true;
}

/// Maps Latin-1 letters to their unaccented ASCII base; other high bytes are dropped.
inline std::string transliterate_latin1(std::string_view s) {
  static constexpr std::string_view table =
      // 0xC0 - 0xFF
      "AAAAAAACEEEEIIII"
      "DNOOOOOxOUUUUYPs"
      "aaaaaaaceeeeiiii"
      "dnooooo/ouuuuypy";
  std::string out;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (c < 0x80) out += ch;
    else if (c >= 0xC0) out += table[c - 0xC0];
  }
  return out;
}

}  // namespace detail

class SentimentLexicon {
public:
  SentimentLexicon() = default;

  /// Throws DataError naming every word present in both lists.
  SentimentLexicon(std::unordered_set<std::string> positive, std::unordered_set<std::string> negative)
      : positive_(std::move(positive)), negative_(std::move(negative)) {
    std::set<std::string> both;
    for (const auto& w : positive_)
      if (negative_.contains(w)) both.insert(w);
    if (!both.empty()) {
      std::string msg = "lexicon words listed as both positive and negative:";
      for (const auto& w : both) msg += " " + w;
      throw DataError(msg);
    }
  }

  Polarity polarity(std::string_view word) const {
    std::string w(word);
    if (positive_.contains(w)) return Polarity::positive;
    if (negative_.contains(w)) return Polarity::negative;
    return Polarity::none;
  }

  bool is_sentiment(std::string_view word) const { return polarity(word) != Polarity::none; }

  const std::unordered_set<std::string>& positive() const { return positive_; }
  const std::unordered_set<std::string>& negative() const { return negative_; }
  std::size_t size() const { return positive_.size() + negative_.size(); }

private:
  std::unordered_set<std::string> positive_;
  std::unordered_set<std::string> negative_;
};

/// Parses one published word list. Lines are trimmed and lowercased.
inline std::unordered_set<std::string> parse_word_list(std::string_view content) {
  std::unordered_set<std::string> words;
  for (const auto& raw : util::split(content, '\n')) {
    auto line = util::trim(raw);
    if (line.empty() || line.front() == ';') continue;
    std::string word = detail::valid_utf8(line) ? std::string(line) : detail::transliterate_latin1(line);
    words.insert(util::to_lower(word));
  }
  return words;
}

inline SentimentLexicon load_lexicon(const std::string& positive_path, const std::string& negative_path) {
  return SentimentLexicon(parse_word_list(util::read_file(positive_path)),
                          parse_word_list(util::read_file(negative_path)));
}

inline Polarity polarity(const SentimentLexicon& lex, std::string_view word) { return lex.polarity(word); }

}  // namespace crossrate
