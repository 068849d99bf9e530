#pragma once

// Tokenization and opinion-segment splitting.
//
// Tokenizer rules:
//   * whitespace separates chunks;
//   * leading and trailing punctuation of a chunk is detached, one token per mark;
//   * inside a chunk, hyphens and apostrophes are kept ("well-written", "don't");
//   * inside a chunk, '.' is kept only between two alphanumerics ("3.5", "U.S"),
//     ',' and ':' only between two digits ("1,000", "10:30"); other brackets,
//     quotes, '!', '?' and ';' always split.

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "crossrate/common.hpp"

namespace crossrate {

/// Coarse part-of-speech classes.
enum class Pos { unset, noun, verb, adjective, adverb, punctuation, conjunction, other };

inline std::string_view to_string(Pos p) {
  switch (p) {
    case Pos::unset: return "unset";
    case Pos::noun: return "noun";
    case Pos::verb: return "verb";
    case Pos::adjective: return "adjective";
    case Pos::adverb: return "adverb";
    case Pos::punctuation: return "punctuation";
    case Pos::conjunction: return "conjunction";
    case Pos::other: return "other";
  }
  return "unset";
}

inline Pos pos_from_string(std::string_view s) {
  for (Pos p : {Pos::noun, Pos::verb, Pos::adjective, Pos::adverb, Pos::punctuation, Pos::conjunction, Pos::other})
    if (to_string(p) == s) return p;
  throw DataError("unknown part-of-speech class: " + std::string(s));
}

inline constexpr std::array<std::string_view, 4> kDelimiterMarks = {",", ".", ";", ":"};
inline constexpr std::array<std::string_view, 7> kCoordinatingConjunctions = {"for", "and", "nor", "but",
                                                                              "or",  "yet", "so"};

/// True for segment-boundary surfaces; conjunctions match case-insensitively.
inline bool is_delimiter_surface(std::string_view surface) {
  for (auto m : kDelimiterMarks)
    if (surface == m) return true;
  if (surface.size() > 3) return false;
  auto norm = util::to_lower(surface);
  for (auto c : kCoordinatingConjunctions)
    if (norm == c) return true;
  return false;
}

struct Token {
  std::string surface;
  std::string norm;
  std::size_t offset = 0;  // byte offset of surface in the source text
  std::string tag;         // fine-grained tag from the tagger, empty until tagged
  Pos pos = Pos::unset;
  bool is_delimiter = false;
};

inline Token make_token(std::string_view text, std::size_t begin, std::size_t end) {
  Token t;
  t.surface = std::string(text.substr(begin, end - begin));
  t.norm = util::to_lower(t.surface);
  t.offset = begin;
  t.is_delimiter = is_delimiter_surface(t.surface);
  return t;
}

namespace detail {

inline bool is_ascii_alnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
inline bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_ascii_punct(char c) {
  auto u = static_cast<unsigned char>(c);
  return u < 0x80 && u > 0x20 && u != 0x7f && !is_ascii_alnum(c);
}

// Multi-byte punctuation that is detached at chunk edges: curly quotes, dashes, ellipsis.
inline constexpr std::array<std::string_view, 7> kUnicodePunct = {
    "\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x98", "\xE2\x80\x99", "\xE2\x80\x93", "\xE2\x80\x94", "\xE2\x80\xA6"};

/// Length in bytes of the punctuation mark starting at text[i], or 0.
inline std::size_t punct_len_at(std::string_view text, std::size_t i) {
  if (is_ascii_punct(text[i])) return 1;
  for (auto p : kUnicodePunct)
    if (text.substr(i, p.size()) == p) return p.size();
  return 0;
}

/// Length in bytes of the punctuation mark ending at text[end-1], or 0.
inline std::size_t punct_len_before(std::string_view text, std::size_t begin, std::size_t end) {
  if (is_ascii_punct(text[end - 1])) return 1;
  for (auto p : kUnicodePunct)
    if (end - begin >= p.size() && text.substr(end - p.size(), p.size()) == p) return p.size();
  return 0;
}

/// Whether an inner punctuation byte at text[i] (with neighbours inside the chunk) splits the chunk.
inline bool splits_inside(std::string_view text, std::size_t i) {
  char c = text[i];
  char prev = text[i - 1];
  char next = text[i + 1];
  switch (c) {
    case '-':
    case '\'':
    case '&':
    case '/':
    case '_':
    case '+':
    case '#':
    case '@':
    case '$':
    case '%':
    case '*':
    case '=':
    case '~':
      return false;
    case '.':
      return !(is_ascii_alnum(prev) && is_ascii_alnum(next));
    case ',':
    case ':':
      return !(is_ascii_digit(prev) && is_ascii_digit(next));
    default:
      return is_ascii_punct(c);
  }
}

inline void tokenize_chunk(std::string_view text, std::size_t begin, std::size_t end, std::vector<Token>& out) {
  while (begin < end) {
    auto n = punct_len_at(text, begin);
    if (n == 0) break;
    out.push_back(make_token(text, begin, begin + n));
    begin += n;
  }
  std::vector<Token> trailing;
  while (end > begin) {
    auto n = punct_len_before(text, begin, end);
    if (n == 0) break;
    trailing.push_back(make_token(text, end - n, end));
    end -= n;
  }
  std::size_t start = begin;
  for (std::size_t i = begin + 1; i + 1 < end; ++i) {
    if (!splits_inside(text, i)) continue;
    if (i > start) out.push_back(make_token(text, start, i));
    out.push_back(make_token(text, i, i + 1));
    start = i + 1;
  }
  if (end > start) out.push_back(make_token(text, start, end));
  out.insert(out.end(), trailing.rbegin(), trailing.rend());
}

}  // namespace detail

/// Splits text into tokens with byte offsets; pos is left unset.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && util::is_space(text[i])) ++i;
    std::size_t begin = i;
    while (i < text.size() && !util::is_space(text[i])) ++i;
    if (i > begin) detail::tokenize_chunk(text, begin, i, tokens);
  }
  return tokens;
}

struct Segment {
  std::vector<Token> tokens;
};

/// Splits a token stream at delimiter tokens, dropping the delimiters and any empty segment.
inline std::vector<Segment> segment(const std::vector<Token>& tokens) {
  std::vector<Segment> segments;
  Segment current;
  for (const auto& t : tokens) {
    if (t.is_delimiter) {
      if (!current.tokens.empty()) segments.push_back(std::move(current));
      current = Segment{};
      continue;
    }
    current.tokens.push_back(t);
  }
  if (!current.tokens.empty()) segments.push_back(std::move(current));
  return segments;
}

}  // namespace crossrate
