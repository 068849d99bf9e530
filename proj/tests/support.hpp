#pragma once

// Shared test helpers: bundled resources, fixture parsing and small oracles.

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "crossrate/aspects.hpp"
#include "crossrate/lexicon.hpp"
#include "crossrate/tagger.hpp"

namespace crossrate::testing {

inline const SentimentLexicon& bundled_lexicon() {
  static const SentimentLexicon lex = load_lexicon(std::string(CROSSRATE_DEFAULT_LEXICON_DIR) + "/positive-words.txt",
                                                   std::string(CROSSRATE_DEFAULT_LEXICON_DIR) + "/negative-words.txt");
  return lex;
}

inline const PerceptronTagger& bundled_tagger() {
  static const PerceptronTagger tagger = PerceptronTagger::load_file(CROSSRATE_DEFAULT_TAGGER_MODEL);
  return tagger;
}

inline std::string fixture_path(const std::string& name) { return std::string(CROSSRATE_FIXTURE_DIR) + "/" + name; }

struct ExtractionCase {
  std::string text;
  std::vector<AspectPhrase> expected;  // positions are not part of the fixture
};

/// Reads fixtures/extraction.txt.
inline std::vector<ExtractionCase> load_extraction_fixture() {
  std::ifstream in(fixture_path("extraction.txt"));
  if (!in) throw std::runtime_error("missing extraction fixture");
  std::vector<ExtractionCase> cases;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("text ", 0) == 0) {
      cases.push_back({line.substr(5), {}});
      continue;
    }
    if (cases.empty()) throw std::runtime_error("phrase line before any text line");
    if (line == "none") continue;
    std::istringstream ls(line);
    AspectPhrase p;
    std::string pol;
    ls >> p.sentiment_word >> p.target_word >> p.segment_index >> pol;
    p.polarity = pol == "positive" ? Polarity::positive : Polarity::negative;
    cases.back().expected.push_back(p);
  }
  return cases;
}

/// Phrase identity without token positions.
inline std::string describe(const AspectPhrase& p) {
  return "(" + p.sentiment_word + ", " + p.target_word + ", seg " + std::to_string(p.segment_index) + ", " +
         std::string(to_string(p.polarity)) + ")";
}

inline std::vector<std::string> describe_all(const std::vector<AspectPhrase>& ps) {
  std::vector<std::string> out;
  for (const auto& p : ps) out.push_back(describe(p));
  return out;
}

/// Sentences in which the words of each pair are interchangeable: pair a = (good, great) fills
/// the same slot among food words, pair b = (book, novel) among reading words.
inline std::vector<std::vector<std::string>> interchangeable_pairs_corpus(std::uint64_t seed, std::size_t sentences) {
  static const std::vector<std::string> food = {"the", "food", "service", "meal", "staff", "was", "really", "dinner"};
  static const std::vector<std::string> reading = {"i", "read", "this", "author", "chapter", "page", "story", "night"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<std::size_t> ctx(0, 7), len(3, 6);
  std::vector<std::vector<std::string>> out;
  for (std::size_t s = 0; s < sentences; ++s) {
    const bool a = coin(rng) == 1;
    const auto& words = a ? food : reading;
    std::vector<std::string> sent;
    std::size_t n = len(rng), slot = ctx(rng) % n;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == slot) sent.push_back(a ? (coin(rng) ? "good" : "great") : (coin(rng) ? "book" : "novel"));
      sent.push_back(words[ctx(rng)]);
    }
    out.push_back(std::move(sent));
  }
  return out;
}

/// Temporary directory removed on destruction.
class TempDir {
public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("crossrate-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace crossrate::testing
