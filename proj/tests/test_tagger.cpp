#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace crossrate;
using crossrate::testing::bundled_tagger;

namespace {

std::vector<Token> tagged(std::string_view text) {
  auto ts = tokenize(text);
  pos_tag(ts, bundled_tagger());
  return ts;
}

struct HandTagged {
  std::vector<std::string> words;
  std::vector<Pos> gold;
};

std::vector<HandTagged> load_pos_fixture() {
  std::ifstream in(crossrate::testing::fixture_path("pos.txt"));
  std::vector<HandTagged> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    HandTagged s;
    std::istringstream ls(line);
    std::string item;
    while (ls >> item) {
      auto slash = item.rfind('/');
      s.words.push_back(item.substr(0, slash));
      s.gold.push_back(pos_from_string(item.substr(slash + 1)));
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST(PosTag, GoodFoodIsAdjectiveNoun) {
  auto ts = tagged("good food");
  ASSERT_EQ(ts.size(), 2u);
  EXPECT_EQ(ts[0].pos, Pos::adjective);
  EXPECT_EQ(ts[1].pos, Pos::noun);
}

TEST(PosTag, CommaIsPunctuation) {
  auto ts = tagged(",");
  ASSERT_EQ(ts.size(), 1u);
  EXPECT_EQ(ts[0].pos, Pos::punctuation);
}

TEST(PosTag, RecommendIsVerb) {
  auto ts = tagged("I recommend it");
  ASSERT_EQ(ts.size(), 3u);
  EXPECT_EQ(ts[1].pos, Pos::verb);
}

TEST(PosTag, EveryTokenGetsExactlyOneClass) {
  auto ts = tagged("Honestly, the cannoli weren't worth $12.50 -- ask for the tiramisu instead!");
  for (const auto& t : ts) {
    EXPECT_NE(t.pos, Pos::unset) << t.surface;
    EXPECT_FALSE(t.tag.empty()) << t.surface;
    EXPECT_EQ(t.pos, bundled_tagger().collapse(t.tag));
  }
}

TEST(PosTag, Deterministic) {
  const std::string text = "The staff were lovely and the rooms spotless, but breakfast was cold.";
  auto a = tagged(text), b = tagged(text);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].tag, b[i].tag);
}

TEST(PosTag, HandTaggedFixtureAgreement) {
  std::size_t right = 0, total = 0;
  for (const auto& s : load_pos_fixture()) {
    std::vector<Token> toks;
    std::size_t offset = 0;
    for (const auto& w : s.words) {
      toks.push_back(make_token(w, 0, w.size()));
      toks.back().offset = offset;
      offset += w.size() + 1;
    }
    pos_tag(toks, bundled_tagger());
    for (std::size_t i = 0; i < toks.size(); ++i, ++total) right += toks[i].pos == s.gold[i];
  }
  ASSERT_GT(total, 90u);
  EXPECT_GE(static_cast<double>(right) / static_cast<double>(total), 0.95) << right << "/" << total;
}

TEST(PosTag, ContractionsFallBackToRules) {
  auto ts = tagged("They don't care and it isn't clean");
  EXPECT_EQ(ts[1].pos, Pos::verb);  // don't
  EXPECT_EQ(ts[6].pos, Pos::verb);  // isn't
}

TEST(CollapsePennTag, FixedMapping) {
  EXPECT_EQ(collapse_penn_tag("NN"), Pos::noun);
  EXPECT_EQ(collapse_penn_tag("NNPS"), Pos::noun);
  EXPECT_EQ(collapse_penn_tag("VBD"), Pos::verb);
  EXPECT_EQ(collapse_penn_tag("MD"), Pos::other);
  EXPECT_EQ(collapse_penn_tag("JJS"), Pos::adjective);
  EXPECT_EQ(collapse_penn_tag("RB"), Pos::adverb);
  EXPECT_EQ(collapse_penn_tag("CC"), Pos::conjunction);
  EXPECT_EQ(collapse_penn_tag(","), Pos::punctuation);
  EXPECT_EQ(collapse_penn_tag("DT"), Pos::other);
}

TEST(RuleTagger, ClosedClassesAndSuffixes) {
  RuleTagger rules;
  auto ts = tokenize("The quickly baked delicious loaves , 42");
  rules.tag(ts);
  EXPECT_EQ(ts[0].tag, "DT");
  EXPECT_EQ(ts[1].pos, Pos::adverb);
  EXPECT_EQ(ts[2].pos, Pos::verb);
  EXPECT_EQ(ts[3].pos, Pos::adjective);
  EXPECT_EQ(ts[4].pos, Pos::noun);
  EXPECT_EQ(ts[5].pos, Pos::punctuation);
  EXPECT_EQ(ts[6].tag, "CD");
}

TEST(PerceptronTagger, TrainSaveLoadRoundTrip) {
  std::vector<PerceptronTagger::TaggedSentence> corpus;
  for (int i = 0; i < 30; ++i) {
    corpus.push_back({{"the", "DT"}, {"food", "NN"}, {"was", "VBD"}, {"good", "JJ"}, {".", "."}});
    corpus.push_back({{"we", "PRP"}, {"loved", "VBD"}, {"the", "DT"}, {"service", "NN"}});
  }
  TaggerTrainOptions opts;
  opts.iterations = 3;
  auto model = PerceptronTagger::train(corpus, opts);
  EXPECT_EQ(model.tag_words({"the", "food", "was", "good", "."}),
            (std::vector<std::string>{"DT", "NN", "VBD", "JJ", "."}));

  std::stringstream buf;
  model.save(buf);
  auto text = buf.str();
  EXPECT_TRUE(text.starts_with("#crossrate-tagger\nversion 1\n"));
  auto loaded = PerceptronTagger::load(buf);
  EXPECT_EQ(loaded.classes(), model.classes());
  EXPECT_EQ(loaded.feature_count(), model.feature_count());
  for (auto words : std::vector<std::vector<std::string>>{{"we", "loved", "the", "food"}, {"service", "was", "good"}})
    EXPECT_EQ(loaded.tag_words(words), model.tag_words(words));
}

TEST(PerceptronTagger, CorruptModelsAreDataErrors) {
  for (std::string bad : {"", "#other\n", "#crossrate-tagger\nversion 9\n", "#crossrate-tagger\nversion 1\nclasses x\n",
                          "#crossrate-tagger\nversion 1\nclasses 1\nNN\tnoun\ntagdict 0\nweights 1\nf\t7:1\nend\n",
                          "#crossrate-tagger\nversion 1\nclasses 1\nNN\tnoun\ntagdict 0\nweights 0\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(PerceptronTagger::load(in), DataError) << bad;
  }
  EXPECT_THROW(PerceptronTagger::load_file("/nonexistent/tagger.model"), DataError);
}

TEST(PerceptronTagger, UnloadedModelRefusesToTag) {
  PerceptronTagger empty;
  EXPECT_THROW(empty.tag_words({"x"}), Error);
}
