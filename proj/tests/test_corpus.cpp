#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "crossrate/corpus.hpp"
#include "support.hpp"

using namespace crossrate;
using crossrate::testing::TempDir;
using crossrate::testing::write_text;

namespace {

Review make(std::string id, int stars, std::string domain, std::string text = "some text") {
  return {std::move(id), std::move(text), stars, std::move(domain), "test"};
}

}  // namespace

TEST(LoadReviews, WellFormedRecordRoundTrips) {
  auto res = parse_reviews(R"({"id":"a1","text":"Great food!","stars":5,"domain":"restaurants","source":"yelp"})");
  ASSERT_EQ(res.reviews.size(), 1u);
  EXPECT_TRUE(res.rejections.empty());
  EXPECT_EQ(res.reviews[0], (Review{"a1", "Great food!", 5, "restaurants", "yelp"}));

  std::ostringstream out;
  write_reviews_jsonl(out, res.reviews);
  EXPECT_EQ(parse_reviews(out.str()).reviews, res.reviews);
}

TEST(LoadReviews, StarsOutOfRangeIsRejectedWithLineNumber) {
  auto res = parse_reviews(
      "{\"id\":\"a\",\"text\":\"ok\",\"stars\":5,\"domain\":\"d\",\"source\":\"s\"}\n"
      "{\"id\":\"b\",\"text\":\"ok\",\"stars\":6,\"domain\":\"d\",\"source\":\"s\"}\n");
  EXPECT_EQ(res.reviews.size(), 1u);
  ASSERT_EQ(res.rejections.size(), 1u);
  EXPECT_EQ(res.rejections[0].line, 2u);
  EXPECT_EQ(res.rejections[0].reason, "stars out of range");
}

TEST(LoadReviews, EmptyFileGivesEmptySet) {
  TempDir dir;
  write_text(dir.file("empty.jsonl"), "");
  auto res = load_reviews(dir.file("empty.jsonl"));
  EXPECT_TRUE(res.reviews.empty());
  EXPECT_TRUE(res.reviews.domains().empty());
  EXPECT_EQ(res.total_lines, 0u);
}

TEST(LoadReviews, UnreadableFileThrows) {
  EXPECT_THROW(load_reviews("/nonexistent/reviews.jsonl"), DataError);
}

TEST(LoadReviews, NonIntegerStarsAreRejectedNotRounded) {
  auto res = parse_reviews(R"({"id":"a","text":"ok","stars":4.5,"domain":"d","source":"s"})");
  ASSERT_EQ(res.rejections.size(), 1u);
  EXPECT_EQ(res.rejections[0].reason, "stars must be an integer");
  res = parse_reviews(R"({"id":"a","text":"ok","stars":"4","domain":"d","source":"s"})");
  EXPECT_EQ(res.rejections.size(), 1u);
}

TEST(LoadReviews, MalformedAndIncompleteLinesAreReported) {
  std::string content =
      "not json\n"
      "[1,2]\n"
      "{\"text\":\"ok\",\"stars\":3,\"domain\":\"d\",\"source\":\"s\"}\n"
      "{\"id\":\"x\",\"text\":\"   \",\"stars\":3,\"domain\":\"d\",\"source\":\"s\"}\n"
      "{\"id\":\"y\",\"text\":\"fine\",\"stars\":3,\"domain\":\"d\",\"source\":\"s\"}\n"
      "{\"id\":\"y\",\"text\":\"again\",\"stars\":3,\"domain\":\"d\",\"source\":\"s\"}\n"
      "\n";
  auto res = parse_reviews(content);
  EXPECT_EQ(res.reviews.size(), 1u);
  ASSERT_EQ(res.rejections.size(), 5u);
  EXPECT_EQ(res.rejections[0].line, 1u);
  EXPECT_NE(res.rejections[0].reason.find("malformed JSON"), std::string::npos);
  EXPECT_EQ(res.rejections[1].reason, "record is not a JSON object");
  EXPECT_EQ(res.rejections[2].reason, "missing field \"id\"");
  EXPECT_EQ(res.rejections[3].reason, "empty text");
  EXPECT_EQ(res.rejections[4].reason, "duplicate id");
  EXPECT_EQ(res.rejections[4].line, 6u);
}

TEST(LoadReviews, MissingIdsCanBeSynthesizedStably) {
  LoadOptions opts;
  opts.synthesize_missing_ids = true;
  std::string line = R"({"text":"ok","stars":3,"domain":"d","source":"s"})";
  auto a = parse_reviews(line, opts);
  auto b = parse_reviews(line, opts);
  ASSERT_EQ(a.reviews.size(), 1u);
  EXPECT_EQ(a.reviews[0].id, b.reviews[0].id);
  EXPECT_EQ(a.reviews[0].id, synthesize_review_id("s", "ok", 3));
  EXPECT_NE(synthesize_review_id("s", "ok", 3), synthesize_review_id("s", "ok", 4));
}

TEST(LoadReviews, DomainAllowListAndMinLength) {
  LoadOptions opts;
  opts.allowed_domains = {"books"};
  opts.min_text_length = 3;
  auto res = parse_reviews(
      "{\"id\":\"a\",\"text\":\"good read\",\"stars\":4,\"domain\":\"books\",\"source\":\"s\"}\n"
      "{\"id\":\"b\",\"text\":\"good read\",\"stars\":4,\"domain\":\"hotels\",\"source\":\"s\"}\n"
      "{\"id\":\"c\",\"text\":\" ok \",\"stars\":4,\"domain\":\"books\",\"source\":\"s\"}\n",
      opts);
  EXPECT_EQ(res.reviews.size(), 1u);
  EXPECT_EQ(res.rejections.size(), 2u);
}

TEST(LoadReviews, AcceptedPlusRejectedEqualsTotalLines) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::ostringstream content;
    std::size_t n = rng() % 30;
    for (std::size_t i = 0; i < n; ++i) {
      int stars = static_cast<int>(rng() % 8) - 1;
      if (rng() % 5 == 0) {
        content << "{broken\n";
        continue;
      }
      content << "{\"id\":\"r" << (rng() % 20) << "\",\"text\":\"t\",\"stars\":" << stars
              << ",\"domain\":\"d\",\"source\":\"s\"}\n";
    }
    auto res = parse_reviews(content.str());
    EXPECT_EQ(res.reviews.size() + res.rejections.size(), res.total_lines);
    EXPECT_EQ(res.total_lines, n);
    EXPECT_EQ(parse_reviews(content.str()).reviews, res.reviews);
  }
}

TEST(ReviewSet, RejectsDuplicateIdsAndBadStars) {
  EXPECT_THROW(ReviewSet({make("a", 3, "d"), make("a", 4, "d")}), DataError);
  EXPECT_THROW(ReviewSet({make("a", 0, "d")}), DataError);
  EXPECT_THROW(ReviewSet({make("a", 3, "d", "  ")}), DataError);
  ReviewSet ok({make("a", 3, "x"), make("b", 4, "y")});
  EXPECT_EQ(ok.domains(), (std::set<std::string>{"x", "y"}));
}

TEST(FilterDomain, SelectsMatchingReviewsInOrder) {
  ReviewSet set({make("r1", 5, "restaurants"), make("d1", 1, "dentists"), make("r2", 4, "restaurants"),
                 make("d2", 2, "dentists"), make("r3", 3, "restaurants")});
  auto dentists = filter_domain(set, "dentists");
  ASSERT_EQ(dentists.size(), 2u);
  EXPECT_EQ(dentists[0].id, "d1");
  EXPECT_EQ(dentists[1].id, "d2");
  EXPECT_TRUE(filter_domain(set, "hotels").empty());
  EXPECT_EQ(filter_domain(dentists, "dentists"), dentists);
}

TEST(StarDistribution, SingleReview) {
  auto hist = star_distribution(ReviewSet({make("b", 5, "books")}));
  ASSERT_EQ(hist.size(), 1u);
  EXPECT_EQ(hist["books"], (std::array<std::size_t, 5>{0, 0, 0, 0, 1}));
}

TEST(StarDistribution, AdditiveUnderDisjointUnion) {
  std::mt19937 rng(3);
  const char* domains[] = {"a", "b", "c"};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Review> left, right;
    for (int i = 0; i < 40; ++i) {
      auto r = make("id" + std::to_string(i), 1 + static_cast<int>(rng() % 5), domains[rng() % 3]);
      (rng() % 2 ? left : right).push_back(r);
    }
    std::vector<Review> all = left;
    all.insert(all.end(), right.begin(), right.end());
    auto hl = star_distribution(ReviewSet(left)), hr = star_distribution(ReviewSet(right));
    auto ha = star_distribution(ReviewSet(all));
    for (const auto& [d, counts] : ha) {
      std::size_t total = 0;
      for (std::size_t s = 0; s < 5; ++s) {
        EXPECT_EQ(counts[s], hl[d][s] + hr[d][s]);
        total += counts[s];
      }
      EXPECT_EQ(total, domain_counts(ReviewSet(all))[d]);
    }
  }
}

TEST(StarDistribution, CsvShape) {
  std::ostringstream out;
  write_star_distribution_csv(out, star_distribution(ReviewSet({make("b", 5, "books"), make("c", 2, "books")})));
  EXPECT_EQ(out.str(),
            "domain,stars,count\nbooks,1,0\nbooks,2,1\nbooks,3,0\nbooks,4,0\nbooks,5,1\n");
}
