#include <gtest/gtest.h>

#include <cstdlib>

#include "crossrate/config.hpp"
#include "support.hpp"

using namespace crossrate;
using crossrate::testing::TempDir;

namespace {

class ConfigTest : public ::testing::Test {
protected:
  void SetUp() override {
    ::unsetenv("CROSSRATE_THREADS");
    data = dir.file("corpus.jsonl");
    crossrate::testing::write_text(data, "{\"id\":\"a\",\"text\":\"good food\",\"stars\":5,\"domain\":\"r\"}\n");
  }
  void TearDown() override { ::unsetenv("CROSSRATE_THREADS"); }

  std::string usage_message(const std::string& command, const RawConfig& raw) {
    try {
      validate_config(command, raw);
    } catch (const UsageError& e) {
      return e.what();
    }
    return "";
  }

  TempDir dir;
  std::string data;
};

}  // namespace

TEST_F(ConfigTest, MissingDataNamesTheKey) {
  auto msg = usage_message("stats", {});
  EXPECT_NE(msg.find("\"data\""), std::string::npos) << msg;
  msg = usage_message("stats", {{"data", dir.file("absent.jsonl")}});
  EXPECT_NE(msg.find("\"data\""), std::string::npos) << msg;
}

TEST_F(ConfigTest, ZeroFoldsIsRejected) {
  auto msg = usage_message("experiment", {{"data", data}, {"out", dir.file("res")}, {"folds", "0"}});
  EXPECT_NE(msg.find("\"folds\""), std::string::npos) << msg;
  EXPECT_NE(usage_message("experiment", {{"data", data}, {"out", "x"}, {"folds", "1"}}), "");
  EXPECT_NE(usage_message("experiment", {{"data", data}, {"out", "x"}, {"folds", "ten"}}), "");
}

TEST_F(ConfigTest, MinimalConfigGetsDocumentedDefaults) {
  auto cfg = validate_config("stats", {{"data", data}});
  // the defaults table in README.md
  const std::map<std::string, std::string> documented = {
      {"seed", "1"},           {"folds", "10"},          {"stratified", "false"},   {"paper_leakage", "false"},
      {"top", "10"},           {"max_distance", "0"},    {"bl_k", "100"},           {"min_text_length", "1"},
      {"synthesize_ids", "false"}, {"strict", "false"},  {"w2v.dim", "100"},        {"w2v.window", "5"},
      {"w2v.negatives", "5"},  {"w2v.min_count", "5"},   {"w2v.epochs", "5"},       {"w2v.learning_rate", "0.025"},
      {"w2v.subsample", "0"},  {"w2v.threads", "1"},     {"mlr.learning_rate", "0.1"}, {"mlr.l2", "0.0001"},
      {"mlr.epochs", "20"},    {"mlr.batch_size", "256"}, {"mlr.standardize", "true"}, {"synth.preset", "acceptance"},
      {"synth.per_domain", "5000"}, {"synth.scarce", "200"}, {"threads", "1"},
  };
  for (const auto& [key, value] : documented) EXPECT_EQ(cfg.resolved.at(key), value) << key;

  EXPECT_EQ(cfg.seed, 1u);
  EXPECT_EQ(cfg.folds, 10u);
  EXPECT_EQ(cfg.bl_k, 100u);
  EXPECT_EQ(cfg.w2v.dim, 100);
  EXPECT_EQ(cfg.w2v.window, 5);
  EXPECT_EQ(cfg.w2v.negatives, 5);
  EXPECT_EQ(cfg.w2v.min_count, 5);
  EXPECT_EQ(cfg.w2v.epochs, 5);
  EXPECT_DOUBLE_EQ(cfg.w2v.learning_rate, 0.025);
  EXPECT_DOUBLE_EQ(cfg.mlr.learning_rate, 0.1);
  EXPECT_DOUBLE_EQ(cfg.mlr.l2, 1e-4);
  EXPECT_EQ(cfg.mlr.epochs, 20);
  EXPECT_EQ(cfg.mlr.batch_size, 256u);
  EXPECT_TRUE(cfg.mlr.standardize);
  EXPECT_FALSE(cfg.paper_leakage);
  EXPECT_EQ(cfg.threads, 1u);
}

TEST_F(ConfigTest, NamedSubSeedsDeriveFromTheTopLevelSeed) {
  auto a = validate_config("stats", {{"data", data}, {"seed", "7"}});
  auto b = validate_config("stats", {{"data", data}, {"seed", "8"}});
  EXPECT_EQ(a.w2v.seed, util::derive_seed(7, "embedding"));
  EXPECT_EQ(a.mlr.seed, util::derive_seed(7, "mlr"));
  EXPECT_NE(a.w2v.seed, b.w2v.seed);
  EXPECT_NE(a.w2v.seed, a.mlr.seed);
}

TEST_F(ConfigTest, ExperimentDefaultsToEverySchemeAndSetting) {
  auto cfg = validate_config("experiment", {{"data", data}, {"out", dir.file("res")}});
  EXPECT_EQ(cfg.schemes.size(), 4u);
  EXPECT_EQ(cfg.settings.size(), 2u);
  cfg = validate_config("experiment",
                        {{"data", data}, {"out", "r"}, {"scheme", "w2v_pape, bl"}, {"setting", "cross-domain"}});
  EXPECT_EQ(cfg.schemes, (std::vector<FeatureScheme>{FeatureScheme::w2v_pape, FeatureScheme::bl}));
  EXPECT_EQ(cfg.settings, (std::vector<Setting>{Setting::cross_domain}));
}

TEST_F(ConfigTest, PerCommandRequirements) {
  EXPECT_NE(usage_message("experiment", {{"data", data}}).find("\"out\""), std::string::npos);
  EXPECT_NE(usage_message("train", {{"data", data}, {"out", "m.json"}}).find("\"scheme\""), std::string::npos);
  EXPECT_NE(usage_message("featurize", {{"data", data}, {"scheme", "w2v"}}).find("\"embeddings\""), std::string::npos);
  EXPECT_NE(usage_message("evaluate", {{"data", data}}).find("\"model\""), std::string::npos);
  EXPECT_EQ(usage_message("synth", {{"out", dir.file("s.jsonl")}}), "");
  EXPECT_EQ(usage_message("featurize", {{"data", data}, {"scheme", "bl"}}), "");
  EXPECT_NE(usage_message("explode", {{"data", data}}), "");
}

TEST_F(ConfigTest, BadValuesNameTheirKey) {
  for (auto [key, value] : std::vector<std::pair<std::string, std::string>>{{"w2v.dim", "0"},
                                                                             {"w2v.learning_rate", "fast"},
                                                                             {"mlr.l2", "-1"},
                                                                             {"stratified", "maybe"},
                                                                             {"seed", "-3"},
                                                                             {"scheme", "tfidf"},
                                                                             {"setting", "sideways"},
                                                                             {"synth.preset", "huge"}}) {
    auto msg = usage_message("stats", {{"data", data}, {key, value}});
    EXPECT_NE(msg, "") << key;
    EXPECT_NE(msg.find("\"" + key + "\""), std::string::npos) << msg;
  }
}

TEST_F(ConfigTest, ThreadsComeOnlyFromTheEnvironment) {
  ::setenv("CROSSRATE_THREADS", "3", 1);
  EXPECT_EQ(validate_config("stats", {{"data", data}}).threads, 3u);
  ::setenv("CROSSRATE_THREADS", "zero", 1);
  EXPECT_THROW(validate_config("stats", {{"data", data}}), UsageError);
  ::setenv("CROSSRATE_THREADS", "0", 1);
  EXPECT_THROW(validate_config("stats", {{"data", data}}), UsageError);
}

TEST(ConfigText, ParsesKeyValueLines) {
  auto raw = parse_config_text("# experiment\nseed = 42\n\nmlr.batch-size=64   # comment\n  paper_leakage = true\n");
  EXPECT_EQ(raw, (RawConfig{{"seed", "42"}, {"mlr.batch_size", "64"}, {"paper_leakage", "true"}}));
}

TEST(ConfigText, UnknownKeyReportsLine) {
  try {
    parse_config_text("seed = 1\nflux = 3\n");
    FAIL() << "expected a UsageError";
  } catch (const UsageError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("flux"), std::string::npos) << msg;
  }
  EXPECT_THROW(parse_config_text("just words\n"), UsageError);
  EXPECT_THROW(load_config_file("/nonexistent/run.conf"), UsageError);
}
