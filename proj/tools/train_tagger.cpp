// Trains the averaged perceptron tagger from word/TAG corpora and writes a model file.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "crossrate/tagger.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Train the crossrate part-of-speech tagger"};
  std::vector<std::string> corpora;
  std::string out_path;
  crossrate::PerceptronTagger::TrainOptions opts;
  std::size_t holdout = 0;
  app.add_option("corpora", corpora, "word/TAG corpus files, one sentence per line")->required()->check(CLI::ExistingFile);
  app.add_option("-o,--out", out_path, "output model path")->required();
  app.add_option("--iterations", opts.iterations, "training passes")->check(CLI::PositiveNumber);
  app.add_option("--seed", opts.seed, "shuffle seed");
  app.add_option("--prune", opts.prune_below, "drop averaged weights below this magnitude");
  app.add_option("--holdout", holdout, "hold out every N-th sentence for an accuracy report (0 = off)");
  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<crossrate::PerceptronTagger::TaggedSentence> train, test;
    for (const auto& path : corpora) {
      std::ifstream in(path);
      auto sents = crossrate::PerceptronTagger::parse_slash_corpus(in);
      for (std::size_t i = 0; i < sents.size(); ++i)
        ((holdout > 0 && i % holdout == 0) ? test : train).push_back(std::move(sents[i]));
    }
    auto model = crossrate::PerceptronTagger::train(train, opts);
    if (!test.empty()) {
      std::size_t right = 0, total = 0, coarse_right = 0;
      for (const auto& s : test) {
        std::vector<std::string> words;
        for (const auto& wt : s) words.push_back(wt.first);
        auto tags = model.tag_words(words);
        for (std::size_t i = 0; i < s.size(); ++i, ++total) {
          right += tags[i] == s[i].second;
          coarse_right += model.collapse(tags[i]) == model.collapse(s[i].second);
        }
      }
      std::cerr << "holdout accuracy: fine " << static_cast<double>(right) / static_cast<double>(total) << ", coarse "
                << static_cast<double>(coarse_right) / static_cast<double>(total) << " over " << total << " tokens\n";
    }
    std::ofstream out(out_path);
    model.save(out);
    std::cerr << "features: " << model.feature_count() << ", classes: " << model.classes().size() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
