#pragma once

// Seeded synthetic review corpora. Each review is built from opinion segments that pair a
// sentiment adjective (shared across domains) with a domain-specific target noun, plus
// optional neutral segments. The star label is a fixed function of the planted counts:
//   stars = clamp(3 + round(2 (pos - neg) / (pos + neg + 1)), 1, 5)

#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "crossrate/common.hpp"
#include "crossrate/corpus.hpp"

namespace crossrate {

struct SynthDomain {
  std::string name;
  std::size_t reviews = 0;
  std::vector<std::string> targets;  // non-sentiment nouns, disjoint across domains
};

struct SynthSpec {
  std::vector<SynthDomain> domains;
  std::vector<std::string> positive_words;
  std::vector<std::string> negative_words;
  std::size_t min_opinions = 1;
  std::size_t max_opinions = 6;
  double neutral_probability = 0.5;  // chance of a neutral segment after each opinion segment
  /// Zipf exponent of sentiment-word usage. Every domain ranks the shared words in its own
  /// seeded order, so domains favour different words from the same lists.
  double sentiment_zipf = 1.0;
  /// Each review draws its share of positive opinions from Beta(a, a); a = 1 is uniform and
  /// smaller values push reviews toward all-positive or all-negative.
  double tone_concentration = 1.0;
  /// Chance that an opinion segment stacks a second sentiment word of the same polarity
  /// ("a friendly helpful waiter"); both count toward the rating.
  double stacked_probability = 0.0;
  std::string source = "synthetic";

  /// Throws DataError when the spec cannot generate a valid corpus.
  void validate() const;

  /// Five domains: four with `large` reviews and "dentists" with `scarce` reviews.
  static SynthSpec acceptance(std::size_t large = 5000, std::size_t scarce = 200);
  /// Twelve domains with `per_domain` reviews each.
  static SynthSpec twelve_domains(std::size_t per_domain);
};

/// The generator's rating rule.
inline int synth_rating(std::size_t positives, std::size_t negatives) {
  const double p = static_cast<double>(positives), n = static_cast<double>(negatives);
  const long shift = std::lround(2.0 * (p - n) / (p + n + 1.0));
  return static_cast<int>(std::clamp<long>(3 + shift, kMinStars, kMaxStars));
}

namespace detail {

inline const std::vector<std::string>& synth_positive_words() {
  static const std::vector<std::string> words = {
      "good",        "great",        "excellent",   "amazing",    "awesome",     "wonderful",   "fantastic",
      "nice",        "perfect",      "lovely",      "friendly",   "delicious",   "clean",       "comfortable",
      "helpful",     "beautiful",    "pleasant",    "superb",     "outstanding", "terrific",    "fabulous",
      "impressive",  "enjoyable",    "reliable",    "affordable", "attractive",  "brilliant",   "charming",
      "cozy",        "elegant",      "exceptional", "gorgeous",   "incredible",  "marvelous",   "neat",
      "polite",      "remarkable",   "smooth",      "spacious",   "stylish",     "sturdy",      "warm",
      "efficient",   "gentle",       "generous",    "courteous",  "attentive",   "cheerful",    "classy",
      "convenient",  "durable",      "flawless",    "handy",      "ideal",       "inexpensive", "luxurious",
      "magnificent", "memorable",    "pleasing",    "prompt",     "refreshing",  "sensational", "spectacular",
      "splendid",    "stunning",     "supportive",  "thoughtful", "trustworthy", "valuable",    "vibrant",
      "wholesome",   "capable",      "adorable",    "accurate",   "fresh",       "tidy",        "satisfying",
      "peaceful",    "pleasurable",  "delightful",  "exquisite",  "superior",    "glorious",    "divine",
      "heavenly",    "knowledgeable", "honest",     "fast",       "safe",        "quiet"};
  return words;
}

inline const std::vector<std::string>& synth_negative_words() {
  static const std::vector<std::string> words = {
      "bad",        "terrible",     "awful",       "horrible",   "poor",       "rude",       "dirty",
      "disgusting", "slow",         "broken",      "cheap",      "cold",       "disappointing", "dreadful",
      "filthy",     "greasy",       "gross",       "lousy",      "mediocre",   "noisy",      "overpriced",
      "pathetic",   "smelly",       "stale",       "unfriendly", "unhelpful",  "unpleasant", "useless",
      "worthless",  "bland",        "boring",      "annoying",   "awkward",    "careless",   "crappy",
      "defective",  "faulty",       "flimsy",      "frustrating", "harsh",     "inadequate", "inferior",
      "messy",      "miserable",    "nasty",       "obnoxious",  "painful",    "rotten",     "sloppy",
      "sluggish",   "sticky",       "tacky",       "tedious",    "ugly",       "uncomfortable", "unreliable",
      "weak",       "wretched",     "arrogant",    "shabby",     "cramped",    "dull",       "expensive",
      "incompetent", "dismal",      "dreary",      "clumsy",     "dusty",      "shoddy",     "unacceptable",
      "unbearable", "inept",        "rusty",       "leaky",      "mushy",      "chaotic",    "hostile",
      "stuffy",     "loud"};
  return words;
}

struct DomainTargets {
  const char* name;
  std::vector<std::string> targets;
};

inline const std::vector<DomainTargets>& synth_domain_targets() {
  static const std::vector<DomainTargets> table = {
      {"restaurants", {"food", "service", "waiter", "menu", "pizza", "burger", "dessert", "table", "kitchen",
                       "steak", "salad", "soup", "chef", "pasta", "sauce", "portion"}},
      {"hotels", {"hotel", "room", "bed", "lobby", "pool", "bathroom", "receptionist", "shower", "balcony", "towel",
                  "pillow", "elevator", "suite", "carpet", "mattress", "hallway"}},
      {"books", {"book", "novel", "setting", "author", "chapter", "story", "character", "ending", "narrator", "prose",
                 "dialogue", "sequel", "paperback", "cover", "protagonist", "villain"}},
      {"clothing", {"shoes", "shirt", "jacket", "fabric", "dress", "jeans", "sweater", "boots", "sleeve", "collar",
                    "zipper", "coat", "sock", "scarf", "hat", "belt"}},
      {"dentists", {"dentist", "office", "teeth", "hygienist", "filling", "crown", "cleaning", "appointment",
                    "orthodontist", "implant", "gum", "x-ray", "brace", "molar", "checkup", "drill"}},
      {"attractions", {"museum", "tour", "exhibit", "view", "guide", "park", "statue", "garden", "castle", "gallery",
                       "tower", "bridge", "monument", "ticket", "trail", "aquarium"}},
      {"homeware", {"blender", "kettle", "toaster", "vacuum", "mixer", "oven", "skillet", "grater", "lid", "handle",
                    "cord", "blade", "filter", "mug", "spatula", "microwave"}},
      {"nightlife", {"bar", "club", "bartender", "cocktail", "beer", "dj", "dancefloor", "bouncer", "lounge", "pub",
                     "tap", "jukebox", "patio", "shot", "wine", "crowd"}},
      {"events", {"concert", "festival", "venue", "stage", "band", "ticketing", "parking", "usher", "seat", "show",
                  "performer", "sound", "lighting", "queue", "wristband", "booth"}},
      {"casinos", {"casino", "dealer", "slot", "poker", "blackjack", "roulette", "chip", "cashier", "buffet",
                   "jackpot", "croupier", "floor", "machine", "payout", "keno", "bingo"}},
      {"hair salons", {"hair", "salon", "stylist", "haircut", "color", "shampoo", "blowout", "trim", "highlight",
                       "perm", "barber", "fringe", "scalp", "curl", "braid", "dryer"}},
      {"resorts", {"resort", "beach", "cabana", "spa", "river", "villa", "bungalow", "sauna", "jacuzzi", "lagoon",
                   "concierge", "shuttle", "marina", "golf", "snorkel", "hammock"}},
  };
  return table;
}

inline const std::vector<std::string>& synth_neutral_segments() {
  static const std::vector<std::string> segments = {
      "we came here on a monday",  "i went with my family",        "we visited last week",
      "it was our second time",    "my sister told me about it",   "we stayed for two hours",
      "i ordered online",          "we arrived around noon",       "my friend picked the place",
      "i went there after lunch",   "we drove from the city",       "it took about an hour"};
  return segments;
}

inline const std::vector<std::string>& synth_templates() {
  // {S} sentiment word, {T} target noun
  static const std::vector<std::string> templates = {
      "the {T} was {S}", "the {T} is {S}", "{S} {T}",           "a {S} {T}",
      "the {T} was really {S}", "the {T} here is {S}", "we found the {T} {S}", "very {S} {T}"};
  return templates;
}

inline std::string fill_template(const std::string& tpl, const std::string& s, const std::string& t) {
  std::string out;
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    if (tpl.compare(i, 3, "{S}") == 0) {
      out += s;
      i += 2;
    } else if (tpl.compare(i, 3, "{T}") == 0) {
      out += t;
      i += 2;
    } else {
      out += tpl[i];
    }
  }
  return out;
}

/// Zipf sampler over [0, n) with probability proportional to 1 / (rank + 1)^s.
class ZipfSampler {
public:
  ZipfSampler(std::size_t n, double s) {
    std::vector<double> w(n);
    for (std::size_t r = 0; r < n; ++r) w[r] = 1.0 / std::pow(static_cast<double>(r + 1), s);
    dist_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }
  template <class Rng>
  std::size_t operator()(Rng& rng) {
    return dist_(rng);
  }

private:
  std::discrete_distribution<std::size_t> dist_;
};

}  // namespace detail

inline void SynthSpec::validate() const {
  if (domains.size() < 2) throw DataError("synthetic spec needs at least two domains");
  if (positive_words.empty() || negative_words.empty()) throw DataError("synthetic spec needs sentiment words");
  if (min_opinions < 1 || min_opinions > max_opinions) throw DataError("synthetic spec has bad opinion range");
  if (neutral_probability < 0.0 || neutral_probability > 1.0)
    throw DataError("synthetic neutral_probability must be in [0, 1]");
  if (!(tone_concentration > 0.0)) throw DataError("synthetic tone_concentration must be > 0");
  if (stacked_probability < 0.0 || stacked_probability > 1.0)
    throw DataError("synthetic stacked_probability must be in [0, 1]");
  std::set<std::string> sentiment(positive_words.begin(), positive_words.end());
  for (const auto& w : negative_words)
    if (!sentiment.insert(w).second) throw DataError("word is both positive and negative: " + w);
  std::set<std::string> names, targets;
  for (const auto& d : domains) {
    if (d.name.empty()) throw DataError("synthetic domain without a name");
    if (!names.insert(d.name).second) throw DataError("duplicate synthetic domain: " + d.name);
    if (d.targets.empty()) throw DataError("synthetic domain without targets: " + d.name);
    for (const auto& t : d.targets) {
      if (sentiment.contains(t)) throw DataError("target is a sentiment word: " + t);
      if (!targets.insert(t).second) throw DataError("target shared across domains: " + t);
    }
  }
}

inline SynthSpec SynthSpec::acceptance(std::size_t large, std::size_t scarce) {
  SynthSpec spec;
  spec.positive_words = detail::synth_positive_words();
  spec.negative_words = detail::synth_negative_words();
  spec.tone_concentration = 0.3;
  spec.stacked_probability = 0.5;
  for (const auto& d : detail::synth_domain_targets()) {
    std::string name = d.name;
    if (name == "restaurants" || name == "hotels" || name == "books" || name == "clothing")
      spec.domains.push_back({name, large, d.targets});
    else if (name == "dentists")
      spec.domains.push_back({name, scarce, d.targets});
  }
  return spec;
}

inline SynthSpec SynthSpec::twelve_domains(std::size_t per_domain) {
  SynthSpec spec;
  spec.positive_words = detail::synth_positive_words();
  spec.negative_words = detail::synth_negative_words();
  for (const auto& d : detail::synth_domain_targets()) spec.domains.push_back({d.name, per_domain, d.targets});
  return spec;
}

struct SynthReviewPlan {
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// Generates the corpus. Ids are "<domain>-<n>" with spaces replaced by '_'.
inline ReviewSet synth_corpus(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  const auto& templates = detail::synth_templates();
  const auto& neutral = detail::synth_neutral_segments();
  static const std::vector<std::string> joiners = {", ", ". ", " and ", " but ", "; "};

  std::vector<Review> reviews;
  for (const auto& dom : spec.domains) {
    std::mt19937_64 rng(util::derive_seed(seed, "synth:" + dom.name));
    // per-domain preference order over the shared sentiment words
    auto pos_order = spec.positive_words, neg_order = spec.negative_words;
    std::shuffle(pos_order.begin(), pos_order.end(), rng);
    std::shuffle(neg_order.begin(), neg_order.end(), rng);
    detail::ZipfSampler pos_pick(pos_order.size(), spec.sentiment_zipf), neg_pick(neg_order.size(), spec.sentiment_zipf);
    std::uniform_int_distribution<std::size_t> n_opinions(spec.min_opinions, spec.max_opinions);
    std::uniform_int_distribution<std::size_t> pick_target(0, dom.targets.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_template(0, templates.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_neutral(0, neutral.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_joiner(0, joiners.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::gamma_distribution<double> tone_half(spec.tone_concentration, 1.0);

    std::string id_prefix = dom.name;
    std::replace(id_prefix.begin(), id_prefix.end(), ' ', '_');
    for (std::size_t r = 0; r < dom.reviews; ++r) {
      const double ga = tone_half(rng), gb = tone_half(rng);
      const double tone = ga + gb > 0.0 ? ga / (ga + gb) : 0.5;
      const std::size_t m = n_opinions(rng);
      std::vector<std::string> segments;
      std::size_t pos = 0, neg = 0;
      for (std::size_t k = 0; k < m; ++k) {
        const bool positive = unit(rng) < tone;
        auto draw = [&] { return positive ? pos_order[pos_pick(rng)] : neg_order[neg_pick(rng)]; };
        std::string s = draw();
        (positive ? pos : neg)++;
        if (unit(rng) < spec.stacked_probability) {
          s += ' ' + draw();
          (positive ? pos : neg)++;
        }
        segments.push_back(detail::fill_template(templates[pick_template(rng)], s, dom.targets[pick_target(rng)]));
        if (unit(rng) < spec.neutral_probability) segments.push_back(neutral[pick_neutral(rng)]);
      }
      std::shuffle(segments.begin(), segments.end(), rng);
      std::string text;
      for (std::size_t k = 0; k < segments.size(); ++k) {
        if (k > 0) text += joiners[pick_joiner(rng)];
        text += segments[k];
      }
      text += '.';
      reviews.push_back({id_prefix + "-" + std::to_string(r + 1), std::move(text), synth_rating(pos, neg), dom.name,
                         spec.source});
    }
  }
  return ReviewSet(std::move(reviews));
}

/// Labelled Gaussian blobs for classifier checks: class c (stars c + 1) is centred at
/// `separation * e_c` in the first five coordinates, with unit-variance noise everywhere.
struct Blobs {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
};

inline Blobs synth_blobs(std::size_t per_class, std::size_t dim, double separation, std::uint64_t seed) {
  if (dim < static_cast<std::size_t>(kNumClasses)) throw DataError("blobs need at least 5 dimensions");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  Blobs b;
  for (int c = 0; c < kNumClasses; ++c)
    for (std::size_t i = 0; i < per_class; ++i) {
      std::vector<double> x(dim);
      for (auto& v : x) v = noise(rng);
      x[static_cast<std::size_t>(c)] += separation;
      b.features.push_back(std::move(x));
      b.labels.push_back(c + kMinStars);
    }
  return b;
}

}  // namespace crossrate
