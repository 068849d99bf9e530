#pragma once

// Review ingestion, validation, filtering and star-rating summaries.

#include <array>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "crossrate/common.hpp"

namespace crossrate {

inline constexpr int kMinStars = 1;
inline constexpr int kMaxStars = 5;
inline constexpr int kNumClasses = kMaxStars - kMinStars + 1;

struct Review {
  std::string id;
  std::string text;
  int stars = 0;
  std::string domain;
  std::string source;

  friend bool operator==(const Review&, const Review&) = default;
};

/// Immutable, id-unique collection of reviews.
class ReviewSet {
public:
  ReviewSet() = default;

  /// Throws DataError on duplicate ids, invalid stars or blank text.
  explicit ReviewSet(std::vector<Review> reviews) : reviews_(std::move(reviews)) {
    std::unordered_set<std::string> ids;
    ids.reserve(reviews_.size());
    for (const auto& r : reviews_) {
      if (r.stars < kMinStars || r.stars > kMaxStars)
        throw DataError("review " + r.id + ": stars out of range");
      if (util::trim(r.text).empty()) throw DataError("review " + r.id + ": empty text");
      if (!ids.insert(r.id).second) throw DataError("duplicate review id: " + r.id);
      domains_.insert(r.domain);
    }
  }

  const std::vector<Review>& reviews() const { return reviews_; }
  const std::set<std::string>& domains() const { return domains_; }
  std::size_t size() const { return reviews_.size(); }
  bool empty() const { return reviews_.empty(); }
  const Review& operator[](std::size_t i) const { return reviews_[i]; }
  auto begin() const { return reviews_.begin(); }
  auto end() const { return reviews_.end(); }

  friend bool operator==(const ReviewSet& a, const ReviewSet& b) { return a.reviews_ == b.reviews_; }

private:
  std::vector<Review> reviews_;
  std::set<std::string> domains_;
};

struct Rejection {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct LoadOptions {
  /// When non-empty, records whose domain is not listed are rejected.
  std::set<std::string> allowed_domains;
  /// Minimum trimmed text length in bytes; 1 keeps every non-blank review.
  std::size_t min_text_length = 1;
  /// Fill a missing id with synthesize_review_id() instead of rejecting the record.
  bool synthesize_missing_ids = false;
};

struct LoadResult {
  ReviewSet reviews;
  std::vector<Rejection> rejections;
  std::size_t total_lines = 0;  // non-blank lines considered
};

/// Stable id for records that arrive without one: hash of (source, text, stars).
inline std::string synthesize_review_id(std::string_view source, std::string_view text, int stars) {
  std::uint64_t h = util::fnv1a(source);
  h = util::fnv1a("\x1f", h);
  h = util::fnv1a(text, h);
  h = util::fnv1a("\x1f", h);
  h = util::fnv1a(std::to_string(stars), h);
  char buf[20];
  std::snprintf(buf, sizeof buf, "h%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

inline std::optional<std::string> string_field(const nlohmann::json& obj, const char* key, std::string& err) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    err = std::string("missing field \"") + key + "\"";
    return std::nullopt;
  }
  if (!it->is_string()) {
    err = std::string("field \"") + key + "\" must be a string";
    return std::nullopt;
  }
  return it->get<std::string>();
}

/// Parses and validates one JSONL record. Returns the error message on failure.
inline std::optional<Review> parse_review_line(std::string_view line, const LoadOptions& opts, std::string& err) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    err = std::string("malformed JSON: ") + e.what();
    return std::nullopt;
  }
  if (!obj.is_object()) {
    err = "record is not a JSON object";
    return std::nullopt;
  }

  Review r;
  auto stars_it = obj.find("stars");
  if (stars_it == obj.end()) {
    err = "missing field \"stars\"";
    return std::nullopt;
  }
  if (!stars_it->is_number_integer()) {
    err = "stars must be an integer";
    return std::nullopt;
  }
  auto stars = stars_it->get<long long>();
  if (stars < kMinStars || stars > kMaxStars) {
    err = "stars out of range";
    return std::nullopt;
  }
  r.stars = static_cast<int>(stars);

  auto text = string_field(obj, "text", err);
  if (!text) return std::nullopt;
  r.text = std::move(*text);
  auto trimmed = util::trim(r.text);
  if (trimmed.empty()) {
    err = "empty text";
    return std::nullopt;
  }
  if (trimmed.size() < opts.min_text_length) {
    err = "text shorter than min_text_length";
    return std::nullopt;
  }

  auto domain = string_field(obj, "domain", err);
  if (!domain) return std::nullopt;
  r.domain = std::move(*domain);
  if (r.domain.empty()) {
    err = "empty domain";
    return std::nullopt;
  }
  if (!opts.allowed_domains.empty() && !opts.allowed_domains.contains(r.domain)) {
    err = "domain \"" + r.domain + "\" not in configured domain set";
    return std::nullopt;
  }

  auto source = string_field(obj, "source", err);
  if (!source) return std::nullopt;
  r.source = std::move(*source);

  if (obj.contains("id") || !opts.synthesize_missing_ids) {
    auto id = string_field(obj, "id", err);
    if (!id) return std::nullopt;
    if (id->empty()) {
      err = "empty id";
      return std::nullopt;
    }
    r.id = std::move(*id);
  } else {
    r.id = synthesize_review_id(r.source, r.text, r.stars);
  }
  return r;
}

}  // namespace detail

/// Parses JSONL review records from a string. Invalid lines are reported in
/// LoadResult::rejections with their 1-based line number; blank lines are skipped.
inline LoadResult parse_reviews(std::string_view content, const LoadOptions& opts = {}) {
  LoadResult result;
  std::vector<Review> reviews;
  std::unordered_set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    auto line = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? content.size() : nl + 1;
    ++line_no;
    if (util::trim(line).empty()) continue;
    ++result.total_lines;

    std::string err;
    auto review = detail::parse_review_line(line, opts, err);
    if (review && !ids.insert(review->id).second) {
      review.reset();
      err = "duplicate id";
    }
    if (!review) {
      result.rejections.push_back({line_no, err});
      continue;
    }
    reviews.push_back(std::move(*review));
  }
  result.reviews = ReviewSet(std::move(reviews));
  return result;
}

/// Reads a JSONL review file. Throws DataError when the file cannot be read.
inline LoadResult load_reviews(const std::string& path, const LoadOptions& opts = {}) {
  return parse_reviews(util::read_file(path), opts);
}

inline void write_reviews_jsonl(std::ostream& out, const ReviewSet& set) {
  for (const auto& r : set) {
    nlohmann::ordered_json obj;
    obj["id"] = r.id;
    obj["text"] = r.text;
    obj["stars"] = r.stars;
    obj["domain"] = r.domain;
    obj["source"] = r.source;
    out << obj.dump() << '\n';
  }
}

inline void write_rejections_csv(std::ostream& out, const std::vector<Rejection>& rejections) {
  out << "line,reason\n";
  for (const auto& r : rejections) out << r.line << ',' << util::csv_field(r.reason) << '\n';
}

inline ReviewSet filter_domain(const ReviewSet& set, std::string_view domain) {
  std::vector<Review> out;
  for (const auto& r : set)
    if (r.domain == domain) out.push_back(r);
  return ReviewSet(std::move(out));
}

/// Per-domain review count histogram over stars 1..5 (index 0 is one star).
using StarHistogram = std::map<std::string, std::array<std::size_t, kNumClasses>>;

inline StarHistogram star_distribution(const ReviewSet& set) {
  StarHistogram hist;
  for (const auto& r : set) hist[r.domain][static_cast<std::size_t>(r.stars - kMinStars)]++;
  return hist;
}

/// CSV with header domain,stars,count; every domain contributes five rows.
inline void write_star_distribution_csv(std::ostream& out, const StarHistogram& hist) {
  out << "domain,stars,count\n";
  for (const auto& [domain, counts] : hist)
    for (int s = kMinStars; s <= kMaxStars; ++s)
      out << util::csv_field(domain) << ',' << s << ',' << counts[static_cast<std::size_t>(s - kMinStars)] << '\n';
}

inline std::map<std::string, std::size_t> domain_counts(const ReviewSet& set) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : set) counts[r.domain]++;
  return counts;
}

}  // namespace crossrate
