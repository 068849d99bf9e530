#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crossrate {

inline constexpr std::string_view kVersion = "1.0.0";

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad input data: malformed records, inconsistent files, violated preconditions on data.
class DataError : public Error {
public:
  using Error::Error;
};

/// Bad invocation: invalid arguments, unknown options, out-of-range settings.
class UsageError : public Error {
public:
  using Error::Error;
};

namespace util {

inline char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

/// Lowercases ASCII letters; multi-byte UTF-8 sequences pass through unchanged.
inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
  return out;
}

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(s.substr(start));
      return parts;
    }
    parts.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives an independent 64-bit seed from a parent seed and a label (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t parent, std::string_view label, std::uint64_t index = 0) {
  std::uint64_t z = fnv1a(label, parent ^ 0x9e3779b97f4a7c15ULL) + index * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Quotes a CSV field when it contains a separator, quote or newline.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Fixed-precision decimal formatting used for every metric column in CSV output.
inline std::string format_fixed(double v, int digits = 6) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(digits);
  ss << v;
  return ss.str();
}

/// Thread count from CROSSRATE_THREADS, defaulting to 1. Malformed values are usage errors.
inline unsigned thread_count_from_env() {
  const char* v = std::getenv("CROSSRATE_THREADS");
  if (v == nullptr || *v == '\0') return 1;
  char* end = nullptr;
  long n = std::strtol(v, &end, 10);
  if (end == v || *end != '\0' || n < 1)
    throw UsageError(std::string("CROSSRATE_THREADS must be a positive integer, got \"") + v + "\"");
  return static_cast<unsigned>(std::min<long>(n, 256));
}

}  // namespace util
}  // namespace crossrate
