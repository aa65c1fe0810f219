#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace instimpact {

/// Invalid configuration (bad field, out-of-range parameter). CLI exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Bad input data (malformed record, dangling reference, missing file). CLI exit code 2.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Broken internal invariant. CLI exit code 3.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

// FNV-1a; used for schema fingerprints and the run manifest's config hash.
inline std::uint64_t fnv1a64(std::string_view text,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

/// Shortest decimal form that parses back to the identical double.
inline std::string format_exact(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Fixed-point form used in report tables.
inline std::string format_fixed(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline double parse_double_exact(std::string_view text, bool& ok) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  ok = res.ec == std::errc{} && res.ptr == text.data() + text.size();
  return v;
}

/// Sums values in ascending order so the result is independent of input order.
inline double ordered_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

namespace stats {

// The small fixed-size aggregates used all over the feature set. All of them
// require a non-empty input; callers handle the empty case explicitly.

inline double sum(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

inline double max(std::span<const double> v) {
  if (v.empty()) throw InternalError("stats::max of empty span");
  return *std::max_element(v.begin(), v.end());
}

inline double min(std::span<const double> v) {
  if (v.empty()) throw InternalError("stats::min of empty span");
  return *std::min_element(v.begin(), v.end());
}

inline double mean(std::span<const double> v) {
  if (v.empty()) throw InternalError("stats::mean of empty span");
  return sum(v) / static_cast<double>(v.size());
}

/// Median; even-length inputs use the mean of the two middle values.
inline double median(std::span<const double> v) {
  if (v.empty()) throw InternalError("stats::median of empty span");
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  if (n % 2 == 1) return s[n / 2];
  return (s[n / 2 - 1] + s[n / 2]) / 2.0;
}

/// Population standard deviation (divide by n).
inline double pop_stddev(std::span<const double> v) {
  if (v.empty()) throw InternalError("stats::pop_stddev of empty span");
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

}  // namespace stats

}  // namespace instimpact
