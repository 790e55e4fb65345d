// Small shared helpers: fixed-point rendering, stable hashing, timestamps,
// whole-file IO.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace sde {

// Renders a value with exactly three decimals, rounding half to even.
// All report and table numerics go through this.
std::string render3(double value);

// FNV-1a 64-bit. Stable across platforms and processes (unlike std::hash),
// which run artifacts and manifests rely on.
std::uint64_t fnv1a64(std::string_view bytes);

// fnv1a64 rendered as 16 lowercase hex digits.
std::string content_digest(std::string_view bytes);

// Current UTC time as ISO-8601 (seconds resolution).
std::string utc_now_iso8601();

// The timestamp written everywhere when --fixed-timestamp is in effect.
inline constexpr const char* kFixedTimestamp = "1970-01-01T00:00:00Z";

std::string read_file(const std::string& path);     // throws IoError
void write_file(const std::string& path, std::string_view bytes);

// Case-insensitive whole-word (or whole-phrase) containment. Boundaries are
// transitions between [A-Za-z0-9_] and anything else.
bool contains_word_ci(std::string_view haystack, std::string_view needle);

std::string to_lower(std::string_view s);

}  // namespace sde
