#include "sde/util.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "sde/error.hpp"

namespace sde {

std::string render3(double value) {
  const bool negative = std::signbit(value) && value != 0.0;
  const double scaled = std::fabs(value) * 1000.0;
  double integral = 0.0;
  const double frac = std::modf(scaled, &integral);
  auto units = static_cast<long long>(integral);
  // Ties go to the even neighbour; everything the suite aggregates is a small
  // dyadic rational, so scaling by 1000 is exact and the comparison is safe.
  if (frac > 0.5) {
    ++units;
  } else if (frac == 0.5 && (units % 2 != 0)) {
    ++units;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%lld.%03lld", negative && units != 0 ? "-" : "",
                units / 1000, units % 1000);
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string content_digest(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string utc_now_iso8601() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SdeError(ErrorCode::IoError, "cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  if (in.bad()) throw SdeError(ErrorCode::IoError, "read failure on " + path);
  return out.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SdeError(ErrorCode::IoError, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw SdeError(ErrorCode::IoError, "write failure on " + path);
}

namespace {

bool word_char(unsigned char c) {
  return std::isalnum(c) != 0 || c == '_';
}

}  // namespace

bool contains_word_ci(std::string_view haystack, std::string_view needle) {
  if (needle.empty() || haystack.size() < needle.size()) return false;
  const std::string hay = to_lower(haystack);
  const std::string pat = to_lower(needle);
  std::size_t pos = 0;
  while ((pos = hay.find(pat, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !word_char(hay[pos - 1]);
    const std::size_t end = pos + pat.size();
    const bool right_ok = end == hay.size() || !word_char(hay[end]);
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace sde
