#include "clozegen/text.hpp"

#include "clozegen/errors.hpp"

#include <limits>

namespace clozegen {
namespace text {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) parts.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return parts;
}

std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::string splice(std::string_view s, CharSpan span, std::string_view replacement) {
  if (span.begin > span.end || span.end > s.size()) {
    throw SpanError("span [" + std::to_string(span.begin) + ", " + std::to_string(span.end) +
                    ") outside text of length " + std::to_string(s.size()));
  }
  std::string out;
  out.reserve(s.size() - span.size() + replacement.size());
  out.append(s.substr(0, span.begin));
  out.append(replacement);
  out.append(s.substr(span.end));
  return out;
}

std::size_t byte_offset_of_codepoint(std::string_view utf8, std::size_t codepoint_index) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < utf8.size(); ++i) {
    // Continuation bytes look like 10xxxxxx.
    if ((static_cast<unsigned char>(utf8[i]) & 0xC0) == 0x80) continue;
    if (seen == codepoint_index) return i;
    ++seen;
  }
  if (seen == codepoint_index) return utf8.size();
  throw SpanError("code point offset " + std::to_string(codepoint_index) + " past end of text (" +
                  std::to_string(seen) + " code points)");
}

}  // namespace text

std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
  if (bound == 0) throw ContractViolation("uniform_index: bound must be positive");
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  // Largest multiple of bound representable; draws above it are rejected.
  const std::uint64_t limit = kMax - (kMax % bound + 1) % bound;
  std::uint64_t draw = 0;
  do {
    draw = rng();
  } while (draw > limit);
  return draw % bound;
}

}  // namespace clozegen
