#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace clozegen {

/// Half-open byte range [begin, end) into a UTF-8 string.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  [[nodiscard]] std::size_t size() const { return end - begin; }
  [[nodiscard]] bool empty() const { return end <= begin; }
  friend bool operator==(const CharSpan&, const CharSpan&) = default;
};

/// Half-open token index range [begin, end).
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  [[nodiscard]] std::size_t size() const { return end - begin; }
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

namespace text {

[[nodiscard]] bool is_space(char c);

/// Strips leading and trailing ASCII whitespace.
[[nodiscard]] std::string_view trim(std::string_view s);

/// Lowercases ASCII letters, collapses whitespace runs to one space, trims.
/// Used wherever two surface strings are compared for identity.
[[nodiscard]] std::string normalize(std::string_view s);

[[nodiscard]] std::vector<std::string> split_whitespace(std::string_view s);

[[nodiscard]] std::string join(std::span<const std::string> parts, std::string_view sep);

/// Returns `s` with `span` replaced by `replacement`.
[[nodiscard]] std::string splice(std::string_view s, CharSpan span, std::string_view replacement);

/// Converts a code point offset into a byte offset; throws SpanError past the end.
[[nodiscard]] std::size_t byte_offset_of_codepoint(std::string_view utf8, std::size_t codepoint_index);

}  // namespace text

/// Seeded generator used for every random choice in the library.
/// mt19937_64 has a fully specified output sequence, and uniform_index below
/// does not rely on implementation-defined distributions, so seeded results are
/// reproducible across standard libraries.
using Rng = std::mt19937_64;

/// Uniform integer in [0, bound) by rejection sampling. bound must be > 0.
[[nodiscard]] std::uint64_t uniform_index(Rng& rng, std::uint64_t bound);

}  // namespace clozegen
