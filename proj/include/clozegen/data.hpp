#pragma once

// Dataset ingestion: CLOTH cloze passages, context/answer pair files, and
// context preparation for evaluation.

#include "clozegen/backends.hpp"
#include "clozegen/text.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace clozegen {

/// Blank marker used by CLOTH articles: a standalone run of underscores.
inline constexpr std::string_view kBlankMarker = "_";

struct GoldQuestion {
  /// Four options in file order.
  std::vector<std::string> options;
  std::size_t answer_index = 0;

  [[nodiscard]] const std::string& answer() const { return options.at(answer_index); }
  [[nodiscard]] std::vector<std::string> distractors() const;
};

struct ClozePassage {
  std::string id;
  std::string text_with_blanks;
  std::vector<GoldQuestion> questions;
};

struct ContextAnswerPair {
  std::string id;
  std::string context;
  /// Byte offsets.
  CharSpan answer_span;

  [[nodiscard]] std::string answer() const { return context.substr(answer_span.begin, answer_span.size()); }
};

enum class InputMode { passage, sentence };
enum class PrefillMode { model, gold, none };

[[nodiscard]] std::string_view to_string(InputMode mode);
[[nodiscard]] std::string_view to_string(PrefillMode mode);
[[nodiscard]] InputMode parse_input_mode(std::string_view s);
[[nodiscard]] PrefillMode parse_prefill_mode(std::string_view s);

struct PreparedContext {
  /// Exactly one blank marker remains, at blank_span.
  std::string context;
  CharSpan blank_span;
  InputMode input_mode = InputMode::passage;
  PrefillMode prefill_mode = PrefillMode::gold;

  /// Context with `answer` written into the blank, and the answer's span.
  [[nodiscard]] std::pair<std::string, CharSpan> with_answer(std::string_view answer) const;
};

/// Byte spans of every blank marker, left to right.
[[nodiscard]] std::vector<CharSpan> find_blanks(std::string_view text);

/// Parses one CLOTH document ({"article", "options", "answers"[, "source"]}).
/// Throws ParseError naming the offending field.
[[nodiscard]] ClozePassage parse_cloth(const nlohmann::json& doc, std::string id);
[[nodiscard]] nlohmann::json to_cloth_json(const ClozePassage& passage);

/// A .json file yields one passage; a directory yields every *.json file
/// below it, sorted by path.
[[nodiscard]] std::vector<ClozePassage> load_cloth(const std::filesystem::path& path);

/// Fills every blank except `question_index` and, in sentence mode, cuts the
/// text down to the sentence holding the target blank. Model prefill commits
/// top-1 fills one blank at a time, left to right. Prefill `none` is only
/// valid when no other blank remains in the chosen input. Throws ConfigError
/// when model prefill has no backend or `none` meets another blank.
[[nodiscard]] PreparedContext prepare_context(const ClozePassage& passage, std::size_t question_index,
                                              InputMode input_mode, PrefillMode prefill_mode,
                                              MaskedLanguageModel* mlm = nullptr);

struct SentenceExtraction {
  std::string sentence;
  /// Span re-based into `sentence`.
  CharSpan span;
  /// The span crossed a sentence boundary; `sentence` is the union of the
  /// touched sentences.
  bool straddles_boundary = false;
};

/// Sentence containing `span`. Boundaries are '.', '!' or '?' (optionally
/// followed by closing quotes or brackets) and then whitespace, except after
/// common abbreviations and single-letter initials, or before a lowercase word.
[[nodiscard]] SentenceExtraction extract_sentence(std::string_view text, CharSpan span);

/// One JSON-lines record: {"id","context","answer_start","answer_end"} with
/// code point offsets, or {"id","context","answer_text"} resolved to its first
/// occurrence. `warning` is set when answer_text occurs more than once.
/// Throws ParseError, SpanError or ResolveError.
[[nodiscard]] ContextAnswerPair parse_pair(const nlohmann::json& record, std::string* warning = nullptr);

struct PairFile {
  std::vector<ContextAnswerPair> pairs;
  std::vector<std::string> warnings;
};

[[nodiscard]] PairFile load_pairs(const std::filesystem::path& path);

}  // namespace clozegen
