#pragma once

#include "clozegen/backends.hpp"
#include "clozegen/csg.hpp"
#include "clozegen/ds.hpp"
#include "clozegen/text.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace clozegen {

struct StageTimings {
  double tokenize_ms = 0.0;
  double generate_ms = 0.0;
  double rank_ms = 0.0;
  double select_ms = 0.0;
};

struct GenerationResult {
  DistractorSet distractor_set;
  /// Ranked, deduplicated, answer matches removed.
  std::vector<Candidate> all_candidates;
  GenerationConfig config_echo;
  StageTimings timing;
  std::vector<std::size_t> mask_counts;
  std::vector<std::string> warnings;
};

/// Token layout of a context with its answer span isolated: the prefix,
/// answer and suffix are tokenized separately so the answer always covers
/// whole tokens.
struct TokenizedContext {
  std::vector<std::string> tokens;
  TokenSpan answer;
};

[[nodiscard]] TokenizedContext tokenize_with_span(const MaskedLanguageModel& mlm, std::string_view context,
                                                  CharSpan answer_span);

/// Runs candidate generation for every sampled mask count, ranks the merged
/// candidates, and selects distractors by entailment against the sentence
/// holding the answer. `answer_span` is a byte range into `context`.
///
/// Throws SpanError for an empty or out-of-range span, ConfigError for an
/// invalid config; backend errors propagate.
[[nodiscard]] GenerationResult generate_distractors(std::string_view context, CharSpan answer_span,
                                                    const GenerationConfig& config, MaskedLanguageModel& mlm,
                                                    NliClassifier& nli);

struct ClozeItem {
  /// Context with the answer replaced by the blank marker.
  std::string stem;
  std::vector<std::string> options;
  std::size_t answer_index = 0;
  char answer_letter = 'A';
  /// Fewer than three distractors were available.
  bool underfilled = false;
};

inline constexpr std::string_view kClozeBlank = "_____";

/// Answer plus up to three distractors, shuffled by `shuffle_seed`.
/// Throws ContractViolation when the distractor set is empty.
[[nodiscard]] ClozeItem render_cloze(std::string_view context, CharSpan answer_span, const DistractorSet& distractors,
                                     std::uint64_t shuffle_seed);

}  // namespace clozegen
