#pragma once

// Distractor selection by two-way entailment elimination.

#include "clozegen/backends.hpp"
#include "clozegen/text.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace clozegen {

enum class EliminationStage { answer_entailment, pairwise_entailment };

[[nodiscard]] std::string_view to_string(EliminationStage stage);
/// Throws ParseError on an unknown tag.
[[nodiscard]] EliminationStage parse_stage(std::string_view tag);

/// Verdicts for (a, b) and (b, a).
struct TwoWayVerdict {
  NliLabel forward = NliLabel::neutral;
  NliLabel backward = NliLabel::neutral;

  [[nodiscard]] bool entails() const {
    return forward == NliLabel::entailment && backward == NliLabel::entailment;
  }
  friend bool operator==(const TwoWayVerdict&, const TwoWayVerdict&) = default;
};

struct EliminationEntry {
  std::string candidate;
  EliminationStage stage = EliminationStage::answer_entailment;
  /// The answer for stage one, the kept distractor it clashed with for stage two.
  std::string counterpart;
  /// forward = classify(candidate frame, counterpart frame), backward the reverse.
  TwoWayVerdict verdicts;

  friend bool operator==(const EliminationEntry&, const EliminationEntry&) = default;
};

struct EliminationTrace {
  std::vector<EliminationEntry> entries;
};

struct DistractorSet {
  std::vector<std::string> distractors;
  std::string answer;
  EliminationTrace trace;
  bool underfilled = false;
  /// Stage-one survivors never examined because k were already kept.
  std::size_t unscanned = 0;
};

/// Produces the comparison text with a candidate in place of the answer.
using CandidateInstantiator = std::function<std::string(std::string_view candidate)>;

/// Sentence (or passage) holding the answer, used as the NLI frame.
struct ComparisonFrame {
  std::string text;
  CharSpan answer_span;

  [[nodiscard]] std::string answer() const { return text.substr(answer_span.begin, answer_span.size()); }
  [[nodiscard]] std::string instantiate(std::string_view candidate) const;
  [[nodiscard]] CandidateInstantiator instantiator() const;
};

[[nodiscard]] TwoWayVerdict two_way_check(NliClassifier& nli, std::string_view a, std::string_view b);

/// True iff classify(a, b) and classify(b, a) are both entailment.
[[nodiscard]] bool two_way_entails(NliClassifier& nli, std::string_view a, std::string_view b);

/// Stage one. Drops every candidate whose instantiated text two-way entails
/// `comparison_text`, or whose text equals the answer under text::normalize.
/// Order of survivors is preserved. Removals are appended to `trace`.
[[nodiscard]] std::vector<std::string> filter_vs_answer(NliClassifier& nli, std::string_view comparison_text,
                                                        std::string_view answer, const std::vector<std::string>& candidates,
                                                        const CandidateInstantiator& instantiate,
                                                        EliminationTrace* trace = nullptr);

struct PairwiseResult {
  std::vector<std::string> kept;
  bool underfilled = false;
  std::size_t unscanned = 0;
};

/// Stage two. Scans in rank order and keeps a candidate unless it two-way
/// entails an already kept one; stops once k are kept.
[[nodiscard]] PairwiseResult filter_pairwise(NliClassifier& nli, const std::vector<std::string>& candidates,
                                             std::size_t k, const CandidateInstantiator& instantiate,
                                             EliminationTrace* trace = nullptr);

/// Stage one followed by stage two over the frame. Candidates must already
/// be ranked.
[[nodiscard]] DistractorSet select_distractors(NliClassifier& nli, const ComparisonFrame& frame,
                                               const std::vector<std::string>& candidates, std::size_t k);

}  // namespace clozegen
