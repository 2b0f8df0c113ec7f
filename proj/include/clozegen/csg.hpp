#pragma once

// Candidate set generation: mask the answer span, decode the masks one slot at
// a time with a masked LM, and rank the resulting strings.

#include "clozegen/backends.hpp"
#include "clozegen/text.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace clozegen {

enum class DecodeStrategy { left_to_right, right_to_left, cocktail_shaker };
enum class RankAverage { geometric, harmonic };

[[nodiscard]] std::string_view to_string(DecodeStrategy strategy);
[[nodiscard]] std::string_view to_string(RankAverage avg);
/// Accepts "l2r" / "r2l" / "ctl" (any case). Throws ConfigError.
[[nodiscard]] DecodeStrategy parse_strategy(std::string_view s);
/// Accepts "geometric" / "harmonic". Throws ConfigError.
[[nodiscard]] RankAverage parse_average(std::string_view s);

struct GenerationConfig {
  /// 0 means: use the answer's token count.
  std::size_t n_mask = 0;
  std::size_t dispersion = 1;
  /// Number of distractors to keep.
  std::size_t k = 3;
  /// Search multiplier m_s; unset picks 10 for a single mask, 7 otherwise.
  std::optional<std::size_t> search_multiplier;
  DecodeStrategy strategy = DecodeStrategy::cocktail_shaker;
  RankAverage avg = RankAverage::geometric;
  std::uint64_t seed = 0;

  friend bool operator==(const GenerationConfig&, const GenerationConfig&) = default;
};

/// Throws ConfigError unless k >= 1 and search_multiplier (when set) >= 1.
void validate(const GenerationConfig& config);

/// Search multiplier actually used for a resolved mask count.
[[nodiscard]] std::size_t effective_search_multiplier(const GenerationConfig& config, std::size_t resolved_mask_count);

struct MaskedContext {
  std::vector<std::string> tokens;
  /// Contiguous, ascending.
  std::vector<std::size_t> mask_positions;
  std::string answer_text;
  std::vector<std::string> original_tokens;

  [[nodiscard]] std::size_t mask_count() const { return mask_positions.size(); }
};

struct Candidate {
  /// Generated tokens in positional (left to right) order.
  std::vector<std::string> token_strings;
  std::string text;
  /// One probability per generated token, in decode order.
  std::vector<double> step_probabilities;
  double score_T = 0.0;
  double rank_score = 0.0;
  std::size_t source_mask_count = 0;
};

struct MaskCountInterval {
  std::size_t low = 1;
  std::size_t high = 1;

  [[nodiscard]] std::size_t size() const { return high - low + 1; }
  friend bool operator==(const MaskCountInterval&, const MaskCountInterval&) = default;
};

[[nodiscard]] std::size_t resolve_mask_count(const GenerationConfig& config, std::size_t answer_token_count);

/// [max(n_mask - dispersion, 1), n_mask + dispersion]
[[nodiscard]] MaskCountInterval mask_count_interval(std::size_t n_mask, std::size_t dispersion);

/// min(3, interval size) distinct counts drawn uniformly without replacement,
/// returned in draw order.
[[nodiscard]] std::vector<std::size_t> sample_mask_counts(MaskCountInterval interval, Rng& rng);

/// Replaces tokens[span] by mask_count copies of mask_token. Throws SpanError.
[[nodiscard]] MaskedContext build_masked_context(std::span<const std::string> context_tokens, TokenSpan answer_span,
                                                 std::size_t mask_count, const std::string& mask_token);

/// Cuts a context longer than max_length down to a window of max_length tokens
/// centred on the mask run (shifted inward at the text edges). Throws
/// LengthError when the mask run alone does not fit.
[[nodiscard]] MaskedContext window_context(const MaskedContext& context, std::size_t max_length);

/// Order in which mask slots (0-based, relative to the run) are filled.
/// Cocktail shaker alternates ends moving inward: 0, m-1, 1, m-2, ...
[[nodiscard]] std::vector<std::size_t> decode_order(DecodeStrategy strategy, std::size_t mask_count);

struct CandidateBatch {
  std::vector<Candidate> candidates;
  /// Set when some hypothesis (or the first slot) had no prediction available.
  bool missing_predictions = false;
};

/// Pseudo-beam decoding. The first slot in `order` branches into its top
/// `branch_width` predictions; every later slot extends each hypothesis with
/// its top-1 prediction, conditioned on all slots that hypothesis has filled.
/// Costs 1 + (r - 1) * branch_width fill_mask calls for r masks. rank_score is
/// left at 0; rank_candidates assigns it.
[[nodiscard]] CandidateBatch generate_candidates(MaskedLanguageModel& mlm, const MaskedContext& context,
                                                 std::span<const std::size_t> order, std::size_t branch_width);

/// Product of the step probabilities. Throws ContractViolation on an empty
/// list or a value outside [0, 1].
[[nodiscard]] double score_candidate(std::span<const double> step_probabilities);

/// Geometric: T^(1/r). Harmonic: r / sum(1/p). A zero probability yields 0.
[[nodiscard]] double rank_score(std::span<const double> step_probabilities, RankAverage avg);

/// Assigns rank_score, sorts descending with ties broken by (fewer masks,
/// lexicographic text), and collapses texts equal under text::normalize,
/// keeping the better-ranked copy. Candidates with blank text are dropped.
[[nodiscard]] std::vector<Candidate> rank_candidates(std::vector<Candidate> candidates, RankAverage avg);

/// Removes candidates whose normalized text equals the normalized answer.
[[nodiscard]] std::vector<Candidate> drop_answer_matches(std::vector<Candidate> candidates, std::string_view answer);

}  // namespace clozegen
