#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace clozegen {

/// Equality after lowercasing and collapsing whitespace; no stemming.
[[nodiscard]] bool match(std::string_view candidate, std::string_view gold);

struct EvalItemResult {
  std::string item_id;
  double p_at_1 = 0.0;
  double f1_at_3 = 0.0;
  double mrr_at_10 = 0.0;
  double ndcg_at_10 = 0.0;
  /// 1-based ranks (after deduplication) of generated entries that hit gold.
  std::vector<std::size_t> matched_ranks;
};

/// Metrics of one ranked list against its gold distractors.
///
/// Duplicates in `generated` count once, at their first rank. F1@3 uses
/// precision over the (at most three) top entries and recall over the gold
/// set. NDCG@10 uses binary gain with discount 1/log2(rank + 1), normalized by
/// the ideal DCG of min(|gold|, 10) hits.
[[nodiscard]] EvalItemResult compute_item(std::string item_id, const std::vector<std::string>& generated,
                                          const std::vector<std::string>& gold);

struct EvalInput {
  std::string item_id;
  std::vector<std::string> generated;
  std::vector<std::string> gold;
};

struct EvalAverages {
  double p_at_1 = 0.0;
  double f1_at_3 = 0.0;
  double mrr_at_10 = 0.0;
  double ndcg_at_10 = 0.0;
};

struct EvalReport {
  std::vector<EvalItemResult> per_item;
  /// Percentages.
  EvalAverages averages;
  std::size_t item_count = 0;
};

/// Throws ContractViolation when `items` is empty.
[[nodiscard]] EvalReport evaluate_dataset(const std::vector<EvalInput>& items);

/// Aligned-column table with two-decimal percentages under a "Model" column.
[[nodiscard]] std::string format_report_table(const EvalReport& report, std::string_view label);

}  // namespace clozegen
