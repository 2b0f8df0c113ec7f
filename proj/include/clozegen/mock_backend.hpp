#pragma once

#include "clozegen/backends.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace clozegen {

/// Key used by the mock tables to identify a token sequence: the tokens joined
/// by single spaces, mask tokens included verbatim.
[[nodiscard]] std::string context_fingerprint(std::span<const std::string> tokens);

/// Table-driven masked LM with a whitespace tokenizer.
///
/// Lookup is by (context_fingerprint(tokens), mask_position). When no entry
/// exists the model falls back to a uniform distribution over `vocab` (or to
/// no predictions if the vocabulary is empty). Pure function of its tables;
/// safe for concurrent use.
class MockMaskedLanguageModel final : public MaskedLanguageModel {
 public:
  using Key = std::pair<std::string, std::size_t>;

  explicit MockMaskedLanguageModel(std::string mask_token = "[MASK]", std::size_t max_sequence_length = 512);

  void set_predictions(std::string fingerprint, std::size_t position, std::vector<TokenPrediction> top);
  void set_vocab(std::vector<std::string> vocab);

  [[nodiscard]] BackendInfo info() const override;
  [[nodiscard]] std::vector<std::string> tokenize(std::string_view text) const override;
  [[nodiscard]] std::string detokenize(std::span<const std::string> tokens) const override;
  [[nodiscard]] std::vector<TokenPrediction> fill_mask(std::span<const std::string> tokens,
                                                       std::size_t mask_position,
                                                       std::size_t top_k) override;

  [[nodiscard]] std::size_t fill_mask_calls() const { return calls_.load(); }
  void reset_call_count() { calls_ = 0; }

 private:
  std::string mask_token_;
  std::size_t max_sequence_length_;
  std::map<Key, std::vector<TokenPrediction>> table_;
  std::vector<std::string> vocab_;
  std::atomic<std::size_t> calls_{0};
};

/// NLI lookup table with a configurable fallback label.
class MockNliClassifier final : public NliClassifier {
 public:
  explicit MockNliClassifier(NliLabel fallback = NliLabel::neutral) : fallback_(fallback) {}

  void set(std::string premise, std::string hypothesis, NliLabel label);
  /// Sets both argument orders.
  void set_symmetric(const std::string& a, const std::string& b, NliLabel label);
  void set_fallback(NliLabel label) { fallback_ = label; }

  [[nodiscard]] std::string name() const override { return "mock-nli"; }
  [[nodiscard]] NliLabel classify(std::string_view premise, std::string_view hypothesis) override;

  [[nodiscard]] std::size_t classify_calls() const { return calls_.load(); }

 private:
  std::map<std::pair<std::string, std::string>, NliLabel, std::less<>> table_;
  NliLabel fallback_;
  std::atomic<std::size_t> calls_{0};
};

/// Both mock backends parsed from one configuration document:
///
///   {"mask_token": "[MASK]",
///    "predictions": [{"fingerprint": "...", "position": 1, "top": [["tok", 0.5], ...]}],
///    "nli": [["premise", "hypothesis", "entailment"], ...],
///    "nli_default": "neutral"}
///
/// Optional extras: "vocab" (fallback vocabulary), "max_sequence_length".
struct MockBackends {
  std::unique_ptr<MockMaskedLanguageModel> mlm;
  std::unique_ptr<MockNliClassifier> nli;
};

/// Throws ParseError naming the offending field.
[[nodiscard]] MockBackends load_mock_backends(const nlohmann::json& config);
[[nodiscard]] MockBackends load_mock_backends(const std::filesystem::path& path);

}  // namespace clozegen
