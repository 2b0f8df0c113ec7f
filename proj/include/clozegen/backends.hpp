#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>
#include <span>

namespace clozegen {

/// One vocabulary unit proposed for a mask slot.
struct TokenPrediction {
  std::string token;
  double probability = 0.0;

  friend bool operator==(const TokenPrediction&, const TokenPrediction&) = default;
};

/// Probability descending, ties by lexicographic token order.
void sort_predictions(std::vector<TokenPrediction>& predictions);

enum class NliLabel { entailment, neutral, contradiction };

[[nodiscard]] std::string_view to_string(NliLabel label);

/// Parses "entailment" / "neutral" / "contradiction" (case-insensitive).
/// Labels of two-way classifiers ("not_entailment", "non-entailment") map to
/// contradiction. Throws ParseError otherwise.
[[nodiscard]] NliLabel parse_nli_label(std::string_view label);

struct BackendInfo {
  std::string name;
  std::size_t max_sequence_length = 0;
  std::string mask_token;
};

/// Masked language model: tokenizer plus single-slot fill.
///
/// Implementations must either tolerate concurrent calls or say otherwise in
/// their own documentation. The pipeline issues the calls belonging to one
/// generation request sequentially.
class MaskedLanguageModel {
 public:
  virtual ~MaskedLanguageModel() = default;

  [[nodiscard]] virtual BackendInfo info() const = 0;

  /// Throws ContractViolation on empty text, BackendError on failure.
  [[nodiscard]] virtual std::vector<std::string> tokenize(std::string_view text) const = 0;

  /// Inverse of tokenize up to whitespace normalization.
  [[nodiscard]] virtual std::string detokenize(std::span<const std::string> tokens) const = 0;

  /// Top predictions for tokens[mask_position], which must hold the mask
  /// token. Returns min(top_k, vocabulary) entries sorted with
  /// sort_predictions. Probabilities are slices of the vocabulary softmax and
  /// need not sum to one.
  ///
  /// Throws ContractViolation when the slot is not a mask or top_k is 0,
  /// LengthError when the sequence exceeds max_sequence_length.
  [[nodiscard]] virtual std::vector<TokenPrediction> fill_mask(std::span<const std::string> tokens,
                                                               std::size_t mask_position,
                                                               std::size_t top_k) = 0;
};

/// Natural language inference classifier returning its argmax label.
class NliClassifier {
 public:
  virtual ~NliClassifier() = default;

  [[nodiscard]] virtual std::string name() const = 0;

  /// Deterministic for identical inputs. Throws ContractViolation on empty
  /// strings, BackendError on failure.
  [[nodiscard]] virtual NliLabel classify(std::string_view premise, std::string_view hypothesis) = 0;
};

/// Shared precondition checks for fill_mask implementations.
void check_fill_mask_request(const BackendInfo& info, std::span<const std::string> tokens,
                             std::size_t mask_position, std::size_t top_k);

}  // namespace clozegen
