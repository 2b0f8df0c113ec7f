#include "clozegen/backends.hpp"

#include "clozegen/errors.hpp"
#include "clozegen/text.hpp"

#include <algorithm>

namespace clozegen {

void sort_predictions(std::vector<TokenPrediction>& predictions) {
  std::sort(predictions.begin(), predictions.end(), [](const TokenPrediction& a, const TokenPrediction& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.token < b.token;
  });
}

std::string_view to_string(NliLabel label) {
  switch (label) {
    case NliLabel::entailment:
      return "entailment";
    case NliLabel::neutral:
      return "neutral";
    case NliLabel::contradiction:
      return "contradiction";
  }
  return "neutral";
}

NliLabel parse_nli_label(std::string_view label) {
  const std::string s = text::normalize(label);
  if (s == "entailment") return NliLabel::entailment;
  if (s == "neutral") return NliLabel::neutral;
  if (s == "contradiction") return NliLabel::contradiction;
  if (s == "not_entailment" || s == "non-entailment" || s == "not entailment") return NliLabel::contradiction;
  throw ParseError("unknown NLI label '" + std::string(label) + "'");
}

void check_fill_mask_request(const BackendInfo& info, std::span<const std::string> tokens,
                             std::size_t mask_position, std::size_t top_k) {
  if (top_k == 0) throw ContractViolation("fill_mask: top_k must be at least 1");
  if (mask_position >= tokens.size()) {
    throw ContractViolation("fill_mask: position " + std::to_string(mask_position) + " outside sequence of " +
                            std::to_string(tokens.size()) + " tokens");
  }
  if (tokens[mask_position] != info.mask_token) {
    throw ContractViolation("fill_mask: token at position " + std::to_string(mask_position) + " is '" +
                            tokens[mask_position] + "', not the mask token");
  }
  if (tokens.size() > info.max_sequence_length) {
    throw LengthError("fill_mask: sequence of " + std::to_string(tokens.size()) + " tokens exceeds " +
                      info.name + " limit of " + std::to_string(info.max_sequence_length));
  }
}

}  // namespace clozegen
