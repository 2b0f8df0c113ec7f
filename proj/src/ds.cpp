#include "clozegen/ds.hpp"

#include "clozegen/errors.hpp"

namespace clozegen {

std::string_view to_string(EliminationStage stage) {
  return stage == EliminationStage::answer_entailment ? "answer-entailment" : "pairwise-entailment";
}

EliminationStage parse_stage(std::string_view tag) {
  if (tag == "answer-entailment") return EliminationStage::answer_entailment;
  if (tag == "pairwise-entailment") return EliminationStage::pairwise_entailment;
  throw ParseError("unknown elimination stage '" + std::string(tag) + "'");
}

std::string ComparisonFrame::instantiate(std::string_view candidate) const {
  return text::splice(text, answer_span, candidate);
}

CandidateInstantiator ComparisonFrame::instantiator() const {
  return [frame = *this](std::string_view candidate) { return frame.instantiate(candidate); };
}

TwoWayVerdict two_way_check(NliClassifier& nli, std::string_view a, std::string_view b) {
  TwoWayVerdict v;
  v.forward = nli.classify(a, b);
  v.backward = nli.classify(b, a);
  return v;
}

bool two_way_entails(NliClassifier& nli, std::string_view a, std::string_view b) {
  return two_way_check(nli, a, b).entails();
}

std::vector<std::string> filter_vs_answer(NliClassifier& nli, std::string_view comparison_text,
                                          std::string_view answer, const std::vector<std::string>& candidates,
                                          const CandidateInstantiator& instantiate, EliminationTrace* trace) {
  const auto answer_key = text::normalize(answer);
  std::vector<std::string> kept;
  for (const auto& candidate : candidates) {
    const auto verdict = two_way_check(nli, instantiate(candidate), comparison_text);
    if (verdict.entails() || text::normalize(candidate) == answer_key) {
      if (trace) {
        trace->entries.push_back({candidate, EliminationStage::answer_entailment, std::string(answer), verdict});
      }
      continue;
    }
    kept.push_back(candidate);
  }
  return kept;
}

PairwiseResult filter_pairwise(NliClassifier& nli, const std::vector<std::string>& candidates, std::size_t k,
                               const CandidateInstantiator& instantiate, EliminationTrace* trace) {
  if (k == 0) throw ContractViolation("filter_pairwise: k must be at least 1");
  PairwiseResult result;
  std::vector<std::string> kept_frames;
  std::size_t i = 0;
  for (; i < candidates.size() && result.kept.size() < k; ++i) {
    const auto& candidate = candidates[i];
    const auto frame = instantiate(candidate);
    bool clash = false;
    for (std::size_t j = 0; j < result.kept.size(); ++j) {
      const auto verdict = two_way_check(nli, frame, kept_frames[j]);
      if (verdict.entails()) {
        if (trace) {
          trace->entries.push_back({candidate, EliminationStage::pairwise_entailment, result.kept[j], verdict});
        }
        clash = true;
        break;
      }
    }
    if (!clash) {
      result.kept.push_back(candidate);
      kept_frames.push_back(frame);
    }
  }
  result.unscanned = candidates.size() - i;
  result.underfilled = result.kept.size() < k;
  return result;
}

DistractorSet select_distractors(NliClassifier& nli, const ComparisonFrame& frame,
                                 const std::vector<std::string>& candidates, std::size_t k) {
  DistractorSet out;
  out.answer = frame.answer();
  if (candidates.empty()) {
    out.underfilled = true;
    return out;
  }
  const auto instantiate = frame.instantiator();
  const auto survivors = filter_vs_answer(nli, frame.text, out.answer, candidates, instantiate, &out.trace);
  auto pairwise = filter_pairwise(nli, survivors, k, instantiate, &out.trace);
  out.distractors = std::move(pairwise.kept);
  out.underfilled = pairwise.underfilled;
  out.unscanned = pairwise.unscanned;
  return out;
}

}  // namespace clozegen
