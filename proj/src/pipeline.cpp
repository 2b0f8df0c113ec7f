#include "clozegen/pipeline.hpp"

#include "clozegen/data.hpp"
#include "clozegen/errors.hpp"

#include <chrono>

namespace clozegen {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

void check_span(std::string_view context, CharSpan span) {
  if (span.begin >= span.end || span.end > context.size()) {
    throw SpanError("answer span [" + std::to_string(span.begin) + ", " + std::to_string(span.end) +
                    ") invalid for context of " + std::to_string(context.size()) + " bytes");
  }
  if (text::trim(context.substr(span.begin, span.size())).empty()) throw SpanError("answer span is blank");
}

}  // namespace

TokenizedContext tokenize_with_span(const MaskedLanguageModel& mlm, std::string_view context, CharSpan answer_span) {
  check_span(context, answer_span);
  TokenizedContext out;
  const auto prefix = context.substr(0, answer_span.begin);
  const auto answer = context.substr(answer_span.begin, answer_span.size());
  const auto suffix = context.substr(answer_span.end);
  if (!text::trim(prefix).empty()) out.tokens = mlm.tokenize(prefix);
  out.answer.begin = out.tokens.size();
  const auto answer_tokens = mlm.tokenize(answer);
  if (answer_tokens.empty()) throw SpanError("answer '" + std::string(answer) + "' produced no tokens");
  out.tokens.insert(out.tokens.end(), answer_tokens.begin(), answer_tokens.end());
  out.answer.end = out.tokens.size();
  if (!text::trim(suffix).empty()) {
    const auto rest = mlm.tokenize(suffix);
    out.tokens.insert(out.tokens.end(), rest.begin(), rest.end());
  }
  return out;
}

GenerationResult generate_distractors(std::string_view context, CharSpan answer_span, const GenerationConfig& config,
                                      MaskedLanguageModel& mlm, NliClassifier& nli) {
  validate(config);
  check_span(context, answer_span);

  GenerationResult result;
  result.config_echo = config;
  const std::string answer(context.substr(answer_span.begin, answer_span.size()));
  const auto info = mlm.info();

  auto t0 = Clock::now();
  const auto tokenized = tokenize_with_span(mlm, context, answer_span);
  result.timing.tokenize_ms = elapsed_ms(t0);

  t0 = Clock::now();
  const std::size_t n_mask = resolve_mask_count(config, tokenized.answer.size());
  const std::size_t branch_width = config.k * effective_search_multiplier(config, n_mask);
  Rng rng(config.seed);
  result.mask_counts = sample_mask_counts(mask_count_interval(n_mask, config.dispersion), rng);

  std::vector<Candidate> merged;
  for (const std::size_t count : result.mask_counts) {
    auto masked = build_masked_context(tokenized.tokens, tokenized.answer, count, info.mask_token);
    masked.answer_text = answer;
    masked = window_context(masked, info.max_sequence_length);
    const auto order = decode_order(config.strategy, count);
    auto batch = generate_candidates(mlm, masked, order, branch_width);
    if (batch.missing_predictions) {
      result.warnings.push_back("backend returned no prediction for some hypotheses with " + std::to_string(count) +
                                " masks");
    }
    for (auto& c : batch.candidates) merged.push_back(std::move(c));
  }
  result.timing.generate_ms = elapsed_ms(t0);

  t0 = Clock::now();
  result.all_candidates = drop_answer_matches(rank_candidates(std::move(merged), config.avg), answer);
  for (const auto& c : result.all_candidates) {
    if (c.rank_score == 0.0) {
      result.warnings.push_back("candidate '" + c.text + "' has a zero step probability; ranked at 0");
    }
  }
  result.timing.rank_ms = elapsed_ms(t0);

  t0 = Clock::now();
  const auto sentence = extract_sentence(context, answer_span);
  const ComparisonFrame frame{sentence.sentence, sentence.span};
  std::vector<std::string> texts;
  texts.reserve(result.all_candidates.size());
  for (const auto& c : result.all_candidates) texts.push_back(c.text);
  if (texts.empty()) result.warnings.push_back("no candidates generated");
  result.distractor_set = select_distractors(nli, frame, texts, config.k);
  result.distractor_set.answer = answer;
  result.timing.select_ms = elapsed_ms(t0);
  return result;
}

ClozeItem render_cloze(std::string_view context, CharSpan answer_span, const DistractorSet& distractors,
                       std::uint64_t shuffle_seed) {
  if (distractors.distractors.empty()) throw ContractViolation("render_cloze: distractor set is empty");
  check_span(context, answer_span);

  ClozeItem item;
  item.stem = text::splice(context, answer_span, kClozeBlank);
  const std::size_t n = std::min<std::size_t>(3, distractors.distractors.size());
  item.underfilled = n < 3;

  item.options.emplace_back(context.substr(answer_span.begin, answer_span.size()));
  item.options.insert(item.options.end(), distractors.distractors.begin(),
                      distractors.distractors.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<std::size_t> perm(item.options.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  Rng rng(shuffle_seed);
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    std::swap(perm[i], perm[static_cast<std::size_t>(uniform_index(rng, i + 1))]);
  }
  std::vector<std::string> shuffled;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] == 0) item.answer_index = i;
    shuffled.push_back(item.options[perm[i]]);
  }
  item.options = std::move(shuffled);
  item.answer_letter = static_cast<char>('A' + item.answer_index);
  return item;
}

}  // namespace clozegen
