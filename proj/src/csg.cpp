#include "clozegen/csg.hpp"

#include "clozegen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <unordered_set>

namespace clozegen {

std::string_view to_string(DecodeStrategy strategy) {
  switch (strategy) {
    case DecodeStrategy::left_to_right:
      return "l2r";
    case DecodeStrategy::right_to_left:
      return "r2l";
    case DecodeStrategy::cocktail_shaker:
      return "ctl";
  }
  return "ctl";
}

std::string_view to_string(RankAverage avg) { return avg == RankAverage::geometric ? "geometric" : "harmonic"; }

DecodeStrategy parse_strategy(std::string_view s) {
  const auto n = text::normalize(s);
  if (n == "l2r") return DecodeStrategy::left_to_right;
  if (n == "r2l") return DecodeStrategy::right_to_left;
  if (n == "ctl") return DecodeStrategy::cocktail_shaker;
  throw ConfigError("unknown decoding strategy '" + std::string(s) + "' (expected l2r, r2l or ctl)");
}

RankAverage parse_average(std::string_view s) {
  const auto n = text::normalize(s);
  if (n == "geometric") return RankAverage::geometric;
  if (n == "harmonic") return RankAverage::harmonic;
  throw ConfigError("unknown averaging '" + std::string(s) + "' (expected geometric or harmonic)");
}

void validate(const GenerationConfig& config) {
  if (config.k == 0) throw ConfigError("k (number of distractors) must be at least 1");
  if (config.search_multiplier && *config.search_multiplier == 0) {
    throw ConfigError("search multiplier must be at least 1");
  }
}

std::size_t effective_search_multiplier(const GenerationConfig& config, std::size_t resolved_mask_count) {
  if (config.search_multiplier) return *config.search_multiplier;
  return resolved_mask_count == 1 ? 10 : 7;
}

std::size_t resolve_mask_count(const GenerationConfig& config, std::size_t answer_token_count) {
  if (answer_token_count == 0) throw ContractViolation("resolve_mask_count: answer has no tokens");
  return config.n_mask == 0 ? answer_token_count : config.n_mask;
}

MaskCountInterval mask_count_interval(std::size_t n_mask, std::size_t dispersion) {
  if (n_mask == 0) throw ContractViolation("mask_count_interval: n_mask must be at least 1");
  const std::size_t low = n_mask > dispersion ? n_mask - dispersion : 1;
  return {std::max<std::size_t>(low, 1), n_mask + dispersion};
}

std::vector<std::size_t> sample_mask_counts(MaskCountInterval interval, Rng& rng) {
  if (interval.low == 0 || interval.low > interval.high) {
    throw ContractViolation("sample_mask_counts: need 1 <= low <= high");
  }
  std::vector<std::size_t> pool(interval.size());
  std::iota(pool.begin(), pool.end(), interval.low);
  const std::size_t draws = std::min<std::size_t>(3, pool.size());
  // Partial Fisher-Yates: the first `draws` slots become the sample.
  for (std::size_t i = 0; i < draws; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(draws);
  return pool;
}

MaskedContext build_masked_context(std::span<const std::string> context_tokens, TokenSpan answer_span,
                                   std::size_t mask_count, const std::string& mask_token) {
  if (answer_span.begin >= answer_span.end || answer_span.end > context_tokens.size()) {
    throw SpanError("answer token span [" + std::to_string(answer_span.begin) + ", " +
                    std::to_string(answer_span.end) + ") invalid for " + std::to_string(context_tokens.size()) +
                    " tokens");
  }
  if (mask_count == 0) throw ContractViolation("build_masked_context: mask_count must be at least 1");

  MaskedContext ctx;
  ctx.original_tokens.assign(context_tokens.begin(), context_tokens.end());
  ctx.tokens.assign(context_tokens.begin(), context_tokens.begin() + static_cast<std::ptrdiff_t>(answer_span.begin));
  for (std::size_t i = 0; i < mask_count; ++i) {
    ctx.mask_positions.push_back(ctx.tokens.size());
    ctx.tokens.push_back(mask_token);
  }
  ctx.tokens.insert(ctx.tokens.end(), context_tokens.begin() + static_cast<std::ptrdiff_t>(answer_span.end),
                    context_tokens.end());
  const auto answer = context_tokens.subspan(answer_span.begin, answer_span.size());
  ctx.answer_text = text::join(answer, " ");
  return ctx;
}

MaskedContext window_context(const MaskedContext& context, std::size_t max_length) {
  if (context.tokens.size() <= max_length) return context;
  const std::size_t run = context.mask_count();
  if (run > max_length) {
    throw LengthError("mask run of " + std::to_string(run) + " tokens exceeds backend limit of " +
                      std::to_string(max_length));
  }
  const std::size_t first = context.mask_positions.front();
  const std::size_t left_avail = first;
  const std::size_t right_avail = context.tokens.size() - first - run;
  const std::size_t budget = max_length - run;

  std::size_t left = std::min(left_avail, budget / 2);
  std::size_t right = std::min(right_avail, budget - left);
  left = std::min(left_avail, budget - right);

  MaskedContext out;
  const std::size_t start = first - left;
  out.tokens.assign(context.tokens.begin() + static_cast<std::ptrdiff_t>(start),
                    context.tokens.begin() + static_cast<std::ptrdiff_t>(first + run + right));
  for (auto p : context.mask_positions) out.mask_positions.push_back(p - start);
  out.answer_text = context.answer_text;
  out.original_tokens = context.original_tokens;
  return out;
}

std::vector<std::size_t> decode_order(DecodeStrategy strategy, std::size_t mask_count) {
  if (mask_count == 0) throw ContractViolation("decode_order: mask_count must be at least 1");
  std::vector<std::size_t> order;
  order.reserve(mask_count);
  switch (strategy) {
    case DecodeStrategy::left_to_right:
      for (std::size_t i = 0; i < mask_count; ++i) order.push_back(i);
      break;
    case DecodeStrategy::right_to_left:
      for (std::size_t i = mask_count; i-- > 0;) order.push_back(i);
      break;
    case DecodeStrategy::cocktail_shaker: {
      std::size_t lo = 0;
      std::size_t hi = mask_count - 1;
      bool from_left = true;
      while (order.size() < mask_count) {
        order.push_back(from_left ? lo++ : hi--);
        from_left = !from_left;
      }
      break;
    }
  }
  return order;
}

namespace {

void check_order(std::span<const std::size_t> order, std::size_t mask_count) {
  if (order.size() != mask_count) {
    throw ContractViolation("decode order has " + std::to_string(order.size()) + " entries for " +
                            std::to_string(mask_count) + " masks");
  }
  std::vector<bool> seen(mask_count, false);
  for (auto slot : order) {
    if (slot >= mask_count || seen[slot]) throw ContractViolation("decode order is not a permutation");
    seen[slot] = true;
  }
}

}  // namespace

CandidateBatch generate_candidates(MaskedLanguageModel& mlm, const MaskedContext& context,
                                   std::span<const std::size_t> order, std::size_t branch_width) {
  const std::size_t r = context.mask_count();
  if (r == 0) throw ContractViolation("generate_candidates: context has no masks");
  if (branch_width == 0) throw ContractViolation("generate_candidates: branch width must be at least 1");
  check_order(order, r);

  CandidateBatch batch;
  const std::size_t first_pos = context.mask_positions[order[0]];
  const auto branches = mlm.fill_mask(context.tokens, first_pos, branch_width);
  if (branches.empty()) {
    batch.missing_predictions = true;
    return batch;
  }

  for (const auto& branch : branches) {
    std::vector<std::string> hypothesis = context.tokens;
    std::vector<std::string> fills(r);
    std::vector<double> probs;
    probs.reserve(r);

    hypothesis[first_pos] = branch.token;
    fills[order[0]] = branch.token;
    probs.push_back(branch.probability);

    bool complete = true;
    for (std::size_t step = 1; step < r; ++step) {
      const std::size_t slot = order[step];
      const std::size_t pos = context.mask_positions[slot];
      const auto best = mlm.fill_mask(hypothesis, pos, 1);
      if (best.empty()) {
        complete = false;
        break;
      }
      hypothesis[pos] = best.front().token;
      fills[slot] = best.front().token;
      probs.push_back(best.front().probability);
    }
    if (!complete) {
      batch.missing_predictions = true;
      continue;
    }

    Candidate c;
    c.text = mlm.detokenize(fills);
    c.token_strings = std::move(fills);
    c.score_T = score_candidate(probs);
    c.step_probabilities = std::move(probs);
    c.source_mask_count = r;
    batch.candidates.push_back(std::move(c));
  }
  return batch;
}

namespace {

void check_probabilities(std::span<const double> probs, const char* who) {
  if (probs.empty()) throw ContractViolation(std::string(who) + ": empty probability list");
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw ContractViolation(std::string(who) + ": probability outside [0, 1]");
  }
}

}  // namespace

double score_candidate(std::span<const double> step_probabilities) {
  check_probabilities(step_probabilities, "score_candidate");
  double product = 1.0;
  for (double p : step_probabilities) product *= p;
  return product;
}

double rank_score(std::span<const double> step_probabilities, RankAverage avg) {
  check_probabilities(step_probabilities, "rank_score");
  const double r = static_cast<double>(step_probabilities.size());
  // Every mean of a constant list is that constant; return it exactly instead
  // of letting pow() and the reciprocal sum round differently.
  if (std::adjacent_find(step_probabilities.begin(), step_probabilities.end(), std::not_equal_to<>()) ==
      step_probabilities.end()) {
    return step_probabilities.front();
  }
  if (avg == RankAverage::geometric) return std::pow(score_candidate(step_probabilities), 1.0 / r);
  double inverse_sum = 0.0;
  for (double p : step_probabilities) {
    if (p == 0.0) return 0.0;
    inverse_sum += 1.0 / p;
  }
  return r / inverse_sum;
}

std::vector<Candidate> rank_candidates(std::vector<Candidate> candidates, RankAverage avg) {
  std::erase_if(candidates, [](const Candidate& c) { return text::trim(c.text).empty(); });
  for (auto& c : candidates) c.rank_score = rank_score(c.step_probabilities, avg);
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.rank_score != b.rank_score) return a.rank_score > b.rank_score;
    if (a.source_mask_count != b.source_mask_count) return a.source_mask_count < b.source_mask_count;
    return a.text < b.text;
  });
  std::unordered_set<std::string> seen;
  std::vector<Candidate> out;
  out.reserve(candidates.size());
  for (auto& c : candidates) {
    if (seen.insert(text::normalize(c.text)).second) out.push_back(std::move(c));
  }
  return out;
}

std::vector<Candidate> drop_answer_matches(std::vector<Candidate> candidates, std::string_view answer) {
  const auto key = text::normalize(answer);
  std::erase_if(candidates, [&](const Candidate& c) { return text::normalize(c.text) == key; });
  return candidates;
}

}  // namespace clozegen
