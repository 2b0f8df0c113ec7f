#include "clozegen/serialize.hpp"

#include "clozegen/errors.hpp"

namespace clozegen {

nlohmann::json to_json(const GenerationConfig& c) {
  nlohmann::json j = {{"n_mask", c.n_mask},
                      {"dispersion", c.dispersion},
                      {"k", c.k},
                      {"strategy", to_string(c.strategy)},
                      {"avg", to_string(c.avg)},
                      {"seed", c.seed}};
  j["search_multiplier"] = c.search_multiplier ? nlohmann::json(*c.search_multiplier) : nlohmann::json(nullptr);
  return j;
}

GenerationConfig generation_config_from_json(const nlohmann::json& j) {
  try {
    GenerationConfig c;
    c.n_mask = j.at("n_mask").get<std::size_t>();
    c.dispersion = j.at("dispersion").get<std::size_t>();
    c.k = j.at("k").get<std::size_t>();
    c.strategy = parse_strategy(j.at("strategy").get<std::string>());
    c.avg = parse_average(j.at("avg").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("search_multiplier") && !j.at("search_multiplier").is_null()) {
      c.search_multiplier = j.at("search_multiplier").get<std::size_t>();
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

nlohmann::json to_json(const Candidate& c) {
  return {{"text", c.text},
          {"rank_score", c.rank_score},
          {"score_T", c.score_T},
          {"probs", c.step_probabilities},
          {"mask_count", c.source_mask_count}};
}

nlohmann::json to_json(const EliminationEntry& e) {
  return {{"candidate", e.candidate},
          {"stage", to_string(e.stage)},
          {"counterpart", e.counterpart},
          {"verdicts", {to_string(e.verdicts.forward), to_string(e.verdicts.backward)}}};
}

EliminationEntry elimination_entry_from_json(const nlohmann::json& j) {
  try {
    EliminationEntry e;
    e.candidate = j.at("candidate").get<std::string>();
    e.stage = parse_stage(j.at("stage").get<std::string>());
    e.counterpart = j.at("counterpart").get<std::string>();
    const auto& v = j.at("verdicts");
    if (!v.is_array() || v.size() != 2) throw ParseError("trace entry: 'verdicts' must hold two labels");
    e.verdicts.forward = parse_nli_label(v[0].get<std::string>());
    e.verdicts.backward = parse_nli_label(v[1].get<std::string>());
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("trace entry: ") + ex.what());
  }
}

nlohmann::json to_json(const GenerationResult& r, bool include_timing) {
  nlohmann::json candidates = nlohmann::json::array();
  for (const auto& c : r.all_candidates) candidates.push_back(to_json(c));
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& e : r.distractor_set.trace.entries) trace.push_back(to_json(e));
  nlohmann::json j = {{"answer", r.distractor_set.answer},
                      {"distractors", r.distractor_set.distractors},
                      {"underfilled", r.distractor_set.underfilled},
                      {"unscanned", r.distractor_set.unscanned},
                      {"candidates", candidates},
                      {"trace", trace},
                      {"mask_counts", r.mask_counts},
                      {"warnings", r.warnings},
                      {"config", to_json(r.config_echo)}};
  if (include_timing) {
    j["timing_ms"] = {{"tokenize", r.timing.tokenize_ms},
                      {"generate", r.timing.generate_ms},
                      {"rank", r.timing.rank_ms},
                      {"select", r.timing.select_ms}};
  }
  return j;
}

nlohmann::json to_json(const EvalItemResult& item) {
  return {{"item_id", item.item_id},
          {"p_at_1", item.p_at_1},
          {"f1_at_3", item.f1_at_3},
          {"mrr_at_10", item.mrr_at_10},
          {"ndcg_at_10", item.ndcg_at_10},
          {"matched_ranks", item.matched_ranks}};
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& i : report.per_item) items.push_back(to_json(i));
  return {{"item_count", report.item_count},
          {"averages",
           {{"p_at_1", report.averages.p_at_1},
            {"f1_at_3", report.averages.f1_at_3},
            {"mrr_at_10", report.averages.mrr_at_10},
            {"ndcg_at_10", report.averages.ndcg_at_10}}},
          {"per_item", items}};
}

}  // namespace clozegen
