#pragma once

// JSON forms of the result types.

#include "clozegen/csg.hpp"
#include "clozegen/ds.hpp"
#include "clozegen/metrics.hpp"
#include "clozegen/pipeline.hpp"

#include <nlohmann/json.hpp>

namespace clozegen {

[[nodiscard]] nlohmann::json to_json(const GenerationConfig& config);
[[nodiscard]] GenerationConfig generation_config_from_json(const nlohmann::json& j);

[[nodiscard]] nlohmann::json to_json(const Candidate& candidate);
[[nodiscard]] nlohmann::json to_json(const EliminationEntry& entry);
/// Throws ParseError, including for an unknown stage tag.
[[nodiscard]] EliminationEntry elimination_entry_from_json(const nlohmann::json& j);

/// {"distractors", "candidates", "trace", "config", "answer", "underfilled",
///  "unscanned", "mask_counts", "warnings"}. Stage timings are left out so the
/// document is a pure function of inputs; pass include_timing to add them.
[[nodiscard]] nlohmann::json to_json(const GenerationResult& result, bool include_timing = false);

[[nodiscard]] nlohmann::json to_json(const EvalItemResult& item);
[[nodiscard]] nlohmann::json to_json(const EvalReport& report);

}  // namespace clozegen
