#pragma once

#include "clozegen/csg.hpp"
#include "clozegen/data.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace clozegen::cli {

enum class Command { generate, evaluate, trace };

struct CliConfig {
  Command command = Command::generate;
  std::string model_id;
  std::string nli_model_id;
  GenerationConfig generation;
  InputMode input_mode = InputMode::passage;
  PrefillMode prefill_mode = PrefillMode::model;
  std::optional<std::string> preset;
  std::optional<std::size_t> limit;
  std::size_t jobs = 1;
  std::string input_path;
  std::string output_path;
};

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitPartial = 2;

/// Applies the CLOTH evaluation preset: dispersion 0, n_mask 1, k 10,
/// m_s 7, left-to-right decoding, geometric mean.
void apply_cloth_preset(GenerationConfig& config);

/// Parses argv. On --help or a usage error, prints to out/err and returns the
/// exit code in `exit_code` with no config.
[[nodiscard]] std::optional<CliConfig> parse_args(int argc, const char* const* argv, int& exit_code,
                                                  std::ostream& out, std::ostream& err);

/// Input: JSON-lines of context/answer pairs. Output: one result per line,
/// error records inline. 0 on success, 2 when some items failed, 1 when the
/// run could not start.
[[nodiscard]] int run_generate(const CliConfig& config, std::ostream& out, std::ostream& err);

/// Input: CLOTH file or directory. Writes the JSON report to the output path
/// (if any) and the table to `out`.
[[nodiscard]] int run_evaluate(const CliConfig& config, std::ostream& out, std::ostream& err);

/// Input: generate output. Prints the elimination trace of every item.
[[nodiscard]] int run_trace(const CliConfig& config, std::ostream& out, std::ostream& err);

[[nodiscard]] int run(const CliConfig& config, std::ostream& out, std::ostream& err);

}  // namespace clozegen::cli
