#include "clozegen/cli.hpp"

#include "clozegen/errors.hpp"
#include "clozegen/http_backend.hpp"
#include "clozegen/metrics.hpp"
#include "clozegen/mock_backend.hpp"
#include "clozegen/pipeline.hpp"
#include "clozegen/serialize.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

namespace clozegen::cli {

void apply_cloth_preset(GenerationConfig& config) {
  config.dispersion = 0;
  config.n_mask = 1;
  config.k = 10;
  config.search_multiplier = 7;
  config.strategy = DecodeStrategy::left_to_right;
  config.avg = RankAverage::geometric;
}

std::optional<CliConfig> parse_args(int argc, const char* const* argv, int& exit_code, std::ostream& out,
                                    std::ostream& err) {
  CLI::App app{"Distractor generation for cloze questions with masked language models"};
  app.require_subcommand(1);

  CliConfig cfg;
  std::string strategy = "ctl";
  std::string avg = "geometric";
  std::string input_mode = "passage";
  std::string prefill = "model";
  std::size_t search_multiplier = 0;
  std::string preset;
  std::size_t limit = 0;

  struct Explicit {
    CLI::Option* n_mask = nullptr;
    CLI::Option* dispersion = nullptr;
    CLI::Option* k = nullptr;
    CLI::Option* ms = nullptr;
    CLI::Option* strategy = nullptr;
    CLI::Option* avg = nullptr;
    CLI::Option* preset = nullptr;
    CLI::Option* limit = nullptr;
  };
  Explicit gen_opts;
  Explicit eval_opts;

  auto add_generation_flags = [&](CLI::App* sub, Explicit& ex) {
    sub->add_option("-i,--input", cfg.input_path, "Input file")->required();
    sub->add_option("-o,--output", cfg.output_path, "Output file (default: stdout)");
    sub->add_option("--model", cfg.model_id, "Masked LM backend: mock:<path> or http://host:port");
    sub->add_option("--nli-model", cfg.nli_model_id, "NLI backend (default: same as --model)");
    ex.strategy = sub->add_option("--strategy", strategy, "Decoding order: l2r, r2l or ctl")->capture_default_str();
    ex.avg = sub->add_option("--avg", avg, "Ranking mean: geometric or harmonic")->capture_default_str();
    ex.n_mask = sub->add_option("--n-mask", cfg.generation.n_mask, "Mask count (0 = answer token count)")
                    ->capture_default_str();
    ex.dispersion = sub->add_option("--dispersion", cfg.generation.dispersion, "Mask count dispersion")
                        ->capture_default_str();
    ex.k = sub->add_option("--top-k", cfg.generation.k, "Number of distractors")->capture_default_str();
    ex.ms = sub->add_option("--search-multiplier", search_multiplier,
                            "Search multiplier m_s (default: 10 for one mask, else 7)");
    sub->add_option("--seed", cfg.generation.seed, "Random seed")->capture_default_str();
    sub->add_option("--jobs", cfg.jobs, "Items processed concurrently")->capture_default_str()->check(CLI::PositiveNumber);
  };

  auto* gen = app.add_subcommand("generate", "Generate distractors for context/answer pairs (JSON lines)");
  add_generation_flags(gen, gen_opts);

  auto* eval = app.add_subcommand("evaluate", "Score generated distractors against CLOTH gold distractors");
  add_generation_flags(eval, eval_opts);
  eval->add_option("--input-mode", input_mode, "Model input: passage or sentence")->capture_default_str();
  eval->add_option("--prefill", prefill, "Other blanks: model, gold or none")->capture_default_str();
  eval_opts.preset = eval->add_option("--preset", preset, "Hyperparameter preset (cloth)");
  eval_opts.limit = eval->add_option("--limit", limit, "Evaluate only the first N passages");

  auto* trace = app.add_subcommand("trace", "Show the elimination trace of stored generation results");
  trace->add_option("-i,--input", cfg.input_path, "Output of the generate command")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    exit_code = app.exit(e, out, err);
    return std::nullopt;
  }

  try {
    const bool evaluating = eval->parsed();
    const Explicit& ex = evaluating ? eval_opts : gen_opts;
    if (trace->parsed()) {
      cfg.command = Command::trace;
      return cfg;
    }
    cfg.command = evaluating ? Command::evaluate : Command::generate;
    cfg.generation.strategy = parse_strategy(strategy);
    cfg.generation.avg = parse_average(avg);
    if (ex.ms->count()) cfg.generation.search_multiplier = search_multiplier;
    if (evaluating) {
      cfg.input_mode = parse_input_mode(input_mode);
      cfg.prefill_mode = parse_prefill_mode(prefill);
      if (ex.limit->count()) cfg.limit = limit;
      if (ex.preset->count()) {
        if (preset != "cloth") throw ConfigError("unknown preset '" + preset + "' (expected cloth)");
        cfg.preset = preset;
        // Preset replaces defaults; flags given explicitly still win.
        GenerationConfig p = cfg.generation;
        apply_cloth_preset(p);
        if (!ex.n_mask->count()) cfg.generation.n_mask = p.n_mask;
        if (!ex.dispersion->count()) cfg.generation.dispersion = p.dispersion;
        if (!ex.k->count()) cfg.generation.k = p.k;
        if (!ex.ms->count()) cfg.generation.search_multiplier = p.search_multiplier;
        if (!ex.strategy->count()) cfg.generation.strategy = p.strategy;
        if (!ex.avg->count()) cfg.generation.avg = p.avg;
      }
    }
    validate(cfg.generation);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    exit_code = kExitFailure;
    return std::nullopt;
  }
  exit_code = kExitOk;
  return cfg;
}

namespace {

struct Backends {
  std::unique_ptr<MaskedLanguageModel> mlm;
  std::unique_ptr<NliClassifier> nli;
};

std::filesystem::path resolve_model_path(const std::string& raw) {
  std::filesystem::path p(raw);
  if (p.is_relative() && !std::filesystem::exists(p)) {
    if (const char* cache = std::getenv("CLOZEGEN_MODEL_CACHE"); cache && *cache) {
      auto candidate = std::filesystem::path(cache) / p;
      if (std::filesystem::exists(candidate)) return candidate;
    }
  }
  return p;
}

constexpr std::string_view kMockScheme = "mock:";

std::unique_ptr<MaskedLanguageModel> open_mlm(const std::string& id) {
  if (id.empty()) throw ConfigError("missing --model (use mock:<path> or http://host:port)");
  if (id.rfind(kMockScheme, 0) == 0) return std::move(load_mock_backends(resolve_model_path(id.substr(kMockScheme.size()))).mlm);
  if (id.rfind("http://", 0) == 0) return std::make_unique<HttpMaskedLanguageModel>(parse_http_endpoint(id));
  throw ConfigError("unsupported model id '" + id +
                    "': serve the checkpoint with tools/model_server.py and pass its http:// url, or use mock:<path>");
}

std::unique_ptr<NliClassifier> open_nli(const std::string& id) {
  if (id.empty()) throw ConfigError("missing --nli-model");
  if (id.rfind(kMockScheme, 0) == 0) return std::move(load_mock_backends(resolve_model_path(id.substr(kMockScheme.size()))).nli);
  if (id.rfind("http://", 0) == 0) return std::make_unique<HttpNliClassifier>(parse_http_endpoint(id));
  throw ConfigError("unsupported NLI model id '" + id + "'");
}

Backends open_backends(const CliConfig& config) {
  Backends b;
  b.mlm = open_mlm(config.model_id);
  b.nli = open_nli(config.nli_model_id.empty() ? config.model_id : config.nli_model_id);
  return b;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const SpanError*>(&e)) return "span-error";
  if (dynamic_cast<const ResolveError*>(&e)) return "resolve-error";
  if (dynamic_cast<const ParseError*>(&e)) return "parse-error";
  if (dynamic_cast<const BackendError*>(&e)) return "backend-error";
  if (dynamic_cast<const LengthError*>(&e)) return "length-error";
  if (dynamic_cast<const ConfigError*>(&e)) return "config-error";
  if (dynamic_cast<const ContractViolation*>(&e)) return "contract-violation";
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return "parse-error";
  return "error";
}

// Runs work(i) for i in [0, n) on up to `jobs` threads.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& work) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) work(i);
    });
  }
}

class OutputSink {
 public:
  OutputSink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw ConfigError("cannot write " + path);
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

}  // namespace

int run_generate(const CliConfig& config, std::ostream& out, std::ostream& err) {
  std::ifstream in(config.input_path);
  if (!in) {
    err << "error: cannot read input " << config.input_path << "\n";
    return kExitFailure;
  }
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!text::trim(line).empty()) lines.push_back(line);
  }

  Backends backends;
  try {
    validate(config.generation);
    backends = open_backends(config);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }

  std::vector<std::string> records(lines.size());
  std::atomic<bool> partial{false};
  parallel_for(lines.size(), config.jobs, [&](std::size_t i) {
    nlohmann::json record;
    std::string id = "line-" + std::to_string(i + 1);
    try {
      const auto doc = nlohmann::json::parse(lines[i]);
      if (doc.is_object() && doc.contains("id")) id = doc["id"].is_string() ? doc["id"].get<std::string>() : doc["id"].dump();
      std::string warning;
      const auto pair = parse_pair(doc, &warning);
      auto result = generate_distractors(pair.context, pair.answer_span, config.generation, *backends.mlm, *backends.nli);
      if (!warning.empty()) result.warnings.insert(result.warnings.begin(), warning);
      record = to_json(result);
      record["id"] = id;
    } catch (const std::exception& e) {
      record = {{"id", id}, {"error", {{"type", error_kind(e)}, {"message", e.what()}}}};
      partial = true;
    }
    records[i] = record.dump();
  });

  try {
    OutputSink sink(config.output_path, out);
    for (const auto& r : records) sink.stream() << r << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return partial ? kExitPartial : kExitOk;
}

int run_evaluate(const CliConfig& config, std::ostream& out, std::ostream& err) {
  std::vector<ClozePassage> passages;
  Backends backends;
  try {
    validate(config.generation);
    passages = load_cloth(config.input_path);
    if (config.limit && passages.size() > *config.limit) passages.resize(*config.limit);
    backends = open_backends(config);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  if (passages.empty()) {
    err << "error: no passages in " << config.input_path << "\n";
    return kExitFailure;
  }

  std::vector<std::vector<EvalInput>> per_passage(passages.size());
  std::vector<std::string> failures(passages.size());
  parallel_for(passages.size(), config.jobs, [&](std::size_t p) {
    const auto& passage = passages[p];
    for (std::size_t q = 0; q < passage.questions.size(); ++q) {
      EvalInput item;
      item.item_id = passage.id + "#" + std::to_string(q);
      item.gold = passage.questions[q].distractors();
      try {
        const auto prepared =
            prepare_context(passage, q, config.input_mode, config.prefill_mode, backends.mlm.get());
        const auto [context, span] = prepared.with_answer(passage.questions[q].answer());
        const auto result = generate_distractors(context, span, config.generation, *backends.mlm, *backends.nli);
        item.generated = result.distractor_set.distractors;
      } catch (const std::exception& e) {
        failures[p] += item.item_id + ": " + error_kind(e) + ": " + e.what() + "\n";
      }
      per_passage[p].push_back(std::move(item));
    }
  });

  std::vector<EvalInput> items;
  bool partial = false;
  for (std::size_t p = 0; p < passages.size(); ++p) {
    if (!failures[p].empty()) {
      err << failures[p];
      partial = true;
    }
    for (auto& item : per_passage[p]) items.push_back(std::move(item));
  }
  if (items.empty()) {
    err << "error: passages hold no questions\n";
    return kExitFailure;
  }
  const auto report = evaluate_dataset(items);
  out << format_report_table(report, config.model_id);
  if (!config.output_path.empty()) {
    std::ofstream file(config.output_path, std::ios::binary | std::ios::trunc);
    if (!file) {
      err << "error: cannot write " << config.output_path << "\n";
      return kExitFailure;
    }
    auto doc = to_json(report);
    doc["config"] = to_json(config.generation);
    doc["input_mode"] = to_string(config.input_mode);
    doc["prefill"] = to_string(config.prefill_mode);
    file << doc.dump(2) << "\n";
  }
  return partial ? kExitPartial : kExitOk;
}

int run_trace(const CliConfig& config, std::ostream& out, std::ostream& err) {
  std::ifstream in(config.input_path);
  if (!in) {
    err << "error: cannot read " << config.input_path << "\n";
    return kExitFailure;
  }
  std::ostringstream rendered;
  std::size_t line_no = 0;
  try {
    for (std::string line; std::getline(in, line);) {
      ++line_no;
      if (text::trim(line).empty()) continue;
      const auto doc = nlohmann::json::parse(line);
      if (!doc.is_object()) throw ParseError("record is not an object");
      const std::string id = doc.contains("id") ? (doc["id"].is_string() ? doc["id"].get<std::string>() : doc["id"].dump())
                                                : "line-" + std::to_string(line_no);
      if (doc.contains("error")) {
        rendered << "item " << id << ": failed (" << doc["error"].value("type", "error") << ": "
                 << doc["error"].value("message", "") << ")\n";
        continue;
      }
      if (!doc.contains("trace") || !doc["trace"].is_array()) throw ParseError("missing 'trace' array");
      std::vector<EliminationEntry> entries;
      for (const auto& e : doc["trace"]) entries.push_back(elimination_entry_from_json(e));
      if (entries.empty()) {
        rendered << "item " << id << ": no eliminations\n";
        continue;
      }
      rendered << "item " << id << ": " << entries.size() << " eliminations\n";
      for (const auto& e : entries) {
        rendered << "  " << e.candidate << " | " << to_string(e.stage) << " | " << e.counterpart << " | "
                 << to_string(e.verdicts.forward) << "/" << to_string(e.verdicts.backward) << "\n";
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << config.input_path << ":" << line_no << ": " << e.what() << "\n";
    return kExitFailure;
  }
  out << rendered.str();
  return kExitOk;
}

int run(const CliConfig& config, std::ostream& out, std::ostream& err) {
  switch (config.command) {
    case Command::generate:
      return run_generate(config, out, err);
    case Command::evaluate:
      return run_evaluate(config, out, err);
    case Command::trace:
      return run_trace(config, out, err);
  }
  return kExitFailure;
}

}  // namespace clozegen::cli
