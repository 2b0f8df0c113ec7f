#pragma once

#include "clozegen/csg.hpp"
#include "clozegen/ds.hpp"
#include "clozegen/mock_backend.hpp"
#include "oracles.hpp"

#include <cstdio>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace testing {

inline const std::string kMask = "[MASK]";

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(CLOZEGEN_FIXTURES_DIR) / name; }

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("clozegen-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

struct RandomMockCase {
  std::vector<std::string> vocab;
  clozegen::MaskedContext context;
  clozegen::DecodeStrategy strategy = clozegen::DecodeStrategy::left_to_right;
  std::size_t width = 1;
  oracle::Table table;
};

/// Random masked LM over a vocabulary of at most 5 words and at most 3 masks.
/// Every reachable context gets its own distribution; probabilities sit on a
/// 0.05 grid so ties are common, and about one list in twelve is empty.
inline RandomMockCase make_random_case(std::mt19937& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  RandomMockCase c;
  const int v = pick(1, 5);
  for (int i = 0; i < v; ++i) c.vocab.push_back(std::string(1, static_cast<char>('a' + i)) + "x");
  const int prefix = pick(0, 2);
  const int r = pick(1, 3);
  const int suffix = pick(0, 2);
  std::vector<std::string> tokens;
  for (int i = 0; i < prefix; ++i) tokens.push_back("p" + std::to_string(i));
  for (int i = 0; i < r; ++i) {
    c.context.mask_positions.push_back(tokens.size());
    tokens.push_back(kMask);
  }
  for (int i = 0; i < suffix; ++i) tokens.push_back("s" + std::to_string(i));
  c.context.tokens = tokens;
  c.strategy = static_cast<clozegen::DecodeStrategy>(pick(0, 2));
  c.width = static_cast<std::size_t>(pick(1, 6));

  // Enumerate every assignment of {mask} U vocab to the slots.
  const std::size_t choices = c.vocab.size() + 1;
  std::size_t total = 1;
  for (int i = 0; i < r; ++i) total *= choices;
  for (std::size_t code = 0; code < total; ++code) {
    auto t = tokens;
    std::size_t rest = code;
    for (int s = 0; s < r; ++s) {
      const std::size_t choice = rest % choices;
      rest /= choices;
      t[c.context.mask_positions[s]] = choice == 0 ? kMask : c.vocab[choice - 1];
    }
    for (int s = 0; s < r; ++s) {
      const auto pos = c.context.mask_positions[s];
      if (t[pos] != kMask) continue;
      oracle::Distribution d;
      if (pick(0, 11) != 0) {
        for (const auto& w : c.vocab) {
          if (pick(0, 3) == 0 && !d.empty()) continue;
          d.emplace_back(w, pick(1, 20) * 0.05);
        }
      }
      c.table[{oracle::key_of(t), pos}] = d;
    }
  }
  return c;
}

inline void load_table(clozegen::MockMaskedLanguageModel& mlm, const oracle::Table& table) {
  for (const auto& [key, dist] : table) {
    std::vector<clozegen::TokenPrediction> list;
    for (const auto& [tok, p] : dist) list.push_back({tok, p});
    mlm.set_predictions(key.first, key.second, std::move(list));
  }
}

// ---------------------------------------------------------------------------
// Scripted distractor-selection scenarios with hand-derived outcomes.

struct NliRow {
  // Candidate word, or "@" for the unmodified frame.
  std::string premise;
  std::string hypothesis;
  clozegen::NliLabel label;
};

struct ExpectedEntry {
  std::string candidate;
  clozegen::EliminationStage stage;
  std::string counterpart;
  clozegen::NliLabel forward;
  clozegen::NliLabel backward;
};

struct DsScenario {
  std::string name;
  std::string sentence;
  std::string answer;
  std::vector<std::string> candidates;
  std::size_t k;
  std::vector<NliRow> nli;
  std::vector<std::string> expected;
  std::vector<ExpectedEntry> expected_trace;
  bool expected_underfilled;
  std::size_t expected_unscanned;
};

inline clozegen::ComparisonFrame frame_of(const DsScenario& s) {
  const auto pos = s.sentence.find(s.answer);
  return {s.sentence, {pos, pos + s.answer.size()}};
}

inline std::unique_ptr<clozegen::MockNliClassifier> nli_of(const DsScenario& s) {
  const auto frame = frame_of(s);
  auto expand = [&](const std::string& w) { return w == "@" ? frame.text : frame.instantiate(w); };
  auto nli = std::make_unique<clozegen::MockNliClassifier>(clozegen::NliLabel::neutral);
  for (const auto& row : s.nli) nli->set(expand(row.premise), expand(row.hypothesis), row.label);
  return nli;
}

inline std::vector<DsScenario> ds_scenarios() {
  using clozegen::NliLabel;
  constexpr auto E = NliLabel::entailment;
  constexpr auto N = NliLabel::neutral;
  constexpr auto C = NliLabel::contradiction;
  constexpr auto S1 = clozegen::EliminationStage::answer_entailment;
  constexpr auto S2 = clozegen::EliminationStage::pairwise_entailment;
  const std::string door = "She will open the door now.";
  std::vector<DsScenario> out;

  out.push_back({"ten candidates, two removed against the answer, three pairwise, one unscanned",
                 door, "open",
                 {"c0", "c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8", "c9"}, 4,
                 {{"c2", "@", E}, {"@", "c2", E}, {"c5", "@", E}, {"@", "c5", E},
                  {"c1", "c0", E}, {"c0", "c1", E},
                  {"c4", "c3", E}, {"c3", "c4", E},
                  {"c7", "c0", E}, {"c0", "c7", E}},
                 {"c0", "c3", "c6", "c8"},
                 {{"c2", S1, "open", E, E}, {"c5", S1, "open", E, E},
                  {"c1", S2, "c0", E, E}, {"c4", S2, "c3", E, E}, {"c7", S2, "c0", E, E}},
                 false, 1});

  out.push_back({"stage one removes a paraphrase of the answer",
                 door, "open", {"unlock", "close"}, 2,
                 {{"unlock", "@", E}, {"@", "unlock", E}, {"close", "@", C}, {"@", "close", C}},
                 {"close"}, {{"unlock", S1, "open", E, E}}, true, 0});

  out.push_back({"entailment in one direction only is retained",
                 door, "open", {"stand", "paint"}, 2,
                 {{"stand", "@", E}, {"@", "stand", N}},
                 {"stand", "paint"}, {}, false, 0});

  out.push_back({"pairwise clash drops the lower-ranked candidate",
                 door, "open", {"c1", "c2", "c3"}, 2,
                 {{"c1", "c2", E}, {"c2", "c1", E}},
                 {"c1", "c3"}, {{"c2", S2, "c1", E, E}}, false, 0});

  out.push_back({"no entailment keeps the prefix",
                 door, "open", {"c1", "c2", "c3"}, 2, {},
                 {"c1", "c2"}, {}, false, 1});

  out.push_back({"every pair entails leaves one underfilled distractor",
                 door, "open", {"c1", "c2", "c3"}, 3,
                 {{"c1", "c2", E}, {"c2", "c1", E}, {"c1", "c3", E}, {"c3", "c1", E},
                  {"c2", "c3", E}, {"c3", "c2", E}},
                 {"c1"}, {{"c2", S2, "c1", E, E}, {"c3", S2, "c1", E, E}}, true, 0});

  out.push_back({"every candidate entails the answer",
                 door, "open", {"c1", "c2"}, 2,
                 {{"c1", "@", E}, {"@", "c1", E}, {"c2", "@", E}, {"@", "c2", E}},
                 {}, {{"c1", S1, "open", E, E}, {"c2", S1, "open", E, E}}, true, 0});

  out.push_back({"no candidates", door, "open", {}, 3, {}, {}, {}, true, 0});

  out.push_back({"k of one takes the best survivor",
                 door, "open", {"c1", "c2", "c3"}, 1,
                 {{"c1", "@", E}, {"@", "c1", E}},
                 {"c2"}, {{"c1", S1, "open", E, E}}, false, 1});

  out.push_back({"one-way pairwise entailment keeps both",
                 door, "open", {"c1", "c2"}, 2,
                 {{"c2", "c1", E}, {"c1", "c2", N}},
                 {"c1", "c2"}, {}, false, 0});

  out.push_back({"contradiction in both directions survives",
                 door, "open", {"close"}, 1,
                 {{"close", "@", C}, {"@", "close", C}},
                 {"close"}, {}, false, 0});

  out.push_back({"verbatim answer is removed even when the classifier is neutral",
                 door, "open", {"Open", "shut"}, 2, {},
                 {"shut"}, {{"Open", S1, "open", N, N}}, true, 0});

  out.push_back({"candidates are only compared with kept ones",
                 door, "open", {"c1", "c2", "c3"}, 3,
                 {{"c1", "c2", E}, {"c2", "c1", E}, {"c2", "c3", E}, {"c3", "c2", E}},
                 {"c1", "c3"}, {{"c2", S2, "c1", E, E}}, true, 0});

  return out;
}

/// Empty string on success, else a description of the first mismatch.
inline std::string check_scenario(const DsScenario& s) {
  auto nli = nli_of(s);
  const auto result = clozegen::select_distractors(*nli, frame_of(s), s.candidates, s.k);
  std::ostringstream err;
  if (result.distractors != s.expected) err << "distractors differ; ";
  if (result.underfilled != s.expected_underfilled) err << "underfilled differs; ";
  if (result.unscanned != s.expected_unscanned) err << "unscanned " << result.unscanned << " != " << s.expected_unscanned << "; ";
  if (result.trace.entries.size() != s.expected_trace.size()) {
    err << "trace size " << result.trace.entries.size() << " != " << s.expected_trace.size() << "; ";
  } else {
    for (std::size_t i = 0; i < s.expected_trace.size(); ++i) {
      const auto& got = result.trace.entries[i];
      const auto& want = s.expected_trace[i];
      if (got.candidate != want.candidate || got.stage != want.stage || got.counterpart != want.counterpart ||
          got.verdicts.forward != want.forward || got.verdicts.backward != want.backward) {
        err << "trace entry " << i << " differs; ";
      }
    }
  }
  if (s.candidates.size() != result.distractors.size() + result.trace.entries.size() + result.unscanned) {
    err << "trace incomplete; ";
  }
  return err.str();
}

}  // namespace testing
