#include "clozegen/data.hpp"

#include "clozegen/csg.hpp"
#include "clozegen/errors.hpp"

#include <algorithm>
#include <array>
#include <fstream>

namespace clozegen {

std::vector<std::string> GoldQuestion::distractors() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i != answer_index) out.push_back(options[i]);
  }
  return out;
}

std::string_view to_string(InputMode mode) { return mode == InputMode::passage ? "passage" : "sentence"; }

std::string_view to_string(PrefillMode mode) {
  switch (mode) {
    case PrefillMode::model:
      return "model";
    case PrefillMode::gold:
      return "gold";
    case PrefillMode::none:
      return "none";
  }
  return "none";
}

InputMode parse_input_mode(std::string_view s) {
  const auto n = text::normalize(s);
  if (n == "passage") return InputMode::passage;
  if (n == "sentence") return InputMode::sentence;
  throw ConfigError("unknown input mode '" + std::string(s) + "' (expected passage or sentence)");
}

PrefillMode parse_prefill_mode(std::string_view s) {
  const auto n = text::normalize(s);
  if (n == "model") return PrefillMode::model;
  if (n == "gold") return PrefillMode::gold;
  if (n == "none") return PrefillMode::none;
  throw ConfigError("unknown prefill mode '" + std::string(s) + "' (expected model, gold or none)");
}

std::pair<std::string, CharSpan> PreparedContext::with_answer(std::string_view answer) const {
  return {text::splice(context, blank_span, answer), CharSpan{blank_span.begin, blank_span.begin + answer.size()}};
}

std::vector<CharSpan> find_blanks(std::string_view text) {
  std::vector<CharSpan> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '_') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && text[j] == '_') ++j;
    out.push_back({i, j});
    i = j;
  }
  return out;
}

ClozePassage parse_cloth(const nlohmann::json& doc, std::string id) {
  const std::string where = "CLOTH passage '" + id + "'";
  if (!doc.is_object()) throw ParseError(where + ": document must be an object");
  for (const char* f : {"article", "options", "answers"}) {
    if (!doc.contains(f)) throw ParseError(where + ": missing field '" + f + "'");
  }
  const auto& article = doc.at("article");
  const auto& options = doc.at("options");
  const auto& answers = doc.at("answers");
  if (!article.is_string()) throw ParseError(where + ": field 'article' must be a string");
  if (!options.is_array()) throw ParseError(where + ": field 'options' must be an array");
  if (!answers.is_array()) throw ParseError(where + ": field 'answers' must be an array");
  if (options.size() != answers.size()) {
    throw ParseError(where + ": field 'answers' has " + std::to_string(answers.size()) + " entries but 'options' has " +
                     std::to_string(options.size()));
  }

  ClozePassage passage;
  passage.id = std::move(id);
  passage.text_with_blanks = article.get<std::string>();
  const auto blanks = find_blanks(passage.text_with_blanks);
  if (blanks.size() != options.size()) {
    throw ParseError(where + ": field 'article' has " + std::to_string(blanks.size()) + " blanks but there are " +
                     std::to_string(options.size()) + " questions");
  }
  for (std::size_t q = 0; q < options.size(); ++q) {
    const auto& group = options[q];
    if (!group.is_array() || group.size() != 4 ||
        !std::all_of(group.begin(), group.end(), [](const auto& o) { return o.is_string(); })) {
      throw ParseError(where + ": field 'options[" + std::to_string(q) + "]' must hold 4 strings");
    }
    const auto& letter = answers[q];
    if (!letter.is_string() || letter.get<std::string>().size() != 1 || letter.get<std::string>()[0] < 'A' ||
        letter.get<std::string>()[0] > 'D') {
      throw ParseError(where + ": field 'answers[" + std::to_string(q) + "]' must be a letter A-D");
    }
    GoldQuestion gq;
    gq.options = group.get<std::vector<std::string>>();
    gq.answer_index = static_cast<std::size_t>(letter.get<std::string>()[0] - 'A');
    passage.questions.push_back(std::move(gq));
  }
  return passage;
}

nlohmann::json to_cloth_json(const ClozePassage& passage) {
  nlohmann::json options = nlohmann::json::array();
  nlohmann::json answers = nlohmann::json::array();
  for (const auto& q : passage.questions) {
    options.push_back(q.options);
    answers.push_back(std::string(1, static_cast<char>('A' + q.answer_index)));
  }
  return {{"article", passage.text_with_blanks}, {"options", options}, {"answers", answers}, {"source", passage.id}};
}

namespace {

ClozePassage load_cloth_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open " + file.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
  return parse_cloth(doc, file.stem().string());
}

}  // namespace

std::vector<ClozePassage> load_cloth(const std::filesystem::path& path) {
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<ClozePassage> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(load_cloth_file(f));
    return out;
  }
  if (!std::filesystem::exists(path, ec)) throw ParseError("CLOTH path does not exist: " + path.string());
  return {load_cloth_file(path)};
}

namespace {

// Words after which a period does not end a sentence (lowercased, period included).
constexpr std::array kAbbreviations = {
    "mr.",   "mrs.",  "ms.",   "dr.",   "prof.", "sr.",  "jr.",  "st.",   "mt.",   "vs.",  "e.g.", "i.e.",
    "u.s.",  "u.k.",  "a.m.",  "p.m.",  "inc.",  "ltd.", "co.",  "corp.", "no.",   "fig.", "jan.", "feb.",
    "mar.",  "apr.",  "aug.",  "sept.", "sep.",  "oct.", "nov.", "dec.",  "gen.",  "gov.", "sen.", "rev.",
    "capt.", "col.",  "lt.",   "sgt.",  "approx.", "dept.", "est.", "ph.d."};

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}'; }

bool is_abbreviation(std::string_view text, std::size_t period) {
  std::size_t start = period;
  while (start > 0 && !text::is_space(text[start - 1])) --start;
  std::string_view word = text.substr(start, period - start + 1);
  while (!word.empty() && (word.front() == '(' || word.front() == '"' || word.front() == '\'' || word.front() == '[')) {
    word.remove_prefix(1);
  }
  // Single capital initial such as "J."
  if (word.size() == 2 && word[0] >= 'A' && word[0] <= 'Z') return true;
  const auto lowered = text::normalize(word);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lowered) != kAbbreviations.end();
}

// Half-open ranges of sentences, whitespace excluded.
std::vector<CharSpan> split_sentences(std::string_view text) {
  std::vector<CharSpan> out;
  std::size_t start = 0;
  auto push = [&](std::size_t end) {
    std::size_t b = start;
    while (b < end && text::is_space(text[b])) ++b;
    std::size_t e = end;
    while (e > b && text::is_space(text[e - 1])) --e;
    if (e > b) out.push_back({b, e});
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t end = i + 1;
    while (end < text.size() && (is_closer(text[end]) || text[end] == '.' || text[end] == '!' || text[end] == '?')) {
      ++end;
    }
    if (end < text.size() && !text::is_space(text[end])) continue;
    if (c == '.' && end == i + 1 && is_abbreviation(text, i)) continue;
    // A lowercase continuation means the punctuation was internal ("etc. to", "Wait... what").
    std::size_t next = end;
    while (next < text.size() && text::is_space(text[next])) ++next;
    if (next < text.size() && text[next] >= 'a' && text[next] <= 'z') continue;
    push(end);
    start = end;
    i = end - 1;
  }
  push(text.size());
  return out;
}

}  // namespace

SentenceExtraction extract_sentence(std::string_view text, CharSpan span) {
  if (span.begin > span.end || span.end > text.size()) {
    throw SpanError("span [" + std::to_string(span.begin) + ", " + std::to_string(span.end) + ") outside text");
  }
  const auto sentences = split_sentences(text);
  if (sentences.empty()) return {std::string(text), span, false};

  // Sentence index for a byte offset: the last sentence starting at or before it.
  auto locate = [&](std::size_t offset) {
    std::size_t idx = 0;
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      if (sentences[s].begin <= offset) idx = s;
    }
    return idx;
  };
  const std::size_t first = locate(span.begin);
  const std::size_t last = locate(span.empty() ? span.begin : span.end - 1);
  const std::size_t begin = std::min(sentences[first].begin, span.begin);
  const std::size_t end = std::max(sentences[last].end, span.end);

  SentenceExtraction out;
  out.sentence = std::string(text.substr(begin, end - begin));
  out.span = {span.begin - begin, span.end - begin};
  out.straddles_boundary = first != last;
  return out;
}

namespace {

struct WorkingBlank {
  CharSpan span;
  std::size_t question;
};

std::string model_fill(MaskedLanguageModel& mlm, std::string_view context, CharSpan blank) {
  const auto info = mlm.info();
  std::vector<std::string> tokens;
  const auto prefix = context.substr(0, blank.begin);
  const auto suffix = context.substr(blank.end);
  if (!text::trim(prefix).empty()) tokens = mlm.tokenize(prefix);
  MaskedContext masked;
  masked.mask_positions.push_back(tokens.size());
  tokens.push_back(info.mask_token);
  if (!text::trim(suffix).empty()) {
    const auto rest = mlm.tokenize(suffix);
    tokens.insert(tokens.end(), rest.begin(), rest.end());
  }
  masked.tokens = std::move(tokens);
  masked = window_context(masked, info.max_sequence_length);
  const auto top = mlm.fill_mask(masked.tokens, masked.mask_positions.front(), 1);
  if (top.empty()) throw BackendError("model prefill: backend returned no prediction");
  const std::vector<std::string> one{top.front().token};
  return mlm.detokenize(one);
}

}  // namespace

PreparedContext prepare_context(const ClozePassage& passage, std::size_t question_index, InputMode input_mode,
                                PrefillMode prefill_mode, MaskedLanguageModel* mlm) {
  if (prefill_mode == PrefillMode::model && mlm == nullptr) {
    throw ConfigError("model prefill requires a masked language model backend");
  }
  const auto all_blanks = find_blanks(passage.text_with_blanks);
  if (all_blanks.size() != passage.questions.size()) {
    throw ParseError("passage '" + passage.id + "': blank count does not match question count");
  }
  if (question_index >= all_blanks.size()) {
    throw ContractViolation("question index " + std::to_string(question_index) + " out of range for passage '" +
                            passage.id + "'");
  }

  std::string working = passage.text_with_blanks;
  std::vector<WorkingBlank> blanks;
  if (input_mode == InputMode::sentence) {
    const auto target = all_blanks[question_index];
    auto extraction = extract_sentence(working, target);
    const std::size_t offset = target.begin - extraction.span.begin;
    const std::size_t limit = offset + extraction.sentence.size();
    for (std::size_t q = 0; q < all_blanks.size(); ++q) {
      if (all_blanks[q].begin >= offset && all_blanks[q].end <= limit) {
        blanks.push_back({{all_blanks[q].begin - offset, all_blanks[q].end - offset}, q});
      }
    }
    working = std::move(extraction.sentence);
  } else {
    for (std::size_t q = 0; q < all_blanks.size(); ++q) blanks.push_back({all_blanks[q], q});
  }

  // Fill left to right, shifting the remaining spans after each replacement.
  for (std::size_t b = 0; b < blanks.size(); ++b) {
    if (blanks[b].question == question_index) continue;
    std::string fill;
    switch (prefill_mode) {
      case PrefillMode::gold:
        fill = passage.questions[blanks[b].question].answer();
        break;
      case PrefillMode::model:
        fill = model_fill(*mlm, working, blanks[b].span);
        break;
      case PrefillMode::none:
        throw ConfigError("prefill mode 'none' cannot resolve the other blanks of passage '" + passage.id + "'");
    }
    const auto old = blanks[b].span;
    working = text::splice(working, old, fill);
    const auto shift = static_cast<std::ptrdiff_t>(fill.size()) - static_cast<std::ptrdiff_t>(old.size());
    for (std::size_t later = b + 1; later < blanks.size(); ++later) {
      blanks[later].span.begin = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(blanks[later].span.begin) + shift);
      blanks[later].span.end = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(blanks[later].span.end) + shift);
    }
    blanks[b].span = {old.begin, old.begin + fill.size()};
  }

  PreparedContext out;
  out.input_mode = input_mode;
  out.prefill_mode = prefill_mode;
  for (const auto& b : blanks) {
    if (b.question == question_index) out.blank_span = b.span;
  }
  out.context = std::move(working);
  return out;
}

ContextAnswerPair parse_pair(const nlohmann::json& record, std::string* warning) {
  if (!record.is_object()) throw ParseError("pair record must be a JSON object");
  ContextAnswerPair pair;
  if (record.contains("id")) {
    const auto& id = record.at("id");
    pair.id = id.is_string() ? id.get<std::string>() : id.dump();
  }
  if (!record.contains("context") || !record.at("context").is_string()) {
    throw ParseError("pair '" + pair.id + "': field 'context' must be a string");
  }
  pair.context = record.at("context").get<std::string>();
  if (text::trim(pair.context).empty()) throw ParseError("pair '" + pair.id + "': field 'context' is empty");

  if (record.contains("answer_start") || record.contains("answer_end")) {
    const auto& s = record.value("answer_start", nlohmann::json());
    const auto& e = record.value("answer_end", nlohmann::json());
    if (!s.is_number_unsigned() || !e.is_number_unsigned()) {
      throw ParseError("pair '" + pair.id + "': 'answer_start' and 'answer_end' must be non-negative integers");
    }
    const auto start = s.get<std::size_t>();
    const auto end = e.get<std::size_t>();
    if (start >= end) throw SpanError("pair '" + pair.id + "': empty answer span");
    pair.answer_span = {text::byte_offset_of_codepoint(pair.context, start),
                        text::byte_offset_of_codepoint(pair.context, end)};
    return pair;
  }
  if (!record.contains("answer_text") || !record.at("answer_text").is_string()) {
    throw ParseError("pair '" + pair.id + "': needs 'answer_start'/'answer_end' or 'answer_text'");
  }
  const auto answer = record.at("answer_text").get<std::string>();
  if (answer.empty()) throw ParseError("pair '" + pair.id + "': field 'answer_text' is empty");
  const auto pos = pair.context.find(answer);
  if (pos == std::string::npos) {
    throw ResolveError("pair '" + pair.id + "': answer_text '" + answer + "' not found in context");
  }
  if (warning && pair.context.find(answer, pos + 1) != std::string::npos) {
    *warning = "pair '" + pair.id + "': answer_text occurs more than once; using the first occurrence";
  }
  pair.answer_span = {pos, pos + answer.size()};
  return pair;
}

PairFile load_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  PairFile out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    std::string warning;
    out.pairs.push_back(parse_pair(record, &warning));
    if (!warning.empty()) out.warnings.push_back(std::move(warning));
  }
  return out;
}

}  // namespace clozegen
