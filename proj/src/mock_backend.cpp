#include "clozegen/mock_backend.hpp"

#include "clozegen/errors.hpp"
#include "clozegen/text.hpp"

#include <fstream>

namespace clozegen {

std::string context_fingerprint(std::span<const std::string> tokens) { return text::join(tokens, " "); }

MockMaskedLanguageModel::MockMaskedLanguageModel(std::string mask_token, std::size_t max_sequence_length)
    : mask_token_(std::move(mask_token)), max_sequence_length_(max_sequence_length) {
  if (mask_token_.empty()) throw ConfigError("mock backend: mask token must be nonempty");
  if (max_sequence_length_ == 0) throw ConfigError("mock backend: max_sequence_length must be positive");
}

void MockMaskedLanguageModel::set_predictions(std::string fingerprint, std::size_t position,
                                              std::vector<TokenPrediction> top) {
  for (const auto& p : top) {
    if (!(p.probability >= 0.0 && p.probability <= 1.0)) {
      throw ConfigError("mock backend: probability of '" + p.token + "' outside [0, 1]");
    }
  }
  sort_predictions(top);
  table_[{std::move(fingerprint), position}] = std::move(top);
}

void MockMaskedLanguageModel::set_vocab(std::vector<std::string> vocab) { vocab_ = std::move(vocab); }

BackendInfo MockMaskedLanguageModel::info() const { return {"mock-mlm", max_sequence_length_, mask_token_}; }

std::vector<std::string> MockMaskedLanguageModel::tokenize(std::string_view text) const {
  if (text::trim(text).empty()) throw ContractViolation("tokenize: text must be nonempty");
  return text::split_whitespace(text);
}

std::string MockMaskedLanguageModel::detokenize(std::span<const std::string> tokens) const {
  return text::join(tokens, " ");
}

std::vector<TokenPrediction> MockMaskedLanguageModel::fill_mask(std::span<const std::string> tokens,
                                                                std::size_t mask_position, std::size_t top_k) {
  check_fill_mask_request(info(), tokens, mask_position, top_k);
  ++calls_;
  std::vector<TokenPrediction> out;
  if (auto it = table_.find({context_fingerprint(tokens), mask_position}); it != table_.end()) {
    out = it->second;
  } else if (!vocab_.empty()) {
    const double p = 1.0 / static_cast<double>(vocab_.size());
    for (const auto& tok : vocab_) out.push_back({tok, p});
    sort_predictions(out);
  }
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

void MockNliClassifier::set(std::string premise, std::string hypothesis, NliLabel label) {
  table_[{std::move(premise), std::move(hypothesis)}] = label;
}

void MockNliClassifier::set_symmetric(const std::string& a, const std::string& b, NliLabel label) {
  set(a, b, label);
  set(b, a, label);
}

NliLabel MockNliClassifier::classify(std::string_view premise, std::string_view hypothesis) {
  if (premise.empty() || hypothesis.empty()) throw ContractViolation("classify_nli: empty premise or hypothesis");
  ++calls_;
  if (auto it = table_.find(std::pair<std::string, std::string>(premise, hypothesis)); it != table_.end()) {
    return it->second;
  }
  return fallback_;
}

namespace {

const nlohmann::json& require(const nlohmann::json& obj, const char* field, const std::string& where) {
  if (!obj.is_object() || !obj.contains(field)) throw ParseError(where + ": missing field '" + field + "'");
  return obj.at(field);
}

}  // namespace

MockBackends load_mock_backends(const nlohmann::json& config) {
  if (!config.is_object()) throw ParseError("mock config: document must be an object");
  try {
    const auto& mask = require(config, "mask_token", "mock config");
    if (!mask.is_string()) throw ParseError("mock config: 'mask_token' must be a string");
    std::size_t max_len = 512;
    if (config.contains("max_sequence_length")) max_len = config.at("max_sequence_length").get<std::size_t>();

    MockBackends out;
    out.mlm = std::make_unique<MockMaskedLanguageModel>(mask.get<std::string>(), max_len);
    out.nli = std::make_unique<MockNliClassifier>();

    if (config.contains("predictions")) {
      const auto& preds = config.at("predictions");
      if (!preds.is_array()) throw ParseError("mock config: 'predictions' must be an array");
      for (std::size_t i = 0; i < preds.size(); ++i) {
        const std::string where = "mock config: predictions[" + std::to_string(i) + "]";
        const auto& entry = preds[i];
        const auto& fp = require(entry, "fingerprint", where);
        const auto& pos = require(entry, "position", where);
        const auto& top = require(entry, "top", where);
        if (!fp.is_string() || !pos.is_number_unsigned() || !top.is_array()) {
          throw ParseError(where + ": expected string fingerprint, unsigned position, array top");
        }
        std::vector<TokenPrediction> list;
        for (const auto& pair : top) {
          if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_number()) {
            throw ParseError(where + ": 'top' entries must be [token, probability]");
          }
          list.push_back({pair[0].get<std::string>(), pair[1].get<double>()});
        }
        out.mlm->set_predictions(fp.get<std::string>(), pos.get<std::size_t>(), std::move(list));
      }
    }
    if (config.contains("vocab")) out.mlm->set_vocab(config.at("vocab").get<std::vector<std::string>>());

    if (config.contains("nli")) {
      const auto& nli = config.at("nli");
      if (!nli.is_array()) throw ParseError("mock config: 'nli' must be an array");
      for (std::size_t i = 0; i < nli.size(); ++i) {
        const auto& row = nli[i];
        if (!row.is_array() || row.size() != 3 || !row[0].is_string() || !row[1].is_string() || !row[2].is_string()) {
          throw ParseError("mock config: nli[" + std::to_string(i) + "] must be [premise, hypothesis, label]");
        }
        out.nli->set(row[0].get<std::string>(), row[1].get<std::string>(), parse_nli_label(row[2].get<std::string>()));
      }
    }
    if (config.contains("nli_default")) {
      out.nli->set_fallback(parse_nli_label(config.at("nli_default").get<std::string>()));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("mock config: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }
}

MockBackends load_mock_backends(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mock config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("mock config " + path.string() + ": " + e.what());
  }
  return load_mock_backends(doc);
}

}  // namespace clozegen
