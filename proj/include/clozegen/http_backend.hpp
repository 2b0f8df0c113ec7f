#pragma once

#include "clozegen/backends.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace clozegen {

/// Adapters for checkpoints served by an inference process speaking a small
/// JSON-over-HTTP protocol (see tools/model_server.py):
///
///   GET  /info        -> {"name", "max_sequence_length", "mask_token"}
///   POST /tokenize    {"text"}                       -> {"tokens": [...]}
///   POST /detokenize  {"tokens"}                     -> {"text"}
///   POST /fill_mask   {"tokens", "position", "top_k"} -> {"predictions": [["tok", p], ...]}
///   POST /nli         {"premise", "hypothesis"}      -> {"label"}
///
/// The server owns the checkpoint tokenizer and special-token framing; the
/// reported max_sequence_length excludes those framing tokens. Each call opens
/// its own connection, so both adapters are safe for concurrent use.
struct HttpEndpoint {
  std::string host;
  int port = 80;
  std::string base_path;
};

/// Accepts "http://host[:port][/prefix]". Throws ConfigError otherwise.
[[nodiscard]] HttpEndpoint parse_http_endpoint(const std::string& url);

class HttpMaskedLanguageModel final : public MaskedLanguageModel {
 public:
  explicit HttpMaskedLanguageModel(HttpEndpoint endpoint);

  [[nodiscard]] BackendInfo info() const override;
  [[nodiscard]] std::vector<std::string> tokenize(std::string_view text) const override;
  [[nodiscard]] std::string detokenize(std::span<const std::string> tokens) const override;
  [[nodiscard]] std::vector<TokenPrediction> fill_mask(std::span<const std::string> tokens,
                                                       std::size_t mask_position,
                                                       std::size_t top_k) override;

 private:
  HttpEndpoint endpoint_;
  BackendInfo info_;
};

class HttpNliClassifier final : public NliClassifier {
 public:
  explicit HttpNliClassifier(HttpEndpoint endpoint);

  [[nodiscard]] std::string name() const override;
  [[nodiscard]] NliLabel classify(std::string_view premise, std::string_view hypothesis) override;

 private:
  HttpEndpoint endpoint_;
};

}  // namespace clozegen
