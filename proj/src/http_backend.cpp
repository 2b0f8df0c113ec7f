#include "clozegen/http_backend.hpp"

#include "clozegen/errors.hpp"
#include "clozegen/text.hpp"

#include <httplib.h>

#include <charconv>

namespace clozegen {

HttpEndpoint parse_http_endpoint(const std::string& url) {
  constexpr std::string_view kScheme = "http://";
  if (url.rfind(kScheme, 0) != 0) throw ConfigError("backend url must start with http://: " + url);
  std::string_view rest = std::string_view(url).substr(kScheme.size());
  HttpEndpoint ep;
  const auto slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  if (slash != std::string_view::npos) {
    ep.base_path = std::string(rest.substr(slash));
    while (!ep.base_path.empty() && ep.base_path.back() == '/') ep.base_path.pop_back();
  }
  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    const auto port_str = authority.substr(colon + 1);
    int port = 0;
    auto [ptr, ec] = std::from_chars(port_str.data(), port_str.data() + port_str.size(), port);
    if (ec != std::errc{} || ptr != port_str.data() + port_str.size() || port <= 0 || port > 65535) {
      throw ConfigError("bad port in backend url: " + url);
    }
    ep.port = port;
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) throw ConfigError("missing host in backend url: " + url);
  ep.host = std::string(authority);
  return ep;
}

namespace {

nlohmann::json call(const HttpEndpoint& ep, const std::string& route, const nlohmann::json* body) {
  httplib::Client client(ep.host, ep.port);
  client.set_connection_timeout(10);
  client.set_read_timeout(300);
  const std::string path = ep.base_path + route;
  auto res = body ? client.Post(path, body->dump(), "application/json") : client.Get(path);
  if (!res) {
    throw BackendError("request to " + ep.host + ":" + std::to_string(ep.port) + path +
                       " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw BackendError(path + " returned HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw BackendError(path + " returned malformed JSON: " + e.what());
  }
}

template <typename T>
T field(const nlohmann::json& reply, const char* name, const std::string& route) {
  try {
    return reply.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(route + " reply: bad field '" + name + "': " + e.what());
  }
}

}  // namespace

HttpMaskedLanguageModel::HttpMaskedLanguageModel(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  const auto reply = call(endpoint_, "/info", nullptr);
  info_.name = field<std::string>(reply, "name", "/info");
  info_.max_sequence_length = field<std::size_t>(reply, "max_sequence_length", "/info");
  info_.mask_token = field<std::string>(reply, "mask_token", "/info");
  if (info_.max_sequence_length == 0 || info_.mask_token.empty()) {
    throw BackendError("/info reply: max_sequence_length must be positive and mask_token nonempty");
  }
}

BackendInfo HttpMaskedLanguageModel::info() const { return info_; }

std::vector<std::string> HttpMaskedLanguageModel::tokenize(std::string_view text) const {
  if (text::trim(text).empty()) throw ContractViolation("tokenize: text must be nonempty");
  const nlohmann::json body = {{"text", text}};
  return field<std::vector<std::string>>(call(endpoint_, "/tokenize", &body), "tokens", "/tokenize");
}

std::string HttpMaskedLanguageModel::detokenize(std::span<const std::string> tokens) const {
  const nlohmann::json body = {{"tokens", std::vector<std::string>(tokens.begin(), tokens.end())}};
  return field<std::string>(call(endpoint_, "/detokenize", &body), "text", "/detokenize");
}

std::vector<TokenPrediction> HttpMaskedLanguageModel::fill_mask(std::span<const std::string> tokens,
                                                                std::size_t mask_position, std::size_t top_k) {
  check_fill_mask_request(info_, tokens, mask_position, top_k);
  const nlohmann::json body = {{"tokens", std::vector<std::string>(tokens.begin(), tokens.end())},
                               {"position", mask_position},
                               {"top_k", top_k}};
  const auto reply = call(endpoint_, "/fill_mask", &body);
  std::vector<TokenPrediction> out;
  try {
    for (const auto& pair : reply.at("predictions")) {
      out.push_back({pair.at(0).get<std::string>(), pair.at(1).get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("/fill_mask reply: bad 'predictions': ") + e.what());
  }
  sort_predictions(out);
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

HttpNliClassifier::HttpNliClassifier(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

std::string HttpNliClassifier::name() const {
  return "http-nli@" + endpoint_.host + ":" + std::to_string(endpoint_.port) + endpoint_.base_path;
}

NliLabel HttpNliClassifier::classify(std::string_view premise, std::string_view hypothesis) {
  if (premise.empty() || hypothesis.empty()) throw ContractViolation("classify_nli: empty premise or hypothesis");
  const nlohmann::json body = {{"premise", premise}, {"hypothesis", hypothesis}};
  const auto label = field<std::string>(call(endpoint_, "/nli", &body), "label", "/nli");
  try {
    return parse_nli_label(label);
  } catch (const ParseError& e) {
    throw BackendError(std::string("/nli reply: ") + e.what());
  }
}

}  // namespace clozegen
