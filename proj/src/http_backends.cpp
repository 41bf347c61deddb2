#include <httplib.h>

#include <cstdlib>

#include "nlx/embedder.hpp"
#include "nlx/errors.hpp"
#include "nlx/hash.hpp"
#include "nlx/json_io.hpp"
#include "nlx/llm_client.hpp"

namespace nlx {

namespace {

httplib::Headers auth_headers(const std::string& key_env) {
  httplib::Headers h;
  if (key_env.empty()) return h;
  if (const char* key = std::getenv(key_env.c_str()); key && *key) {
    h.emplace("Authorization", std::string("Bearer ") + key);
  }
  return h;
}

json post_json(const std::string& base_url, const std::string& path, const json& body,
               const std::string& key_env, std::chrono::seconds timeout) {
  httplib::Client cli(base_url);
  cli.set_connection_timeout(timeout);
  cli.set_read_timeout(timeout);
  cli.set_write_timeout(timeout);
  auto res = cli.Post(path, auth_headers(key_env), body.dump(), "application/json");
  if (!res) {
    throw TransportError("POST " + base_url + path + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TransportError("POST " + base_url + path + " returned HTTP " +
                         std::to_string(res->status) + ": " + res->body.substr(0, 200));
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw TransportError("unparsable response from " + base_url + path + ": " + e.what());
  }
}

}  // namespace

HttpChatClient::HttpChatClient(std::string base_url, std::string model, std::string api_key_env,
                               std::chrono::seconds timeout)
    : base_url_(std::move(base_url)),
      model_(std::move(model)),
      api_key_env_(std::move(api_key_env)),
      timeout_(timeout) {}

std::string HttpChatClient::complete(const std::string& prompt, const DecodingParams& decoding) {
  const json body{{"model", model_},
                  {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
                  {"temperature", decoding.temperature},
                  {"top_p", decoding.top_p},
                  {"max_tokens", decoding.max_tokens}};
  const json reply = post_json(base_url_, "/v1/chat/completions", body, api_key_env_, timeout_);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("chat response has no message content: ") + e.what());
  }
}

RemoteEmbedder::RemoteEmbedder(std::string base_url, std::string model, std::string api_key_env)
    : base_url_(std::move(base_url)), model_(std::move(model)), api_key_env_(std::move(api_key_env)) {}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) {
  const json body{{"model", model_}, {"input", std::string(text)}};
  const json reply =
      post_json(base_url_, "/v1/embeddings", body, api_key_env_, std::chrono::seconds(60));
  EmbeddingVector v;
  v.source_hash = sha256_hex(text);
  try {
    v.values = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("embedding response malformed: ") + e.what());
  }
  if (v.values.empty()) throw TransportError("embedding response is empty");
  return v;
}

}  // namespace nlx
