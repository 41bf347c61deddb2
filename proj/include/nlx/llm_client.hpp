#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "nlx/parallel.hpp"

namespace nlx {

struct DecodingParams {
  double temperature = 0.0;
  double top_p = 1.0;
  int max_tokens = 1024;

  nlohmann::json to_json() const;
  static DecodingParams from_json(const nlohmann::json& j);
  bool operator==(const DecodingParams&) const = default;
};

// complete() returns the model's text or throws TransportError.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const std::string& prompt, const DecodingParams& decoding) = 0;
  virtual std::string model_id() const = 0;
};

// Canned responder for tests and offline replays. Thread-safe; records
// every prompt it receives in arrival order.
class MockClient final : public LlmClient {
 public:
  using Responder = std::function<std::string(const std::string& prompt)>;

  MockClient(std::string model_id, Responder responder);

  std::string complete(const std::string& prompt, const DecodingParams& decoding) override;
  std::string model_id() const override { return model_id_; }

  std::size_t calls() const;
  std::vector<std::string> prompts() const;

 private:
  std::string model_id_;
  Responder responder_;
  mutable std::mutex mu_;
  std::vector<std::string> prompts_;
};

// OpenAI-compatible POST {base_url}/v1/chat/completions with a single user
// message. The bearer token comes from the environment variable api_key_env.
class HttpChatClient final : public LlmClient {
 public:
  HttpChatClient(std::string base_url, std::string model, std::string api_key_env,
                 std::chrono::seconds timeout = std::chrono::seconds(120));

  std::string complete(const std::string& prompt, const DecodingParams& decoding) override;
  std::string model_id() const override { return model_; }

 private:
  std::string base_url_;
  std::string model_;
  std::string api_key_env_;
  std::chrono::seconds timeout_;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{500};  // doubled after each failure
};

struct CacheStats {
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t failures = 0;
};

// Content-addressed persistent cache in front of another client. Keys are
// sha256(model_id, prompt); each key is one JSON file written via a temp
// file and rename, so readers never observe a partial entry. An empty
// cache_dir keeps entries in memory only.
class CachedClient final : public LlmClient {
 public:
  CachedClient(LlmClient& inner, std::filesystem::path cache_dir, RetryPolicy retry = {});

  // Throws TransportError once every attempt has failed.
  std::string complete(const std::string& prompt, const DecodingParams& decoding) override;
  std::string model_id() const override { return inner_.model_id(); }

  std::optional<std::string> lookup(const std::string& prompt) const;
  CacheStats stats() const;
  std::string key_for(const std::string& prompt) const;

 private:
  std::filesystem::path entry_path(const std::string& key) const;
  void store(const std::string& key, const std::string& prompt, const std::string& response,
             const DecodingParams& decoding);

  LlmClient& inner_;
  std::filesystem::path cache_dir_;
  RetryPolicy retry_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> memory_;
  CacheStats stats_;
};

// "replay:<model_id>" answers nothing itself (every call is a TransportError,
// so only cached prompts succeed); "http:<base_url>|<model>|<key_env>".
// "mock:<model_id>" answers every prompt with canned_response.
std::unique_ptr<LlmClient> make_client(const std::string& spec);

// Deterministic offline answer shaped like a real reply to the prompt's task:
// a category digit, a stage-one list, highlight blocks, category blocks or
// bullet explanations, with choices derived from the prompt hash.
std::string canned_response(const std::string& prompt);

}  // namespace nlx
