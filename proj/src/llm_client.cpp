#include "nlx/llm_client.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

#include "nlx/errors.hpp"
#include "nlx/hash.hpp"
#include "nlx/json_io.hpp"
#include "nlx/labels.hpp"

namespace nlx {

namespace fs = std::filesystem;

json DecodingParams::to_json() const {
  return {{"temperature", temperature}, {"top_p", top_p}, {"max_tokens", max_tokens}};
}

DecodingParams DecodingParams::from_json(const json& j) {
  DecodingParams d;
  d.temperature = j.value("temperature", d.temperature);
  d.top_p = j.value("top_p", d.top_p);
  d.max_tokens = j.value("max_tokens", d.max_tokens);
  return d;
}

MockClient::MockClient(std::string model_id, Responder responder)
    : model_id_(std::move(model_id)), responder_(std::move(responder)) {}

std::string MockClient::complete(const std::string& prompt, const DecodingParams&) {
  {
    std::lock_guard lock(mu_);
    prompts_.push_back(prompt);
  }
  return responder_(prompt);
}

std::size_t MockClient::calls() const {
  std::lock_guard lock(mu_);
  return prompts_.size();
}

std::vector<std::string> MockClient::prompts() const {
  std::lock_guard lock(mu_);
  return prompts_;
}

namespace {

class ReplayClient final : public LlmClient {
 public:
  explicit ReplayClient(std::string model_id) : model_id_(std::move(model_id)) {}
  std::string complete(const std::string&, const DecodingParams&) override {
    throw TransportError("replay client '" + model_id_ + "' has no cached response");
  }
  std::string model_id() const override { return model_id_; }

 private:
  std::string model_id_;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

CachedClient::CachedClient(LlmClient& inner, fs::path cache_dir, RetryPolicy retry)
    : inner_(inner), cache_dir_(std::move(cache_dir)), retry_(retry) {
  if (retry_.attempts < 1) throw ParamError("retry attempts must be >= 1");
  if (!cache_dir_.empty()) fs::create_directories(cache_dir_);
}

std::string CachedClient::key_for(const std::string& prompt) const {
  std::string material = inner_.model_id();
  material.push_back('\0');
  material += prompt;
  return sha256_hex(material);
}

fs::path CachedClient::entry_path(const std::string& key) const {
  return cache_dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> CachedClient::lookup(const std::string& prompt) const {
  const std::string key = key_for(prompt);
  {
    std::lock_guard lock(mu_);
    if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  }
  if (cache_dir_.empty()) return std::nullopt;
  const fs::path p = entry_path(key);
  std::error_code ec;
  if (!fs::exists(p, ec)) return std::nullopt;
  try {
    const json j = json::parse(read_file(p));
    return j.at("response").get<std::string>();
  } catch (const json::exception&) {
    return std::nullopt;  // unreadable entries are refetched and overwritten
  }
}

void CachedClient::store(const std::string& key, const std::string& prompt,
                         const std::string& response, const DecodingParams& decoding) {
  {
    std::lock_guard lock(mu_);
    memory_.emplace(key, response);
  }
  if (cache_dir_.empty()) return;
  const fs::path p = entry_path(key);
  fs::create_directories(p.parent_path());
  const json entry{{"key", key},
                   {"model_id", inner_.model_id()},
                   {"prompt", prompt},
                   {"response", response},
                   {"decoding", decoding.to_json()}};
  thread_local std::mt19937_64 rng{std::random_device{}()};
  const fs::path tmp = p.string() + ".tmp" + std::to_string(rng());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << entry.dump(2) << '\n';
    if (!out) throw Error("cannot write cache entry " + tmp.string());
  }
  fs::rename(tmp, p);
}

std::string CachedClient::complete(const std::string& prompt, const DecodingParams& decoding) {
  if (auto hit = lookup(prompt)) {
    std::lock_guard lock(mu_);
    ++stats_.hits;
    return *hit;
  }
  {
    std::lock_guard lock(mu_);
    ++stats_.misses;
  }
  const std::string key = key_for(prompt);
  auto delay = retry_.base_delay;
  std::string last_error;
  for (int attempt = 1; attempt <= retry_.attempts; ++attempt) {
    try {
      std::string response = inner_.complete(prompt, decoding);
      store(key, prompt, response, decoding);
      return response;
    } catch (const TransportError& e) {
      last_error = e.what();
    }
    if (attempt < retry_.attempts && delay.count() > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
  {
    std::lock_guard lock(mu_);
    ++stats_.failures;
  }
  throw TransportError("gave up after " + std::to_string(retry_.attempts) +
                       " attempts: " + last_error);
}

CacheStats CachedClient::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

namespace {

std::vector<std::string> words_after(const std::string& prompt, const std::string& marker) {
  std::vector<std::string> out;
  const auto at = prompt.rfind(marker);
  if (at == std::string::npos) return out;
  std::istringstream in(prompt.substr(at + marker.size(), 400));
  std::string w;
  while (in >> w && out.size() < 40) {
    while (!w.empty() && !std::isalnum(static_cast<unsigned char>(w.back()))) w.pop_back();
    while (!w.empty() && !std::isalnum(static_cast<unsigned char>(w.front()))) w.erase(0, 1);
    if (w.size() > 2) out.push_back(w);
  }
  return out;
}

}  // namespace

std::string canned_response(const std::string& prompt) {
  const std::string h = sha256_hex(prompt);
  auto pick = [&](std::size_t slot, std::size_t n) {
    return static_cast<std::size_t>(std::stoul(h.substr(slot * 4, 4), nullptr, 16)) % n;
  };
  const auto has = [&](const char* s) { return prompt.find(s) != std::string::npos; };

  if (has("Now classify the following explanation")) {
    return "Category: " + std::to_string(1 + pick(0, 8));
  }
  if (has("identify all applicable reasoning categories")) {
    const auto a = 1 + pick(0, 8);
    const auto b = 1 + (a + pick(1, 7)) % 8;
    return std::to_string(std::min(a, b)) + ", " + std::to_string(std::max(a, b));
  }
  if (has("highlight relevant word indices")) {
    const bool neutral = has("Based on the label 'neutral'");
    std::string out;
    for (int k = 0; k < 3; ++k) {
      out += "Highlight " + std::to_string(k + 1) + ":\n";
      out += "Premise_Highlighted: [" + (neutral ? std::string() : std::to_string(k)) + "]\n";
      out += "Hypothesis_Highlighted: [" + std::to_string(k) + "]\n\n";
    }
    return out;
  }
  auto words = words_after(prompt, "Context:");
  if (words.empty()) words = {"premise", "hypothesis", "statement"};
  const auto w = [&](std::size_t slot) { return words[pick(slot, words.size())]; };
  if (has("identify all categories for explanations")) {
    const auto a = 1 + pick(0, 8);
    const auto b = 1 + (a + pick(1, 7)) % 8;
    std::string out;
    for (auto c : {std::min(a, b), std::max(a, b)}) {
      out += std::to_string(c) + ". " +
             std::string(display_name(static_cast<Category>(c))) + ":\n";
      out += "- The context mentions " + w(2 + c) + " which bears on " + w(3 + c) + ".\n";
      out += "- " + w(4 + c) + " relates to " + w(5 + c) + ".\n\n";
    }
    return out;
  }
  return "- The context mentions " + w(2) + " and " + w(3) + ".\n" +
         "- The statement follows from " + w(4) + ".\n" +
         "- " + w(5) + " is linked to " + w(6) + " in both sentences.\n";
}

std::unique_ptr<LlmClient> make_client(const std::string& spec) {
  if (spec.rfind("mock:", 0) == 0) return std::make_unique<MockClient>(spec.substr(5), canned_response);
  if (spec.rfind("replay:", 0) == 0) return std::make_unique<ReplayClient>(spec.substr(7));
  if (spec.rfind("http:", 0) == 0) {
    const std::string rest = spec.substr(5);
    const auto a = rest.find('|');
    const auto b = a == std::string::npos ? a : rest.find('|', a + 1);
    if (a == std::string::npos || b == std::string::npos) {
      throw ParamError("http client spec is http:<base_url>|<model>|<key_env>");
    }
    return std::make_unique<HttpChatClient>(rest.substr(0, a), rest.substr(a + 1, b - a - 1),
                                            rest.substr(b + 1));
  }
  throw ParamError("unknown client '" + spec + "'");
}

}  // namespace nlx
