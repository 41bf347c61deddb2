#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nlx {

struct EmbeddingVector {
  std::vector<double> values;
  std::string source_hash;  // sha256 of the embedded text

  std::size_t dim() const { return values.size(); }
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingVector embed(std::string_view text) = 0;
  virtual std::string id() const = 0;
};

// Looks vectors up by content hash in a line-delimited file of
// {source_hash, dim, values}. Unknown text is a ParamError.
class VectorFileEmbedder final : public Embedder {
 public:
  explicit VectorFileEmbedder(const std::filesystem::path& path);
  EmbeddingVector embed(std::string_view text) override;
  std::string id() const override { return "vector-file:" + path_; }
  std::size_t size() const { return vectors_.size(); }

 private:
  std::string path_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

// Writes vectors in the format VectorFileEmbedder reads.
void write_vector_file(std::ostream& out, const std::vector<EmbeddingVector>& vectors);

// Feature-hashed bag of lowercased unigrams and bigrams, L2-normalised.
// Offline and deterministic; a stand-in when no sentence encoder is configured.
class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dim = 256);
  EmbeddingVector embed(std::string_view text) override;
  std::string id() const override { return "hashing-" + std::to_string(dim_); }

 private:
  std::size_t dim_;
};

// OpenAI-compatible POST {base_url}/v1/embeddings. The API key is read from
// the environment variable named by api_key_env (may be empty).
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(std::string base_url, std::string model, std::string api_key_env);
  EmbeddingVector embed(std::string_view text) override;
  std::string id() const override { return "remote:" + model_; }

 private:
  std::string base_url_;
  std::string model_;
  std::string api_key_env_;
};

// Memoises another embedder by source hash. Concurrent readers share the
// lock; inserts take it exclusively and keep the first value per key.
class CachingEmbedder final : public Embedder {
 public:
  explicit CachingEmbedder(std::unique_ptr<Embedder> inner);
  EmbeddingVector embed(std::string_view text) override;
  std::string id() const override { return inner_->id(); }
  std::size_t cached() const;

 private:
  std::unique_ptr<Embedder> inner_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, EmbeddingVector> cache_;
};

// "hashing[:dim]", "vector-file:<path>", "remote:<base_url>|<model>|<key_env>".
std::unique_ptr<Embedder> make_embedder(const std::string& spec);

}  // namespace nlx
