#include "nlx/embedder.hpp"

#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>

#include "nlx/corpus.hpp"
#include "nlx/errors.hpp"
#include "nlx/hash.hpp"
#include "nlx/json_io.hpp"

namespace nlx {

VectorFileEmbedder::VectorFileEmbedder(const std::filesystem::path& path) : path_(path.string()) {
  std::ifstream in(path);
  if (!in) throw ParamError("cannot open vector file '" + path_ + "'");
  std::string line;
  std::size_t lineno = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const std::string hash = require_string(j, "source_hash");
      const auto d = require_field(j, "dim").get<std::size_t>();
      auto values = require_field(j, "values").get<std::vector<double>>();
      if (values.size() != d || d == 0) throw ParamError("dim does not match values length");
      if (dim == 0) dim = d;
      if (d != dim) throw ParamError("dimension differs from earlier rows");
      for (double v : values) {
        if (!std::isfinite(v)) throw ParamError("non-finite vector entry");
      }
      vectors_[hash] = std::move(values);
    } catch (const json::exception& e) {
      throw RowError(lineno, e.what());
    } catch (const ParamError& e) {
      throw RowError(lineno, e.what());
    }
  }
}

EmbeddingVector VectorFileEmbedder::embed(std::string_view text) {
  EmbeddingVector v;
  v.source_hash = sha256_hex(text);
  auto it = vectors_.find(v.source_hash);
  if (it == vectors_.end()) {
    throw ParamError("no vector for text '" + std::string(text.substr(0, 60)) + "' in " + path_);
  }
  v.values = it->second;
  return v;
}

void write_vector_file(std::ostream& out, const std::vector<EmbeddingVector>& vectors) {
  for (const auto& v : vectors) {
    json j{{"source_hash", v.source_hash}, {"dim", v.dim()}, {"values", v.values}};
    out << dump_line(j) << '\n';
  }
}

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ParamError("embedding dimension must be positive");
}

EmbeddingVector HashingEmbedder::embed(std::string_view text) {
  EmbeddingVector v;
  v.source_hash = sha256_hex(text);
  v.values.assign(dim_, 0.0);
  std::vector<std::string> words;
  for (const auto& sp : token_spans(text)) {
    std::string w(text.substr(sp.begin, sp.end - sp.begin));
    for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    words.push_back(std::move(w));
  }
  auto add = [&](const std::string& feature, double weight) {
    const std::uint64_t h = fnv1a64(feature);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    v.values[static_cast<std::size_t>(h % dim_)] += sign * weight;
  };
  for (std::size_t i = 0; i < words.size(); ++i) {
    add("u:" + words[i], 1.0);
    if (i + 1 < words.size()) add("b:" + words[i] + " " + words[i + 1], 0.5);
  }
  double norm = 0.0;
  for (double x : v.values) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v.values) x /= norm;
  }
  return v;
}

CachingEmbedder::CachingEmbedder(std::unique_ptr<Embedder> inner) : inner_(std::move(inner)) {
  if (!inner_) throw ParamError("null embedder");
}

EmbeddingVector CachingEmbedder::embed(std::string_view text) {
  const std::string key = sha256_hex(text);
  {
    std::shared_lock lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  EmbeddingVector v = inner_->embed(text);
  std::unique_lock lock(mu_);
  return cache_.emplace(key, std::move(v)).first->second;
}

std::size_t CachingEmbedder::cached() const {
  std::shared_lock lock(mu_);
  return cache_.size();
}

std::unique_ptr<Embedder> make_embedder(const std::string& spec) {
  if (spec.empty() || spec == "hashing") return std::make_unique<HashingEmbedder>();
  if (spec.rfind("hashing:", 0) == 0) {
    return std::make_unique<HashingEmbedder>(std::stoul(spec.substr(8)));
  }
  if (spec.rfind("vector-file:", 0) == 0) {
    return std::make_unique<VectorFileEmbedder>(spec.substr(12));
  }
  if (spec.rfind("remote:", 0) == 0) {
    const std::string rest = spec.substr(7);
    const auto a = rest.find('|');
    const auto b = a == std::string::npos ? a : rest.find('|', a + 1);
    if (a == std::string::npos || b == std::string::npos) {
      throw ParamError("remote embedder spec is remote:<base_url>|<model>|<key_env>");
    }
    return std::make_unique<RemoteEmbedder>(rest.substr(0, a), rest.substr(a + 1, b - a - 1),
                                            rest.substr(b + 1));
  }
  throw ParamError("unknown embedder '" + spec + "'");
}

}  // namespace nlx
