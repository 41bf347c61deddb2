#include "nlx/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "nlx/errors.hpp"

namespace nlx {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ParamError("bad value for '" + key + "': '" + value + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParamError("bad value for '" + key + "': '" + value + "'");
}

}  // namespace

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys{
      "corpus",      "corpus_format", "exemplars",  "embedder",    "tagger",
      "client",      "temperature",   "top_p",      "max_tokens",  "seed",
      "cache_dir",   "max_workers",   "projection", "perplexity"};
  return keys;
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  out << "corpus = " << corpus << '\n'
      << "corpus_format = " << (corpus_format == CorpusFormat::native_jsonl ? "native" : "esnli") << '\n'
      << "exemplars = " << exemplars << '\n'
      << "embedder = " << embedder << '\n'
      << "tagger = " << tagger << '\n'
      << "client = " << client << '\n'
      << "temperature = " << format_double(decoding.temperature) << '\n'
      << "top_p = " << format_double(decoding.top_p) << '\n'
      << "max_tokens = " << decoding.max_tokens << '\n'
      << "seed = " << seed << '\n'
      << "cache_dir = " << cache_dir << '\n'
      << "max_workers = " << max_workers << '\n'
      << "projection = " << (projection == ProjectionMethod::pca ? "pca" : "tsne") << '\n'
      << "perplexity = " << format_double(perplexity) << '\n';
  return out.str();
}

std::string RunConfig::header() const {
  std::string out;
  std::istringstream in(to_text());
  std::string line;
  while (std::getline(in, line)) out += "# " + line + '\n';
  return out;
}

ProjectionConfig RunConfig::projection_config() const {
  ProjectionConfig p;
  p.method = projection;
  p.seed = seed;
  p.perplexity = perplexity;
  return p;
}

std::filesystem::path RunConfig::exemplar_path() const {
  return exemplars.empty() ? std::filesystem::path(NLX_DATA_DIR) / "exemplars.jsonl"
                           : std::filesystem::path(exemplars);
}

RunConfig parse_run_config(std::string_view text) {
  RunConfig c;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParamError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "corpus") {
        c.corpus = value;
      } else if (key == "corpus_format") {
        if (value == "native") {
          c.corpus_format = CorpusFormat::native_jsonl;
        } else if (value == "esnli") {
          c.corpus_format = CorpusFormat::esnli_csv;
        } else {
          throw ParamError("corpus_format is native or esnli");
        }
      } else if (key == "exemplars") {
        c.exemplars = value;
      } else if (key == "embedder") {
        c.embedder = value;
      } else if (key == "tagger") {
        c.tagger = value;
      } else if (key == "client") {
        c.client = value;
      } else if (key == "temperature") {
        c.decoding.temperature = parse_double(key, value);
      } else if (key == "top_p") {
        c.decoding.top_p = parse_double(key, value);
      } else if (key == "max_tokens") {
        c.decoding.max_tokens = parse_number<int>(key, value);
      } else if (key == "seed") {
        c.seed = parse_number<std::uint64_t>(key, value);
      } else if (key == "cache_dir") {
        c.cache_dir = value;
      } else if (key == "max_workers") {
        c.max_workers = parse_number<std::size_t>(key, value);
        if (c.max_workers == 0) throw ParamError("max_workers must be positive");
      } else if (key == "projection") {
        if (value == "pca") {
          c.projection = ProjectionMethod::pca;
        } else if (value == "tsne") {
          c.projection = ProjectionMethod::tsne;
        } else {
          throw ParamError("projection is pca or tsne");
        }
      } else if (key == "perplexity") {
        c.perplexity = parse_double(key, value);
        if (!(c.perplexity > 0)) throw ParamError("perplexity must be positive");
      } else {
        throw ParamError("unknown key '" + key + "'");
      }
    } catch (const ParamError& e) {
      throw ParamError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParamError("cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

}  // namespace nlx
