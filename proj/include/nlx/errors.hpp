#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlx {

// Every failure raised by the library derives from Error so callers can catch
// one type at the CLI boundary and still switch on the concrete kind in tests.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyText : public Error {
 public:
  EmptyText() : Error("empty text") {}
};

class ParamError : public Error {
 public:
  using Error::Error;
};

// A row of an input file that failed to parse or violated a type invariant.
class RowError : public Error {
 public:
  RowError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Cross-reference or uniqueness failure. line() is 0 when not tied to a row.
class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class MarkerError : public Error {
 public:
  using Error::Error;
};

class InvalidCategory : public Error {
 public:
  using Error::Error;
};

class ExemplarError : public Error {
 public:
  using Error::Error;
};

class TaggerError : public Error {
 public:
  using Error::Error;
};

class ZeroVector : public Error {
 public:
  ZeroVector() : Error("zero-norm vector") {}
};

// Model output parsers keep the raw text so failures stay auditable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string raw) : Error(what), raw_(std::move(raw)) {}
  const std::string& raw_output() const { return raw_; }

 private:
  std::string raw_;
};

class StageOneParseError : public ParseError {
 public:
  explicit StageOneParseError(std::string raw)
      : ParseError("no category index 1-8 in stage-1 output", std::move(raw)) {}
};

class EndToEndParseError : public ParseError {
 public:
  explicit EndToEndParseError(std::string raw)
      : ParseError("no numbered category block in end-to-end output", std::move(raw)) {}
};

class HighlightParseError : public ParseError {
 public:
  explicit HighlightParseError(std::string raw)
      : ParseError("no parsable highlight block in output", std::move(raw)) {}
};

// Transport failure of an LLM or embedding backend after retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Some units of a fan-out run could not be completed; the ids are listed.
class PartialRunError : public Error {
 public:
  explicit PartialRunError(std::vector<std::string> missing)
      : Error(describe(missing)), missing_(std::move(missing)) {}
  const std::vector<std::string>& missing() const { return missing_; }

 private:
  static std::string describe(const std::vector<std::string>& ids) {
    std::string s = std::to_string(ids.size()) + " unit(s) failed:";
    for (const auto& id : ids) s += " " + id;
    return s;
  }
  std::vector<std::string> missing_;
};

}  // namespace nlx
