#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qevo {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// corpus-index
class DuplicateDocumentId : public Error {
 public:
  explicit DuplicateDocumentId(const std::string& id)
      : Error("duplicate document id: " + id), id_(id) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("corpus is empty") {}
};

class FormatError : public Error {
 public:
  using Error::Error;
};

// query-model
class PhraseIdOutOfRange : public Error {
 public:
  PhraseIdOutOfRange(std::size_t id, std::size_t limit)
      : Error("phrase id " + std::to_string(id) + " out of range (vocabulary size " +
              std::to_string(limit) + ")") {}
};

/// Parse failure; offset is the byte position in the input string.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), message_(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  std::size_t offset_;
};

class UnknownPhrase : public Error {
 public:
  explicit UnknownPhrase(const std::string& phrase)
      : Error("phrase not in vocabulary: \"" + phrase + "\""), phrase_(phrase) {}
  const std::string& phrase() const noexcept { return phrase_; }

 private:
  std::string phrase_;
};

class BlowupLimitExceeded : public Error {
 public:
  explicit BlowupLimitExceeded(std::size_t cap)
      : Error("clause count would exceed cap of " + std::to_string(cap)) {}
};

class LengthExceeded : public Error {
 public:
  LengthExceeded(std::size_t actual, std::size_t limit)
      : Error("serialized query has " + std::to_string(actual) + " characters, limit " +
              std::to_string(limit)),
        actual_(actual),
        limit_(limit) {}
  std::size_t actual() const noexcept { return actual_; }
  std::size_t limit() const noexcept { return limit_; }

 private:
  std::size_t actual_;
  std::size_t limit_;
};

// evaluator
class NoLabeledData : public Error {
 public:
  NoLabeledData() : Error("loss needs at least one relevant and one irrelevant labeled document") {}
};

// genetic-engine
class EmptyVocabulary : public Error {
 public:
  EmptyVocabulary() : Error("vocabulary is empty") {}
};

class GenomeTooShort : public Error {
 public:
  GenomeTooShort() : Error("genome needs at least two elements") {}
};

class NoTerms : public Error {
 public:
  NoTerms() : Error("genome has no phrase terms") {}
};

class NoServiceableQuery : public Error {
 public:
  NoServiceableQuery() : Error("no genome in the population serializes within the length limit") {}
};

// search-provider
class BudgetExhausted : public Error {
 public:
  BudgetExhausted(std::uint64_t requested, std::uint64_t remaining)
      : Error("token budget exhausted: requested " + std::to_string(requested) + ", remaining " +
              std::to_string(remaining)) {}
};

class MalformedQuery : public Error {
 public:
  using Error::Error;
};

class QueryTooLong : public Error {
 public:
  QueryTooLong(std::size_t actual, std::size_t limit)
      : Error("query has " + std::to_string(actual) + " characters, provider limit " +
              std::to_string(limit)) {}
};

// orchestrator
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qevo
