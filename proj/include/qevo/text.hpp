#pragma once

#include <compare>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qevo {

/// Lowercases, strips punctuation and splits on whitespace. A leading '#' or
/// '@' and hyphens between alphanumerics ("i-264") survive; bytes >= 0x80 are
/// kept verbatim.
std::vector<std::string> tokenize(std::string_view text);

/// A 1- to 3-token n-gram. Stored as its tokens joined by single spaces, which
/// is unambiguous because tokens never contain whitespace.
class Phrase {
 public:
  static constexpr std::size_t kMaxTokens = 3;

  Phrase() = default;
  /// Throws std::invalid_argument unless 1..3 non-empty, whitespace-free tokens.
  explicit Phrase(std::span<const std::string> tokens);
  /// Parses a joined key ("a b c").
  static Phrase from_key(std::string_view key);

  const std::string& key() const noexcept { return key_; }
  std::vector<std::string> tokens() const;
  std::size_t token_count() const noexcept;

  friend bool operator==(const Phrase&, const Phrase&) = default;
  friend auto operator<=>(const Phrase&, const Phrase&) = default;

 private:
  std::string key_;
};

/// All contiguous 1-, 2- and 3-grams of a token sequence.
std::set<Phrase> extract_ngrams(std::span<const std::string> tokens);

/// Same n-grams as join keys; the hot path for index construction.
std::set<std::string> extract_ngram_keys(std::span<const std::string> tokens);

/// n-gram keys of raw document text.
std::set<std::string> document_ngram_keys(std::string_view text);

}  // namespace qevo
