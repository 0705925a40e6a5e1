#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qevo/corpus.hpp"
#include "qevo/query.hpp"

namespace qevo {

/// Arbitrary-depth boolean query tree as written by a user.
struct QueryAst {
  enum class Kind { phrase, negation, conjunction, disjunction };

  Kind kind = Kind::phrase;
  std::string text;                // phrase text, Kind::phrase only
  std::vector<QueryAst> children;  // one child for negation, >= 2 for and/or
  std::size_t offset = 0;          // byte offset in the source string

  friend bool operator==(const QueryAst& a, const QueryAst& b) {
    return a.kind == b.kind && a.text == b.text && a.children == b.children;
  }
};

namespace ast {
QueryAst phrase(std::string text);
QueryAst negation(QueryAst child);
QueryAst conjunction(std::vector<QueryAst> children);
QueryAst disjunction(std::vector<QueryAst> children);
}  // namespace ast

/// Canonical, fully parenthesised rendering, e.g. And[Or[a, b], Not[c]].
std::string to_string(const QueryAst& node);

/// Grammar (keywords case-insensitive, precedence NOT > AND > OR):
///   query := or ;  or := and ("OR" and)* ;  and := unary ("AND" unary)*
///   unary := "NOT" unary | "(" query ")" | PHRASE
///   PHRASE := "quoted string" | bare word
/// Throws SyntaxError with the offending byte offset.
QueryAst parse(std::string_view query);

/// Maps a phrase key (tokens joined by spaces) to a phrase id.
using PhraseResolver = std::function<std::optional<std::uint32_t>(const std::string& key)>;

inline constexpr std::size_t kDefaultClauseCap = 64;

/// Rewrites the tree as a conjunction of disjunctions: NOTs pushed to the
/// leaves, OR distributed over AND. Literals repeated inside a clause are
/// merged and clauses holding both p and NOT p are dropped as tautologies.
/// Throws UnknownPhrase or BlowupLimitExceeded.
ClauseQuery normalize(const QueryAst& node, const PhraseResolver& resolve,
                      std::size_t clause_cap = kDefaultClauseCap);
ClauseQuery normalize(const QueryAst& node, const VocabularyIndex& vocab,
                      std::size_t clause_cap = kDefaultClauseCap);

/// Key used to look a user-written phrase up in the vocabulary; nullopt when
/// the text tokenizes to zero or more than three tokens.
std::optional<std::string> phrase_key(std::string_view text);

inline constexpr std::size_t kDefaultQueryLimit = 1024;

struct SerializedQuery {
  std::string text;
  /// Set when the query has no non-empty clause; text is then "" and the
  /// query matches everything.
  bool match_all = false;
};

/// Renders "(a OR b) AND (NOT c)". Multi-token phrases and keyword-like words
/// are quoted. Throws LengthExceeded when the text is longer than limit.
SerializedQuery serialize(const ClauseQuery& query, const VocabularyIndex& vocab,
                          std::size_t limit = kDefaultQueryLimit);

}  // namespace qevo
