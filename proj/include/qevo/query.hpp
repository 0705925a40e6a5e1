#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace qevo {

/// A vocabulary phrase, possibly negated. Positive literals are satisfied by
/// presence, negative ones by absence.
struct Literal {
  std::uint32_t phrase_id = 0;
  bool negated = false;

  friend bool operator==(const Literal&, const Literal&) = default;
  friend auto operator<=>(const Literal&, const Literal&) = default;
};

/// Disjunction of literals. Duplicates may appear before simplification.
using Clause = std::vector<Literal>;

/// Conjunction of clauses. Empty clauses are kept but match vacuously.
struct ClauseQuery {
  std::vector<Clause> clauses;

  std::size_t nonempty_clause_count() const;
  std::size_t literal_count() const;
  /// Largest phrase id referenced plus one (0 when there are no literals).
  std::size_t required_vocabulary() const;

  friend bool operator==(const ClauseQuery&, const ClauseQuery&) = default;
};

/// True when both queries have the same clause sequence, each clause compared
/// as a set of literals.
bool same_clauses(const ClauseQuery& a, const ClauseQuery& b);

/// Signed integer encoding of a ClauseQuery: v > 0 is phrase v-1, v < 0 its
/// negation, 0 ends a clause.
struct Genome {
  std::vector<std::int32_t> values;

  Genome() = default;
  Genome(std::initializer_list<std::int32_t> init) : values(init) {}
  explicit Genome(std::vector<std::int32_t> v) : values(std::move(v)) {}

  std::size_t size() const noexcept { return values.size(); }
  bool empty() const noexcept { return values.empty(); }

  friend bool operator==(const Genome&, const Genome&) = default;
  friend auto operator<=>(const Genome&, const Genome&) = default;
};

constexpr std::int32_t encode_literal(Literal lit) {
  const auto v = static_cast<std::int32_t>(lit.phrase_id) + 1;
  return lit.negated ? -v : v;
}

constexpr Literal decode_literal(std::int32_t v) {
  return v > 0 ? Literal{static_cast<std::uint32_t>(v - 1), false}
               : Literal{static_cast<std::uint32_t>(-v - 1), true};
}

/// Splits on zeros; k separators yield k+1 clauses, the empty genome yields
/// none. Throws PhraseIdOutOfRange when a magnitude exceeds vocabulary_size.
ClauseQuery decode(const Genome& genome, std::size_t vocabulary_size);
/// Decode without range checking.
ClauseQuery decode(const Genome& genome);
Genome encode(const ClauseQuery& query);

/// {"clauses":[[{"id":4,"neg":false},...],...]}
nlohmann::json to_json(const ClauseQuery& query);
ClauseQuery clause_query_from_json(const nlohmann::json& j);

}  // namespace qevo
