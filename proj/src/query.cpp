#include "qevo/query.hpp"

#include <algorithm>
#include <set>

#include "qevo/errors.hpp"

namespace qevo {

std::size_t ClauseQuery::nonempty_clause_count() const {
  return static_cast<std::size_t>(
      std::count_if(clauses.begin(), clauses.end(), [](const Clause& c) { return !c.empty(); }));
}

std::size_t ClauseQuery::literal_count() const {
  std::size_t n = 0;
  for (const auto& c : clauses) n += c.size();
  return n;
}

std::size_t ClauseQuery::required_vocabulary() const {
  std::size_t n = 0;
  for (const auto& c : clauses) {
    for (const auto& lit : c) n = std::max<std::size_t>(n, lit.phrase_id + 1);
  }
  return n;
}

bool same_clauses(const ClauseQuery& a, const ClauseQuery& b) {
  if (a.clauses.size() != b.clauses.size()) return false;
  for (std::size_t i = 0; i < a.clauses.size(); ++i) {
    const std::set<Literal> sa(a.clauses[i].begin(), a.clauses[i].end());
    const std::set<Literal> sb(b.clauses[i].begin(), b.clauses[i].end());
    if (sa != sb) return false;
  }
  return true;
}

ClauseQuery decode(const Genome& genome) {
  ClauseQuery query;
  if (genome.empty()) return query;
  query.clauses.emplace_back();
  for (auto v : genome.values) {
    if (v == 0) {
      query.clauses.emplace_back();
    } else {
      query.clauses.back().push_back(decode_literal(v));
    }
  }
  return query;
}

ClauseQuery decode(const Genome& genome, std::size_t vocabulary_size) {
  for (auto v : genome.values) {
    const auto magnitude = static_cast<std::size_t>(v < 0 ? -static_cast<std::int64_t>(v) : v);
    if (magnitude > vocabulary_size) throw PhraseIdOutOfRange(magnitude - 1, vocabulary_size);
  }
  return decode(genome);
}

Genome encode(const ClauseQuery& query) {
  Genome g;
  for (std::size_t i = 0; i < query.clauses.size(); ++i) {
    if (i > 0) g.values.push_back(0);
    for (const auto& lit : query.clauses[i]) g.values.push_back(encode_literal(lit));
  }
  return g;
}

nlohmann::json to_json(const ClauseQuery& query) {
  auto clauses = nlohmann::json::array();
  for (const auto& clause : query.clauses) {
    auto lits = nlohmann::json::array();
    for (const auto& lit : clause) lits.push_back({{"id", lit.phrase_id}, {"neg", lit.negated}});
    clauses.push_back(std::move(lits));
  }
  return {{"clauses", std::move(clauses)}};
}

ClauseQuery clause_query_from_json(const nlohmann::json& j) {
  ClauseQuery query;
  try {
    for (const auto& clause : j.at("clauses")) {
      Clause c;
      for (const auto& lit : clause) {
        c.push_back({lit.at("id").get<std::uint32_t>(), lit.at("neg").get<bool>()});
      }
      query.clauses.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad clause query JSON: ") + e.what());
  }
  return query;
}

}  // namespace qevo
