#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "qevo/corpus.hpp"
#include "qevo/database.hpp"
#include "qevo/query.hpp"
#include "qevo/query_parser.hpp"

namespace qevo {

/// Documents one token buys from the provider.
inline constexpr std::size_t kDocumentsPerToken = 500;

struct ProviderRequest {
  std::string content_query;
  std::string metadata_query;  // opaque; the simulator understands "since=<ts>&until=<ts>"
  std::uint64_t tokens_spent = 1;
};

struct ProviderResponse {
  std::vector<Document> documents;
  std::uint64_t tokens_charged = 0;
  bool exhausted = false;
};

class TokenBudget {
 public:
  explicit TokenBudget(std::uint64_t total = 0) : total_(total) {}

  std::uint64_t total() const noexcept { return total_; }
  std::uint64_t spent() const noexcept { return spent_; }
  std::uint64_t remaining() const noexcept { return total_ - spent_; }
  /// Throws BudgetExhausted if fewer than `tokens` remain.
  void charge(std::uint64_t tokens);

 private:
  std::uint64_t total_;
  std::uint64_t spent_ = 0;
};

nlohmann::json to_json(const ProviderRequest& request);
ProviderRequest provider_request_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProviderResponse& response);
ProviderResponse provider_response_from_json(const nlohmann::json& j);

class SearchProvider {
 public:
  virtual ~SearchProvider() = default;
  /// Throws BudgetExhausted, MalformedQuery or QueryTooLong; on success
  /// the budget has been charged.
  virtual ProviderResponse fetch(const ProviderRequest& request, TokenBudget& budget) = 0;
};

/// A query string compiled against its own open phrase table, so it can be
/// matched against arbitrary text with the evaluator's semantics.
class CompiledQuery {
 public:
  /// Throws MalformedQuery on syntax errors, untokenizable phrases or blowup.
  explicit CompiledQuery(std::string_view query, std::size_t clause_cap = kDefaultClauseCap);

  const ClauseQuery& clauses() const noexcept { return query_; }
  const std::vector<std::string>& phrase_keys() const noexcept { return keys_; }
  /// Presence vector of the query's phrases in a document's n-gram set.
  DocBitVector presence(const std::string& doc_id, const std::set<std::string>& ngram_keys) const;
  bool matches(const std::set<std::string>& ngram_keys) const;
  bool matches_text(std::string_view text) const;

 private:
  ClauseQuery query_;
  std::vector<std::string> keys_;
};

/// Serves queries from a hidden corpus: up to 500 unseen matches per token,
/// newest first (fetched_at descending, then id), never the same document
/// twice in one run.
class SimulatedProvider final : public SearchProvider {
 public:
  explicit SimulatedProvider(std::vector<Document> hidden,
                             std::size_t query_limit = kDefaultQueryLimit,
                             std::size_t clause_cap = kDefaultClauseCap);

  ProviderResponse fetch(const ProviderRequest& request, TokenBudget& budget) override;

  std::size_t hidden_size() const noexcept { return hidden_.size(); }
  std::size_t returned_count() const noexcept { return returned_.size(); }

 private:
  struct HiddenDoc {
    Document doc;
    std::set<std::string> ngrams;
  };
  std::vector<HiddenDoc> hidden_;  // in response order
  std::unordered_set<std::string> returned_;
  std::size_t query_limit_;
  std::size_t clause_cap_;
};

/// Client for a remote provider speaking the ProviderRequest/ProviderResponse
/// JSON schema over HTTP POST. Disabled unless explicitly enabled; 429
/// responses are retried with exponential backoff.
class HttpProvider final : public SearchProvider {
 public:
  struct Options {
    bool enabled = false;
    std::string host = "127.0.0.1";
    int port = 80;
    std::string path = "/search";
    std::string api_key;
    int max_retries = 3;
    int initial_backoff_ms = 200;
    std::size_t query_limit = kDefaultQueryLimit;
  };

  explicit HttpProvider(Options options) : options_(std::move(options)) {}
  ProviderResponse fetch(const ProviderRequest& request, TokenBudget& budget) override;

 private:
  Options options_;
};

class Labeler {
 public:
  virtual ~Labeler() = default;
  virtual Label label(const Document& doc) = 0;
};

/// Labels by evaluating a hidden target query.
class QueryOracleLabeler final : public Labeler {
 public:
  explicit QueryOracleLabeler(std::string_view target_query) : target_(target_query) {}
  Label label(const Document& doc) override;

 private:
  CompiledQuery target_;
};

/// Labels from a known id -> label table; unknown ids stay unlabeled.
class LookupLabeler final : public Labeler {
 public:
  explicit LookupLabeler(std::map<std::string, Label> labels) : labels_(std::move(labels)) {}
  static LookupLabeler from_documents(std::span<const Document> docs);
  Label label(const Document& doc) override;

 private:
  std::map<std::string, Label> labels_;
};

/// Leaves documents unlabeled and queues them for a human.
class InteractiveLabeler final : public Labeler {
 public:
  struct Pending {
    std::string id;
    std::string text;
  };

  Label label(const Document& doc) override;
  void enqueue(const Document& doc);
  std::vector<Pending> pending() const;
  std::size_t pending_count() const;
  /// Removes id from the queue; false when it was not pending.
  bool take(std::string_view id);

 private:
  mutable std::mutex mutex_;
  std::deque<Pending> queue_;
};

/// Labels the response's new documents and appends them to the database.
/// Ids already present (or repeated within the response) are skipped.
std::size_t ingest_response(const ProviderResponse& response, LocalDatabase& database,
                            Labeler& labeler);

}  // namespace qevo
