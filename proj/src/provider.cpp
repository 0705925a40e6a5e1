#include "qevo/provider.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "qevo/errors.hpp"
#include "qevo/evaluator.hpp"

namespace qevo {

using nlohmann::json;

namespace {

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) n += (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  return n;
}

struct TimeRange {
  std::optional<std::int64_t> since;
  std::optional<std::int64_t> until;

  bool contains(const Document& d) const {
    if (!since && !until) return true;
    if (!d.fetched_at) return false;
    if (since && *d.fetched_at < *since) return false;
    if (until && *d.fetched_at > *until) return false;
    return true;
  }
};

TimeRange parse_metadata(std::string_view metadata) {
  TimeRange range;
  std::size_t start = 0;
  while (start < metadata.size()) {
    auto end = metadata.find('&', start);
    if (end == std::string_view::npos) end = metadata.size();
    const auto part = metadata.substr(start, end - start);
    start = end + 1;
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) continue;
    const auto key = part.substr(0, eq);
    const auto value = part.substr(eq + 1);
    if (key != "since" && key != "until") continue;
    std::int64_t ts = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), ts);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      throw MalformedQuery("bad timestamp in metadata query: " + std::string(part));
    }
    (key == "since" ? range.since : range.until) = ts;
  }
  return range;
}

}  // namespace

void TokenBudget::charge(std::uint64_t tokens) {
  if (tokens > remaining()) throw BudgetExhausted(tokens, remaining());
  spent_ += tokens;
}

json to_json(const ProviderRequest& r) {
  return {{"content_query", r.content_query},
          {"metadata_query", r.metadata_query},
          {"tokens_spent", r.tokens_spent}};
}

ProviderRequest provider_request_from_json(const json& j) {
  try {
    ProviderRequest r;
    r.content_query = j.at("content_query").get<std::string>();
    r.metadata_query = j.value("metadata_query", "");
    r.tokens_spent = j.at("tokens_spent").get<std::uint64_t>();
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad provider request: ") + e.what());
  }
}

json to_json(const ProviderResponse& r) {
  json docs = json::array();
  for (const auto& d : r.documents) {
    json jd{{"id", d.id}, {"text", d.text}};
    if (d.fetched_at) jd["fetched_at"] = *d.fetched_at;
    docs.push_back(std::move(jd));
  }
  return {{"documents", std::move(docs)},
          {"tokens_charged", r.tokens_charged},
          {"exhausted", r.exhausted}};
}

ProviderResponse provider_response_from_json(const json& j) {
  try {
    ProviderResponse r;
    for (const auto& jd : j.at("documents")) {
      Document d;
      d.id = jd.at("id").get<std::string>();
      d.text = jd.at("text").get<std::string>();
      d.source = Source::provider_fetch;
      if (jd.contains("fetched_at") && !jd["fetched_at"].is_null()) {
        d.fetched_at = jd["fetched_at"].get<std::int64_t>();
      }
      r.documents.push_back(std::move(d));
    }
    r.tokens_charged = j.at("tokens_charged").get<std::uint64_t>();
    r.exhausted = j.at("exhausted").get<bool>();
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad provider response: ") + e.what());
  }
}

CompiledQuery::CompiledQuery(std::string_view query, std::size_t clause_cap) {
  std::map<std::string, std::uint32_t> ids;
  auto resolve = [&](const std::string& key) -> std::optional<std::uint32_t> {
    const auto [it, inserted] = ids.emplace(key, static_cast<std::uint32_t>(keys_.size()));
    if (inserted) keys_.push_back(key);
    return it->second;
  };
  try {
    query_ = normalize(parse(query), resolve, clause_cap);
  } catch (const SyntaxError& e) {
    throw MalformedQuery(e.what());
  } catch (const UnknownPhrase& e) {
    throw MalformedQuery(e.what());
  } catch (const BlowupLimitExceeded& e) {
    throw MalformedQuery(e.what());
  }
}

DocBitVector CompiledQuery::presence(const std::string& doc_id,
                                     const std::set<std::string>& ngram_keys) const {
  DocBitVector v(doc_id, keys_.size());
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (ngram_keys.count(keys_[i]) != 0) v.set(i);
  }
  return v;
}

bool CompiledQuery::matches(const std::set<std::string>& ngram_keys) const {
  return qevo::matches(query_, presence({}, ngram_keys));
}

bool CompiledQuery::matches_text(std::string_view text) const {
  return matches(document_ngram_keys(text));
}

SimulatedProvider::SimulatedProvider(std::vector<Document> hidden, std::size_t query_limit,
                                     std::size_t clause_cap)
    : query_limit_(query_limit), clause_cap_(clause_cap) {
  std::sort(hidden.begin(), hidden.end(), [](const Document& a, const Document& b) {
    const auto ta = a.fetched_at.value_or(std::numeric_limits<std::int64_t>::min());
    const auto tb = b.fetched_at.value_or(std::numeric_limits<std::int64_t>::min());
    if (ta != tb) return ta > tb;
    return a.id < b.id;
  });
  hidden_.reserve(hidden.size());
  for (auto& d : hidden) {
    auto keys = document_ngram_keys(d.text);
    d.label = Label::unlabeled;
    d.source = Source::provider_fetch;
    hidden_.push_back({std::move(d), std::move(keys)});
  }
}

ProviderResponse SimulatedProvider::fetch(const ProviderRequest& request, TokenBudget& budget) {
  if (request.tokens_spent == 0) throw MalformedQuery("tokens_spent must be positive");
  const auto length = utf8_length(request.content_query);
  if (length > query_limit_) throw QueryTooLong(length, query_limit_);
  if (request.tokens_spent > budget.remaining()) {
    throw BudgetExhausted(request.tokens_spent, budget.remaining());
  }
  const CompiledQuery query(request.content_query, clause_cap_);
  const TimeRange range = parse_metadata(request.metadata_query);
  budget.charge(request.tokens_spent);

  ProviderResponse response;
  response.tokens_charged = request.tokens_spent;
  const std::size_t capacity = kDocumentsPerToken * request.tokens_spent;
  bool more = false;
  for (const auto& h : hidden_) {
    if (returned_.count(h.doc.id) != 0 || !range.contains(h.doc) || !query.matches(h.ngrams)) {
      continue;
    }
    if (response.documents.size() == capacity) {
      more = true;
      break;
    }
    response.documents.push_back(h.doc);
  }
  for (const auto& d : response.documents) returned_.insert(d.id);
  response.exhausted = !more;
  return response;
}

ProviderResponse HttpProvider::fetch(const ProviderRequest& request, TokenBudget& budget) {
  if (!options_.enabled) throw Error("HTTP provider is disabled");
  if (request.tokens_spent == 0) throw MalformedQuery("tokens_spent must be positive");
  const auto length = utf8_length(request.content_query);
  if (length > options_.query_limit) throw QueryTooLong(length, options_.query_limit);
  if (request.tokens_spent > budget.remaining()) {
    throw BudgetExhausted(request.tokens_spent, budget.remaining());
  }

  httplib::Client client(options_.host, options_.port);
  httplib::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);
  const auto body = to_json(request).dump();

  int backoff = options_.initial_backoff_ms;
  for (int attempt = 0;; ++attempt) {
    auto res = client.Post(options_.path, headers, body, "application/json");
    if (!res) throw Error("provider unreachable: " + httplib::to_string(res.error()));
    if (res->status == 429 && attempt < options_.max_retries) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff *= 2;
      continue;
    }
    if (res->status == 400) throw MalformedQuery("provider rejected query: " + res->body);
    if (res->status != 200) {
      throw Error("provider returned HTTP " + std::to_string(res->status));
    }
    ProviderResponse response;
    try {
      response = provider_response_from_json(json::parse(res->body));
    } catch (const json::exception& e) {
      throw Error(std::string("provider sent invalid JSON: ") + e.what());
    }
    if (response.documents.size() > kDocumentsPerToken * response.tokens_charged) {
      throw Error("provider returned more documents than it charged for");
    }
    budget.charge(response.tokens_charged);
    return response;
  }
}

Label QueryOracleLabeler::label(const Document& doc) {
  return target_.matches_text(doc.text) ? Label::relevant : Label::irrelevant;
}

LookupLabeler LookupLabeler::from_documents(std::span<const Document> docs) {
  std::map<std::string, Label> labels;
  for (const auto& d : docs) labels[d.id] = d.label;
  return LookupLabeler(std::move(labels));
}

Label LookupLabeler::label(const Document& doc) {
  const auto it = labels_.find(doc.id);
  return it == labels_.end() ? Label::unlabeled : it->second;
}

Label InteractiveLabeler::label(const Document& doc) {
  enqueue(doc);
  return Label::unlabeled;
}

void InteractiveLabeler::enqueue(const Document& doc) {
  std::lock_guard lock(mutex_);
  queue_.push_back({doc.id, doc.text});
}

std::vector<InteractiveLabeler::Pending> InteractiveLabeler::pending() const {
  std::lock_guard lock(mutex_);
  return {queue_.begin(), queue_.end()};
}

std::size_t InteractiveLabeler::pending_count() const {
  std::lock_guard lock(mutex_);
  return queue_.size();
}

bool InteractiveLabeler::take(std::string_view id) {
  std::lock_guard lock(mutex_);
  const auto it =
      std::find_if(queue_.begin(), queue_.end(), [&](const Pending& p) { return p.id == id; });
  if (it == queue_.end()) return false;
  queue_.erase(it);
  return true;
}

std::size_t ingest_response(const ProviderResponse& response, LocalDatabase& database,
                            Labeler& labeler) {
  std::vector<Document> fresh;
  std::set<std::string> seen;
  for (const auto& d : response.documents) {
    if (database.contains(d.id) || !seen.insert(d.id).second) continue;
    Document doc = d;
    doc.source = Source::provider_fetch;
    doc.label = labeler.label(doc);
    fresh.push_back(std::move(doc));
  }
  return database.append(std::move(fresh));
}

}  // namespace qevo
