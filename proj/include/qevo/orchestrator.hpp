#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qevo/database.hpp"
#include "qevo/engine.hpp"
#include "qevo/provider.hpp"

namespace qevo {

enum class RunMode { batch, interactive };

enum class LabelerKind {
  hidden,       // labels carried by the hidden corpus file
  oracle,       // evaluate oracle_query against fetched text
  interactive,  // queue for the control API
};

struct RunConfig {
  std::filesystem::path corpus_path;
  std::filesystem::path hidden_corpus_path;  // empty: no provider
  std::filesystem::path labels_path;
  std::filesystem::path seed_queries_path;   // one query per line
  std::filesystem::path checkpoint_dir = "qevo-run";
  std::filesystem::path metrics_csv;          // default: checkpoint_dir/metrics.csv
  std::filesystem::path ui_dir;               // optional static assets
  std::string http_listen = "127.0.0.1:8080";
  RunMode mode = RunMode::batch;
  LabelerKind labeler = LabelerKind::hidden;
  std::string oracle_query;
  std::string metadata_query;

  GaConfig ga;
  LossParams loss;
  std::uint64_t budget_total = 0;
  std::uint64_t tokens_per_fetch = 1;
  std::uint64_t max_generations = 500;  // 0: unbounded (interactive only)
  std::uint64_t checkpoint_every = 50;
  std::uint64_t pause_every = 0;        // scheduled human-review pause, 0 = off
  bool stop_when_budget_exhausted = false;
  std::size_t query_limit = 1024;
  std::size_t clause_cap = 64;

  /// Applies one key = value setting; throws ConfigError for unknown keys
  /// or bad values. Keys: see README.
  void set(const std::string& key, const std::string& value);
  /// Throws ConfigError.
  void validate() const;
};

/// Parses "key = value" lines; "[section]" headers prefix keys with "section.".
/// '#' starts a comment; values may be double-quoted.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

struct LengthStats {
  std::size_t min = 0;
  double mean = 0.0;
  std::size_t max = 0;
};

struct MetricsSnapshot {
  std::uint64_t generation = 0;
  double best_loss = 0.0;
  double median_loss = 0.0;
  nlohmann::json best_query_json;
  std::string best_query;
  LengthStats population_length;
  double best_fp_rate = 0.0;
  double best_fn_rate = 0.0;
  std::uint64_t tokens_spent = 0;
  std::size_t corpus_size = 0;
  std::size_t labeled_relevant = 0;
  std::size_t labeled_irrelevant = 0;
};

nlohmann::json to_json(const MetricsSnapshot& m);

struct FetchRecord {
  std::uint64_t generation = 0;
  std::string query;
  std::uint64_t tokens_charged = 0;
  std::size_t documents_returned = 0;
  std::size_t documents_added = 0;
  bool exhausted = false;
};

namespace command {
struct Pause {};
struct Resume {};
struct Stop {};
struct Inject {
  std::vector<Genome> genomes;
};
struct SetLabel {
  std::string id;
  Label label;
};
}  // namespace command

using Command =
    std::variant<command::Pause, command::Resume, command::Stop, command::Inject, command::SetLabel>;

/// Owns one run. The engine loop runs on the caller's thread; other threads
/// talk to it only through post() and the published read-only views.
class Orchestrator {
 public:
  explicit Orchestrator(RunConfig config, std::unique_ptr<SearchProvider> provider = nullptr,
                        std::unique_ptr<Labeler> labeler = nullptr);

  /// Runs until the generation limit (batch) or a Stop command. Returns 0 on
  /// a normal finish.
  int run();

  /// Queues a command; it is applied at the next generation boundary.
  void post(Command cmd);

  RunStatus status() const noexcept { return status_.load(); }
  std::shared_ptr<const DataSnapshot> data() const { return database_.snapshot(); }
  std::optional<MetricsSnapshot> latest_metrics() const;
  std::vector<MetricsSnapshot> history() const;
  std::vector<FetchRecord> fetch_log() const;
  std::vector<Individual> top(std::size_t k) const;
  const TokenBudget& budget() const noexcept { return budget_; }
  const RunConfig& config() const noexcept { return config_; }
  InteractiveLabeler* interactive_labeler() const noexcept { return interactive_; }
  std::string last_warning() const;

  /// Parses, normalizes and encodes a query against the current vocabulary.
  /// Throws SyntaxError, UnknownPhrase or BlowupLimitExceeded.
  Genome compile(std::string_view query) const;

  std::filesystem::path checkpoint_path() const { return config_.checkpoint_dir / "checkpoint.json"; }

 private:
  void initialize();
  void apply(Command& cmd);
  void drain_commands(bool block);
  void publish_metrics();
  void write_checkpoint();
  void maybe_fetch();
  void warn(const std::string& message);
  Objective objective() const;

  RunConfig config_;
  LocalDatabase database_;
  std::unique_ptr<SearchProvider> provider_;
  std::unique_ptr<Labeler> labeler_;
  InteractiveLabeler* interactive_ = nullptr;
  TokenBudget budget_;
  Rng rng_;
  RunState state_;
  std::shared_ptr<const Objective> objective_;

  std::atomic<RunStatus> status_{RunStatus::running};
  mutable std::mutex commands_mutex_;
  std::condition_variable commands_cv_;
  std::deque<Command> commands_;

  mutable std::mutex view_mutex_;
  std::vector<MetricsSnapshot> history_;
  std::vector<Individual> ranked_;
  std::vector<FetchRecord> fetches_;
  std::string last_warning_;
};

/// Builds the provider and labeler named by a config (nullptr when the config
/// has no hidden corpus).
std::unique_ptr<SearchProvider> make_provider(const RunConfig& config);
std::unique_ptr<Labeler> make_labeler(const RunConfig& config);

/// JSON-over-HTTP control API for a running Orchestrator.
class ControlServer {
 public:
  explicit ControlServer(Orchestrator& run);
  ~ControlServer();
  ControlServer(const ControlServer&) = delete;
  ControlServer& operator=(const ControlServer&) = delete;

  /// Binds and serves on a background thread; port 0 picks a free port.
  /// Returns the bound port.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Splits "host:port".
std::pair<std::string, int> parse_listen_address(std::string_view address);

}  // namespace qevo
