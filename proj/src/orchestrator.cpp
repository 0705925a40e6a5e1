#include "qevo/orchestrator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "qevo/corpus_io.hpp"
#include "qevo/errors.hpp"
#include "qevo/query_parser.hpp"

namespace qevo {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("bad value for " + key + ": " + value);
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad value for " + key + ": " + value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("bad value for " + key + ": " + value);
}

bool is_path_key(std::string_view key) {
  return key == "corpus_path" || key == "hidden_corpus_path" || key == "labels_path" ||
         key == "seed_queries_path" || key == "checkpoint_dir" || key == "metrics_csv" ||
         key == "ui_dir";
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "corpus_path") {
    corpus_path = value;
  } else if (key == "hidden_corpus_path") {
    hidden_corpus_path = value;
  } else if (key == "labels_path") {
    labels_path = value;
  } else if (key == "seed_queries_path") {
    seed_queries_path = value;
  } else if (key == "checkpoint_dir") {
    checkpoint_dir = value;
  } else if (key == "metrics_csv") {
    metrics_csv = value;
  } else if (key == "ui_dir") {
    ui_dir = value;
  } else if (key == "http_listen") {
    parse_listen_address(value);
    http_listen = value;
  } else if (key == "mode") {
    if (value == "batch") {
      mode = RunMode::batch;
    } else if (value == "interactive") {
      mode = RunMode::interactive;
    } else {
      throw ConfigError("mode must be batch or interactive");
    }
  } else if (key == "labeler") {
    if (value == "hidden") {
      labeler = LabelerKind::hidden;
    } else if (value == "oracle") {
      labeler = LabelerKind::oracle;
    } else if (value == "interactive") {
      labeler = LabelerKind::interactive;
    } else {
      throw ConfigError("labeler must be hidden, oracle or interactive");
    }
  } else if (key == "oracle_query") {
    oracle_query = value;
  } else if (key == "metadata_query") {
    metadata_query = value;
  } else if (key == "budget_total") {
    budget_total = parse_number<std::uint64_t>(key, value);
  } else if (key == "tokens_per_fetch") {
    tokens_per_fetch = parse_number<std::uint64_t>(key, value);
  } else if (key == "max_generations") {
    max_generations = parse_number<std::uint64_t>(key, value);
  } else if (key == "checkpoint_every") {
    checkpoint_every = parse_number<std::uint64_t>(key, value);
  } else if (key == "pause_every") {
    pause_every = parse_number<std::uint64_t>(key, value);
  } else if (key == "stop_when_budget_exhausted") {
    stop_when_budget_exhausted = parse_bool(key, value);
  } else if (key == "query_limit") {
    query_limit = parse_number<std::size_t>(key, value);
  } else if (key == "clause_cap") {
    clause_cap = parse_number<std::size_t>(key, value);
  } else if (key == "ga.population_size") {
    ga.population_size = parse_number<std::size_t>(key, value);
  } else if (key == "ga.tournament_size") {
    ga.tournament_size = parse_number<std::size_t>(key, value);
  } else if (key == "ga.elitism") {
    ga.elitism = parse_number<std::size_t>(key, value);
  } else if (key == "ga.fetch_every") {
    ga.fetch_every = parse_number<std::size_t>(key, value);
  } else if (key == "ga.swap_distance_mean") {
    ga.swap_distance_mean = parse_real(key, value);
  } else if (key == "ga.phrase_sample_gamma") {
    ga.phrase_sample_gamma = parse_real(key, value);
  } else if (key == "ga.boundary_weight") {
    ga.boundary_weight = parse_real(key, value);
  } else if (key == "ga.rng_seed") {
    ga.rng_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "ga.threads") {
    ga.threads = parse_number<unsigned>(key, value);
  } else if (key.rfind("ga.rate.", 0) == 0) {
    const auto op = parse_operator(key.substr(8));
    if (!op) throw ConfigError("unknown operator in " + key);
    ga.rate(*op) = parse_real(key, value);
  } else if (key == "loss.eps_fp") {
    loss.eps_fp = parse_real(key, value);
  } else if (key == "loss.eps_fn") {
    loss.eps_fn = parse_real(key, value);
  } else if (key == "loss.delta_fp") {
    loss.delta_fp = parse_real(key, value);
  } else if (key == "loss.delta_fn") {
    loss.delta_fn = parse_real(key, value);
  } else if (key == "loss.lambda_len") {
    loss.lambda_len = parse_real(key, value);
  } else {
    throw ConfigError("unknown config key: " + key);
  }
}

void RunConfig::validate() const {
  namespace fs = std::filesystem;
  if (corpus_path.empty()) throw ConfigError("corpus_path is required");
  auto must_exist = [](const fs::path& p, const char* what) {
    if (!p.empty() && !fs::exists(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
  };
  must_exist(corpus_path, "corpus_path");
  must_exist(hidden_corpus_path, "hidden_corpus_path");
  must_exist(labels_path, "labels_path");
  must_exist(seed_queries_path, "seed_queries_path");
  must_exist(ui_dir, "ui_dir");
  ga.validate();
  for (double v : {loss.eps_fp, loss.eps_fn, loss.delta_fp, loss.delta_fn, loss.lambda_len}) {
    if (!(v >= 0.0)) throw ConfigError("loss parameters must be non-negative");
  }
  if (tokens_per_fetch == 0) throw ConfigError("tokens_per_fetch must be positive");
  if (clause_cap == 0) throw ConfigError("clause_cap must be positive");
  if (labeler == LabelerKind::oracle && oracle_query.empty()) {
    throw ConfigError("labeler = oracle needs oracle_query");
  }
  if (mode == RunMode::batch && max_generations == 0) {
    throw ConfigError("batch mode needs max_generations > 0");
  }
}

namespace {

RunConfig parse_config_impl(std::string_view text, RunConfig config,
                            const std::filesystem::path& base_dir) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string body;
    bool quoted = false;
    for (char c : line) {
      if (c == '"') quoted = !quoted;
      if (c == '#' && !quoted) break;
      body.push_back(c);
    }
    body = trim(body);
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": bad section");
      section = trim(std::string_view(body).substr(1, body.size() - 2));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (!section.empty()) key = section + "." + key;
    if (is_path_key(key) && !value.empty() && !base_dir.empty() &&
        std::filesystem::path(value).is_relative()) {
      value = (base_dir / value).lexically_normal().string();
    }
    try {
      config.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

}  // namespace

RunConfig parse_config(std::string_view text, RunConfig base) {
  return parse_config_impl(text, std::move(base), {});
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_impl(buf.str(), std::move(base), path.parent_path());
}

std::pair<std::string, int> parse_listen_address(std::string_view address) {
  const auto colon = address.rfind(':');
  if (colon == std::string_view::npos) throw ConfigError("listen address needs host:port");
  const std::string port_text(address.substr(colon + 1));
  const int port = parse_number<int>("http_listen", port_text);
  if (port < 0 || port > 65535) throw ConfigError("bad port in listen address");
  return {std::string(address.substr(0, colon)), port};
}

json to_json(const MetricsSnapshot& m) {
  auto real = [](double v) -> json {
    if (std::isfinite(v)) return v;
    return std::isinf(v) ? json("inf") : json(nullptr);
  };
  return {{"generation", m.generation},
          {"best_loss", real(m.best_loss)},
          {"median_loss", real(m.median_loss)},
          {"best_query", m.best_query},
          {"best_query_json", m.best_query_json},
          {"population_length",
           {{"min", m.population_length.min},
            {"mean", m.population_length.mean},
            {"max", m.population_length.max}}},
          {"best_fp_rate", real(m.best_fp_rate)},
          {"best_fn_rate", real(m.best_fn_rate)},
          {"tokens_spent", m.tokens_spent},
          {"corpus_size", m.corpus_size},
          {"labeled_relevant", m.labeled_relevant},
          {"labeled_irrelevant", m.labeled_irrelevant}};
}

// ---------------------------------------------------------------------------
// Orchestrator

namespace {

std::vector<Document> load_documents(const RunConfig& config) {
  auto docs = read_jsonl(config.corpus_path);
  if (!config.labels_path.empty()) apply_labels(docs, read_labels(config.labels_path));
  for (auto& d : docs) d.source = Source::seed_corpus;
  return docs;
}

void log_warning(const std::string& message) { std::clog << "[qevo] warning: " << message << '\n'; }

}  // namespace

std::unique_ptr<SearchProvider> make_provider(const RunConfig& config) {
  if (config.hidden_corpus_path.empty()) return nullptr;
  return std::make_unique<SimulatedProvider>(read_jsonl(config.hidden_corpus_path),
                                             config.query_limit, config.clause_cap);
}

std::unique_ptr<Labeler> make_labeler(const RunConfig& config) {
  switch (config.labeler) {
    case LabelerKind::oracle:
      return std::make_unique<QueryOracleLabeler>(config.oracle_query);
    case LabelerKind::interactive:
      return std::make_unique<InteractiveLabeler>();
    case LabelerKind::hidden:
      break;
  }
  if (config.hidden_corpus_path.empty()) return std::make_unique<LookupLabeler>(std::map<std::string, Label>{});
  const auto hidden = read_jsonl(config.hidden_corpus_path);
  return std::make_unique<LookupLabeler>(LookupLabeler::from_documents(hidden));
}

Orchestrator::Orchestrator(RunConfig config, std::unique_ptr<SearchProvider> provider,
                           std::unique_ptr<Labeler> labeler)
    : config_((config.validate(), std::move(config))),
      database_(load_documents(config_)),
      provider_(provider ? std::move(provider) : make_provider(config_)),
      labeler_(labeler ? std::move(labeler) : make_labeler(config_)),
      budget_(config_.budget_total),
      rng_(config_.ga.rng_seed) {
  interactive_ = dynamic_cast<InteractiveLabeler*>(labeler_.get());
  if (config_.metrics_csv.empty()) config_.metrics_csv = config_.checkpoint_dir / "metrics.csv";
  initialize();
}

void Orchestrator::initialize() {
  std::vector<Genome> seeds;
  if (!config_.seed_queries_path.empty()) {
    std::ifstream in(config_.seed_queries_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto text = trim(line);
      if (text.empty() || text.front() == '#') continue;
      try {
        seeds.push_back(compile(text));
      } catch (const Error& e) {
        throw ConfigError(config_.seed_queries_path.string() + ":" + std::to_string(line_no) +
                          ": " + e.what());
      }
    }
  }

  const auto& vocab = database_.snapshot()->vocabulary();
  const std::size_t size = config_.ga.population_size;
  for (std::size_t i = 0; i < seeds.size() && state_.population.size() < size; ++i) {
    state_.population.push_back(Individual{seeds[i], std::nullopt, 0, false});
  }
  for (std::size_t id = 0; state_.population.size() < size; ++id) {
    Genome g;
    if (!vocab.empty()) g.values.push_back(static_cast<std::int32_t>(id % vocab.size()) + 1);
    state_.population.push_back(Individual{std::move(g), std::nullopt, 0, false});
  }
  objective_ = std::make_shared<const Objective>(objective());
}

Objective Orchestrator::objective() const {
  return make_objective(database_.snapshot(), config_.loss, config_.ga.phrase_sample_gamma);
}

Genome Orchestrator::compile(std::string_view query) const {
  const auto snap = database_.snapshot();
  return encode(normalize(parse(query), snap->vocabulary(), config_.clause_cap));
}

void Orchestrator::post(Command cmd) {
  {
    std::lock_guard lock(commands_mutex_);
    commands_.push_back(std::move(cmd));
  }
  commands_cv_.notify_all();
}

void Orchestrator::drain_commands(bool block) {
  std::deque<Command> batch;
  {
    std::unique_lock lock(commands_mutex_);
    if (block) commands_cv_.wait(lock, [this] { return !commands_.empty(); });
    batch.swap(commands_);
  }
  for (auto& cmd : batch) apply(cmd);
}

void Orchestrator::apply(Command& cmd) {
  std::visit(
      [this](auto& c) {
        using T = std::decay_t<decltype(c)>;
        const auto current = status_.load();
        if constexpr (std::is_same_v<T, command::Pause>) {
          if (current == RunStatus::running) status_ = RunStatus::paused;
        } else if constexpr (std::is_same_v<T, command::Resume>) {
          if (current == RunStatus::paused) status_ = RunStatus::running;
        } else if constexpr (std::is_same_v<T, command::Stop>) {
          status_ = RunStatus::stopped;
        } else if constexpr (std::is_same_v<T, command::Inject>) {
          for (auto& g : c.genomes) state_.pending_injections.push_back(std::move(g));
        } else if constexpr (std::is_same_v<T, command::SetLabel>) {
          database_.set_label(c.id, c.label);
        }
      },
      cmd);
}

void Orchestrator::warn(const std::string& message) {
  log_warning(message);
  std::lock_guard lock(view_mutex_);
  last_warning_ = message;
}

std::string Orchestrator::last_warning() const {
  std::lock_guard lock(view_mutex_);
  return last_warning_;
}

std::optional<MetricsSnapshot> Orchestrator::latest_metrics() const {
  std::lock_guard lock(view_mutex_);
  if (history_.empty()) return std::nullopt;
  return history_.back();
}

std::vector<MetricsSnapshot> Orchestrator::history() const {
  std::lock_guard lock(view_mutex_);
  return history_;
}

std::vector<FetchRecord> Orchestrator::fetch_log() const {
  std::lock_guard lock(view_mutex_);
  return fetches_;
}

std::vector<Individual> Orchestrator::top(std::size_t k) const {
  std::lock_guard lock(view_mutex_);
  return {ranked_.begin(), ranked_.begin() + static_cast<std::ptrdiff_t>(std::min(k, ranked_.size()))};
}

void Orchestrator::publish_metrics() {
  const auto snap = database_.snapshot();
  const auto& pop = state_.population;
  MetricsSnapshot m;
  m.generation = state_.generation;
  m.tokens_spent = budget_.spent();
  m.corpus_size = snap->document_count();
  m.labeled_relevant = snap->labels->relevant_count;
  m.labeled_irrelevant = snap->labels->irrelevant_count;

  if (!pop.empty()) {
    const auto& best = pop.front();
    const auto query = decode(best.genome);
    m.best_query_json = to_json(query);
    try {
      m.best_query =
          serialize(query, snap->vocabulary(), std::numeric_limits<std::size_t>::max()).text;
    } catch (const Error&) {
    }
    if (best.fitness) {
      m.best_loss = best.fitness->loss;
      const auto& c = best.fitness->counts;
      m.best_fp_rate = c.labeled_irrelevant() ? static_cast<double>(c.fp) / c.labeled_irrelevant() : 0.0;
      m.best_fn_rate = c.labeled_relevant() ? static_cast<double>(c.fn) / c.labeled_relevant() : 0.0;
    }
    std::vector<double> losses;
    std::size_t total_length = 0;
    m.population_length.min = std::numeric_limits<std::size_t>::max();
    for (const auto& ind : pop) {
      losses.push_back(ind.fitness ? ind.fitness->loss : std::numeric_limits<double>::infinity());
      total_length += ind.genome.size();
      m.population_length.min = std::min(m.population_length.min, ind.genome.size());
      m.population_length.max = std::max(m.population_length.max, ind.genome.size());
    }
    std::sort(losses.begin(), losses.end());
    const std::size_t mid = losses.size() / 2;
    m.median_loss = losses.size() % 2 ? losses[mid] : 0.5 * (losses[mid - 1] + losses[mid]);
    m.population_length.mean = static_cast<double>(total_length) / static_cast<double>(pop.size());
  }

  {
    std::ofstream csv(config_.metrics_csv, std::ios::app);
    csv << m.generation << ',' << m.best_loss << ',' << m.median_loss << ',' << m.best_fp_rate
        << ',' << m.best_fn_rate << ',' << pop.front().genome.size() << ','
        << m.population_length.mean << ',' << m.population_length.max << ',' << m.tokens_spent
        << ',' << m.corpus_size << ',' << m.labeled_relevant << ',' << m.labeled_irrelevant << ",\"";
    for (char c : m.best_query) {
      if (c == '"') csv << '"';
      csv << c;
    }
    csv << "\"\n";
  }

  std::lock_guard lock(view_mutex_);
  history_.push_back(std::move(m));
  ranked_ = pop;
}

void Orchestrator::write_checkpoint() {
  state_.status = status_.load();
  const auto snap = database_.snapshot();
  const json extra{{"loss_params", to_json(config_.loss)},
                   {"budget", {{"total", budget_.total()}, {"spent", budget_.spent()}}},
                   {"data_version", snap->version},
                   {"corpus_size", snap->document_count()},
                   {"vocabulary_size", snap->vocabulary().size()}};
  write_file_atomically(checkpoint_path(), checkpoint_json(state_, config_.ga, rng_, extra).dump(1));
}

void Orchestrator::maybe_fetch() {
  if (budget_.remaining() < config_.tokens_per_fetch) {
    warn("token budget exhausted; fetch skipped at generation " + std::to_string(state_.generation));
    if (config_.stop_when_budget_exhausted) status_ = RunStatus::stopped;
    return;
  }
  FetchCandidate candidate;
  const auto snap = database_.snapshot();
  try {
    candidate = select_fetch_candidate(state_, snap->vocabulary(), config_.query_limit);
  } catch (const NoServiceableQuery& e) {
    warn(e.what());
    return;
  }
  ProviderRequest request{candidate.query, config_.metadata_query, config_.tokens_per_fetch};
  ProviderResponse response;
  try {
    response = provider_->fetch(request, budget_);
  } catch (const Error& e) {
    warn(std::string("fetch failed: ") + e.what());
    if (config_.mode == RunMode::interactive) status_ = RunStatus::paused;
    return;
  }
  const auto added = ingest_response(response, database_, *labeler_);
  std::lock_guard lock(view_mutex_);
  fetches_.push_back({state_.generation, candidate.query, response.tokens_charged,
                      response.documents.size(), added, response.exhausted});
}

int Orchestrator::run() {
  std::filesystem::create_directories(config_.checkpoint_dir);
  {
    std::ofstream csv(config_.metrics_csv, std::ios::trunc);
    csv << "generation,best_loss,median_loss,best_fp_rate,best_fn_rate,best_length,mean_length,"
           "max_length,tokens_spent,corpus_size,labeled_relevant,labeled_irrelevant,best_query\n";
  }

  const bool interactive = config_.mode == RunMode::interactive;
  bool pause_checkpointed = false;
  while (true) {
    drain_commands(false);
    const auto status = status_.load();
    if (status == RunStatus::stopped) break;
    if (status == RunStatus::paused) {
      if (!pause_checkpointed) {
        write_checkpoint();
        pause_checkpointed = true;
      }
      drain_commands(true);
      continue;
    }
    pause_checkpointed = false;

    if (config_.max_generations != 0 && state_.generation >= config_.max_generations) {
      if (!interactive) break;
      warn("generation limit reached; pausing");
      status_ = RunStatus::paused;
      continue;
    }

    if (objective_->version != database_.snapshot()->version) {
      objective_ = std::make_shared<const Objective>(objective());
    }
    try {
      state_ = step_generation(state_, *objective_, config_.ga, rng_);
    } catch (const NoLabeledData& e) {
      if (!interactive) {
        std::cerr << "qevo: " << e.what() << '\n';
        return 2;
      }
      warn(std::string(e.what()) + "; pausing until documents are labeled");
      status_ = RunStatus::paused;
      continue;
    }
    publish_metrics();

    const auto gen = state_.generation;
    if (config_.checkpoint_every != 0 && gen % config_.checkpoint_every == 0) write_checkpoint();
    if (provider_ && config_.ga.fetch_every != 0 && gen % config_.ga.fetch_every == 0) {
      maybe_fetch();
    }
    if (config_.pause_every != 0 && gen % config_.pause_every == 0 &&
        status_.load() == RunStatus::running) {
      status_ = RunStatus::paused;
    }
  }
  status_ = RunStatus::stopped;
  write_checkpoint();
  return 0;
}

// ---------------------------------------------------------------------------
// Control API

struct ControlServer::Impl {
  Orchestrator& run;
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit Impl(Orchestrator& r) : run(r) {}
};

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json individual_json(const Individual& ind, std::size_t rank, const VocabularyIndex& vocab) {
  const auto query = decode(ind.genome);
  json j{{"rank", rank},
         {"genome", ind.genome.values},
         {"clauses", to_json(query)},
         {"length", ind.genome.size()},
         {"injected", ind.injected}};
  try {
    j["query"] = serialize(query, vocab, std::numeric_limits<std::size_t>::max()).text;
  } catch (const Error&) {
    j["query"] = nullptr;
  }
  if (ind.fitness) {
    const auto& c = ind.fitness->counts;
    j["loss"] = std::isfinite(ind.fitness->loss) ? json(ind.fitness->loss) : json("inf");
    j["fp_rate"] = c.labeled_irrelevant() ? static_cast<double>(c.fp) / c.labeled_irrelevant() : 0.0;
    j["fn_rate"] = c.labeled_relevant() ? static_cast<double>(c.fn) / c.labeled_relevant() : 0.0;
  }
  return j;
}

}  // namespace

ControlServer::ControlServer(Orchestrator& run) : impl_(std::make_unique<Impl>(run)) {
  auto& srv = impl_->server;
  Orchestrator& orch = impl_->run;

  srv.Get("/status", [&orch](const httplib::Request&, httplib::Response& res) {
    json body = json::object();
    if (auto m = orch.latest_metrics()) body = to_json(*m);
    body["status"] = to_string(orch.status());
    body["warning"] = orch.last_warning();
    reply(res, 200, body);
  });

  srv.Get("/population", [&orch](const httplib::Request& req, httplib::Response& res) {
    std::size_t k = 10;
    if (req.has_param("top")) {
      const auto text = req.get_param_value("top");
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), k);
      if (ec != std::errc() || ptr != text.data() + text.size()) {
        reply(res, 400, {{"error", "top must be a non-negative integer"}});
        return;
      }
    }
    const auto snap = orch.data();
    json list = json::array();
    const auto top = orch.top(k);
    for (std::size_t i = 0; i < top.size(); ++i) {
      list.push_back(individual_json(top[i], i, snap->vocabulary()));
    }
    const auto m = orch.latest_metrics();
    reply(res, 200, {{"generation", m ? m->generation : 0}, {"individuals", list}});
  });

  auto lifecycle = [&srv, &orch](const char* path, auto make) {
    srv.Post(path, [&orch, make](const httplib::Request&, httplib::Response& res) {
      orch.post(make());
      reply(res, 202, {{"accepted", true}});
    });
  };
  lifecycle("/pause", [] { return Command{command::Pause{}}; });
  lifecycle("/resume", [] { return Command{command::Resume{}}; });
  lifecycle("/stop", [] { return Command{command::Stop{}}; });

  srv.Post("/inject", [&orch](const httplib::Request& req, httplib::Response& res) {
    if (orch.status() == RunStatus::stopped) {
      reply(res, 409, {{"error", "run is stopped"}});
      return;
    }
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception&) {
      reply(res, 400, {{"error", "body is not valid JSON"}});
      return;
    }
    if (!body.is_object() || !body.contains("queries") || !body["queries"].is_array()) {
      reply(res, 400, {{"error", "expected {\"queries\": [string]}"}});
      return;
    }
    command::Inject inject;
    const auto& queries = body["queries"];
    for (std::size_t i = 0; i < queries.size(); ++i) {
      if (!queries[i].is_string()) {
        reply(res, 400, {{"error", "queries must be strings"}, {"query_index", i}});
        return;
      }
      try {
        inject.genomes.push_back(orch.compile(queries[i].get<std::string>()));
      } catch (const SyntaxError& e) {
        reply(res, 400,
              {{"error", e.message()}, {"offset", e.offset()}, {"query_index", i}});
        return;
      } catch (const Error& e) {
        reply(res, 400, {{"error", e.what()}, {"query_index", i}});
        return;
      }
    }
    const auto queued = inject.genomes.size();
    json genomes = json::array();
    for (const auto& g : inject.genomes) genomes.push_back(g.values);
    orch.post(std::move(inject));
    reply(res, 202, {{"queued", queued}, {"genomes", genomes}});
  });

  srv.Get("/labels/pending", [&orch](const httplib::Request&, httplib::Response& res) {
    json docs = json::array();
    if (auto* labeler = orch.interactive_labeler()) {
      for (const auto& p : labeler->pending()) docs.push_back({{"id", p.id}, {"text", p.text}});
    }
    reply(res, 200, {{"documents", docs}});
  });

  srv.Post("/labels", [&orch](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception&) {
      reply(res, 400, {{"error", "body is not valid JSON"}});
      return;
    }
    if (!body.is_object() || !body.contains("id") || !body["id"].is_string() ||
        !body.contains("label") || !body["label"].is_string()) {
      reply(res, 400, {{"error", "expected {\"id\": string, \"label\": string}"}});
      return;
    }
    const auto label = parse_label(body["label"].get<std::string>());
    if (!label || *label == Label::unlabeled) {
      reply(res, 400, {{"error", "label must be relevant or irrelevant"}});
      return;
    }
    const auto id = body["id"].get<std::string>();
    auto* labeler = orch.interactive_labeler();
    if (labeler == nullptr || !labeler->take(id)) {
      reply(res, 404, {{"error", "no pending document with id " + id}});
      return;
    }
    orch.post(command::SetLabel{id, *label});
    reply(res, 200, {{"id", id}, {"label", to_string(*label)}});
  });

  srv.Get("/history", [&orch](const httplib::Request&, httplib::Response& res) {
    json series = json::array();
    for (const auto& m : orch.history()) series.push_back(to_json(m));
    reply(res, 200, {{"metrics", series}});
  });

  if (!orch.config().ui_dir.empty()) srv.set_mount_point("/", orch.config().ui_dir.string());
}

ControlServer::~ControlServer() { stop(); }

int ControlServer::start(const std::string& host, int port) {
  auto& srv = impl_->server;
  impl_->port = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  if (impl_->port < 0) throw Error("cannot listen on " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  srv.wait_until_ready();
  return impl_->port;
}

void ControlServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace qevo
