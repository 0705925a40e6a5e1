// qevo: command-line front end for indexing, query inspection and GA runs.

#include <csignal>
#include <fstream>
#include <iostream>
#include <limits>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qevo/corpus_io.hpp"
#include "qevo/errors.hpp"
#include "qevo/evaluator.hpp"
#include "qevo/orchestrator.hpp"
#include "qevo/query_parser.hpp"
#include "qevo/synthetic.hpp"

namespace {

qevo::CorpusIndex load_index(const std::string& index_path, const std::string& corpus_path) {
  if (!index_path.empty()) return qevo::read_index(std::filesystem::path(index_path));
  const auto docs = qevo::read_jsonl(std::filesystem::path(corpus_path));
  return qevo::build_index(docs);
}

int cmd_index(const std::string& corpus, const std::string& labels, const std::string& out) {
  auto docs = qevo::read_jsonl(std::filesystem::path(corpus));
  if (!labels.empty()) qevo::apply_labels(docs, qevo::read_labels(labels));
  const auto index = qevo::build_index(docs);
  qevo::write_index(std::filesystem::path(out), index);
  std::cout << "documents: " << index.document_count() << "\n"
            << "vocabulary: " << index.vocabulary().size() << "\n"
            << "written: " << out << "\n";
  return 0;
}

int cmd_normalize(const std::string& index_path, const std::string& corpus, std::size_t cap,
                  const std::string& query) {
  const auto index = load_index(index_path, corpus);
  const auto clauses = qevo::normalize(qevo::parse(query), index.vocabulary(), cap);
  const auto text =
      qevo::serialize(clauses, index.vocabulary(), std::numeric_limits<std::size_t>::max());
  std::cout << (text.match_all ? "<match all>" : text.text) << "\n"
            << qevo::to_json(clauses).dump() << "\n"
            << "genome: " << nlohmann::json(qevo::encode(clauses).values).dump() << "\n";
  return 0;
}

int cmd_eval(const std::string& corpus, const std::string& labels, const std::string& query,
             const qevo::LossParams& params, std::size_t cap) {
  auto docs = qevo::read_jsonl(std::filesystem::path(corpus));
  if (!labels.empty()) qevo::apply_labels(docs, qevo::read_labels(labels));
  const auto index = qevo::build_index(docs);
  const auto clauses = qevo::normalize(qevo::parse(query), index.vocabulary(), cap);
  std::vector<qevo::Label> label_vec;
  for (const auto& d : docs) label_vec.push_back(d.label);
  const auto counts = qevo::evaluate_corpus(clauses, index.vectors(), label_vec);
  const auto genome = qevo::encode(clauses);
  std::cout << "tp: " << counts.tp << "  fp: " << counts.fp << "  tn: " << counts.tn
            << "  fn: " << counts.fn << "\n"
            << "f_p: " << counts.false_positive_rate() << "\n"
            << "f_n: " << counts.false_negative_rate() << "\n"
            << "loss: " << qevo::loss(counts, genome.size(), params) << "\n";
  return 0;
}

qevo::Orchestrator* g_run = nullptr;

void on_signal(int) {
  if (g_run != nullptr) g_run->post(qevo::command::Stop{});
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides) {
  qevo::RunConfig config;
  if (!config_path.empty()) config = qevo::load_config(config_path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw qevo::ConfigError("--set expects key=value: " + kv);
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  qevo::Orchestrator run(config);
  g_run = &run;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  std::unique_ptr<qevo::ControlServer> server;
  if (run.config().mode == qevo::RunMode::interactive) {
    const auto [host, port] = qevo::parse_listen_address(run.config().http_listen);
    server = std::make_unique<qevo::ControlServer>(run);
    const int bound = server->start(host, port);
    std::cout << "control API listening on http://" << host << ":" << bound << "\n";
  }
  const int rc = run.run();
  if (auto m = run.latest_metrics()) {
    std::cout << "generation " << m->generation << "  best loss " << m->best_loss << "  f_p "
              << m->best_fp_rate << "  f_n " << m->best_fn_rate << "\n"
              << "best query: " << m->best_query << "\n";
  }
  std::cout << "tokens spent: " << run.budget().spent() << "/" << run.budget().total() << "\n"
            << "checkpoint: " << run.checkpoint_path().string() << "\n";
  g_run = nullptr;
  return rc;
}

int cmd_synth(const std::string& out_dir, std::size_t documents, std::size_t hidden,
              std::size_t vocabulary, std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  qevo::SyntheticSpec spec;
  spec.documents = documents;
  spec.vocabulary = vocabulary;
  spec.seed = seed;
  const auto local = qevo::generate_synthetic_corpus(spec);

  qevo::SyntheticSpec hidden_spec = spec;
  hidden_spec.documents = hidden;
  hidden_spec.seed = seed + 1;
  hidden_spec.id_prefix = "h";
  hidden_spec.first_timestamp = spec.first_timestamp + static_cast<std::int64_t>(documents) * 60;
  hidden_spec.target_query = local.target_query;
  const auto remote = qevo::generate_synthetic_corpus(hidden_spec);

  const fs::path dir(out_dir);
  qevo::write_jsonl(dir / "corpus.jsonl", local.documents);
  qevo::write_jsonl(dir / "hidden.jsonl", remote.documents);
  std::ofstream(dir / "target.txt") << local.target_query << "\n";
  std::cout << "target query: " << local.target_query << "\n"
            << "wrote " << (dir / "corpus.jsonl").string() << " (" << documents << " docs) and "
            << (dir / "hidden.jsonl").string() << " (" << hidden << " docs)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolves clause-structured boolean search queries against a labeled corpus"};
  app.require_subcommand(1);

  std::string corpus;
  std::string labels;
  std::string out;
  auto* index = app.add_subcommand("index", "Build a vocabulary index and persist it");
  index->add_option("--corpus", corpus, "JSON-lines corpus")->required()->check(CLI::ExistingFile);
  index->add_option("--labels", labels, "JSON-lines label file")->check(CLI::ExistingFile);
  index->add_option("-o,--out", out, "Output index file")->required();

  std::string index_path;
  std::string query;
  std::size_t clause_cap = qevo::kDefaultClauseCap;
  auto* normalize = app.add_subcommand("normalize", "Print the clause-structured form of a query");
  auto* n_index = normalize->add_option("--index", index_path, "Index file")->check(CLI::ExistingFile);
  auto* n_corpus = normalize->add_option("--corpus", corpus, "JSON-lines corpus")->check(CLI::ExistingFile);
  n_index->excludes(n_corpus);
  normalize->add_option("--clause-cap", clause_cap, "Maximum clause count");
  normalize->add_option("query", query, "Boolean query string")->required();

  qevo::LossParams params;
  auto* eval = app.add_subcommand("eval", "Score a query against a labeled corpus");
  eval->add_option("--corpus", corpus, "JSON-lines corpus")->required()->check(CLI::ExistingFile);
  eval->add_option("--labels", labels, "JSON-lines label file")->check(CLI::ExistingFile);
  eval->add_option("--eps-fp", params.eps_fp);
  eval->add_option("--eps-fn", params.eps_fn);
  eval->add_option("--delta-fp", params.delta_fp);
  eval->add_option("--delta-fn", params.delta_fn);
  eval->add_option("--lambda-len", params.lambda_len);
  eval->add_option("--clause-cap", clause_cap, "Maximum clause count");
  eval->add_option("query", query, "Boolean query string")->required();

  std::string config_path;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "Run the genetic search (batch or interactive)");
  run->add_option("-c,--config", config_path, "Config file")->check(CLI::ExistingFile);
  run->add_option("--set", overrides, "Override a config key (key=value)");

  std::string synth_dir;
  std::size_t synth_docs = 5000;
  std::size_t synth_hidden = 2000;
  std::size_t synth_vocab = 500;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synth", "Generate a planted-query synthetic corpus");
  synth->add_option("-o,--out-dir", synth_dir, "Output directory")->required();
  synth->add_option("--documents", synth_docs, "Local corpus size");
  synth->add_option("--hidden", synth_hidden, "Hidden provider corpus size");
  synth->add_option("--vocabulary", synth_vocab, "Distinct words");
  synth->add_option("--seed", synth_seed, "Random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*index) return cmd_index(corpus, labels, out);
    if (*normalize) {
      if (index_path.empty() && corpus.empty()) {
        std::cerr << "normalize needs --index or --corpus\n";
        return 1;
      }
      return cmd_normalize(index_path, corpus, clause_cap, query);
    }
    if (*eval) return cmd_eval(corpus, labels, query, params, clause_cap);
    if (*run) return cmd_run(config_path, overrides);
    if (*synth) return cmd_synth(synth_dir, synth_docs, synth_hidden, synth_vocab, synth_seed);
  } catch (const qevo::SyntaxError& e) {
    std::cerr << "syntax error: " << e.message() << " at offset " << e.offset() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
