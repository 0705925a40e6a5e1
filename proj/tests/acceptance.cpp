// Acceptance gate: one PASS/FAIL line per headline criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qevo/corpus_io.hpp"
#include "qevo/errors.hpp"
#include "qevo/orchestrator.hpp"
#include "qevo/query_parser.hpp"
#include "qevo/synthetic.hpp"
#include "support.hpp"

using namespace qevo;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s  %-34s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

void evaluator_oracle() {
  const auto start = Clock::now();
  SyntheticSpec spec;
  spec.documents = 200;
  spec.vocabulary = 60;
  spec.seed = 101;
  const auto corpus = generate_synthetic_corpus(spec);
  const auto index = build_index(corpus.documents);
  const auto& vocab = index.vocabulary();
  std::vector<std::set<std::string>> ngrams;
  for (const auto& d : corpus.documents) ngrams.push_back(document_ngram_keys(d.text));

  Rng rng(101);
  std::size_t pairs = 0;
  std::size_t agree = 0;
  for (int q = 0; q < 1000; ++q) {
    const auto query = decode(qevo::testing::random_genome(rng, vocab.size(), 16), vocab.size());
    for (std::size_t d = 0; d < ngrams.size(); ++d) {
      ++pairs;
      agree += matches(query, index.vectors()[d]) == qevo::testing::naive_matches(query, ngrams[d], vocab);
    }
  }
  const double elapsed = seconds_since(start);
  report(agree == pairs && pairs == 200000 && elapsed < 10.0, "evaluator oracle equivalence",
         fmt("%zu/%zu pairs agree, %.2fs (limit 10s)", agree, pairs, elapsed));
}

// ---------------------------------------------------------------------------

const std::map<std::string, std::uint32_t> kFour{{"a", 0}, {"b", 1}, {"c", 2}, {"d", 3}};

bool eval_ast(const QueryAst& n, unsigned s) {
  switch (n.kind) {
    case QueryAst::Kind::phrase:
      return (s >> kFour.at(n.text)) & 1U;
    case QueryAst::Kind::negation:
      return !eval_ast(n.children[0], s);
    case QueryAst::Kind::conjunction:
      return std::all_of(n.children.begin(), n.children.end(), [s](const auto& c) { return eval_ast(c, s); });
    case QueryAst::Kind::disjunction:
      return std::any_of(n.children.begin(), n.children.end(), [s](const auto& c) { return eval_ast(c, s); });
  }
  return false;
}

bool eval_cnf(const ClauseQuery& q, unsigned s) {
  for (const auto& clause : q.clauses) {
    if (clause.empty()) continue;
    if (std::none_of(clause.begin(), clause.end(),
                     [s](const Literal& l) { return (((s >> l.phrase_id) & 1U) != 0) != l.negated; })) {
      return false;
    }
  }
  return true;
}

QueryAst random_ast(Rng& rng, int depth) {
  static const char* names[] = {"a", "b", "c", "d"};
  if (depth <= 1 || bernoulli(rng, 0.25)) return ast::phrase(names[uniform_below(rng, 4)]);
  const auto kind = uniform_below(rng, 3);
  if (kind == 0) return ast::negation(random_ast(rng, depth - 1));
  std::vector<QueryAst> kids;
  for (std::size_t i = 0, n = 2 + uniform_below(rng, 2); i < n; ++i) kids.push_back(random_ast(rng, depth - 1));
  return kind == 1 ? ast::conjunction(std::move(kids)) : ast::disjunction(std::move(kids));
}

int depth_of(const QueryAst& n) {
  int d = 0;
  for (const auto& c : n.children) d = std::max(d, depth_of(c));
  return d + 1;
}

// Negation directly above a conjunction or disjunction.
bool has_de_morgan(const QueryAst& n) {
  if (n.kind == QueryAst::Kind::negation && n.children[0].kind != QueryAst::Kind::phrase &&
      n.children[0].kind != QueryAst::Kind::negation) {
    return true;
  }
  return std::any_of(n.children.begin(), n.children.end(), has_de_morgan);
}

// A disjunction with a conjunction child: distribution is needed.
bool has_distribution(const QueryAst& n) {
  if (n.kind == QueryAst::Kind::disjunction &&
      std::any_of(n.children.begin(), n.children.end(),
                  [](const auto& c) { return c.kind == QueryAst::Kind::conjunction; })) {
    return true;
  }
  return std::any_of(n.children.begin(), n.children.end(), has_distribution);
}

void normalization_soundness() {
  const PhraseResolver resolve = [](const std::string& k) -> std::optional<std::uint32_t> {
    const auto it = kFour.find(k);
    if (it == kFour.end()) return std::nullopt;
    return it->second;
  };
  Rng rng(202);
  std::size_t trees = 0;
  std::size_t agree = 0;
  std::size_t de_morgan = 0;
  std::size_t distribution = 0;
  std::size_t errors = 0;
  int max_depth = 0;
  while (trees < 500) {
    const auto tree = random_ast(rng, 5);
    ++trees;
    max_depth = std::max(max_depth, depth_of(tree));
    de_morgan += has_de_morgan(tree);
    distribution += has_distribution(tree);
    try {
      const auto q = normalize(tree, resolve, 1 << 16);
      bool ok = true;
      for (unsigned s = 0; s < 16; ++s) ok = ok && eval_cnf(q, s) == eval_ast(tree, s);
      agree += ok;
    } catch (const Error&) {
      ++errors;
    }
  }
  report(agree == trees && errors == 0 && de_morgan > 0 && distribution > 0 && max_depth <= 5,
         "normalization soundness",
         fmt("%zu/%zu ASTs agree on all 16 assignments; depth<=%d; De Morgan %zu, distribution %zu",
             agree, trees, max_depth, de_morgan, distribution));
}

// ---------------------------------------------------------------------------

void loss_checks() {
  const LossParams spot{0.01, 0.01, 0.0, 0.0, 0.0};
  const double value = loss_from_rates(0.1, 0.2, 0, spot);
  const double expected = (0.11 * 0.21) / (0.9 * 0.8);
  const bool spot_ok = std::abs(value - 0.0320833) <= 1e-6 && std::abs(value - expected) <= 1e-9;

  const LossParams defaults;
  std::size_t violations = 0;
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 100; ++j) {
      const double fp = 0.99 * i / 99.0;
      const double fn = 0.99 * j / 99.0;
      const double here = loss_from_rates(fp, fn, 0, defaults);
      if (!(here >= 0.0) || !std::isfinite(here)) ++violations;
      if (i < 99 && !(loss_from_rates(0.99 * (i + 1) / 99.0, fn, 0, defaults) > here)) ++violations;
      if (j < 99 && !(loss_from_rates(fp, 0.99 * (j + 1) / 99.0, 0, defaults) > here)) ++violations;
    }
  }
  report(spot_ok && violations == 0, "loss spot-check and monotonicity",
         fmt("loss(0.1,0.2)=%.10f (|err| %.1e); 100x100 grid violations %zu", value,
             std::abs(value - expected), violations));
}

// ---------------------------------------------------------------------------

void operator_properties() {
  constexpr std::size_t n = 50;
  const PhraseSampler sampler(n, 0.5);
  Rng rng(303);
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // cases, failures
  auto check = [&](const char* name, bool ok) {
    auto& t = tally[name];
    ++t.first;
    t.second += !ok;
  };
  for (int trial = 0; trial < 12000; ++trial) {
    auto g = qevo::testing::random_genome(rng, n, 40);
    if (g.size() < 2) g.values.insert(g.values.end(), {3, 4});
    const auto h = qevo::testing::random_genome(rng, n, 40);

    check("phrase_add +1", mutate_phrase_add(g, sampler, rng).size() == g.size() + 1);
    check("clause_add +1", mutate_clause_add(g, rng).size() == g.size() + 1);
    check("swap 0", mutate_swap(g, 1.5, rng).size() == g.size());
    if (std::any_of(g.values.begin(), g.values.end(), [](auto v) { return v != 0; })) {
      const auto neg = mutate_negate(g, rng);
      check("negate 0", neg.size() == g.size());
      std::size_t pos = 0;
      while (pos < g.size() && neg.values[pos] == g.values[pos]) ++pos;
      check("negate involution", pos < g.size() && g.values[pos] != 0 && negate_at(neg, pos) == g);
    } else {
      check("negate 0", true);
      check("negate involution", true);
    }
    const auto simple = mutate_simplify(g);
    check("simplify <=0", simple.size() <= g.size());
    check("simplify idempotent", mutate_simplify(simple) == simple);

    // Swap silence: two positions inside one zero-free segment.
    std::vector<std::pair<std::size_t, std::size_t>> segments;
    std::size_t begin = 0;
    for (std::size_t i = 0; i <= g.size(); ++i) {
      if (i == g.size() || g.values[i] == 0) {
        if (i - begin >= 2) segments.emplace_back(begin, i);
        begin = i + 1;
      }
    }
    if (segments.empty()) {
      g.values.insert(g.values.begin(), {5, 6});
      segments.emplace_back(0, 2);
    }
    const auto [lo, hi] = segments[uniform_below(rng, segments.size())];
    const auto i = lo + uniform_below(rng, hi - lo);
    auto j = lo + uniform_below(rng, hi - lo - 1);
    if (j >= i) ++j;
    check("swap silence", same_clauses(decode(swap_at(g, i, j)), decode(g)));

    const auto child = crossover(g, h, 4.0, rng);
    check("crossover closure", qevo::testing::valid_genome(child, n) && child.size() <= kMaxGenomeLength);
    const auto patch = swatch_insert(g, h, 4.0, rng);
    check("swatch closure", qevo::testing::valid_genome(patch, n) && patch.size() <= kMaxGenomeLength);
  }
  std::size_t min_cases = SIZE_MAX;
  std::size_t total_failures = 0;
  std::string detail;
  for (const auto& [name, t] : tally) {
    min_cases = std::min(min_cases, t.first);
    total_failures += t.second;
    if (t.second) detail += std::string(" ") + name + ":" + std::to_string(t.second);
  }
  report(min_cases >= 10000 && total_failures == 0, "operator property suite",
         fmt("%zu properties, >=%zu cases each, %zu failures", tally.size(), min_cases, total_failures) + detail);
}

// ---------------------------------------------------------------------------

struct PlantedOutcome {
  double best_f1 = 0.0;
  std::uint64_t reached_at = 0;  // first generation with F1 >= 0.95, 0 if never
  double seconds = 0.0;
  std::string target;
  std::string found;
};

PlantedOutcome planted_run(std::uint64_t seed, const std::filesystem::path& dir) {
  SyntheticSpec spec;
  spec.documents = 5000;
  spec.vocabulary = 500;
  spec.seed = seed;
  const auto corpus = generate_synthetic_corpus(spec);
  write_jsonl(dir / "corpus.jsonl", corpus.documents);
  std::uint64_t relevant = 0;
  for (const auto& d : corpus.documents) relevant += d.label == Label::relevant;
  const std::uint64_t irrelevant = corpus.documents.size() - relevant;

  RunConfig cfg;
  cfg.corpus_path = dir / "corpus.jsonl";
  cfg.checkpoint_dir = dir / "run";
  cfg.max_generations = 500;
  cfg.checkpoint_every = 0;
  cfg.ga.rng_seed = seed;

  PlantedOutcome out;
  out.target = corpus.target_query;
  const auto start = Clock::now();
  Orchestrator run(cfg);
  run.run();
  out.seconds = seconds_since(start);
  for (const auto& m : run.history()) {
    const double tp = relevant * (1.0 - m.best_fn_rate);
    const double fp = irrelevant * m.best_fp_rate;
    const double fn = relevant * m.best_fn_rate;
    const double f1 = 2 * tp / (2 * tp + fp + fn);
    if (f1 >= 0.95 && out.reached_at == 0) out.reached_at = m.generation;
    if (f1 > out.best_f1) {
      out.best_f1 = f1;
      out.found = m.best_query;
    }
  }
  return out;
}

void planted_recovery(const std::filesystem::path& root) {
  int successes = 0;
  double slowest = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto dir = root / ("planted-" + std::to_string(seed));
    std::filesystem::create_directories(dir);
    const auto r = planted_run(seed, dir);
    const bool ok = r.reached_at != 0 && r.seconds < 300.0;
    successes += ok;
    slowest = std::max(slowest, r.seconds);
    std::printf("      seed %2llu  F1 %.4f  reached at gen %3llu  %.1fs  target %s  best %s\n",
                static_cast<unsigned long long>(seed), r.best_f1,
                static_cast<unsigned long long>(r.reached_at), r.seconds, r.target.c_str(),
                r.found.c_str());
  }
  report(successes >= 8, "planted-query recovery",
         fmt("%d/10 seeds reach F1>=0.95 within 500 generations (need 8); slowest run %.1fs (limit 300s)",
             successes, slowest));
}

// ---------------------------------------------------------------------------

// Records everything a provider returns so the run can be audited.
class RecordingProvider final : public SearchProvider {
 public:
  explicit RecordingProvider(std::vector<Document> hidden) : inner_(std::move(hidden)) {}
  ProviderResponse fetch(const ProviderRequest& request, TokenBudget& budget) override {
    const auto before = budget.spent();
    auto response = inner_.fetch(request, budget);
    charged += response.tokens_charged;
    budget_delta += budget.spent() - before;
    per_token_ok = per_token_ok && response.documents.size() <= kDocumentsPerToken * response.tokens_charged;
    for (const auto& d : response.documents) ids.insert(d.id);
    ++calls;
    return response;
  }
  SimulatedProvider inner_;
  std::set<std::string> ids;
  std::uint64_t charged = 0;
  std::uint64_t budget_delta = 0;
  std::size_t calls = 0;
  bool per_token_ok = true;
};

struct DualSetup {
  RunConfig config;
  std::vector<Document> hidden;
  std::size_t initial = 0;
};

DualSetup dual_setup(const std::filesystem::path& dir) {
  SyntheticSpec spec;
  spec.documents = 1000;
  spec.vocabulary = 200;
  spec.seed = 404;
  const auto corpus = generate_synthetic_corpus(spec);
  write_jsonl(dir / "corpus.jsonl", corpus.documents);
  spec.documents = 2000;
  spec.seed = 405;
  spec.id_prefix = "h";
  spec.target_query = corpus.target_query;
  DualSetup s;
  s.hidden = generate_synthetic_corpus(spec).documents;
  write_jsonl(dir / "hidden.jsonl", s.hidden);
  s.initial = corpus.documents.size();
  s.config.corpus_path = dir / "corpus.jsonl";
  s.config.hidden_corpus_path = dir / "hidden.jsonl";
  s.config.checkpoint_dir = dir / "run";
  s.config.budget_total = 10;
  s.config.ga.population_size = 100;
  s.config.ga.fetch_every = 10;
  s.config.max_generations = 150;
  s.config.ga.rng_seed = 7;
  return s;
}

void dual_evaluation(const std::filesystem::path& root) {
  const auto dir = root / "dual";
  std::filesystem::create_directories(dir);
  auto setup = dual_setup(dir);
  auto provider = std::make_unique<RecordingProvider>(setup.hidden);
  auto* recorder = provider.get();
  Orchestrator run(setup.config, std::move(provider));
  run.run();
  const auto& budget = run.budget();
  const bool conserved = budget.spent() + budget.remaining() == budget.total() &&
                         budget.spent() == recorder->charged && recorder->charged == recorder->budget_delta;
  const auto final_size = run.data()->document_count();
  const bool sizes = final_size == setup.initial + recorder->ids.size();
  report(recorder->per_token_ok && conserved && sizes && recorder->calls > 0,
         "dual-evaluation integration",
         fmt("%zu fetches, <=500 docs/token %s; spent %llu + remaining %llu = %llu; corpus %zu = %zu + %zu unique",
             recorder->calls, recorder->per_token_ok ? "held" : "VIOLATED",
             static_cast<unsigned long long>(budget.spent()),
             static_cast<unsigned long long>(budget.remaining()),
             static_cast<unsigned long long>(budget.total()), final_size, setup.initial,
             recorder->ids.size()));
}

// ---------------------------------------------------------------------------

void determinism(const std::filesystem::path& root) {
  std::vector<std::string> checkpoints;
  for (const char* name : {"det-a", "det-b"}) {
    const auto dir = root / name;
    std::filesystem::create_directories(dir);
    auto setup = dual_setup(dir);
    setup.config.ga.threads = 2;
    Orchestrator run(setup.config);
    run.run();
    checkpoints.push_back(slurp(run.checkpoint_path()));
  }
  const bool ok = !checkpoints[0].empty() && checkpoints[0] == checkpoints[1];
  report(ok, "determinism", fmt("final checkpoints %zu and %zu bytes, %s", checkpoints[0].size(),
                                checkpoints[1].size(), ok ? "identical" : "DIFFERENT"));
}

// ---------------------------------------------------------------------------

void serialization_limit() {
  VocabularyIndex vocab;
  vocab.push_back(Phrase::from_key(std::string(1100, 'x')), 2);
  vocab.push_back(Phrase::from_key(std::string(1024, 'y')), 2);
  vocab.push_back(Phrase::from_key("crash"), 2);
  RunState state;
  auto scored = [](Genome g, double loss) {
    Individual ind;
    ind.genome = std::move(g);
    ind.fitness = Fitness{loss, {}};
    return ind;
  };
  state.population = {scored({1}, 0.01), scored({2, 0, 3}, 0.02), scored({2}, 0.03), scored({3}, 0.04)};
  const auto pick = select_fetch_candidate(state, vocab, 1024);
  const bool selector_ok = pick.genome == Genome{2} && pick.query.size() == 1024;

  SimulatedProvider provider({qevo::testing::doc("h1", "crash")});
  TokenBudget budget(5);
  bool rejected = false;
  try {
    provider.fetch({std::string(1025, 'z'), "", 1}, budget);
  } catch (const QueryTooLong&) {
    rejected = true;
  }
  bool accepted = true;
  try {
    provider.fetch({std::string(1024, 'z'), "", 1}, budget);
  } catch (const Error&) {
    accepted = false;
  }
  report(selector_ok && rejected && accepted && budget.spent() == 1, "serialization limit",
         fmt("selector skipped 1100- and 1030-char queries, picked %zu chars; provider %s 1025, %s 1024; "
             "tokens spent %llu",
             pick.query.size(), rejected ? "rejected" : "ACCEPTED", accepted ? "accepted" : "REJECTED",
             static_cast<unsigned long long>(budget.spent())));
}

}  // namespace

int main() {
  const auto root = std::filesystem::temp_directory_path() / ("qevo-acceptance-" + std::to_string(::getpid()));
  std::filesystem::remove_all(root);
  std::filesystem::create_directories(root);

  evaluator_oracle();
  normalization_soundness();
  loss_checks();
  operator_properties();
  planted_recovery(root);
  dual_evaluation(root);
  determinism(root);
  serialization_limit();

  std::filesystem::remove_all(root);
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
