#include "qevo/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "qevo/errors.hpp"
#include "qevo/query_parser.hpp"

namespace qevo {

using nlohmann::json;

std::string save_rng(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

Rng load_rng(const std::string& state) {
  Rng rng;
  std::istringstream in(state);
  in >> rng;
  if (!in) throw FormatError("bad RNG state");
  return rng;
}

void GaConfig::validate() const {
  if (population_size < 2) throw ConfigError("population_size must be at least 2");
  if (tournament_size < 1) throw ConfigError("tournament_size must be at least 1");
  if (elitism >= population_size) throw ConfigError("elitism must be below population_size");
  for (std::size_t i = 0; i < kOperatorCount; ++i) {
    const double r = operator_rates[i];
    if (!(r >= 0.0 && r <= 1.0)) {
      throw ConfigError("rate for " + std::string(to_string(static_cast<Operator>(i))) +
                        " must be in [0, 1]");
    }
  }
  if (!(swap_distance_mean > 0.0)) throw ConfigError("swap_distance_mean must be positive");
  if (!(phrase_sample_gamma >= 0.0)) throw ConfigError("phrase_sample_gamma must be >= 0");
  if (!(boundary_weight > 0.0)) throw ConfigError("boundary_weight must be positive");
  if (threads < 1) throw ConfigError("threads must be at least 1");
}

json to_json(const GaConfig& c) {
  json rates = json::object();
  for (std::size_t i = 0; i < kOperatorCount; ++i) {
    rates[std::string(to_string(static_cast<Operator>(i)))] = c.operator_rates[i];
  }
  return {{"population_size", c.population_size},
          {"operator_rates", rates},
          {"tournament_size", c.tournament_size},
          {"elitism", c.elitism},
          {"fetch_every", c.fetch_every},
          {"swap_distance_mean", c.swap_distance_mean},
          {"phrase_sample_gamma", c.phrase_sample_gamma},
          {"boundary_weight", c.boundary_weight},
          {"rng_seed", c.rng_seed},
          {"threads", c.threads}};
}

GaConfig ga_config_from_json(const json& j) {
  GaConfig c;
  try {
    c.population_size = j.at("population_size").get<std::size_t>();
    for (const auto& [name, rate] : j.at("operator_rates").items()) {
      const auto op = parse_operator(name);
      if (!op) throw ConfigError("unknown operator " + name);
      c.rate(*op) = rate.get<double>();
    }
    c.tournament_size = j.at("tournament_size").get<std::size_t>();
    c.elitism = j.at("elitism").get<std::size_t>();
    c.fetch_every = j.at("fetch_every").get<std::size_t>();
    c.swap_distance_mean = j.at("swap_distance_mean").get<double>();
    c.phrase_sample_gamma = j.at("phrase_sample_gamma").get<double>();
    c.boundary_weight = j.at("boundary_weight").get<double>();
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    c.threads = j.at("threads").get<unsigned>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad GA config: ") + e.what());
  }
  return c;
}

json to_json(const LossParams& p) {
  return {{"eps_fp", p.eps_fp},     {"eps_fn", p.eps_fn},        {"delta_fp", p.delta_fp},
          {"delta_fn", p.delta_fn}, {"lambda_len", p.lambda_len}};
}

LossParams loss_params_from_json(const json& j) {
  LossParams p;
  try {
    p.eps_fp = j.at("eps_fp").get<double>();
    p.eps_fn = j.at("eps_fn").get<double>();
    p.delta_fp = j.at("delta_fp").get<double>();
    p.delta_fn = j.at("delta_fn").get<double>();
    p.lambda_len = j.at("lambda_len").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad loss params: ") + e.what());
  }
  return p;
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::paused:
      return "paused";
    case RunStatus::stopped:
      return "stopped";
    case RunStatus::running:
      break;
  }
  return "running";
}

std::optional<RunStatus> parse_run_status(std::string_view text) {
  if (text == "running") return RunStatus::running;
  if (text == "paused") return RunStatus::paused;
  if (text == "stopped") return RunStatus::stopped;
  return std::nullopt;
}

bool ranks_before(const Individual& a, const Individual& b) {
  const double la = a.fitness ? a.fitness->loss : std::numeric_limits<double>::infinity();
  const double lb = b.fitness ? b.fitness->loss : std::numeric_limits<double>::infinity();
  if (la != lb) return la < lb;
  if (a.genome.size() != b.genome.size()) return a.genome.size() < b.genome.size();
  return a.genome < b.genome;
}

void evaluate_population(std::vector<Individual>& population, const Objective& objective,
                         unsigned threads) {
  // Distinct stale genomes, each evaluated once.
  std::map<Genome, std::size_t> slot_of;
  std::vector<const Genome*> todo;
  for (const auto& ind : population) {
    if (ind.fresh(objective.version)) continue;
    if (slot_of.emplace(ind.genome, todo.size()).second) todo.push_back(&ind.genome);
  }
  if (todo.empty()) return;

  std::vector<Fitness> results(todo.size());
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(todo.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < todo.size(); ++i) results[i] = objective.evaluate(*todo[i]);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> workers;
      for (unsigned t = 0; t < threads; ++t) {
        workers.emplace_back([&, t] {
          try {
            for (std::size_t i = t; i < todo.size(); i += threads) {
              results[i] = objective.evaluate(*todo[i]);
            }
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (auto& ind : population) {
    if (ind.fresh(objective.version)) continue;
    ind.fitness = results[slot_of.at(ind.genome)];
    ind.evaluated_against = objective.version;
  }
}

namespace {

// Population must be in rank order: the winner is the smallest sampled index.
std::size_t tournament(std::size_t population_size, std::size_t rounds, Rng& rng) {
  std::size_t best = population_size;
  for (std::size_t r = 0; r < rounds; ++r) {
    best = std::min<std::size_t>(best, uniform_below(rng, population_size));
  }
  return best;
}

bool has_term(const Genome& g) {
  return std::any_of(g.values.begin(), g.values.end(), [](auto v) { return v != 0; });
}

Genome breed(const std::vector<Individual>& ranked, const GaConfig& cfg,
             const PhraseSampler* sampler, Rng& rng, const Individual*& parent) {
  const auto& first = ranked[tournament(ranked.size(), cfg.tournament_size, rng)];
  parent = &first;
  Genome child;
  if (bernoulli(rng, cfg.rate(Operator::crossover))) {
    const auto& second = ranked[tournament(ranked.size(), cfg.tournament_size, rng)];
    child = crossover(first.genome, second.genome, cfg.boundary_weight, rng);
  } else if (bernoulli(rng, cfg.rate(Operator::swatch))) {
    const auto& donor = ranked[tournament(ranked.size(), cfg.tournament_size, rng)];
    child = swatch_insert(donor.genome, first.genome, cfg.boundary_weight, rng);
  } else {
    child = first.genome;
  }

  if (bernoulli(rng, cfg.rate(Operator::phrase_add)) && sampler && sampler->vocabulary_size() > 0) {
    child = mutate_phrase_add(child, *sampler, rng);
  }
  if (bernoulli(rng, cfg.rate(Operator::clause_add))) child = mutate_clause_add(child, rng);
  if (bernoulli(rng, cfg.rate(Operator::swap)) && child.size() >= 2) {
    child = mutate_swap(child, cfg.swap_distance_mean, rng);
  }
  if (bernoulli(rng, cfg.rate(Operator::negate)) && has_term(child)) {
    child = mutate_negate(child, rng);
  }
  if (bernoulli(rng, cfg.rate(Operator::simplify))) child = mutate_simplify(child);
  return child;
}

void rank(std::vector<Individual>& population) {
  std::stable_sort(population.begin(), population.end(), ranks_before);
}

}  // namespace

RunState step_generation(RunState state, const Objective& objective, const GaConfig& config,
                         Rng& rng) {
  auto& population = state.population;
  if (population.empty()) throw std::invalid_argument("empty population");
  evaluate_population(population, objective, config.threads);
  rank(population);

  const std::size_t target = config.population_size;
  const std::size_t elites = std::min({config.elitism, target, population.size()});
  std::vector<Individual> next;
  next.reserve(target);
  for (std::size_t i = 0; i < elites; ++i) next.push_back(population[i]);

  while (next.size() < target) {
    const Individual* parent = nullptr;
    Genome child = breed(population, config, objective.sampler.get(), rng, parent);
    // An unchanged copy keeps its parent's cached fitness.
    Individual ind;
    if (child == parent->genome) {
      ind = *parent;
    } else {
      ind.genome = std::move(child);
    }
    next.push_back(std::move(ind));
  }
  evaluate_population(next, objective, config.threads);
  rank(next);

  // Injections displace the worst non-elite individuals.
  std::vector<Individual> injected;
  while (!state.pending_injections.empty() && injected.size() + elites < next.size()) {
    Individual ind;
    ind.genome = std::move(state.pending_injections.front());
    ind.injected = true;
    state.pending_injections.pop_front();
    injected.push_back(std::move(ind));
  }
  if (!injected.empty()) {
    evaluate_population(injected, objective, config.threads);
    next.resize(next.size() - injected.size());
    for (auto& ind : injected) next.push_back(std::move(ind));
    rank(next);
  }

  population = std::move(next);
  ++state.generation;
  return state;
}

FetchCandidate select_fetch_candidate(const RunState& state, const VocabularyIndex& vocab,
                                      std::size_t limit) {
  std::vector<const Individual*> ranked;
  for (const auto& ind : state.population) {
    if (ind.fitness) ranked.push_back(&ind);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Individual* a, const Individual* b) { return ranks_before(*a, *b); });
  for (const auto* ind : ranked) {
    try {
      const auto text = serialize(decode(ind->genome, vocab.size()), vocab, limit);
      if (text.match_all) continue;
      return {ind->genome, text.text, ind->fitness->loss};
    } catch (const LengthExceeded&) {
    } catch (const PhraseIdOutOfRange&) {
    }
  }
  throw NoServiceableQuery();
}

namespace {

json loss_to_json(double loss) {
  if (std::isinf(loss)) return "inf";
  return loss;
}

double loss_from_json(const json& j) {
  if (j.is_string()) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

}  // namespace

json checkpoint_json(const RunState& state, const GaConfig& config, const Rng& rng,
                     const json& extra) {
  json population = json::array();
  for (const auto& ind : state.population) {
    json entry{{"genome", ind.genome.values}, {"injected", ind.injected}};
    if (ind.fitness) {
      entry["loss"] = loss_to_json(ind.fitness->loss);
      const auto& c = ind.fitness->counts;
      entry["counts"] = {c.tp, c.fp, c.tn, c.fn};
      entry["evaluated_against"] = ind.evaluated_against;
    }
    population.push_back(std::move(entry));
  }
  json pending = json::array();
  for (const auto& g : state.pending_injections) pending.push_back(g.values);

  json doc{{"format", "qevo-checkpoint"},
           {"version", kCheckpointVersion},
           {"generation", state.generation},
           {"status", to_string(state.status)},
           {"config", to_json(config)},
           {"rng", save_rng(rng)},
           {"population", std::move(population)},
           {"pending_injections", std::move(pending)}};
  for (const auto& [key, value] : extra.items()) doc[key] = value;
  return doc;
}

Checkpoint load_checkpoint(const json& j) {
  try {
    if (j.at("format") != "qevo-checkpoint") throw FormatError("not a qevo checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw FormatError("unsupported checkpoint version");
    }
    Checkpoint cp{RunState{}, ga_config_from_json(j.at("config")),
                  load_rng(j.at("rng").get<std::string>()), j};
    cp.state.generation = j.at("generation").get<std::uint64_t>();
    const auto status = parse_run_status(j.at("status").get<std::string>());
    if (!status) throw FormatError("bad status");
    cp.state.status = *status;
    for (const auto& entry : j.at("population")) {
      Individual ind;
      ind.genome.values = entry.at("genome").get<std::vector<std::int32_t>>();
      ind.injected = entry.value("injected", false);
      if (entry.contains("loss")) {
        const auto counts = entry.at("counts").get<std::vector<std::uint64_t>>();
        if (counts.size() != 4) throw FormatError("bad counts");
        ind.fitness = Fitness{loss_from_json(entry.at("loss")),
                              {counts[0], counts[1], counts[2], counts[3]}};
        ind.evaluated_against = entry.at("evaluated_against").get<std::uint64_t>();
      }
      cp.state.population.push_back(std::move(ind));
    }
    for (const auto& g : j.at("pending_injections")) {
      cp.state.pending_injections.emplace_back(g.get<std::vector<std::int32_t>>());
    }
    return cp;
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad checkpoint: ") + e.what());
  }
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace qevo
