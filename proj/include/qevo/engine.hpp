#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qevo/corpus.hpp"
#include "qevo/evaluator.hpp"
#include "qevo/operators.hpp"
#include "qevo/query.hpp"
#include "qevo/rng.hpp"

namespace qevo {

struct GaConfig {
  std::size_t population_size = 200;
  /// Indexed by Operator. Mutations apply independently after recombination;
  /// crossover is tried first, then swatch insertion.
  std::array<double, kOperatorCount> operator_rates{
      0.35,  // phrase_add
      0.10,  // clause_add
      0.20,  // swap
      0.30,  // negate
      0.50,  // simplify
      0.50,  // crossover
      0.15,  // swatch
  };
  std::size_t tournament_size = 3;
  std::size_t elitism = 2;
  std::size_t fetch_every = 25;
  double swap_distance_mean = 1.5;
  double phrase_sample_gamma = 0.5;
  double boundary_weight = 4.0;
  std::uint64_t rng_seed = 1;
  unsigned threads = 1;

  double rate(Operator op) const { return operator_rates[static_cast<std::size_t>(op)]; }
  double& rate(Operator op) { return operator_rates[static_cast<std::size_t>(op)]; }
  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

nlohmann::json to_json(const GaConfig& config);
GaConfig ga_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LossParams& params);
LossParams loss_params_from_json(const nlohmann::json& j);

struct Fitness {
  double loss = 0.0;
  ConfusionCounts counts;
};

struct Individual {
  Genome genome;
  std::optional<Fitness> fitness;
  std::uint64_t evaluated_against = 0;  // data version the cached fitness belongs to
  bool injected = false;

  bool fresh(std::uint64_t version) const noexcept {
    return fitness.has_value() && evaluated_against == version;
  }
};

enum class RunStatus { running, paused, stopped };
std::string_view to_string(RunStatus status);
std::optional<RunStatus> parse_run_status(std::string_view text);

struct RunState {
  std::uint64_t generation = 0;
  std::vector<Individual> population;
  RunStatus status = RunStatus::running;
  std::deque<Genome> pending_injections;
};

/// What the engine needs from the outside world: a pure fitness function
/// over one data version, and a phrase sampler over that version's vocabulary.
struct Objective {
  std::function<Fitness(const Genome&)> evaluate;
  std::uint64_t version = 0;
  std::shared_ptr<const PhraseSampler> sampler;
};

/// Orders by loss, then genome length, then lexicographic genome.
bool ranks_before(const Individual& a, const Individual& b);

/// Evaluates every individual whose cached fitness is missing or stale.
/// Evaluations may run on `threads` workers; results do not depend on it.
void evaluate_population(std::vector<Individual>& population, const Objective& objective,
                         unsigned threads);

/// One generation: elites copied, the rest bred by tournament selection,
/// recombination and the mutation pipeline; then pending injections replace
/// the worst offspring. Returns an evaluated population in rank order.
RunState step_generation(RunState state, const Objective& objective, const GaConfig& config,
                         Rng& rng);

struct FetchCandidate {
  Genome genome;
  std::string query;
  double loss = 0.0;
};

/// Lowest-loss genome whose serialized query is non-empty and fits in limit.
/// Throws NoServiceableQuery.
FetchCandidate select_fetch_candidate(const RunState& state, const VocabularyIndex& vocab,
                                      std::size_t limit = 1024);

inline constexpr int kCheckpointVersion = 1;

/// Versioned JSON checkpoint. `extra` is merged in at top level.
nlohmann::json checkpoint_json(const RunState& state, const GaConfig& config, const Rng& rng,
                               const nlohmann::json& extra = nlohmann::json::object());

struct Checkpoint {
  RunState state;
  GaConfig config;
  Rng rng;
  nlohmann::json document;
};
Checkpoint load_checkpoint(const nlohmann::json& j);

/// Writes to a temporary sibling then renames over the target.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace qevo
