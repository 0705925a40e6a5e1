#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "qevo/query.hpp"
#include "qevo/rng.hpp"

namespace qevo {

/// Operators that would grow a genome past this return their input unchanged.
inline constexpr std::size_t kMaxGenomeLength = 256;

enum class Operator { phrase_add, clause_add, swap, negate, simplify, crossover, swatch };
inline constexpr std::size_t kOperatorCount = 7;

std::string_view to_string(Operator op);
std::optional<Operator> parse_operator(std::string_view name);

/// Draws phrase ids with probability proportional to (id + 1)^-gamma, so
/// frequent (low id) phrases are favoured; gamma = 0 is uniform.
class PhraseSampler {
 public:
  PhraseSampler() = default;
  PhraseSampler(std::size_t vocabulary_size, double gamma);

  std::size_t vocabulary_size() const noexcept { return cumulative_.size(); }
  double gamma() const noexcept { return gamma_; }
  /// Throws EmptyVocabulary.
  std::uint32_t sample(Rng& rng) const;

 private:
  std::vector<double> cumulative_;
  double gamma_ = 0.0;
};

// Deterministic forms, used by the randomized operators and by tests.
Genome insert_at(const Genome& g, std::size_t position, std::int32_t value);
Genome swap_at(const Genome& g, std::size_t i, std::size_t j);
Genome negate_at(const Genome& g, std::size_t position);
Genome crossover_at(const Genome& a, const Genome& b, std::size_t cut_a, std::size_t cut_b);
Genome swatch_insert_at(const Genome& donor, const Genome& host, std::size_t cut1,
                        std::size_t cut2, std::size_t host_cut);

/// Phrase+: inserts a sampled positive phrase at a uniform position.
Genome mutate_phrase_add(const Genome& g, const PhraseSampler& sampler, Rng& rng);
/// Clause+: inserts a separator at a uniform position.
Genome mutate_clause_add(const Genome& g, Rng& rng);
/// Swap: transposes two elements 1 + floor(Exp(mean)) apart (clamped).
/// Throws GenomeTooShort.
Genome mutate_swap(const Genome& g, double distance_mean, Rng& rng);
/// Negate: flips the sign of one uniformly chosen phrase term. Throws NoTerms.
Genome mutate_negate(const Genome& g, Rng& rng);
/// Simplify: drops repeated identical values within each clause, keeping the first.
Genome mutate_simplify(const Genome& g);

/// Cut positions run from 0 (before the first element) to size() (after the
/// last). A position weighs `boundary_weight` when it is an end or touches a
/// separator, 1 otherwise.
std::vector<double> cut_weights(const Genome& g, double boundary_weight);
std::size_t sample_cut(const Genome& g, double boundary_weight, Rng& rng);

/// Prefix of a up to one cut, then suffix of b from another.
Genome crossover(const Genome& a, const Genome& b, double boundary_weight, Rng& rng);
/// Two cuts in donor pick a segment that is spliced into host at one cut.
Genome swatch_insert(const Genome& donor, const Genome& host, double boundary_weight, Rng& rng);

}  // namespace qevo
