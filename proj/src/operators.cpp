#include "qevo/operators.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "qevo/errors.hpp"

namespace qevo {

namespace {
constexpr std::array<std::string_view, kOperatorCount> kOperatorNames{
    "phrase_add", "clause_add", "swap", "negate", "simplify", "crossover", "swatch"};
}

std::string_view to_string(Operator op) { return kOperatorNames[static_cast<std::size_t>(op)]; }

std::optional<Operator> parse_operator(std::string_view name) {
  for (std::size_t i = 0; i < kOperatorCount; ++i) {
    if (kOperatorNames[i] == name) return static_cast<Operator>(i);
  }
  return std::nullopt;
}

PhraseSampler::PhraseSampler(std::size_t vocabulary_size, double gamma) : gamma_(gamma) {
  cumulative_.reserve(vocabulary_size);
  double total = 0.0;
  for (std::size_t rank = 0; rank < vocabulary_size; ++rank) {
    total += std::pow(static_cast<double>(rank + 1), -gamma);
    cumulative_.push_back(total);
  }
}

std::uint32_t PhraseSampler::sample(Rng& rng) const {
  if (cumulative_.empty()) throw EmptyVocabulary();
  return static_cast<std::uint32_t>(sample_cumulative(rng, cumulative_));
}

Genome insert_at(const Genome& g, std::size_t position, std::int32_t value) {
  Genome out = g;
  out.values.insert(out.values.begin() + static_cast<std::ptrdiff_t>(position), value);
  return out;
}

Genome swap_at(const Genome& g, std::size_t i, std::size_t j) {
  Genome out = g;
  std::swap(out.values.at(i), out.values.at(j));
  return out;
}

Genome negate_at(const Genome& g, std::size_t position) {
  Genome out = g;
  out.values.at(position) = -out.values.at(position);
  return out;
}

Genome crossover_at(const Genome& a, const Genome& b, std::size_t cut_a, std::size_t cut_b) {
  Genome child;
  child.values.reserve(cut_a + (b.size() - cut_b));
  child.values.insert(child.values.end(), a.values.begin(),
                      a.values.begin() + static_cast<std::ptrdiff_t>(cut_a));
  child.values.insert(child.values.end(), b.values.begin() + static_cast<std::ptrdiff_t>(cut_b),
                      b.values.end());
  return child;
}

Genome swatch_insert_at(const Genome& donor, const Genome& host, std::size_t cut1,
                        std::size_t cut2, std::size_t host_cut) {
  if (cut1 > cut2) std::swap(cut1, cut2);
  Genome child;
  child.values.reserve(host.size() + (cut2 - cut1));
  const auto h = host.values.begin() + static_cast<std::ptrdiff_t>(host_cut);
  child.values.insert(child.values.end(), host.values.begin(), h);
  child.values.insert(child.values.end(), donor.values.begin() + static_cast<std::ptrdiff_t>(cut1),
                      donor.values.begin() + static_cast<std::ptrdiff_t>(cut2));
  child.values.insert(child.values.end(), h, host.values.end());
  return child;
}

Genome mutate_phrase_add(const Genome& g, const PhraseSampler& sampler, Rng& rng) {
  const auto phrase = sampler.sample(rng);
  if (g.size() >= kMaxGenomeLength) return g;
  const auto position = uniform_below(rng, g.size() + 1);
  return insert_at(g, position, static_cast<std::int32_t>(phrase) + 1);
}

Genome mutate_clause_add(const Genome& g, Rng& rng) {
  if (g.size() >= kMaxGenomeLength) return g;
  return insert_at(g, uniform_below(rng, g.size() + 1), 0);
}

Genome mutate_swap(const Genome& g, double distance_mean, Rng& rng) {
  if (g.size() < 2) throw GenomeTooShort();
  const double raw = 1.0 + std::floor(exponential(rng, distance_mean));
  const auto distance = static_cast<std::size_t>(std::min(raw, static_cast<double>(g.size() - 1)));
  const auto i = uniform_below(rng, g.size() - distance);
  return swap_at(g, i, i + distance);
}

Genome mutate_negate(const Genome& g, Rng& rng) {
  std::vector<std::size_t> terms;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.values[i] != 0) terms.push_back(i);
  }
  if (terms.empty()) throw NoTerms();
  return negate_at(g, terms[uniform_below(rng, terms.size())]);
}

Genome mutate_simplify(const Genome& g) {
  Genome out;
  out.values.reserve(g.size());
  std::size_t clause_start = 0;
  for (auto v : g.values) {
    if (v == 0) {
      out.values.push_back(0);
      clause_start = out.size();
      continue;
    }
    const auto begin = out.values.begin() + static_cast<std::ptrdiff_t>(clause_start);
    if (std::find(begin, out.values.end(), v) == out.values.end()) out.values.push_back(v);
  }
  return out;
}

std::vector<double> cut_weights(const Genome& g, double boundary_weight) {
  std::vector<double> w(g.size() + 1, 1.0);
  for (std::size_t c = 0; c <= g.size(); ++c) {
    const bool end = c == 0 || c == g.size();
    const bool after_zero = c > 0 && g.values[c - 1] == 0;
    const bool before_zero = c < g.size() && g.values[c] == 0;
    if (end || after_zero || before_zero) w[c] = boundary_weight;
  }
  return w;
}

std::size_t sample_cut(const Genome& g, double boundary_weight, Rng& rng) {
  auto w = cut_weights(g, boundary_weight);
  for (std::size_t i = 1; i < w.size(); ++i) w[i] += w[i - 1];
  return sample_cumulative(rng, w);
}

Genome crossover(const Genome& a, const Genome& b, double boundary_weight, Rng& rng) {
  const auto cut_a = sample_cut(a, boundary_weight, rng);
  const auto cut_b = sample_cut(b, boundary_weight, rng);
  if (cut_a + (b.size() - cut_b) > kMaxGenomeLength) return a;
  return crossover_at(a, b, cut_a, cut_b);
}

Genome swatch_insert(const Genome& donor, const Genome& host, double boundary_weight, Rng& rng) {
  const auto cut1 = sample_cut(donor, boundary_weight, rng);
  const auto cut2 = sample_cut(donor, boundary_weight, rng);
  const auto host_cut = sample_cut(host, boundary_weight, rng);
  const auto span = cut1 > cut2 ? cut1 - cut2 : cut2 - cut1;
  if (host.size() + span > kMaxGenomeLength) return host;
  return swatch_insert_at(donor, host, cut1, cut2, host_cut);
}

}  // namespace qevo
