#include <gtest/gtest.h>

#include <cmath>

#include "qevo/errors.hpp"
#include "qevo/operators.hpp"
#include "support.hpp"

using namespace qevo;
using qevo::testing::random_genome;
using qevo::testing::valid_genome;

namespace {

constexpr std::size_t kVocab = 40;

// Pearson statistic of observed counts against expected probabilities.
double chi_squared(const std::vector<std::size_t>& observed, const std::vector<double>& p,
                   std::size_t draws) {
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = p[i] * static_cast<double>(draws);
    stat += (static_cast<double>(observed[i]) - e) * (static_cast<double>(observed[i]) - e) / e;
  }
  return stat;
}

Genome long_genome(std::size_t n) {
  Genome g;
  for (std::size_t i = 0; i < n; ++i) g.values.push_back(static_cast<std::int32_t>(i) + 1);
  return g;
}

}  // namespace

TEST(OperatorNames, RoundTrip) {
  for (std::size_t i = 0; i < kOperatorCount; ++i) {
    const auto op = static_cast<Operator>(i);
    EXPECT_EQ(parse_operator(to_string(op)), op);
  }
  EXPECT_FALSE(parse_operator("mutate").has_value());
}

TEST(PhraseAdd, InsertsOnePositivePhrase) {
  const PhraseSampler sampler(10, 0.5);
  Rng rng(1);
  bool front = false;
  bool back = false;
  for (int i = 0; i < 200; ++i) {
    const auto out = mutate_phrase_add(Genome{7}, sampler, rng);
    ASSERT_EQ(out.size(), 2u);
    front = front || out.values[1] == 7;
    back = back || out.values[0] == 7;
    const auto added = out.values[1] == 7 ? out.values[0] : out.values[1];
    EXPECT_GE(added, 1);
    EXPECT_LE(added, 10);
  }
  EXPECT_TRUE(front && back);
  const auto out = mutate_phrase_add(Genome{}, sampler, rng);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_GE(out.values[0], 1);
}

TEST(PhraseAdd, EmptyVocabulary) {
  Rng rng(1);
  EXPECT_THROW(mutate_phrase_add(Genome{}, PhraseSampler(0, 0.5), rng), EmptyVocabulary);
}

TEST(PhraseSampler, UniformWhenGammaZero) {
  const std::size_t n = 50;
  const std::size_t draws = 100000;
  const PhraseSampler sampler(n, 0.0);
  Rng rng(2024);
  std::vector<std::size_t> counts(n);
  for (std::size_t i = 0; i < draws; ++i) ++counts[sampler.sample(rng)];
  // 49 degrees of freedom; 85.35 is the 0.999 quantile.
  EXPECT_LT(chi_squared(counts, std::vector<double>(n, 1.0 / n), draws), 85.35);
}

TEST(PhraseSampler, RankPowerLaw) {
  const std::size_t n = 20;
  const std::size_t draws = 100000;
  const PhraseSampler sampler(n, 0.5);
  std::vector<double> p(n);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) total += p[r] = 1.0 / std::sqrt(static_cast<double>(r + 1));
  for (auto& x : p) x /= total;
  Rng rng(7);
  std::vector<std::size_t> counts(n);
  for (std::size_t i = 0; i < draws; ++i) ++counts[sampler.sample(rng)];
  // 19 degrees of freedom; 43.82 is the 0.999 quantile.
  EXPECT_LT(chi_squared(counts, p, draws), 43.82);
}

TEST(ClauseAdd, Examples) {
  EXPECT_EQ(insert_at(Genome{5, 7}, 1, 0), (Genome{5, 0, 7}));
  EXPECT_EQ(insert_at(Genome{5}, 1, 0), (Genome{5, 0}));
  Rng rng(3);
  EXPECT_EQ(mutate_clause_add(Genome{}, rng), Genome{0});
  const auto split = decode(Genome{5, 0, 7});
  EXPECT_EQ(split.clauses.size(), 2u);
}

TEST(Swap, Examples) {
  Rng rng(4);
  EXPECT_EQ(mutate_swap(Genome{5, 7}, 1.5, rng), (Genome{7, 5}));
  EXPECT_EQ(swap_at(Genome{5, 0, 7}, 0, 1), (Genome{0, 5, 7}));
  EXPECT_TRUE(same_clauses(decode(swap_at(Genome{1, 2, 3, 0, 4}, 0, 2)), decode(Genome{1, 2, 3, 0, 4})));
  const auto moved = decode(Genome{0, 5, 7});
  ASSERT_EQ(moved.clauses.size(), 2u);
  EXPECT_TRUE(moved.clauses[0].empty());
  EXPECT_THROW(mutate_swap(Genome{5}, 1.5, rng), GenomeTooShort);
}

TEST(Swap, DistanceDistribution) {
  // P(distance = 1) = P(Exp(1.5) < 1) = 1 - exp(-2/3).
  Rng rng(8);
  const auto g = long_genome(200);
  int ones = 0;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    const auto out = mutate_swap(g, 1.5, rng);
    std::size_t first = 0;
    while (out.values[first] == g.values[first]) ++first;
    std::size_t last = g.size() - 1;
    while (out.values[last] == g.values[last]) --last;
    ones += last - first == 1;
  }
  EXPECT_NEAR(static_cast<double>(ones) / trials, 1.0 - std::exp(-2.0 / 3.0), 0.015);
}

TEST(Negate, Examples) {
  Rng rng(5);
  EXPECT_EQ(mutate_negate(Genome{5}, rng), Genome{-5});
  EXPECT_EQ(mutate_negate(Genome{-5}, rng), Genome{5});
  for (int i = 0; i < 100; ++i) {
    const auto out = mutate_negate(Genome{5, 0, 7}, rng);
    EXPECT_TRUE(out == (Genome{-5, 0, 7}) || out == (Genome{5, 0, -7}));
  }
  EXPECT_THROW(mutate_negate(Genome{0, 0}, rng), NoTerms);
  EXPECT_THROW(mutate_negate(Genome{}, rng), NoTerms);
}

TEST(Simplify, Examples) {
  EXPECT_EQ(mutate_simplify(Genome{5, 5, 0, 7}), (Genome{5, 0, 7}));
  EXPECT_EQ(mutate_simplify(Genome{5, 0, 5}), (Genome{5, 0, 5}));
  EXPECT_EQ(mutate_simplify(Genome{5, -5}), (Genome{5, -5}));
  EXPECT_EQ(mutate_simplify(Genome{3, 1, 3, 1, 0, 0, 2, 2}), (Genome{3, 1, 0, 0, 2}));
}

TEST(Crossover, Examples) {
  const Genome a{1, 2, 0, 3};
  const Genome b{4, 0, 5};
  EXPECT_EQ(crossover_at(a, b, 3, 2), (Genome{1, 2, 0, 5}));
  EXPECT_EQ(crossover_at(a, b, 0, 0), b);
  EXPECT_EQ(crossover_at(a, b, a.size(), b.size()), a);
}

TEST(Swatch, Examples) {
  const Genome donor{1, 0, 2, 0, 3};
  EXPECT_EQ(swatch_insert_at(donor, Genome{9}, 2, 4, 1), (Genome{9, 2, 0}));
  EXPECT_EQ(swatch_insert_at(donor, Genome{9}, 4, 2, 1), (Genome{9, 2, 0}));
  EXPECT_EQ(swatch_insert_at(donor, Genome{9, 8}, 3, 3, 1), (Genome{9, 8}));
  EXPECT_EQ(swatch_insert_at(donor, Genome{}, 1, 4, 0), (Genome{0, 2, 0}));
}

TEST(CutWeights, BoundaryBias) {
  EXPECT_EQ(cut_weights(Genome{1, 2, 0, 3, 4}, 4.0), (std::vector<double>{4, 1, 4, 4, 1, 4}));
  EXPECT_EQ(cut_weights(Genome{}, 4.0), (std::vector<double>{4}));
}

TEST(LengthCap, OperatorsReturnInputAtCap) {
  Rng rng(6);
  const PhraseSampler sampler(kVocab, 0.5);
  const auto full = long_genome(kMaxGenomeLength);
  EXPECT_EQ(mutate_phrase_add(full, sampler, rng), full);
  EXPECT_EQ(mutate_clause_add(full, rng), full);
  for (int i = 0; i < 50; ++i) {
    EXPECT_LE(crossover(full, full, 4.0, rng).size(), kMaxGenomeLength);
    EXPECT_LE(swatch_insert(full, full, 4.0, rng).size(), kMaxGenomeLength);
  }
}

TEST(Properties, RandomizedSuite) {
  const PhraseSampler sampler(kVocab, 0.5);
  Rng rng(99);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto g = random_genome(rng, kVocab, 40);
    const auto h = random_genome(rng, kVocab, 40);

    ASSERT_EQ(mutate_phrase_add(g, sampler, rng).size(), g.size() + 1);
    ASSERT_EQ(mutate_clause_add(g, rng).size(), g.size() + 1);
    if (g.size() >= 2) {
      const auto s = mutate_swap(g, 1.5, rng);
      ASSERT_EQ(s.size(), g.size());
      auto sorted_g = g.values;
      auto sorted_s = s.values;
      std::sort(sorted_g.begin(), sorted_g.end());
      std::sort(sorted_s.begin(), sorted_s.end());
      ASSERT_EQ(sorted_g, sorted_s);
    }

    // Swaps strictly inside one clause are silent.
    if (g.size() >= 2) {
      const auto i = uniform_below(rng, g.size());
      const auto j = uniform_below(rng, g.size());
      const auto lo = std::min(i, j);
      const auto hi = std::max(i, j);
      const bool same_segment =
          std::none_of(g.values.begin() + lo, g.values.begin() + hi + 1, [](auto v) { return v == 0; });
      if (same_segment) ASSERT_TRUE(same_clauses(decode(swap_at(g, i, j)), decode(g)));
    }

    if (std::any_of(g.values.begin(), g.values.end(), [](auto v) { return v != 0; })) {
      const auto n = mutate_negate(g, rng);
      ASSERT_EQ(n.size(), g.size());
      std::size_t pos = 0;
      while (n.values[pos] == g.values[pos]) ++pos;
      ASSERT_NE(g.values[pos], 0);
      ASSERT_EQ(negate_at(n, pos), g);
    }

    const auto simple = mutate_simplify(g);
    ASSERT_LE(simple.size(), g.size());
    ASSERT_EQ(mutate_simplify(simple), simple);
    ASSERT_EQ(decode(simple).clauses.size(), decode(g).clauses.size());

    const auto child = crossover(g, h, 4.0, rng);
    ASSERT_TRUE(valid_genome(child, kVocab));
    ASSERT_NO_THROW(decode(child, kVocab));
    const auto patch = swatch_insert(g, h, 4.0, rng);
    ASSERT_TRUE(valid_genome(patch, kVocab));
    ASSERT_GE(patch.size(), h.size());
  }
}
