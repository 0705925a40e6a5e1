#include <gtest/gtest.h>

#include "qevo/text.hpp"
#include "support.hpp"

using namespace qevo;
using Tokens = std::vector<std::string>;

TEST(Tokenize, HighwayNamesKeepInternalHyphen) {
  EXPECT_EQ(tokenize("Crash on I-264 at exit 103"),
            (Tokens{"crash", "on", "i-264", "at", "exit", "103"}));
}

TEST(Tokenize, EmptyInput) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, HashtagSurvives) {
  EXPECT_EQ(tokenize("#accident on bardstown"), (Tokens{"#accident", "on", "bardstown"}));
}

TEST(Tokenize, PunctuationStripped) {
  EXPECT_EQ(tokenize("Wreck!! near @LMPD, (exit 12)."),
            (Tokens{"wreck", "near", "@lmpd", "exit", "12"}));
  EXPECT_EQ(tokenize("-- ... ## @"), Tokens{});
  EXPECT_EQ(tokenize("-i-264- a--b"), (Tokens{"i-264", "a-b"}));
  EXPECT_EQ(tokenize("a#b"), Tokens{"ab"});
}

TEST(Tokenize, NonAsciiBytesKept) {
  EXPECT_EQ(tokenize("Café  NAÏVE"), (Tokens{"café", "naÏve"}));
}

TEST(Tokenize, IdempotentOnRandomText) {
  const std::string alphabet = "aZ9 #@-.,!\t\xc3\xa9";
  Rng rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    const auto len = uniform_below(rng, 40);
    for (std::size_t i = 0; i < len; ++i) text.push_back(alphabet[uniform_below(rng, alphabet.size())]);
    const auto first = tokenize(text);
    std::string joined;
    for (const auto& t : first) {
      ASSERT_FALSE(t.empty());
      ASSERT_EQ(t.find_first_of(" \t"), std::string::npos);
      joined += t + " ";
    }
    ASSERT_EQ(tokenize(joined), first) << text;
  }
}

TEST(Ngrams, ThreeTokens) {
  const Tokens t{"a", "b", "c"};
  std::set<std::string> keys;
  for (const auto& p : extract_ngrams(t)) keys.insert(p.key());
  EXPECT_EQ(keys, (std::set<std::string>{"a", "b", "c", "a b", "b c", "a b c"}));
  EXPECT_EQ(extract_ngram_keys(t), keys);
}

TEST(Ngrams, SingleAndEmpty) {
  EXPECT_EQ(extract_ngrams(Tokens{"a"}).size(), 1u);
  EXPECT_TRUE(extract_ngrams(Tokens{}).empty());
}

TEST(Ngrams, CountMatchesWindowFormula) {
  // Distinct tokens: k tokens give k + (k-1) + (k-2) windows.
  for (std::size_t k = 3; k < 12; ++k) {
    Tokens t;
    for (std::size_t i = 0; i < k; ++i) t.push_back("t" + std::to_string(i));
    EXPECT_EQ(extract_ngrams(t).size(), 3 * k - 3);
  }
}

TEST(Phrase, KeyRoundTrip) {
  const Tokens t{"exit", "103"};
  const Phrase p(t);
  EXPECT_EQ(p.key(), "exit 103");
  EXPECT_EQ(p.token_count(), 2u);
  EXPECT_EQ(Phrase::from_key("exit 103"), p);
  EXPECT_EQ(p.tokens(), t);
}

TEST(Phrase, RejectsBadShapes) {
  EXPECT_THROW(Phrase(Tokens{}), std::invalid_argument);
  EXPECT_THROW(Phrase(Tokens{"a", "b", "c", "d"}), std::invalid_argument);
  EXPECT_THROW(Phrase(Tokens{"a b"}), std::invalid_argument);
  EXPECT_THROW(Phrase(Tokens{""}), std::invalid_argument);
}
